//! Evaluation metrics: standardized reward difference, value difference and
//! reverse-transfer deltas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::envs::{TaskInstance, PLANNING_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::mdp::{policy_return, value_iteration, RewardParams};

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub trial: usize,
    pub checkpoint: usize,
    pub task_id: usize,
    pub task_order_index: usize,
    pub method: String,
    pub reward_diff: f64,
    pub value_diff: f64,
    pub train_time_s: f64,
}

fn standardize(v: &[f64]) -> (Vec<f64>, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    // Relative guard so round-off on a constant vector does not blow up.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sd <= 1e-12 * scale.max(1e-300) {
        return (vec![0.0; v.len()], 0.0);
    }
    (v.iter().map(|x| (x - mean) / sd).collect(), sd)
}

/// `‖z(learned) − z(truth)‖₂` with population standard deviations.
pub fn reward_difference(learned: &[f64], truth: &[f64]) -> Result<f64> {
    if learned.len() != truth.len() || truth.len() < 2 {
        return Err(invalid("reward vectors must have equal length of at least 2"));
    }
    if learned.iter().chain(truth).any(|x| !x.is_finite()) {
        return Err(invalid("reward vectors must be finite"));
    }
    let (zt, sd) = standardize(truth);
    if sd == 0.0 {
        return Err(Error::Degenerate("true reward is constant over states".into()));
    }
    let (zl, _) = standardize(learned);
    Ok(zl.iter().zip(&zt).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

/// Return gap, under the true reward, between the policy optimal for the
/// truth and the policy optimal for the learned reward.
pub fn value_difference(task: &TaskInstance, learned: &RewardParams, horizon: usize) -> Result<f64> {
    let mdp = &task.mdp;
    let learned_reward = mdp.state_rewards(learned)?;
    let (_, pi_true) = value_iteration(mdp, &task.true_reward, PLANNING_TOLERANCE)?;
    let (_, pi_learned) = value_iteration(mdp, &learned_reward, PLANNING_TOLERANCE)?;
    Ok(policy_return(mdp, &pi_true, &task.true_reward, horizon)? - policy_return(mdp, &pi_learned, &task.true_reward, horizon)?)
}

/// `first_seen[t] − final[t]` for each task, in the order given. Positive
/// values mean the task improved after later learning.
pub fn reverse_transfer(first_seen: &BTreeMap<usize, f64>, final_: &BTreeMap<usize, f64>, order: &[usize]) -> Result<Vec<(usize, f64)>> {
    if first_seen.len() != final_.len() || first_seen.keys().any(|k| !final_.contains_key(k)) {
        return Err(invalid("first-seen and final task sets differ"));
    }
    if order.len() != first_seen.len() || order.iter().any(|t| !first_seen.contains_key(t)) {
        return Err(invalid("task order does not cover the measured tasks"));
    }
    Ok(order.iter().map(|t| (*t, first_seen[t] - final_[t])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{generate_highway_task, HighwayConfig};
    use crate::mdp::TabularMdp;
    use crate::envs::GeneratorSpec;
    use crate::seed::Seed;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identical_is_zero() {
        let t = [1.0, 4.0, -2.0, 0.5];
        assert_eq!(reward_difference(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn reversed_hand_computed() {
        // z([1,2,3]) = [-a, 0, a] with a = sqrt(3/2); the difference is [-2a, 0, 2a].
        let a = (1.5f64).sqrt();
        let expect = (8.0 * a * a).sqrt();
        assert_abs_diff_eq!(reward_difference(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn constant_truth_is_degenerate() {
        assert!(matches!(reward_difference(&[1.0, 2.0], &[3.0, 3.0]), Err(Error::Degenerate(_))));
        assert!(reward_difference(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn constant_learned_standardizes_to_zero() {
        let truth = [1.0, 2.0, 3.0, 4.0];
        // ‖z(truth)‖ = sqrt(n).
        assert_abs_diff_eq!(reward_difference(&[7.0; 4], &truth).unwrap(), 2.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn affine_invariant_and_symmetric(v in prop::collection::vec(-5.0f64..5.0, 3..12), w in prop::collection::vec(-5.0f64..5.0, 3..12), a in 0.1f64..10.0, b in -10.0f64..10.0) {
            let n = v.len().min(w.len());
            let (v, w) = (&v[..n], &w[..n]);
            let spread = |x: &[f64]| x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread(v) > 1e-3 && spread(w) > 1e-3);
            let base = reward_difference(v, w).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            prop_assert!((reward_difference(&scaled, w).unwrap() - base).abs() < 1e-8);
            prop_assert!((reward_difference(w, v).unwrap() - base).abs() < 1e-9);
            prop_assert!(base >= 0.0);
        }
    }

    fn line_task(true_reward: Vec<f64>) -> TaskInstance {
        // Four cells in a row, actions left/right, deterministic; one-hot features.
        let n = 4;
        let mut t = vec![0.0; n * 2 * n];
        for s in 0..n {
            t[(s * 2) * n + s.saturating_sub(1)] = 1.0;
            t[(s * 2 + 1) * n + (s + 1).min(n - 1)] = 1.0;
        }
        let mut x = vec![0.0; n * n];
        for s in 0..n {
            x[s * n + s] = 1.0;
        }
        let mdp = TabularMdp::new(n, 2, t, x, n, 0.9, vec![0.25; 4]).unwrap();
        let hw = HighwayConfig::default();
        TaskInstance {
            mdp,
            true_reward,
            true_theta: None,
            spec: GeneratorSpec::Highway { config: hw, preferences: crate::envs::highway::draw_preferences(&hw, Seed(0)) },
            instance_seed: Seed(0),
        }
    }

    #[test]
    fn sign_flipped_reward_gap_matches_hand_computation() {
        let task = line_task(vec![0.0, 0.0, 0.0, 1.0]);
        let flipped = RewardParams::new(vec![0.0, 0.0, 0.0, -1.0]).unwrap();
        // Three steps under the right-moving optimal policy, by start state:
        // s0 never reaches 3; s1 arrives at t=2; s2 at t=1; s3 stays.
        let opt = (0.0 + 0.81 + 1.71 + 2.71) / 4.0;
        // The flipped policy moves left everywhere: only s3 collects 1 at t=0.
        let bad = 1.0 / 4.0;
        let gap = value_difference(&task, &flipped, 2).unwrap();
        assert_abs_diff_eq!(gap, opt - bad, epsilon = 1e-9);
        let exact = RewardParams::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(value_difference(&task, &exact, 2).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn highway_truth_has_zero_value_gap() {
        let config = HighwayConfig { road_length: 12, ..HighwayConfig::default() };
        let task = generate_highway_task(&config, Seed(5)).unwrap();
        let theta = task.true_theta.clone().unwrap();
        assert_abs_diff_eq!(value_difference(&task, &theta, 16).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn value_gap_nonnegative_for_random_rewards() {
        let task = line_task(vec![0.3, -1.0, 2.0, 0.5]);
        for i in 0..20 {
            let theta = crate::elirl::test_support::random_vec(4, 2.0, Seed(i));
            let gap = value_difference(&task, &RewardParams::new(theta).unwrap(), 16).unwrap();
            assert!(gap >= -1e-9);
        }
    }

    #[test]
    fn reverse_transfer_cases() {
        let first: BTreeMap<usize, f64> = [(0, 1.0), (1, 2.0), (2, 0.5)].into();
        let same = reverse_transfer(&first, &first, &[2, 0, 1]).unwrap();
        assert_eq!(same, vec![(2, 0.0), (0, 0.0), (1, 0.0)]);
        let lower: BTreeMap<usize, f64> = first.iter().map(|(k, v)| (*k, v - 0.1)).collect();
        for (_, d) in reverse_transfer(&first, &lower, &[0, 1, 2]).unwrap() {
            assert_abs_diff_eq!(d, 0.1, epsilon = 1e-12);
        }
        let missing: BTreeMap<usize, f64> = [(0, 1.0), (1, 2.0)].into();
        assert!(reverse_transfer(&first, &missing, &[0, 1]).is_err());
    }
}

//! Finite MDPs: representation, exact planning, simulation and feature counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed::Seed;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A finite MDP without its reward: states, actions, a dense transition
/// tensor, per-state feature vectors, a discount and a start distribution.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    /// Indexed `(s * num_actions + a) * num_states + s'`.
    transition: Vec<f64>,
    /// Nonzero entries of every `(s, a)` row, in ascending `s'` order.
    successors: Vec<Vec<(usize, f64)>>,
    /// Indexed `s * feature_dim + j`.
    features: Vec<f64>,
    feature_dim: usize,
    discount: f64,
    start: Vec<f64>,
}

impl TabularMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        features: Vec<f64>,
        feature_dim: usize,
        discount: f64,
        start: Vec<f64>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(invalid("an MDP needs at least one state and one action"));
        }
        if transition.len() != num_states * num_actions * num_states {
            return Err(invalid(format!(
                "transition tensor has {} entries, expected {}",
                transition.len(),
                num_states * num_actions * num_states
            )));
        }
        if feature_dim == 0 || features.len() != num_states * feature_dim {
            return Err(invalid(format!(
                "feature matrix has {} entries, expected {} states x {} features",
                features.len(),
                num_states,
                feature_dim
            )));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(invalid(format!("discount {discount} outside [0, 1)")));
        }
        if start.len() != num_states {
            return Err(invalid("start distribution length differs from state count"));
        }
        check_distribution(&start).map_err(|e| invalid(format!("start distribution: {e}")))?;
        if features.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite feature entry"));
        }

        let mut successors = Vec::with_capacity(num_states * num_actions);
        for (row_index, row) in transition.chunks_exact(num_states).enumerate() {
            check_distribution(row).map_err(|e| {
                invalid(format!(
                    "transition row (state {}, action {}): {e}",
                    row_index / num_actions,
                    row_index % num_actions
                ))
            })?;
            successors.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(s, &p)| (s, p))
                    .collect(),
            );
        }

        Ok(Self {
            num_states,
            num_actions,
            transition,
            successors,
            features,
            feature_dim,
            discount,
            start,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn start_distribution(&self) -> &[f64] {
        &self.start
    }

    pub fn transition(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transition[(state * self.num_actions + action) * self.num_states + next]
    }

    /// `(next_state, probability)` pairs with nonzero probability.
    pub fn successors(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.successors[state * self.num_actions + action]
    }

    pub fn features_of(&self, state: usize) -> &[f64] {
        &self.features[state * self.feature_dim..(state + 1) * self.feature_dim]
    }

    /// Row-major `num_states x feature_dim` feature matrix.
    pub fn feature_matrix(&self) -> &[f64] {
        &self.features
    }

    /// Same MDP with a different discount factor.
    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(invalid(format!("discount {discount} outside [0, 1)")));
        }
        Ok(Self { discount, ..self.clone() })
    }

    /// Same dynamics with a different feature matrix.
    pub fn with_features(&self, features: Vec<f64>, feature_dim: usize) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            self.transition.clone(),
            features,
            feature_dim,
            self.discount,
            self.start.clone(),
        )
    }

    /// Per-state rewards `x_s . theta`.
    pub fn state_rewards(&self, theta: &RewardParams) -> Result<Vec<f64>> {
        if theta.dim() != self.feature_dim {
            return Err(invalid(format!(
                "reward parameters have dimension {}, MDP features have {}",
                theta.dim(),
                self.feature_dim
            )));
        }
        Ok(self
            .features
            .chunks_exact(self.feature_dim)
            .map(|x| dot(x, theta.as_slice()))
            .collect())
    }

    /// `sum_s weights[s] * x_s`.
    pub fn weighted_features(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_dim];
        for (w, x) in weights.iter().zip(self.features.chunks_exact(self.feature_dim)) {
            if *w != 0.0 {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += w * xi;
                }
            }
        }
        out
    }

    /// Expected value of `values` at the successor of `(state, action)`.
    pub fn expected_next(&self, state: usize, action: usize, values: &[f64]) -> f64 {
        self.successors(state, action)
            .iter()
            .map(|&(s, p)| p * values[s])
            .sum()
    }

    fn check_rewards(&self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.num_states {
            return Err(invalid(format!(
                "reward vector has length {}, MDP has {} states",
                rewards.len(),
                self.num_states
            )));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(invalid("non-finite reward entry"));
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err("negative or non-finite probability".into());
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(format!("probabilities sum to {total}"));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear reward weights: `r_s = theta . x_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RewardParams(Vec<f64>);

impl RewardParams {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(invalid("reward parameters contain NaN or Inf"));
        }
        Ok(Self(theta))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for RewardParams {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        RewardParams::new(v)
    }
}

impl From<RewardParams> for Vec<f64> {
    fn from(r: RewardParams) -> Self {
        r.0
    }
}

/// Stationary stochastic policy, row-major `(state, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl Policy {
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != num_states * num_actions || num_actions == 0 {
            return Err(invalid("policy table has the wrong shape"));
        }
        for (s, row) in probs.chunks_exact(num_actions).enumerate() {
            check_distribution(row).map_err(|e| invalid(format!("policy row {s}: {e}")))?;
        }
        Ok(Self { num_states, num_actions, probs })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_states * num_actions],
        }
    }

    /// Deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(num_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(invalid(format!("action {a} out of range in state {s}")));
            }
            probs[s * num_actions + a] = 1.0;
        }
        Ok(Self { num_states: actions.len(), num_actions, probs })
    }

    pub(crate) fn from_rows_unchecked(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Self {
        Self { num_states, num_actions, probs }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state * self.num_actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.num_actions..(state + 1) * self.num_actions]
    }

    /// Most probable action in every state, lowest index on ties.
    pub fn argmax_actions(&self) -> Vec<usize> {
        self.probs
            .chunks_exact(self.num_actions)
            .map(|row| argmax(row))
            .collect()
    }

    fn check_mdp(&self, mdp: &TabularMdp) -> Result<()> {
        if self.num_states != mdp.num_states || self.num_actions != mdp.num_actions {
            return Err(invalid("policy shape does not match the MDP"));
        }
        Ok(())
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// A state-action sequence `(s_0, a_0), ..., (s_H, a_H)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    steps: Vec<(usize, usize)>,
}

impl Trajectory {
    pub fn new(steps: Vec<(usize, usize)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(invalid("a trajectory needs at least one step"));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn start_state(&self) -> usize {
        self.steps[0].0
    }

    pub fn validate_for(&self, mdp: &TabularMdp) -> Result<()> {
        for &(s, a) in &self.steps {
            if s >= mdp.num_states || a >= mdp.num_actions {
                return Err(invalid(format!("trajectory step ({s}, {a}) outside MDP bounds")));
            }
        }
        Ok(())
    }
}

/// Optimal values and greedy policy from infinite-horizon discounted value
/// iteration: `V(s) = r(s) + gamma * max_a E[V(s')]`.
pub fn value_iteration(mdp: &TabularMdp, rewards: &[f64], tolerance: f64) -> Result<(Vec<f64>, Policy)> {
    value_iteration_from(mdp, rewards, tolerance, &vec![0.0; mdp.num_states])
}

/// [`value_iteration`] starting from caller-supplied initial values.
pub fn value_iteration_from(
    mdp: &TabularMdp,
    rewards: &[f64],
    tolerance: f64,
    initial: &[f64],
) -> Result<(Vec<f64>, Policy)> {
    mdp.check_rewards(rewards)?;
    if !(tolerance > 0.0) {
        return Err(invalid("value iteration tolerance must be positive"));
    }
    if initial.len() != mdp.num_states || initial.iter().any(|v| !v.is_finite()) {
        return Err(invalid("initial values must be finite and one per state"));
    }
    const MAX_SWEEPS: usize = 1_000_000;
    let gamma = mdp.discount;
    let mut values = initial.to_vec();
    let mut next = vec![0.0; mdp.num_states];
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        for s in 0..mdp.num_states {
            let best = (0..mdp.num_actions)
                .map(|a| mdp.expected_next(s, a, &values))
                .fold(f64::NEG_INFINITY, f64::max);
            next[s] = rewards[s] + gamma * best;
            delta = delta.max((next[s] - values[s]).abs());
        }
        std::mem::swap(&mut values, &mut next);
        // The residual of the new iterate is at most gamma * delta.
        if delta < tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("value iteration did not converge".into()));
    }
    let actions: Vec<usize> = (0..mdp.num_states)
        .map(|s| {
            let mut best_a = 0;
            let mut best_q = mdp.expected_next(s, 0, &values);
            for a in 1..mdp.num_actions {
                let q = mdp.expected_next(s, a, &values);
                if q > best_q + 1e-12 * best_q.abs().max(1.0) {
                    best_a = a;
                    best_q = q;
                }
            }
            best_a
        })
        .collect();
    let policy = Policy::deterministic(mdp.num_actions, &actions)?;
    Ok((values, policy))
}

/// Exact `E_pi[sum_{i=0..horizon} gamma^i r(s_i)]` by forward propagation
/// of the state distribution from the start distribution.
pub fn policy_return(mdp: &TabularMdp, policy: &Policy, rewards: &[f64], horizon: usize) -> Result<f64> {
    mdp.check_rewards(rewards)?;
    policy.check_mdp(mdp)?;
    let mut dist = mdp.start.clone();
    let mut total = 0.0;
    let mut weight = 1.0;
    for i in 0..=horizon {
        total += weight * dot(&dist, rewards);
        if i == horizon {
            break;
        }
        dist = propagate(mdp, policy, &dist);
        weight *= mdp.discount;
    }
    Ok(total)
}

/// One step of the state distribution under `policy`.
pub fn propagate(mdp: &TabularMdp, policy: &Policy, dist: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mdp.num_states];
    for (s, &p) in dist.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for a in 0..mdp.num_actions {
            let pa = p * policy.prob(s, a);
            if pa == 0.0 {
                continue;
            }
            for &(next, t) in mdp.successors(s, a) {
                out[next] += pa * t;
            }
        }
    }
    out
}

/// Draw an index from a discrete distribution given a uniform draw `u`.
pub(crate) fn pick<I: IntoIterator<Item = (usize, f64)>>(items: I, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in items {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Sample a trajectory of `horizon + 1` steps; identical seeds give
/// identical trajectories.
pub fn sample_trajectory(mdp: &TabularMdp, policy: &Policy, horizon: usize, seed: Seed) -> Result<Trajectory> {
    policy.check_mdp(mdp)?;
    let mut rng = seed.rng();
    Ok(sample_trajectory_with(mdp, policy, horizon, &mut rng))
}

pub(crate) fn sample_trajectory_with<R: Rng>(
    mdp: &TabularMdp,
    policy: &Policy,
    horizon: usize,
    rng: &mut R,
) -> Trajectory {
    let mut steps = Vec::with_capacity(horizon + 1);
    let mut state = pick(mdp.start.iter().copied().enumerate(), rng.random());
    for i in 0..=horizon {
        let action = pick(policy.row(state).iter().copied().enumerate(), rng.random());
        steps.push((state, action));
        if i < horizon {
            state = pick(mdp.successors(state, action).iter().copied(), rng.random());
        }
    }
    Trajectory { steps }
}

/// Discounted feature count `sum_i gamma^i x_{s_i}`; actions are ignored.
pub fn feature_count(trajectory: &Trajectory, mdp: &TabularMdp) -> Vec<f64> {
    let mut out = vec![0.0; mdp.feature_dim];
    let mut weight = 1.0;
    for &(s, _) in &trajectory.steps {
        for (o, x) in out.iter_mut().zip(mdp.features_of(s)) {
            *o += weight * x;
        }
        weight *= mdp.discount;
    }
    out
}


#[cfg(test)]
mod tests {
    use super::test_mdps::*;
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn single_state_value_is_geometric_series() {
        let mdp = single_state(0.9);
        let (v, _) = value_iteration(&mdp, &[1.0], 1e-10).unwrap();
        assert_abs_diff_eq!(v[0], 10.0, epsilon = 1e-8);
    }

    #[test]
    fn zero_reward_gives_zero_values() {
        let mdp = two_state_stochastic();
        let (v, _) = value_iteration(&mdp, &[0.0, 0.0], 1e-10).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn chain_values_match_linear_system() {
        // Oracle: solve (I - gamma P) V = r for the single-action chain.
        let mdp = chain3(0.9);
        let r = [0.0, 0.0, 1.0];
        let mut p = DMatrix::<f64>::zeros(3, 3);
        for s in 0..3 {
            for next in 0..3 {
                p[(s, next)] = mdp.transition(s, 0, next);
            }
        }
        let a = DMatrix::<f64>::identity(3, 3) - p * 0.9;
        let exact = a.lu().solve(&DVector::from_column_slice(&r)).unwrap();
        let (v, _) = value_iteration(&mdp, &r, 1e-12).unwrap();
        for s in 0..3 {
            assert_abs_diff_eq!(v[s], exact[s], epsilon = 1e-9);
        }
        assert_abs_diff_eq!(v[2], 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1], 9.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[0], 8.1, epsilon = 1e-9);
    }

    #[test]
    fn non_finite_reward_rejected() {
        let mdp = single_state(0.5);
        assert!(matches!(value_iteration(&mdp, &[f64::NAN], 1e-6), Err(Error::InvalidInput(_))));
        assert!(value_iteration(&mdp, &[1.0], 0.0).is_err());
    }

    #[test]
    fn different_initialisations_agree() {
        let mdp = two_state_stochastic();
        let r = [1.0, -0.5];
        let tol = 1e-9;
        let (a, _) = value_iteration_from(&mdp, &r, tol, &[0.0, 0.0]).unwrap();
        let (b, _) = value_iteration_from(&mdp, &r, tol, &[100.0, -50.0]).unwrap();
        for s in 0..2 {
            // Each iterate is within gamma/(1-gamma) * tol of the fixed point.
            assert!((a[s] - b[s]).abs() <= 2.0 * tol * 0.9 / 0.1);
        }
    }

    #[test]
    fn greedy_ties_break_to_lowest_action() {
        let t = vec![1.0, 1.0];
        let mdp = TabularMdp::new(1, 2, t, vec![1.0], 1, 0.9, vec![1.0]).unwrap();
        let (_, pi) = value_iteration(&mdp, &[1.0], 1e-9).unwrap();
        assert_eq!(pi.argmax_actions(), vec![0]);
    }

    #[test]
    fn single_state_return_direct_sum() {
        let mdp = single_state(0.9);
        let pi = Policy::uniform(1, 1);
        let ret = policy_return(&mdp, &pi, &[1.0], 2).unwrap();
        assert_abs_diff_eq!(ret, 2.71, epsilon = 1e-12);
        assert_eq!(policy_return(&mdp, &pi, &[0.0], 5).unwrap(), 0.0);
    }

    #[test]
    fn policy_return_matches_monte_carlo() {
        let mdp = two_state_stochastic();
        let pi = Policy::new(2, 2, vec![0.3, 0.7, 0.6, 0.4]).unwrap();
        let r = [1.0, -2.0];
        let horizon = 6;
        let exact = policy_return(&mdp, &pi, &r, horizon).unwrap();
        let n = 100_000;
        let mut rng = Seed(5).rng();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let traj = sample_trajectory_with(&mdp, &pi, horizon, &mut rng);
            let g: f64 = traj
                .steps()
                .iter()
                .enumerate()
                .map(|(i, &(s, _))| 0.9f64.powi(i as i32) * r[s])
                .sum();
            sum += g;
            sum_sq += g * g;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "mc {mean} exact {exact} se {se}");
    }

    #[test]
    fn optimal_policy_dominates() {
        let mdp = two_state_stochastic();
        let r = [1.0, -0.5];
        let (_, opt) = value_iteration(&mdp, &r, 1e-12).unwrap();
        let horizon = 40;
        let best = policy_return(&mdp, &opt, &r, horizon).unwrap();
        let slack = 0.9f64.powi(horizon as i32 + 1) * 1.0 / 0.1;
        for probs in [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], [0.5, 0.5, 0.5, 0.5]] {
            let other = Policy::new(2, 2, probs.to_vec()).unwrap();
            assert!(best >= policy_return(&mdp, &other, &r, horizon).unwrap() - slack);
        }
    }

    #[test]
    fn deterministic_path_ignores_seed() {
        let mdp = chain3(0.9);
        let pi = Policy::uniform(3, 1);
        let a = sample_trajectory(&mdp, &pi, 4, Seed(1)).unwrap();
        let b = sample_trajectory(&mdp, &pi, 4, Seed(999)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps().iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 1, 2, 2, 2]);
    }

    #[test]
    fn sampled_state_frequencies_match_forward_distribution() {
        let mdp = two_state_stochastic();
        let pi = Policy::new(2, 2, vec![0.5, 0.5, 0.1, 0.9]).unwrap();
        let horizon = 3;
        let mut exact = mdp.start_distribution().to_vec();
        for _ in 0..horizon {
            exact = propagate(&mdp, &pi, &exact);
        }
        let n = 100_000;
        let mut rng = Seed(17).rng();
        let hits = (0..n)
            .filter(|_| sample_trajectory_with(&mdp, &pi, horizon, &mut rng).steps()[horizon].0 == 0)
            .count();
        let freq = hits as f64 / n as f64;
        let se = (exact[0] * (1.0 - exact[0]) / n as f64).sqrt();
        assert!((freq - exact[0]).abs() <= 3.0 * se);
    }

    #[test]
    fn feature_count_direct_sum() {
        let t = vec![0.0, 1.0, 0.0, 1.0];
        let mdp = TabularMdp::new(2, 1, t, vec![1.0, 0.0, 0.0, 1.0], 2, 0.9, vec![1.0, 0.0]).unwrap();
        let traj = Trajectory::new(vec![(0, 0), (1, 0)]).unwrap();
        let fc = feature_count(&traj, &mdp);
        assert_abs_diff_eq!(fc[0], 1.0);
        assert_abs_diff_eq!(fc[1], 0.9);
    }

    #[test]
    fn zero_discount_counts_initial_state_only() {
        let t = vec![0.0, 1.0, 0.0, 1.0];
        let mdp = TabularMdp::new(2, 1, t, vec![1.0, 0.0, 0.0, 1.0], 2, 0.0, vec![1.0, 0.0]).unwrap();
        let traj = Trajectory::new(vec![(0, 0), (1, 0), (1, 0)]).unwrap();
        assert_eq!(feature_count(&traj, &mdp), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = TabularMdp::new(1, 1, vec![0.5], vec![1.0], 1, 0.9, vec![1.0]);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
        let bad_start = TabularMdp::new(1, 1, vec![1.0], vec![1.0], 1, 0.9, vec![0.9]);
        assert!(bad_start.is_err());
        assert!(TabularMdp::new(1, 1, vec![1.0], vec![1.0], 1, 1.0, vec![1.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn feature_count_is_linear_in_features(
            fa in proptest::collection::vec(-3.0f64..3.0, 6),
            fb in proptest::collection::vec(-3.0f64..3.0, 6),
            states in proptest::collection::vec(0usize..3, 1..8),
        ) {
            let t = vec![1.0 / 3.0; 9];
            let start = vec![1.0 / 3.0; 3];
            let sum: Vec<f64> = fa.iter().zip(&fb).map(|(a, b)| a + b).collect();
            let ma = TabularMdp::new(3, 1, t.clone(), fa, 2, 0.8, start.clone()).unwrap();
            let mb = TabularMdp::new(3, 1, t.clone(), fb, 2, 0.8, start.clone()).unwrap();
            let ms = TabularMdp::new(3, 1, t, sum, 2, 0.8, start).unwrap();
            let traj = Trajectory::new(states.into_iter().map(|s| (s, 0)).collect()).unwrap();
            let (ca, cb, cs) = (feature_count(&traj, &ma), feature_count(&traj, &mb), feature_count(&traj, &ms));
            for j in 0..2 {
                proptest::prop_assert!((ca[j] + cb[j] - cs[j]).abs() < 1e-9);
            }
        }
    }
}

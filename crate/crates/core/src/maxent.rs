//! Single-task maximum-entropy IRL on finite-horizon tabular MDPs.
//!
//! The trajectory model is `P(zeta | theta, s_0) = exp(theta . x_zeta) T_zeta / Z(theta, s_0)`
//! with `x_zeta = sum_i gamma^i x_{s_i}` and `T_zeta` the product of the
//! transition probabilities along the path. The partition function is
//! computed by a log-space backward recursion over the horizon. Sampling
//! and the forward pass draw next states from the transition row tilted by
//! `exp(V_{i+1})`, which is exactly the conditional of the model above, so
//! visitation frequencies, the gradient and the feature-count covariance
//! are those of the model itself and agree with brute-force enumeration on
//! stochastic MDPs as well as deterministic ones.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mdp::{dot, feature_count, pick, Policy, RewardParams, TabularMdp, Trajectory};
use crate::seed::Seed;

/// Demonstrations for one task plus cached statistics.
#[derive(Debug, Clone)]
pub struct DemoSet {
    trajectories: Vec<Trajectory>,
    feature_expectation: Vec<f64>,
    start_distribution: Vec<f64>,
    mean_log_transition: f64,
}

impl DemoSet {
    pub fn new(mdp: &TabularMdp, trajectories: Vec<Trajectory>) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| invalid("a demonstration set needs at least one trajectory"))?;
        let horizon = first.horizon();
        let n = trajectories.len() as f64;
        let mut feature_expectation = vec![0.0; mdp.feature_dim()];
        let mut start_distribution = vec![0.0; mdp.num_states()];
        let mut log_transition = 0.0;
        for traj in &trajectories {
            if traj.horizon() != horizon {
                return Err(invalid("all demonstrations must share one horizon"));
            }
            traj.validate_for(mdp)?;
            for (e, x) in feature_expectation.iter_mut().zip(feature_count(traj, mdp)) {
                *e += x / n;
            }
            start_distribution[traj.start_state()] += 1.0 / n;
            for w in traj.steps().windows(2) {
                log_transition += mdp.transition(w[0].0, w[0].1, w[1].0).ln();
            }
        }
        Ok(Self {
            trajectories,
            feature_expectation,
            start_distribution,
            mean_log_transition: log_transition / n,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.trajectories[0].horizon()
    }

    /// Mean discounted feature count of the demonstrations.
    pub fn feature_expectation(&self) -> &[f64] {
        &self.feature_expectation
    }

    /// Empirical distribution of the demonstrations' start states.
    pub fn start_distribution(&self) -> &[f64] {
        &self.start_distribution
    }

    fn check(&self, mdp: &TabularMdp, horizon: usize) -> Result<()> {
        if self.feature_expectation.len() != mdp.feature_dim() || self.start_distribution.len() != mdp.num_states() {
            return Err(invalid("demonstrations were built for a different MDP"));
        }
        if horizon != self.horizon() {
            return Err(invalid(format!(
                "model horizon {horizon} differs from demonstration horizon {}",
                self.horizon()
            )));
        }
        Ok(())
    }
}

/// Time-indexed MaxEnt policy produced by the backward recursion.
///
/// Step `i` holds `pi_i(a | s) = exp(Q_i(s, a) - V_i(s))`; at the final step
/// no transition follows, so its action distribution is uniform.
#[derive(Debug, Clone)]
pub struct SoftPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    /// `log Z` of the remaining path from each state, per step `0..=horizon`.
    log_values: Vec<Vec<f64>>,
    /// `log sum_s' T(s'|s,a) exp(V_{i+1}(s'))`, per step `0..horizon`.
    log_continuations: Vec<Vec<f64>>,
    steps: Vec<Policy>,
}

impl SoftPolicy {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Action distribution at time step `t`.
    pub fn step(&self, t: usize) -> &Policy {
        &self.steps[t]
    }

    /// Action distribution at the first step.
    pub fn initial(&self) -> &Policy {
        &self.steps[0]
    }

    /// `log Z(theta, s_0)` for a path starting in `state`.
    pub fn log_partition(&self, state: usize) -> f64 {
        self.log_values[0][state]
    }

    /// Model probability of moving to `next` after `(state, action)` at step `t`.
    pub fn next_state_prob(&self, mdp: &TabularMdp, t: usize, state: usize, action: usize, next: usize) -> f64 {
        let p = mdp.transition(state, action, next);
        if p == 0.0 {
            return 0.0;
        }
        let w = self.log_continuations[t][state * self.num_actions + action];
        p * (self.log_values[t + 1][next] - w).exp()
    }

    /// Draw one trajectory from the model distribution.
    pub fn sample<R: Rng>(&self, mdp: &TabularMdp, rng: &mut R) -> Trajectory {
        let mut steps = Vec::with_capacity(self.horizon + 1);
        let mut state = pick(mdp.start_distribution().iter().copied().enumerate(), rng.random());
        for t in 0..=self.horizon {
            let action = pick(self.steps[t].row(state).iter().copied().enumerate(), rng.random());
            steps.push((state, action));
            if t < self.horizon {
                let w = self.log_continuations[t][state * self.num_actions + action];
                let next_v = &self.log_values[t + 1];
                let u: f64 = rng.random();
                state = pick(
                    mdp.successors(state, action)
                        .iter()
                        .map(|&(s, p)| (s, p * (next_v[s] - w).exp())),
                    u,
                );
            }
        }
        Trajectory::new(steps).expect("non-empty")
    }
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(values: I) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_theta(mdp: &TabularMdp, theta: &RewardParams, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(invalid("MaxEnt horizon must be at least 1"));
    }
    mdp.state_rewards(theta)
}

/// Backward pass of the forward-backward procedure.
pub fn soft_policy(mdp: &TabularMdp, theta: &RewardParams, horizon: usize) -> Result<SoftPolicy> {
    let rewards = check_theta(mdp, theta, horizon)?;
    Ok(backward(mdp, &rewards, horizon))
}

fn backward(mdp: &TabularMdp, rewards: &[f64], horizon: usize) -> SoftPolicy {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let gamma = mdp.discount();
    let mut log_values = vec![Vec::new(); horizon + 1];
    let mut log_continuations = vec![Vec::new(); horizon];
    let mut steps = Vec::with_capacity(horizon + 1);

    let final_weight = gamma.powi(horizon as i32);
    let ln_actions = (na as f64).ln();
    log_values[horizon] = rewards.iter().map(|r| final_weight * r + ln_actions).collect();
    steps.push(Policy::uniform(ns, na));

    let mut q = vec![0.0; na];
    for t in (0..horizon).rev() {
        let weight = gamma.powi(t as i32);
        let next_v = &log_values[t + 1];
        let mut w_t = vec![0.0; ns * na];
        let mut v_t = vec![0.0; ns];
        let mut probs = vec![0.0; ns * na];
        for s in 0..ns {
            for (a, qa) in q.iter_mut().enumerate() {
                let succ = mdp.successors(s, a);
                let w = log_sum_exp(succ.iter().map(|&(n, p)| p.ln() + next_v[n]));
                w_t[s * na + a] = w;
                *qa = weight * rewards[s] + w;
            }
            let v = log_sum_exp(q.iter().copied());
            v_t[s] = v;
            let row = &mut probs[s * na..(s + 1) * na];
            let mut total = 0.0;
            for (p, qa) in row.iter_mut().zip(&q) {
                *p = (qa - v).exp();
                total += *p;
            }
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        log_values[t] = v_t;
        log_continuations[t] = w_t;
        steps.push(Policy::from_rows_unchecked(ns, na, probs));
    }
    steps.reverse();
    SoftPolicy {
        horizon,
        num_states: ns,
        num_actions: na,
        log_values,
        log_continuations,
        steps,
    }
}

/// Forward pass: `D_s = sum_t gamma^t P(s_t = s)` from the given start distribution.
fn forward(mdp: &TabularMdp, policy: &SoftPolicy, start: &[f64]) -> Vec<f64> {
    let (ns, na) = (policy.num_states, policy.num_actions);
    let gamma = mdp.discount();
    let mut dist = start.to_vec();
    let mut visits = dist.clone();
    let mut weight = 1.0;
    for t in 0..policy.horizon {
        let mut next = vec![0.0; ns];
        let step = &policy.steps[t];
        let next_v = &policy.log_values[t + 1];
        let w_t = &policy.log_continuations[t];
        for (s, &ps) in dist.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for a in 0..na {
                let mass = ps * step.prob(s, a);
                if mass == 0.0 {
                    continue;
                }
                let w = w_t[s * na + a];
                for &(n, p) in mdp.successors(s, a) {
                    next[n] += mass * p * (next_v[n] - w).exp();
                }
            }
        }
        dist = next;
        weight *= gamma;
        for (v, d) in visits.iter_mut().zip(&dist) {
            *v += weight * d;
        }
    }
    visits
}

/// Expected discounted state visitation frequencies from the MDP's start
/// distribution.
pub fn state_visitations(mdp: &TabularMdp, theta: &RewardParams, horizon: usize) -> Result<Vec<f64>> {
    state_visitations_from(mdp, theta, horizon, mdp.start_distribution())
}

/// [`state_visitations`] from an arbitrary start distribution.
pub fn state_visitations_from(mdp: &TabularMdp, theta: &RewardParams, horizon: usize, start: &[f64]) -> Result<Vec<f64>> {
    if start.len() != mdp.num_states() {
        return Err(invalid("start distribution length differs from state count"));
    }
    let policy = soft_policy(mdp, theta, horizon)?;
    Ok(forward(mdp, &policy, start))
}

struct Evaluation {
    log_likelihood: f64,
    gradient: Vec<f64>,
}

fn mean_log_likelihood_from(policy: &SoftPolicy, theta: &RewardParams, demos: &DemoSet) -> f64 {
    let mean_log_z: f64 = demos
        .start_distribution
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s, &p)| p * policy.log_partition(s))
        .sum();
    dot(theta.as_slice(), &demos.feature_expectation) + demos.mean_log_transition - mean_log_z
}

fn gradient_from(mdp: &TabularMdp, policy: &SoftPolicy, demos: &DemoSet) -> Vec<f64> {
    // Each demonstration is conditioned on its own start state, so the
    // model expectation is taken from the empirical start distribution.
    let visits = forward(mdp, policy, &demos.start_distribution);
    let expected = mdp.weighted_features(&visits);
    demos.feature_expectation.iter().zip(expected).map(|(e, m)| e - m).collect()
}

fn evaluate(mdp: &TabularMdp, theta: &RewardParams, demos: &DemoSet) -> Result<Evaluation> {
    let policy = soft_policy(mdp, theta, demos.horizon())?;
    Ok(Evaluation {
        log_likelihood: mean_log_likelihood_from(&policy, theta, demos),
        gradient: gradient_from(mdp, &policy, demos),
    })
}

/// Mean log-likelihood of the demonstrations, via the backward recursion.
pub fn mean_log_likelihood(mdp: &TabularMdp, theta: &RewardParams, demos: &DemoSet, horizon: usize) -> Result<f64> {
    demos.check(mdp, horizon)?;
    let policy = soft_policy(mdp, theta, horizon)?;
    Ok(mean_log_likelihood_from(&policy, theta, demos))
}

/// Gradient of the mean log-likelihood: `x~ - sum_s D_s x_s`.
pub fn maxent_gradient(mdp: &TabularMdp, theta: &RewardParams, demos: &DemoSet, horizon: usize) -> Result<Vec<f64>> {
    demos.check(mdp, horizon)?;
    let policy = soft_policy(mdp, theta, horizon)?;
    Ok(gradient_from(mdp, &policy, demos))
}

/// Upper bound on the number of trajectories the enumeration oracle visits.
pub const ENUMERATION_LIMIT: f64 = 1e6;

fn enumeration_size(mdp: &TabularMdp, horizon: usize) -> f64 {
    ((mdp.num_states() * mdp.num_actions()) as f64).powi(horizon as i32 + 1)
}

fn check_enumerable(mdp: &TabularMdp, horizon: usize) -> Result<()> {
    let size = enumeration_size(mdp, horizon);
    if size > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "{size:.3e} trajectories exceed the enumeration limit of {ENUMERATION_LIMIT:.0e}"
        )));
    }
    Ok(())
}

/// Visit every feasible path from `start`, reporting the path with its
/// unnormalised log weight `theta . x_zeta + log T_zeta`.
fn enumerate_from<F: FnMut(&[(usize, usize)], f64)>(
    mdp: &TabularMdp,
    rewards: &[f64],
    horizon: usize,
    start: usize,
    visit: &mut F,
) {
    fn recurse<F: FnMut(&[(usize, usize)], f64)>(
        mdp: &TabularMdp,
        rewards: &[f64],
        horizon: usize,
        path: &mut Vec<(usize, usize)>,
        state: usize,
        log_weight: f64,
        visit: &mut F,
    ) {
        let t = path.len();
        let lw = log_weight + mdp.discount().powi(t as i32) * rewards[state];
        for a in 0..mdp.num_actions() {
            path.push((state, a));
            if t == horizon {
                visit(path, lw);
            } else {
                for next in 0..mdp.num_states() {
                    let p = mdp.transition(state, a, next);
                    if p > 0.0 {
                        recurse(mdp, rewards, horizon, path, next, lw + p.ln(), visit);
                    }
                }
            }
            path.pop();
        }
    }
    let mut path = Vec::with_capacity(horizon + 1);
    recurse(mdp, rewards, horizon, &mut path, start, 0.0, visit);
}

fn enumerated_log_partition(mdp: &TabularMdp, rewards: &[f64], horizon: usize, start: usize) -> f64 {
    let mut weights = Vec::new();
    enumerate_from(mdp, rewards, horizon, start, &mut |_, lw| weights.push(lw));
    log_sum_exp(weights.iter().copied())
}

/// Brute-force `sum_j log P(zeta_j | theta, T)`, normalising over every
/// path from each demonstration's start state. Only feasible on tiny MDPs.
pub fn enumerate_log_likelihood(mdp: &TabularMdp, theta: &RewardParams, demos: &DemoSet, horizon: usize) -> Result<f64> {
    let rewards = check_theta(mdp, theta, horizon)?;
    demos.check(mdp, horizon)?;
    check_enumerable(mdp, horizon)?;
    let mut log_z = vec![None; mdp.num_states()];
    let mut total = 0.0;
    for traj in demos.trajectories() {
        let s0 = traj.start_state();
        let z = *log_z[s0].get_or_insert_with(|| enumerated_log_partition(mdp, &rewards, horizon, s0));
        let mut log_transition = 0.0;
        for w in traj.steps().windows(2) {
            log_transition += mdp.transition(w[0].0, w[0].1, w[1].0).ln();
        }
        total += dot(theta.as_slice(), &feature_count(traj, mdp)) + log_transition - z;
    }
    Ok(total)
}

/// Every feasible trajectory with its model probability, mixing start
/// states by the MDP's start distribution. Only feasible on tiny MDPs.
pub fn enumerate_trajectories(mdp: &TabularMdp, theta: &RewardParams, horizon: usize) -> Result<Vec<(Trajectory, f64)>> {
    let rewards = check_theta(mdp, theta, horizon)?;
    check_enumerable(mdp, horizon)?;
    let mut out = Vec::new();
    for (s0, &p0) in mdp.start_distribution().iter().enumerate() {
        if p0 == 0.0 {
            continue;
        }
        let z = enumerated_log_partition(mdp, &rewards, horizon, s0);
        enumerate_from(mdp, &rewards, horizon, s0, &mut |path, lw| {
            out.push((Trajectory::new(path.to_vec()).expect("non-empty"), p0 * (lw - z).exp()));
        });
    }
    Ok(out)
}

/// Gradient-ascent settings for [`fit_maxent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub step_size: f64,
    pub max_iterations: usize,
    pub grad_norm_tolerance: f64,
    /// Halve the step whenever a step would lower the likelihood.
    pub step_halving: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            max_iterations: 300,
            grad_norm_tolerance: 1e-4,
            step_halving: true,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || self.max_iterations == 0 || !(self.grad_norm_tolerance > 0.0) {
            return Err(invalid("fit options need step_size > 0, max_iterations >= 1, grad_norm_tolerance > 0"));
        }
        Ok(())
    }
}

/// Outcome of a single-task MaxEnt fit.
#[derive(Debug, Clone)]
pub struct MaxEntFitReport {
    pub alpha: RewardParams,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub final_log_likelihood: f64,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gradient ascent on the mean log-likelihood from `theta = 0`.
pub fn fit_maxent(mdp: &TabularMdp, demos: &DemoSet, opts: &FitOptions) -> Result<MaxEntFitReport> {
    let timer = Instant::now();
    opts.validate()?;
    demos.check(mdp, demos.horizon())?;
    let mut theta = RewardParams::zeros(mdp.feature_dim());
    let mut current = evaluate(mdp, &theta, demos)?;
    let initial_norm = norm(&current.gradient);
    let mut grad_norm = initial_norm;
    let mut step = opts.step_size;
    let mut iterations = 0;
    let mut converged = grad_norm <= opts.grad_norm_tolerance;

    while !converged && iterations < opts.max_iterations {
        let mut accepted = None;
        while accepted.is_none() {
            let candidate: Vec<f64> = theta
                .as_slice()
                .iter()
                .zip(&current.gradient)
                .map(|(t, g)| t + step * g)
                .collect();
            let candidate = RewardParams::new(candidate).map_err(|_| Error::Divergence {
                iteration: iterations,
                grad_norm,
            })?;
            let policy = soft_policy(mdp, &candidate, demos.horizon())?;
            let ll = mean_log_likelihood_from(&policy, &candidate, demos);
            let tolerance = 1e-12 * current.log_likelihood.abs().max(1.0);
            if !opts.step_halving || ll >= current.log_likelihood - tolerance {
                accepted = Some((candidate, policy, ll));
            } else {
                step *= 0.5;
                if step < 1e-14 * opts.step_size {
                    break;
                }
            }
        }
        let Some((candidate, policy, ll)) = accepted else {
            // No ascent direction at machine precision: treat as stationary.
            break;
        };
        theta = candidate;
        current = Evaluation {
            log_likelihood: ll,
            gradient: gradient_from(mdp, &policy, demos),
        };
        iterations += 1;
        grad_norm = norm(&current.gradient);
        if !grad_norm.is_finite() || grad_norm > 1e3 * initial_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence { iteration: iterations, grad_norm });
        }
        converged = grad_norm <= opts.grad_norm_tolerance;
    }

    Ok(MaxEntFitReport {
        alpha: theta,
        iterations,
        final_grad_norm: grad_norm,
        final_log_likelihood: current.log_likelihood,
        converged,
        wall_time_seconds: timer.elapsed().as_secs_f64(),
    })
}

/// Sample covariance of trajectory feature counts: the Hessian of the
/// negative mean log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianEstimate {
    matrix: DMatrix<f64>,
    sample_count: usize,
    sample_horizon: usize,
}

impl HessianEstimate {
    pub fn from_matrix(matrix: DMatrix<f64>, sample_count: usize, sample_horizon: usize) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid("Hessian must be a non-empty square matrix"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(invalid("Hessian has non-finite entries"));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-9 * scale {
            return Err(invalid("Hessian is not symmetric"));
        }
        Ok(Self { matrix, sample_count, sample_horizon })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn sample_horizon(&self) -> usize {
        self.sample_horizon
    }

    /// `H + eps I` with `eps = 1e-6 trace(H) / d`, used wherever the
    /// quadratic form must be positive definite.
    pub fn regularized(&self) -> DMatrix<f64> {
        let d = self.dim();
        let eps = 1e-6 * self.matrix.trace() / d as f64;
        let mut m = self.matrix.clone();
        for i in 0..d {
            m[(i, i)] += eps;
        }
        m
    }
}

#[derive(Serialize, Deserialize)]
struct HessianRecord {
    dim: usize,
    sample_count: usize,
    sample_horizon: usize,
    matrix: Vec<Vec<f64>>,
}

impl Serialize for HessianEstimate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HessianRecord {
            dim: self.dim(),
            sample_count: self.sample_count,
            sample_horizon: self.sample_horizon,
            matrix: crate::linalg::to_rows(&self.matrix),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HessianEstimate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = HessianRecord::deserialize(deserializer)?;
        let matrix = crate::linalg::from_rows(&rec.matrix, rec.dim, rec.dim).map_err(serde::de::Error::custom)?;
        HessianEstimate::from_matrix(matrix, rec.sample_count, rec.sample_horizon).map_err(serde::de::Error::custom)
    }
}

const HESSIAN_CHUNK: usize = 64;

/// Sample `sample_count` trajectories from the MaxEnt model at `alpha` and
/// return the sample covariance of their discounted feature counts.
///
/// Samples are drawn in fixed-size chunks, each from its own seed stream,
/// so the result does not depend on how many threads take part.
pub fn estimate_hessian(
    mdp: &TabularMdp,
    alpha: &RewardParams,
    sample_count: usize,
    horizon: usize,
    seed: Seed,
) -> Result<HessianEstimate> {
    if sample_count < 2 {
        return Err(invalid("the Hessian estimate needs at least two sample paths"));
    }
    let policy = soft_policy(mdp, alpha, horizon)?;
    let d = mdp.feature_dim();
    let chunks = sample_count.div_ceil(HESSIAN_CHUNK);
    let counts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.index(c as u64).rng();
            let n = HESSIAN_CHUNK.min(sample_count - c * HESSIAN_CHUNK);
            let mut block = Vec::with_capacity(n * d);
            for _ in 0..n {
                block.extend(feature_count(&policy.sample(mdp, &mut rng), mdp));
            }
            block
        })
        .collect();
    let samples = DMatrix::from_row_iterator(sample_count, d, counts.into_iter().flatten());
    Ok(HessianEstimate {
        matrix: crate::linalg::sample_covariance(&samples),
        sample_count,
        sample_horizon: horizon,
    })
}

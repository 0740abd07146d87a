//! Highway: a multi-lane ring road with static traffic. Each driver prefers
//! one of the outer lanes and one speed, weighting the two independently.
//!
//! The state is `(lane, speed, position)`. Traffic occupies fixed
//! `(lane, position)` cells; the agent advances `speed + 1` cells per step
//! and cannot change into an occupied cell. Features are a speed one-hot, a
//! lane one-hot, and gap thresholds to the nearest car ahead and behind in
//! the agent's current lane.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{apply_action_noise, DeterministicDynamics, GeneratorSpec, TaskInstance};
use crate::error::{Error, Result};
use crate::mdp::{RewardParams, TabularMdp};
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighwayConfig {
    pub lanes: usize,
    pub speeds: usize,
    pub road_length: usize,
    /// Fraction of `(lane, position)` cells holding a car.
    pub traffic_density: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    /// Split evenly between front and back gap thresholds.
    pub distance_feature_count: usize,
    pub success_prob: f64,
    pub discount: f64,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        Self {
            lanes: 3,
            speeds: 4,
            road_length: 64,
            traffic_density: 0.15,
            weight_min: 0.0,
            weight_max: 5.0,
            distance_feature_count: 64,
            success_prob: 0.7,
            discount: 0.9,
        }
    }
}

impl HighwayConfig {
    pub fn feature_dim(&self) -> usize {
        self.speeds + self.lanes + self.distance_feature_count
    }

    pub fn num_states(&self) -> usize {
        self.lanes * self.speeds * self.road_length
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("highway: {m}")));
        if self.lanes < 2 || self.speeds < 2 {
            return bad("lanes and speeds must both be at least 2");
        }
        if self.road_length < 2 {
            return bad("road_length must be at least 2");
        }
        if self.distance_feature_count % 2 != 0 {
            return bad("distance_feature_count must be even (front and back halves)");
        }
        if !(0.0..1.0).contains(&self.traffic_density) {
            return bad("traffic_density must lie in [0, 1)");
        }
        if !(self.weight_min <= self.weight_max) {
            return bad("preference weight range is empty");
        }
        Ok(())
    }

    fn state(&self, lane: usize, speed: usize, pos: usize) -> usize {
        (lane * self.speeds + speed) * self.road_length + pos
    }

    fn decode(&self, s: usize) -> (usize, usize, usize) {
        let pos = s % self.road_length;
        let rest = s / self.road_length;
        (rest / self.speeds, rest % self.speeds, pos)
    }
}

/// Task-level draws for one driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverPreferences {
    pub preferred_lane: usize,
    pub preferred_speed: usize,
    pub lane_weight: f64,
    pub speed_weight: f64,
}

impl DriverPreferences {
    pub fn theta(&self, config: &HighwayConfig) -> RewardParams {
        let mut theta = vec![0.0; config.feature_dim()];
        theta[self.preferred_speed] = self.speed_weight;
        theta[config.speeds + self.preferred_lane] = self.lane_weight;
        RewardParams::new(theta).expect("finite preference weights")
    }
}

// left, right, speed up, slow down, maintain
const NUM_ACTIONS: usize = 5;

pub fn draw_preferences(config: &HighwayConfig, seed: Seed) -> DriverPreferences {
    let mut rng = seed.rng();
    let preferred_lane = if rng.random_bool(0.5) { 0 } else { config.lanes - 1 };
    // Second or fourth speed, clipped for configs with fewer speeds.
    let preferred_speed = if rng.random_bool(0.5) { 1 } else { 3.min(config.speeds - 1) };
    let mut weight = || {
        if config.weight_max > config.weight_min {
            rng.random_range(config.weight_min..config.weight_max)
        } else {
            config.weight_min
        }
    };
    let lane_weight = weight();
    let speed_weight = weight();
    DriverPreferences { preferred_lane, preferred_speed, lane_weight, speed_weight }
}

/// Occupancy indexed `lane * road_length + position`.
pub fn place_traffic(config: &HighwayConfig, seed: Seed) -> Vec<bool> {
    let cells = config.lanes * config.road_length;
    let cars = (config.traffic_density * cells as f64).round() as usize;
    let mut occupied = vec![false; cells];
    for c in sample(&mut seed.rng(), cells, cars.min(cells)) {
        occupied[c] = true;
    }
    occupied
}

pub fn dynamics(config: &HighwayConfig, traffic: &[bool]) -> DeterministicDynamics {
    let l = config.road_length;
    let mut next = Vec::with_capacity(config.num_states() * NUM_ACTIONS);
    for s in 0..config.num_states() {
        let (lane, speed, pos) = config.decode(s);
        let free = |lane: usize| !traffic[lane * l + pos];
        let left = if lane > 0 && free(lane - 1) { lane - 1 } else { lane };
        let right = if lane + 1 < config.lanes && free(lane + 1) { lane + 1 } else { lane };
        let moves = [
            (left, speed),
            (right, speed),
            (lane, (speed + 1).min(config.speeds - 1)),
            (lane, speed.saturating_sub(1)),
            (lane, speed),
        ];
        for (new_lane, new_speed) in moves {
            next.push(config.state(new_lane, new_speed, (pos + new_speed + 1) % l));
        }
    }
    DeterministicDynamics { num_states: config.num_states(), num_actions: NUM_ACTIONS, next }
}

fn nearest_gaps(config: &HighwayConfig, traffic: &[bool], lane: usize, pos: usize) -> (usize, usize) {
    let l = config.road_length;
    let row = &traffic[lane * l..(lane + 1) * l];
    let front = (1..l).find(|g| row[(pos + g) % l]).unwrap_or(usize::MAX);
    let back = (1..l).find(|g| row[(pos + l - g) % l]).unwrap_or(usize::MAX);
    (front, back)
}

/// Row-major `states x feature_dim`. Distance feature `b - 1` (front) or
/// `half + b - 1` (back) is 1 when the gap is at most `b` cells.
pub fn features(config: &HighwayConfig, traffic: &[bool]) -> Vec<f64> {
    let d = config.feature_dim();
    let half = config.distance_feature_count / 2;
    let base = config.speeds + config.lanes;
    let mut out = vec![0.0; config.num_states() * d];
    for s in 0..config.num_states() {
        let (lane, speed, pos) = config.decode(s);
        let x = &mut out[s * d..(s + 1) * d];
        x[speed] = 1.0;
        x[config.speeds + lane] = 1.0;
        let (front, back) = nearest_gaps(config, traffic, lane, pos);
        for b in 1..=half {
            if front <= b {
                x[base + b - 1] = 1.0;
            }
            if back <= b {
                x[base + half + b - 1] = 1.0;
            }
        }
    }
    out
}

pub(super) fn instantiate(config: &HighwayConfig, preferences: &DriverPreferences, instance_seed: Seed) -> Result<TaskInstance> {
    config.validate()?;
    let traffic = place_traffic(config, instance_seed.child("traffic"));
    let ns = config.num_states();
    let transition = apply_action_noise(&dynamics(config, &traffic), config.success_prob)?;
    let mdp = TabularMdp::new(
        ns,
        NUM_ACTIONS,
        transition,
        features(config, &traffic),
        config.feature_dim(),
        config.discount,
        vec![1.0 / ns as f64; ns],
    )?;
    let theta = preferences.theta(config);
    let true_reward = mdp.state_rewards(&theta)?;
    Ok(TaskInstance {
        mdp,
        true_reward,
        true_theta: Some(theta),
        spec: GeneratorSpec::Highway { config: *config, preferences: *preferences },
        instance_seed,
    })
}

/// Draw a driver and a first traffic layout.
pub fn generate_highway_task(config: &HighwayConfig, task_seed: Seed) -> Result<TaskInstance> {
    config.validate()?;
    let preferences = draw_preferences(config, task_seed.child("driver"));
    instantiate(config, &preferences, task_seed)
}

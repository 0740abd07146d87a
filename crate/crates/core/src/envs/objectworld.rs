//! Objectworld: a grid of coloured objects whose outer colour determines a
//! constant reward over the surrounding square patch.
//!
//! Features are threshold indicators on the Chebyshev distance from each
//! cell to the nearest object of every outer and inner colour. Inner colours
//! never affect the reward.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{apply_action_noise, DeterministicDynamics, GeneratorSpec, TaskInstance};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::seed::Seed;

const PLACEMENT_RETRIES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectworldConfig {
    pub grid_size: usize,
    pub num_outer_colors: usize,
    pub num_inner_colors: usize,
    /// Fraction of cells holding an object.
    pub object_density: f64,
    pub min_active_colors: usize,
    pub max_active_colors: usize,
    pub reward_min: f64,
    pub reward_max: f64,
    /// Chebyshev radius of each object's reward patch.
    pub influence_radius: usize,
    pub distance_bins: usize,
    pub success_prob: f64,
    pub discount: f64,
}

impl Default for ObjectworldConfig {
    fn default() -> Self {
        Self {
            grid_size: 32,
            num_outer_colors: 5,
            num_inner_colors: 2,
            object_density: 0.08,
            min_active_colors: 2,
            max_active_colors: 4,
            reward_min: -10.0,
            reward_max: 5.0,
            influence_radius: 2,
            distance_bins: 31,
            success_prob: 0.7,
            discount: 0.9,
        }
    }
}

impl ObjectworldConfig {
    pub fn feature_dim(&self) -> usize {
        self.distance_bins * (self.num_outer_colors + self.num_inner_colors)
    }

    pub fn num_states(&self) -> usize {
        self.grid_size * self.grid_size
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("objectworld: {m}")));
        if self.grid_size < 2 * self.influence_radius + 1 {
            return bad("grid_size must be at least 2 * influence_radius + 1");
        }
        if self.distance_bins == 0 || self.num_outer_colors == 0 {
            return bad("distance_bins and num_outer_colors must be positive");
        }
        if self.min_active_colors == 0 || self.min_active_colors > self.max_active_colors || self.min_active_colors > self.num_outer_colors {
            return bad("active colour range must satisfy 1 <= min <= max and min <= num_outer_colors");
        }
        if !(self.object_density > 0.0 && self.object_density <= 1.0) {
            return bad("object_density must lie in (0, 1]");
        }
        if !(self.reward_min <= self.reward_max) {
            return bad("reward range is empty");
        }
        Ok(())
    }

    fn object_count(&self) -> usize {
        ((self.object_density * self.num_states() as f64).round() as usize).clamp(1, self.num_states())
    }
}

/// Task-level draws: which outer colours carry reward, and how much.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectworldSemantics {
    /// `(outer colour, reward)` pairs.
    pub active: Vec<(usize, f64)>,
}

impl ObjectworldSemantics {
    fn reward_of(&self, outer: usize) -> Option<f64> {
        self.active.iter().find(|(c, _)| *c == outer).map(|(_, r)| *r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Object {
    pub row: usize,
    pub col: usize,
    pub outer: usize,
    pub inner: usize,
}

// up, down, left, right, stay
const MOVES: [(isize, isize); 5] = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];

pub fn draw_semantics(config: &ObjectworldConfig, seed: Seed) -> ObjectworldSemantics {
    let mut rng = seed.rng();
    let max = config.max_active_colors.min(config.num_outer_colors);
    let count = rng.random_range(config.min_active_colors..=max);
    let mut colors = sample(&mut rng, config.num_outer_colors, count).into_vec();
    colors.sort_unstable();
    let active = colors
        .into_iter()
        .map(|c| {
            let r = if config.reward_max > config.reward_min {
                rng.random_range(config.reward_min..config.reward_max)
            } else {
                config.reward_min
            };
            (c, r)
        })
        .collect();
    ObjectworldSemantics { active }
}

/// Random object layout in which every active colour appears at least once.
pub fn place_objects(config: &ObjectworldConfig, semantics: &ObjectworldSemantics, seed: Seed) -> Result<Vec<Object>> {
    let n = config.grid_size;
    for attempt in 0..PLACEMENT_RETRIES {
        let mut rng = seed.index(attempt).rng();
        let cells = sample(&mut rng, n * n, config.object_count()).into_vec();
        let objects: Vec<Object> = cells
            .into_iter()
            .map(|cell| Object {
                row: cell / n,
                col: cell % n,
                outer: rng.random_range(0..config.num_outer_colors),
                inner: if config.num_inner_colors > 0 { rng.random_range(0..config.num_inner_colors) } else { 0 },
            })
            .collect();
        if semantics.active.iter().all(|(c, _)| objects.iter().any(|o| o.outer == *c)) {
            return Ok(objects);
        }
    }
    Err(Error::InvalidConfig(format!(
        "objectworld: no layout with every active colour present after {PLACEMENT_RETRIES} attempts; raise object_density"
    )))
}

fn chebyshev(r0: usize, c0: usize, r1: usize, c1: usize) -> usize {
    r0.abs_diff(r1).max(c0.abs_diff(c1))
}

/// Sum of active-colour rewards over every object whose patch covers the cell.
pub fn true_reward(config: &ObjectworldConfig, semantics: &ObjectworldSemantics, objects: &[Object]) -> Vec<f64> {
    let n = config.grid_size;
    let mut reward = vec![0.0; n * n];
    for obj in objects {
        let Some(r) = semantics.reward_of(obj.outer) else { continue };
        let rad = config.influence_radius;
        for row in obj.row.saturating_sub(rad)..=(obj.row + rad).min(n - 1) {
            for col in obj.col.saturating_sub(rad)..=(obj.col + rad).min(n - 1) {
                reward[row * n + col] += r;
            }
        }
    }
    reward
}

/// Row-major `cells x feature_dim` indicator matrix. Feature
/// `colour * distance_bins + (b - 1)` is 1 when the nearest object of that
/// colour is closer than `b`; outer colours come first, then inner.
pub fn features(config: &ObjectworldConfig, objects: &[Object]) -> Vec<f64> {
    let n = config.grid_size;
    let bins = config.distance_bins;
    let d = config.feature_dim();
    let colours = config.num_outer_colors + config.num_inner_colors;
    let mut out = vec![0.0; n * n * d];
    for row in 0..n {
        for col in 0..n {
            let cell = row * n + col;
            let mut nearest = vec![usize::MAX; colours];
            for obj in objects {
                let dist = chebyshev(row, col, obj.row, obj.col);
                let outer = obj.outer;
                nearest[outer] = nearest[outer].min(dist);
                if config.num_inner_colors > 0 {
                    let inner = config.num_outer_colors + obj.inner;
                    nearest[inner] = nearest[inner].min(dist);
                }
            }
            for (colour, &dist) in nearest.iter().enumerate() {
                for b in 1..=bins {
                    if dist < b {
                        out[cell * d + colour * bins + b - 1] = 1.0;
                    }
                }
            }
        }
    }
    out
}

pub fn dynamics(config: &ObjectworldConfig) -> DeterministicDynamics {
    let n = config.grid_size as isize;
    let mut next = Vec::with_capacity(config.num_states() * MOVES.len());
    for row in 0..n {
        for col in 0..n {
            for (dr, dc) in MOVES {
                let (r, c) = (row + dr, col + dc);
                let target = if (0..n).contains(&r) && (0..n).contains(&c) { (r * n + c) as usize } else { (row * n + col) as usize };
                next.push(target);
            }
        }
    }
    DeterministicDynamics {
        num_states: config.num_states(),
        num_actions: MOVES.len(),
        next,
    }
}

/// Build the MDP and true reward for a concrete layout.
pub fn build(config: &ObjectworldConfig, semantics: &ObjectworldSemantics, objects: &[Object]) -> Result<(TabularMdp, Vec<f64>)> {
    config.validate()?;
    let ns = config.num_states();
    let transition = apply_action_noise(&dynamics(config), config.success_prob)?;
    let mdp = TabularMdp::new(
        ns,
        MOVES.len(),
        transition,
        features(config, objects),
        config.feature_dim(),
        config.discount,
        vec![1.0 / ns as f64; ns],
    )?;
    Ok((mdp, true_reward(config, semantics, objects)))
}

pub(super) fn instantiate(config: &ObjectworldConfig, semantics: &ObjectworldSemantics, instance_seed: Seed) -> Result<TaskInstance> {
    config.validate()?;
    let objects = place_objects(config, semantics, instance_seed.child("layout"))?;
    let (mdp, true_reward) = build(config, semantics, &objects)?;
    Ok(TaskInstance {
        mdp,
        true_reward,
        true_theta: None,
        spec: GeneratorSpec::Objectworld {
            config: *config,
            semantics: semantics.clone(),
        },
        instance_seed,
    })
}

/// Draw a task (active colours and their rewards) and its first layout.
pub fn generate_objectworld_task(config: &ObjectworldConfig, task_seed: Seed) -> Result<TaskInstance> {
    config.validate()?;
    let semantics = draw_semantics(config, task_seed.child("semantics"));
    instantiate(config, &semantics, task_seed)
}

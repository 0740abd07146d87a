//! Procedural benchmark tasks: Objectworld and Highway.
//!
//! A [`TaskInstance`] is a pure function of its [`GeneratorSpec`] (the
//! environment config plus the task-level random draws) and an instance
//! seed that fixes the layout. Serialising those two is enough to rebuild
//! any instance exactly.

pub mod highway;
pub mod objectworld;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::maxent::DemoSet;
use crate::mdp::{sample_trajectory, value_iteration, Policy, RewardParams, TabularMdp};
use crate::seed::Seed;

pub use highway::{generate_highway_task, DriverPreferences, HighwayConfig};
pub use objectworld::{generate_objectworld_task, ObjectworldConfig, ObjectworldSemantics};

/// Value-iteration tolerance used when solving for expert policies.
pub const PLANNING_TOLERANCE: f64 = 1e-10;

/// Intended next state of every `(state, action)` pair.
#[derive(Debug, Clone)]
pub struct DeterministicDynamics {
    pub num_states: usize,
    pub num_actions: usize,
    /// Indexed `state * num_actions + action`.
    pub next: Vec<usize>,
}

/// Dense transition tensor in which the intended outcome happens with
/// probability `success_prob` and the remaining mass is spread evenly over
/// the outcomes of all actions available in the state (the intended one
/// included).
pub fn apply_action_noise(dynamics: &DeterministicDynamics, success_prob: f64) -> Result<Vec<f64>> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(invalid(format!("success probability {success_prob} outside (0, 1]")));
    }
    let (ns, na) = (dynamics.num_states, dynamics.num_actions);
    if dynamics.next.len() != ns * na || dynamics.next.iter().any(|&n| n >= ns) {
        return Err(invalid("deterministic dynamics table is malformed"));
    }
    let slip = (1.0 - success_prob) / na as f64;
    let mut t = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let row = &mut t[(s * na + a) * ns..(s * na + a + 1) * ns];
            row[dynamics.next[s * na + a]] += success_prob;
            for b in 0..na {
                row[dynamics.next[s * na + b]] += slip;
            }
        }
    }
    Ok(t)
}

/// Which generator produced a task, with its task-level draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "environment", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Objectworld {
        config: ObjectworldConfig,
        semantics: ObjectworldSemantics,
    },
    Highway {
        config: HighwayConfig,
        preferences: DriverPreferences,
    },
}

/// One environment draw: the MDP, its ground-truth reward, and how to
/// rebuild it.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub mdp: TabularMdp,
    pub true_reward: Vec<f64>,
    /// Present when the true reward is exactly linear in the features.
    pub true_theta: Option<RewardParams>,
    pub spec: GeneratorSpec,
    pub instance_seed: Seed,
}

/// Matrix-free description of a [`TaskInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub spec: GeneratorSpec,
    pub instance_seed: Seed,
}

impl TaskInstance {
    pub fn record(&self) -> TaskRecord {
        TaskRecord {
            spec: self.spec.clone(),
            instance_seed: self.instance_seed,
        }
    }

    pub fn from_record(record: &TaskRecord) -> Result<Self> {
        build(&record.spec, record.instance_seed)
    }
}

fn build(spec: &GeneratorSpec, instance_seed: Seed) -> Result<TaskInstance> {
    match spec {
        GeneratorSpec::Objectworld { config, semantics } => objectworld::instantiate(config, semantics, instance_seed),
        GeneratorSpec::Highway { config, preferences } => highway::instantiate(config, preferences, instance_seed),
    }
}

/// Same task semantics on a freshly drawn layout.
pub fn respawn_instance(task: &TaskInstance, fresh_seed: Seed) -> Result<TaskInstance> {
    build(&task.spec, fresh_seed)
}

/// Deterministic optimal policy for the task's true reward.
pub fn expert_policy(task: &TaskInstance) -> Result<Policy> {
    Ok(value_iteration(&task.mdp, &task.true_reward, PLANNING_TOLERANCE)?.1)
}

/// `count` expert trajectories of `horizon + 1` steps.
pub fn generate_demonstrations(task: &TaskInstance, count: usize, horizon: usize, seed: Seed) -> Result<DemoSet> {
    if count == 0 {
        return Err(invalid("at least one demonstration is required"));
    }
    let policy = expert_policy(task)?;
    let trajectories = (0..count)
        .map(|j| sample_trajectory(&task.mdp, &policy, horizon, seed.index(j as u64)))
        .collect::<Result<Vec<_>>>()?;
    DemoSet::new(&task.mdp, trajectories)
}

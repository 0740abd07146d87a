use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Environment, ExperimentConfig};
use crate::elirl::{encode_task, init_basis, learn_from_estimates, reoptimize_coefficients, reward_for_task, SharedBasis, TaskKnowledge};
use crate::envs::{generate_demonstrations, generate_highway_task, generate_objectworld_task, TaskInstance, TaskRecord};
use crate::error::{Error, Result};
use crate::eval::{reward_difference, value_difference, MetricRecord};
use crate::maxent::{estimate_hessian, fit_maxent, HessianEstimate};
use crate::mdp::RewardParams;
use crate::seed::Seed;

pub const METHOD_MAXENT: &str = "maxent";
pub const METHOD_ELIRL: &str = "elirl";
pub const METHOD_ELIRL_RE: &str = "elirl_re";

/// Measured wall times for one task in one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskTiming {
    pub trial: usize,
    pub task_id: usize,
    pub task_order_index: usize,
    pub fit_s: f64,
    pub hessian_s: f64,
    /// Column initialisation, encoding and basis update.
    pub update_s: f64,
    /// Basis size (tasks seen) at the time of the update.
    pub tasks_before: usize,
    /// Re-optimizing the task's coefficients at the final checkpoint.
    pub reoptimize_s: f64,
    pub fit_iterations: usize,
    pub fit_converged: bool,
}

#[derive(Debug, Clone, Serialize)]
struct TaskEntry {
    task_id: usize,
    task_order_index: usize,
    #[serde(flatten)]
    record: TaskRecord,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub trial: usize,
    pub metrics: Vec<MetricRecord>,
    pub timings: Vec<TaskTiming>,
    pub order: Vec<usize>,
    tasks_json: String,
    /// `(checkpoint, basis json)`.
    bases: Vec<(usize, String)>,
}

struct Streams {
    taskgen: Seed,
    demos: Seed,
    hessian: Seed,
    respawn: Seed,
    ordering: Seed,
    basis: Seed,
}

impl Streams {
    fn new(config: &ExperimentConfig, trial: usize) -> Self {
        let master = Seed(config.master_seed);
        let trial_seed = master.child("trial").index(trial as u64);
        let data = if config.share_tasks { master.child("shared") } else { trial_seed };
        Streams {
            taskgen: data.child("taskgen"),
            demos: data.child("demos"),
            hessian: data.child("hessian"),
            respawn: data.child("respawn"),
            ordering: trial_seed.child("ordering"),
            basis: trial_seed.child("basis"),
        }
    }
}

/// Single-task results computed before the lifelong stream starts.
struct Prepared {
    record: TaskRecord,
    alpha: RewardParams,
    hessian: HessianEstimate,
    fit_s: f64,
    hessian_s: f64,
    fit_iterations: usize,
    fit_converged: bool,
}

fn generate_task(config: &ExperimentConfig, seed: Seed) -> Result<TaskInstance> {
    match config.environment {
        Environment::Objectworld => generate_objectworld_task(&config.objectworld, seed),
        Environment::Highway => generate_highway_task(&config.highway, seed),
    }
}

fn prepare(config: &ExperimentConfig, streams: &Streams, task_id: usize) -> Result<Prepared> {
    let task = generate_task(config, streams.taskgen.index(task_id as u64))?;
    let demos = generate_demonstrations(&task, config.demos(), config.demo_horizon, streams.demos.index(task_id as u64))?;
    let fit = fit_maxent(&task.mdp, &demos, &config.fit)?;
    let timer = Instant::now();
    let hessian = estimate_hessian(
        &task.mdp,
        &fit.alpha,
        config.hessian_samples,
        config.demo_horizon,
        streams.hessian.index(task_id as u64),
    )?;
    let hessian_s = timer.elapsed().as_secs_f64();
    Ok(Prepared {
        record: task.record(),
        alpha: fit.alpha,
        hessian,
        fit_s: fit.wall_time_seconds,
        hessian_s,
        fit_iterations: fit.iterations,
        fit_converged: fit.converged,
    })
}

fn task_error(trial: usize, task: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Trial { trial, task, source: Box::new(e) }
}

struct Evaluated {
    records: [(&'static str, f64, f64); 3],
    reoptimize_s: f64,
}

fn evaluate_task(
    config: &ExperimentConfig,
    streams: &Streams,
    basis: &SharedBasis,
    prepared: &Prepared,
    knowledge: Option<&TaskKnowledge>,
    task_id: usize,
    checkpoint: usize,
) -> Result<Evaluated> {
    let instance = TaskInstance::from_record(&TaskRecord {
        spec: prepared.record.spec.clone(),
        instance_seed: streams.respawn.index(task_id as u64).index(checkpoint as u64),
    })?;
    let (stale, reoptimized, reoptimize_s) = match knowledge {
        Some(k) => {
            let timer = Instant::now();
            let fresh = if config.reoptimize { Some(reoptimize_coefficients(basis, k)?) } else { None };
            let elapsed = timer.elapsed().as_secs_f64();
            let stale = reward_for_task(basis, k)?;
            let re = match fresh {
                Some(f) => reward_for_task(basis, &f)?,
                None => stale.clone(),
            };
            (stale, re, elapsed)
        }
        None => {
            // Not yet seen: encode against the current basis without updating it.
            let s = encode_task(basis, &prepared.alpha, &prepared.hessian)?;
            let theta = basis.reconstruct(&s)?;
            (theta.clone(), theta, 0.0)
        }
    };
    let score = |theta: &RewardParams| -> Result<(f64, f64)> {
        let learned = instance.mdp.state_rewards(theta)?;
        Ok((reward_difference(&learned, &instance.true_reward)?, value_difference(&instance, theta, config.demo_horizon)?))
    };
    let maxent = score(&prepared.alpha)?;
    let elirl = score(&stale)?;
    let elirl_re = if config.reoptimize { score(&reoptimized)? } else { (f64::NAN, f64::NAN) };
    Ok(Evaluated {
        records: [
            (METHOD_MAXENT, maxent.0, maxent.1),
            (METHOD_ELIRL, elirl.0, elirl.1),
            (METHOD_ELIRL_RE, elirl_re.0, elirl_re.1),
        ],
        reoptimize_s,
    })
}

/// Run one trial entirely in memory.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialOutput> {
    config.validate()?;
    let streams = Streams::new(config, trial);
    let n = config.num_tasks;

    let prepared: Vec<Prepared> = (0..n)
        .into_par_iter()
        .map(|t| prepare(config, &streams, t).map_err(task_error(trial, t)))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut streams.ordering.rng());
    let mut position = vec![0; n];
    for (i, &t) in order.iter().enumerate() {
        position[t] = i;
    }

    let d = config.feature_dim();
    let mut basis = init_basis(d, config.hyper, streams.basis, config.basis_init)?;
    let mut knowledge: Vec<Option<TaskKnowledge>> = vec![None; n];
    let mut update_s = vec![0.0; n];
    let mut tasks_before = vec![0; n];
    let mut reoptimize_s = vec![0.0; n];
    let checkpoints: BTreeSet<usize> = config.checkpoints().into_iter().collect();
    let mut metrics = Vec::new();
    let mut bases = Vec::new();

    for (i, &task) in order.iter().enumerate() {
        let p = &prepared[task];
        let timer = Instant::now();
        tasks_before[task] = basis.tasks_seen();
        let (k, _) = learn_from_estimates(&mut basis, task, p.alpha.clone(), p.hessian.clone()).map_err(task_error(trial, task))?;
        update_s[task] = timer.elapsed().as_secs_f64();
        knowledge[task] = Some(k);

        let seen = i + 1;
        if !checkpoints.contains(&seen) {
            continue;
        }
        let evaluated: Vec<Evaluated> = (0..n)
            .into_par_iter()
            .map(|t| evaluate_task(config, &streams, &basis, &prepared[t], knowledge[t].as_ref(), t, seen).map_err(task_error(trial, t)))
            .collect::<Result<_>>()?;
        for (t, ev) in evaluated.iter().enumerate() {
            if seen == n {
                reoptimize_s[t] = ev.reoptimize_s;
            }
            let p = &prepared[t];
            let elirl_time = p.fit_s + p.hessian_s + update_s[t];
            for (method, reward_diff, value_diff) in ev.records {
                if method == METHOD_ELIRL_RE && !config.reoptimize {
                    continue;
                }
                let train_time_s = if !config.record_timing {
                    0.0
                } else {
                    match method {
                        METHOD_MAXENT => p.fit_s,
                        METHOD_ELIRL => elirl_time,
                        _ => elirl_time + ev.reoptimize_s,
                    }
                };
                metrics.push(MetricRecord {
                    trial,
                    checkpoint: seen,
                    task_id: t,
                    task_order_index: position[t],
                    method: method.to_string(),
                    reward_diff,
                    value_diff,
                    train_time_s,
                });
            }
        }
        bases.push((seen, basis.to_json(false)?));
    }

    let timings = (0..n)
        .map(|t| TaskTiming {
            trial,
            task_id: t,
            task_order_index: position[t],
            fit_s: prepared[t].fit_s,
            hessian_s: prepared[t].hessian_s,
            update_s: update_s[t],
            tasks_before: tasks_before[t],
            reoptimize_s: reoptimize_s[t],
            fit_iterations: prepared[t].fit_iterations,
            fit_converged: prepared[t].fit_converged,
        })
        .collect();
    let entries: Vec<TaskEntry> = (0..n)
        .map(|t| TaskEntry { task_id: t, task_order_index: position[t], record: prepared[t].record.clone() })
        .collect();
    Ok(TrialOutput {
        trial,
        metrics,
        timings,
        order,
        tasks_json: serde_json::to_string_pretty(&entries)?,
        bases,
    })
}

/// What [`run_experiment`] leaves behind.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub trials: Vec<TrialOutput>,
    /// Trials that failed, with their diagnostics.
    pub failures: Vec<(usize, Error)>,
}

pub const METRICS_HEADER: [&str; 8] = ["trial", "checkpoint", "task_id", "task_order_index", "method", "reward_diff", "value_diff", "train_time_s"];

pub fn write_metrics(path: &Path, records: &[MetricRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record(METRICS_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_trial_artifacts(out: &Path, trial: &TrialOutput) -> Result<()> {
    fs::write(out.join("tasks").join(format!("trial{}.json", trial.trial)), &trial.tasks_json)?;
    for (checkpoint, json) in &trial.bases {
        fs::write(out.join("basis").join(format!("trial{}_ckpt{}.json", trial.trial, checkpoint)), json)?;
    }
    Ok(())
}

/// Run every trial and write all artifacts under `config.output_dir`.
///
/// Trials that complete are written even when others fail; the returned
/// outcome lists the failures and the caller decides the exit status.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let out = &config.output_dir;
    fs::create_dir_all(out.join("tasks"))?;
    fs::create_dir_all(out.join("basis"))?;
    fs::write(out.join("config.snapshot"), config.snapshot())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<TrialOutput>> = pool.install(|| (0..config.num_trials).into_par_iter().map(|t| run_trial(config, t)).collect());

    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => {
                write_trial_artifacts(out, &o)?;
                trials.push(o);
            }
            Err(e) => failures.push((t, e)),
        }
    }
    let metrics: Vec<MetricRecord> = trials.iter().flat_map(|t| t.metrics.iter().cloned()).collect();
    write_metrics(&out.join("metrics.csv"), &metrics)?;
    let mut w = csv::Writer::from_path(out.join("timing.csv"))?;
    for timing in trials.iter().flat_map(|t| &t.timings) {
        w.serialize(timing)?;
    }
    w.flush()?;
    Ok(ExperimentOutcome { trials, failures })
}

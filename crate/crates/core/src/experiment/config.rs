//! Flat `key = value` experiment configuration.
//!
//! Keys are spelled exactly like the `run` subcommand's long flags, so any
//! key in a file can be overridden on the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::elirl::{BasisInit, HyperParams};
use crate::envs::{HighwayConfig, ObjectworldConfig};
use crate::error::{Error, Result};
use crate::maxent::FitOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Environment {
    Objectworld,
    Highway,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::Objectworld => "objectworld",
            Environment::Highway => "highway",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub environment: Environment,
    pub num_tasks: usize,
    pub num_trials: usize,
    /// Defaults to 32 on Objectworld and 256 on Highway.
    pub demos_per_task: Option<usize>,
    pub demo_horizon: usize,
    pub checkpoint_every: usize,
    pub hyper: HyperParams,
    pub basis_init: BasisInit,
    pub hessian_samples: usize,
    pub fit: FitOptions,
    pub reoptimize: bool,
    /// Draw the same tasks, demonstrations and evaluation instances in every
    /// trial so that only the task order and basis initialisation vary.
    pub share_tasks: bool,
    /// Write measured wall times into `metrics.csv` (otherwise zeros, which
    /// keeps the file byte-reproducible).
    pub record_timing: bool,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// 0 means one per available core.
    pub workers: usize,
    pub objectworld: ObjectworldConfig,
    pub highway: HighwayConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: Environment::Objectworld,
            num_tasks: 100,
            num_trials: 20,
            demos_per_task: None,
            demo_horizon: 16,
            checkpoint_every: 10,
            hyper: HyperParams::default(),
            basis_init: BasisInit::ColumnOverwrite,
            hessian_samples: 1000,
            fit: FitOptions::default(),
            reoptimize: true,
            share_tasks: false,
            record_timing: false,
            master_seed: 0,
            output_dir: PathBuf::from("results"),
            workers: 0,
            objectworld: ObjectworldConfig::default(),
            highway: HighwayConfig::default(),
        }
    }
}

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("env", "environment: objectworld or highway"),
    ("tasks", "number of tasks per trial"),
    ("trials", "number of independent trials"),
    ("demos", "demonstrations per task"),
    ("horizon", "demonstration horizon"),
    ("checkpoint-every", "evaluate all tasks after every this many tasks"),
    ("k", "latent basis size"),
    ("lambda", "basis regularisation weight"),
    ("mu", "sparsity weight on task coefficients"),
    ("basis-init", "column_overwrite or random"),
    ("hessian-samples", "sampled paths per Hessian estimate"),
    ("step-size", "MaxEnt gradient-ascent step size"),
    ("max-iterations", "MaxEnt iteration cap"),
    ("grad-tolerance", "MaxEnt gradient-norm stopping tolerance"),
    ("step-halving", "halve the MaxEnt step when the likelihood drops"),
    ("reoptimize", "also evaluate with re-optimized task coefficients"),
    ("share-tasks", "reuse the same tasks in every trial"),
    ("record-timing", "write wall times into metrics.csv"),
    ("seed", "master seed"),
    ("out", "output directory"),
    ("workers", "worker threads (0 = all cores)"),
    ("success-prob", "probability that an action has its intended effect"),
    ("discount", "discount factor"),
    ("grid-size", "Objectworld grid side length"),
    ("outer-colors", "Objectworld outer colour count"),
    ("inner-colors", "Objectworld inner (distractor) colour count"),
    ("object-density", "Objectworld fraction of cells holding an object"),
    ("distance-bins", "Objectworld distance thresholds per colour"),
    ("influence-radius", "Objectworld reward patch radius"),
    ("lanes", "Highway lane count"),
    ("speeds", "Highway speed count"),
    ("road-length", "Highway ring-road length in cells"),
    ("traffic-density", "Highway fraction of cells holding a car"),
    ("distance-features", "Highway gap-threshold feature count"),
];

/// Keys whose bare flag (`--reoptimize`) means `true`.
pub const BOOLEAN_KEYS: &[&str] = &["reoptimize", "share-tasks", "record-timing", "step-halving"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse value {value:?} for key {key:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("cannot parse value {value:?} for key {key:?} as a boolean"))),
    }
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "env" => {
                self.environment = match v {
                    "objectworld" => Environment::Objectworld,
                    "highway" => Environment::Highway,
                    _ => return Err(Error::InvalidConfig(format!("unknown environment {v:?}"))),
                }
            }
            "tasks" => self.num_tasks = parse(key, v)?,
            "trials" => self.num_trials = parse(key, v)?,
            "demos" => self.demos_per_task = Some(parse(key, v)?),
            "horizon" => self.demo_horizon = parse(key, v)?,
            "checkpoint-every" => self.checkpoint_every = parse(key, v)?,
            "k" => self.hyper.k = parse(key, v)?,
            "lambda" => self.hyper.lambda = parse(key, v)?,
            "mu" => self.hyper.mu = parse(key, v)?,
            "basis-init" => {
                self.basis_init = match v {
                    "column_overwrite" => BasisInit::ColumnOverwrite,
                    "random" => BasisInit::Random,
                    _ => return Err(Error::InvalidConfig(format!("unknown basis-init {v:?}"))),
                }
            }
            "hessian-samples" => self.hessian_samples = parse(key, v)?,
            "step-size" => self.fit.step_size = parse(key, v)?,
            "max-iterations" => self.fit.max_iterations = parse(key, v)?,
            "grad-tolerance" => self.fit.grad_norm_tolerance = parse(key, v)?,
            "step-halving" => self.fit.step_halving = parse_bool(key, v)?,
            "reoptimize" => self.reoptimize = parse_bool(key, v)?,
            "share-tasks" => self.share_tasks = parse_bool(key, v)?,
            "record-timing" => self.record_timing = parse_bool(key, v)?,
            "seed" => self.master_seed = parse(key, v)?,
            "out" => self.output_dir = PathBuf::from(v),
            "workers" => self.workers = parse(key, v)?,
            "success-prob" => {
                let p = parse(key, v)?;
                self.objectworld.success_prob = p;
                self.highway.success_prob = p;
            }
            "discount" => {
                let g = parse(key, v)?;
                self.objectworld.discount = g;
                self.highway.discount = g;
            }
            "grid-size" => self.objectworld.grid_size = parse(key, v)?,
            "outer-colors" => {
                let n: usize = parse(key, v)?;
                self.objectworld.num_outer_colors = n;
                self.objectworld.max_active_colors = self.objectworld.max_active_colors.min(n);
                self.objectworld.min_active_colors = self.objectworld.min_active_colors.min(n);
            }
            "inner-colors" => self.objectworld.num_inner_colors = parse(key, v)?,
            "object-density" => self.objectworld.object_density = parse(key, v)?,
            "distance-bins" => self.objectworld.distance_bins = parse(key, v)?,
            "influence-radius" => self.objectworld.influence_radius = parse(key, v)?,
            "lanes" => self.highway.lanes = parse(key, v)?,
            "speeds" => self.highway.speeds = parse(key, v)?,
            "road-length" => self.highway.road_length = parse(key, v)?,
            "traffic-density" => self.highway.traffic_density = parse(key, v)?,
            "distance-features" => self.highway.distance_feature_count = parse(key, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Apply a config file on top of `self`. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse { line: i + 1, message: format!("expected key = value, got {raw:?}") });
            };
            self.set(key.trim(), value).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(config)
    }

    pub fn demos(&self) -> usize {
        self.demos_per_task.unwrap_or(match self.environment {
            Environment::Objectworld => 32,
            Environment::Highway => 256,
        })
    }

    pub fn feature_dim(&self) -> usize {
        match self.environment {
            Environment::Objectworld => self.objectworld.feature_dim(),
            Environment::Highway => self.highway.feature_dim(),
        }
    }

    /// Tasks-seen counts at which every task is evaluated: each multiple of
    /// `checkpoint_every`, plus the final task count.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (1..=self.num_tasks / self.checkpoint_every.max(1)).map(|c| c * self.checkpoint_every).collect();
        if out.last() != Some(&self.num_tasks) {
            out.push(self.num_tasks);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.num_tasks == 0 || self.num_trials == 0 {
            return bad("tasks and trials must be positive".into());
        }
        if self.checkpoint_every == 0 {
            return bad("checkpoint-every must be positive".into());
        }
        if self.num_tasks < self.hyper.k {
            return bad(format!("tasks ({}) must be at least k ({})", self.num_tasks, self.hyper.k));
        }
        if self.demos() == 0 || self.demo_horizon == 0 {
            return bad("demos and horizon must be positive".into());
        }
        if self.hessian_samples < 2 {
            return bad("hessian-samples must be at least 2".into());
        }
        if self.hyper.k == 0 || self.hyper.k > self.feature_dim() {
            return bad(format!("k must lie in 1..={}", self.feature_dim()));
        }
        match self.environment {
            Environment::Objectworld => self.objectworld.validate(),
            Environment::Highway => self.highway.validate(),
        }
    }

    /// Every key with its effective value, one per line, sorted; the output
    /// parses back to an identical config.
    pub fn snapshot(&self) -> String {
        let ow = &self.objectworld;
        let hw = &self.highway;
        let init = match self.basis_init {
            BasisInit::ColumnOverwrite => "column_overwrite",
            BasisInit::Random => "random",
        };
        let mut pairs: Vec<(&str, String)> = vec![
            ("env", self.environment.name().into()),
            ("tasks", self.num_tasks.to_string()),
            ("trials", self.num_trials.to_string()),
            ("demos", self.demos().to_string()),
            ("horizon", self.demo_horizon.to_string()),
            ("checkpoint-every", self.checkpoint_every.to_string()),
            ("k", self.hyper.k.to_string()),
            ("lambda", self.hyper.lambda.to_string()),
            ("mu", self.hyper.mu.to_string()),
            ("basis-init", init.into()),
            ("hessian-samples", self.hessian_samples.to_string()),
            ("step-size", self.fit.step_size.to_string()),
            ("max-iterations", self.fit.max_iterations.to_string()),
            ("grad-tolerance", self.fit.grad_norm_tolerance.to_string()),
            ("step-halving", self.fit.step_halving.to_string()),
            ("reoptimize", self.reoptimize.to_string()),
            ("share-tasks", self.share_tasks.to_string()),
            ("record-timing", self.record_timing.to_string()),
            ("seed", self.master_seed.to_string()),
            ("out", self.output_dir.display().to_string()),
            ("workers", self.workers.to_string()),
            ("grid-size", ow.grid_size.to_string()),
            ("outer-colors", ow.num_outer_colors.to_string()),
            ("inner-colors", ow.num_inner_colors.to_string()),
            ("object-density", ow.object_density.to_string()),
            ("distance-bins", ow.distance_bins.to_string()),
            ("influence-radius", ow.influence_radius.to_string()),
            ("lanes", hw.lanes.to_string()),
            ("speeds", hw.speeds.to_string()),
            ("road-length", hw.road_length.to_string()),
            ("traffic-density", hw.traffic_density.to_string()),
            ("distance-features", hw.distance_feature_count.to_string()),
        ];
        let env_cfg = match self.environment {
            Environment::Objectworld => (ow.success_prob, ow.discount),
            Environment::Highway => (hw.success_prob, hw.discount),
        };
        pairs.push(("success-prob", env_cfg.0.to_string()));
        pairs.push(("discount", env_cfg.1.to_string()));
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

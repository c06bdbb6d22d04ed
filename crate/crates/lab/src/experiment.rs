//! Parallel, seed-deterministic regret experiments.
//!
//! Run `r` draws policy randomness from stream `2r` and environment
//! randomness from stream `2r + 1` of the master seed, so results do not
//! depend on how runs are scheduled across threads.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ftpl_core::policies::{Ftpl, Ftrl, ResampleCap};
use ftpl_core::rng::stream;
use ftpl_core::{BanditPolicy, LossModel, PolicyState};

use crate::config::{ExperimentConfig, Resolved};
use crate::io::write_table;
use crate::specs::PolicySpec;
use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub policy: String,
    pub env: String,
    pub arms: usize,
    pub horizon: u64,
    pub runs: u64,
    pub master_seed: u64,
    /// `(policy stream, environment stream)` of every run.
    pub run_streams: Vec<(u64, u64)>,
    pub m: f64,
    /// Perturbation law, FTPL only.
    pub dist: Option<String>,
    pub regularizer: Option<String>,
    pub stochastic: bool,
    pub gaps: Option<Vec<f64>>,
    /// Resampling cap rule and its value at `T`, FTPL only.
    pub cap_rule: Option<String>,
    pub cap_at_horizon: Option<u64>,
    /// `(1 - w)^M / w` at `M = cap_at_horizon`, `w = 1/sqrt(T)`.
    pub cap_bias_bound: Option<f64>,
    /// Rounds where resampling hit the cap, summed over runs.
    pub cap_hits: Option<u64>,
    /// Largest FTRL KKT residual over all runs and rounds.
    pub max_kkt: Option<f64>,
    pub threads: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub arm: usize,
    pub loss: f64,
    pub cum_regret: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    /// Regret at each checkpoint.
    pub curve: Vec<f64>,
    pub cap_hits: u64,
    pub max_kkt: f64,
    pub trace: Option<Vec<TraceRow>>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub checkpoints: Vec<u64>,
    pub runs: Vec<RunOutcome>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub metadata: Metadata,
}

enum Learner {
    Ftpl(Ftpl),
    Ftrl(Ftrl),
}

impl Learner {
    fn new(spec: &PolicySpec, arms: usize, rng: ftpl_core::rng::ChaCha8Rng) -> Result<Self, LabError> {
        Ok(match spec {
            PolicySpec::Ftpl { dist, m, cap } => {
                let s = PolicyState::new(arms, *m, rng).map_err(LabError::numeric)?.with_cap(*cap);
                Learner::Ftpl(Ftpl::new(s, dist.clone()))
            }
            PolicySpec::Ftrl { regularizer, m } => {
                let s = PolicyState::new(arms, *m, rng).map_err(LabError::numeric)?;
                Learner::Ftrl(Ftrl::new(s, *regularizer))
            }
        })
    }

    fn policy(&mut self) -> &mut dyn BanditPolicy {
        match self {
            Learner::Ftpl(p) => p,
            Learner::Ftrl(p) => p,
        }
    }
}

/// One run of `T` rounds; `trace` keeps every round.
pub fn run_once(res: &Resolved, horizon: u64, seed: u64, run: u64, trace: bool) -> Result<RunOutcome, LabError> {
    let env: &LossModel = &res.env;
    let k = env.arms();
    let mut learner = Learner::new(&res.policy, k, stream(seed, 2 * run))?;
    let mut env_rng = stream(seed, 2 * run + 1);
    let mut tracker = ftpl_core::environments::RegretTracker::new(env);
    let mut loss = vec![0.0; k];
    let mut curve = Vec::with_capacity(res.checkpoints.len());
    let mut next = res.checkpoints.iter().peekable();
    let mut rows = trace.then(Vec::new);
    for t in 1..=horizon {
        let policy = learner.policy();
        let arm = policy.select().map_err(LabError::numeric)?;
        env.next_loss_into(t, &mut env_rng, &mut loss).map_err(LabError::numeric)?;
        policy.update(arm, loss[arm]);
        tracker.record(arm, &loss);
        if let Some(rows) = rows.as_mut() {
            rows.push(TraceRow {
                t,
                arm,
                loss: loss[arm],
                cum_regret: tracker.value(),
            });
        }
        if next.peek() == Some(&&t) {
            curve.push(tracker.value());
            next.next();
        }
    }
    let (cap_hits, max_kkt) = match &learner {
        Learner::Ftpl(p) => (p.cap_hits, 0.0),
        Learner::Ftrl(p) => (0, p.max_kkt),
    };
    Ok(RunOutcome {
        curve,
        cap_hits,
        max_kkt,
        trace: rows,
    })
}

/// Thread count: explicit setting, else `PLL_THREADS`, else all cores.
pub fn thread_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("PLL_THREADS").ok()?.parse().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn mean_and_stderr(runs: &[RunOutcome], j: usize) -> (f64, f64) {
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.curve[j]).sum::<f64>() / n;
    if runs.len() < 2 {
        return (mean, 0.0);
    }
    let var = runs.iter().map(|r| (r.curve[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every run of `cfg`; run 0 keeps its trace when `trace` is set.
pub fn run_experiment(cfg: &ExperimentConfig, trace: bool) -> Result<ExperimentResult, LabError> {
    let res = cfg.resolve()?;
    let ex = &cfg.experiment;
    let threads = thread_count(cfg.output.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Numeric(e.to_string()))?;
    let start = Instant::now();
    let runs: Vec<RunOutcome> = pool.install(|| {
        (0..ex.runs)
            .into_par_iter()
            .map(|r| run_once(&res, ex.horizon, ex.seed, r, trace && r == 0))
            .collect::<Result<_, _>>()
    })?;
    let wall = start.elapsed().as_secs_f64();

    let (mean, stderr) = (0..res.checkpoints.len()).map(|j| mean_and_stderr(&runs, j)).unzip();
    let k = res.env.arms();
    let (dist, regularizer, cap_rule, cap_at_horizon) = match &res.policy {
        PolicySpec::Ftpl { dist, cap, .. } => {
            let mut probe = PolicyState::new(k, res.policy.m(), stream(0, 0)).map_err(LabError::numeric)?.with_cap(*cap);
            probe.t = ex.horizon;
            let rule = match cap {
                ResampleCap::Sqrt { factor } => format!("ceil({factor} K sqrt(t))"),
                ResampleCap::Fixed(m) => format!("fixed {m}"),
            };
            (Some(format!("{:?}", dist.kind())), None, Some(rule), Some(probe.cap()))
        }
        PolicySpec::Ftrl { regularizer, .. } => (None, Some(format!("{regularizer:?}")), None, None),
    };
    let cap_bias_bound = cap_at_horizon.map(|m| {
        let w = 1.0 / (ex.horizon as f64).sqrt();
        (m as f64 * (-w).ln_1p()).exp() / w
    });
    let is_ftpl = matches!(res.policy, PolicySpec::Ftpl { .. });
    let metadata = Metadata {
        config_hash: res.hash.clone(),
        policy: ex.policy.clone(),
        env: ex.env.clone(),
        arms: k,
        horizon: ex.horizon,
        runs: ex.runs,
        master_seed: ex.seed,
        run_streams: (0..ex.runs).map(|r| (2 * r, 2 * r + 1)).collect(),
        m: res.policy.m(),
        dist,
        regularizer,
        stochastic: res.env.is_stochastic(),
        gaps: res.env.gaps(),
        cap_rule,
        cap_at_horizon,
        cap_bias_bound,
        cap_hits: is_ftpl.then(|| runs.iter().map(|r| r.cap_hits).sum()),
        max_kkt: (!is_ftpl).then(|| runs.iter().map(|r| r.max_kkt).fold(0.0, f64::max)),
        threads,
        wall_time_s: wall,
    };
    Ok(ExperimentResult {
        checkpoints: res.checkpoints,
        runs,
        mean,
        stderr,
        metadata,
    })
}

/// `regret.csv` -> `regret.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

impl ExperimentResult {
    /// Regret CSV: `t, mean, stderr, run_0, ...`, headed by the config hash.
    pub fn write_csv(&self, path: &Path) -> Result<(), LabError> {
        let md = &self.metadata;
        let comments = vec![
            format!("config_sha256={}", md.config_hash),
            format!("policy={}", md.policy),
            format!("env={}", md.env),
            format!("horizon={} runs={} seed={}", md.horizon, md.runs, md.master_seed),
        ];
        let mut header = vec![String::from("t"), "mean".into(), "stderr".into()];
        header.extend((0..self.runs.len()).map(|r| format!("run_{r}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = self
            .checkpoints
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let mut row = vec![*t as f64, self.mean[j], self.stderr[j]];
                row.extend(self.runs.iter().map(|r| r.curve[j]));
                row
            })
            .collect();
        write_table(path, &comments, &header, &rows)
    }

    pub fn write_metadata(&self, path: &Path) -> Result<(), LabError> {
        let text = serde_json::to_string_pretty(&self.metadata).map_err(|e| LabError::Numeric(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }

    /// Trace of run 0: `t, arm, loss, cum_regret`.
    pub fn write_trace(&self, path: &Path) -> Result<(), LabError> {
        let Some(trace) = self.runs.first().and_then(|r| r.trace.as_ref()) else {
            return Err(LabError::Numeric("experiment was run without a trace".into()));
        };
        let rows: Vec<Vec<f64>> = trace
            .iter()
            .map(|r| vec![r.t as f64, r.arm as f64, r.loss, r.cum_regret])
            .collect();
        let comments = vec![format!("config_sha256={}", self.metadata.config_hash), "run=0".into()];
        write_table(path, &comments, &["t", "arm", "loss", "cum_regret"], &rows)
    }
}

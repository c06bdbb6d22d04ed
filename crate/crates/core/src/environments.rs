//! Loss generators and regret accounting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum EnvError {
    InvalidParameter(&'static str),
    /// A fixed schedule was asked for a round past its last row.
    ScheduleExhausted { t: u64, rows: usize },
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::InvalidParameter(m) => write!(f, "invalid environment: {m}"),
            EnvError::ScheduleExhausted { t, rows } => {
                write!(f, "round {t} is past the end of a {rows}-row schedule")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LossModel {
    /// Independent Bernoulli losses with means `mu`.
    StochasticBernoulli { mu: Vec<f64> },
    /// Row `t-1` is the loss vector of round `t`.
    FixedSchedule { rows: Vec<Vec<f64>> },
    /// Bernoulli losses whose means alternate between `mu1` and `mu2` every
    /// `phase` rounds, starting with `mu1`.
    SwitchingAdversary { phase: u64, mu1: Vec<f64>, mu2: Vec<f64> },
}

fn check_unit(v: &[f64]) -> Result<(), EnvError> {
    if v.is_empty() {
        return Err(EnvError::InvalidParameter("need at least one arm"));
    }
    if v.iter().all(|x| (0.0..=1.0).contains(x)) {
        Ok(())
    } else {
        Err(EnvError::InvalidParameter("losses and means must lie in [0, 1]"))
    }
}

impl LossModel {
    pub fn bernoulli(mu: Vec<f64>) -> Result<Self, EnvError> {
        check_unit(&mu)?;
        Ok(LossModel::StochasticBernoulli { mu })
    }

    pub fn schedule(rows: Vec<Vec<f64>>) -> Result<Self, EnvError> {
        let k = rows.first().map(Vec::len).ok_or(EnvError::InvalidParameter("empty schedule"))?;
        for r in &rows {
            if r.len() != k {
                return Err(EnvError::InvalidParameter("schedule rows differ in length"));
            }
            check_unit(r)?;
        }
        Ok(LossModel::FixedSchedule { rows })
    }

    pub fn switching(phase: u64, mu1: Vec<f64>, mu2: Vec<f64>) -> Result<Self, EnvError> {
        if phase == 0 {
            return Err(EnvError::InvalidParameter("phase length must be positive"));
        }
        if mu1.len() != mu2.len() {
            return Err(EnvError::InvalidParameter("mean vectors differ in length"));
        }
        check_unit(&mu1)?;
        check_unit(&mu2)?;
        Ok(LossModel::SwitchingAdversary { phase, mu1, mu2 })
    }

    pub fn arms(&self) -> usize {
        match self {
            LossModel::StochasticBernoulli { mu } => mu.len(),
            LossModel::FixedSchedule { rows } => rows[0].len(),
            LossModel::SwitchingAdversary { mu1, .. } => mu1.len(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, LossModel::StochasticBernoulli { .. })
    }

    /// Best arm of a stochastic model (lowest index on ties).
    pub fn i_star(&self) -> Option<usize> {
        let LossModel::StochasticBernoulli { mu } = self else {
            return None;
        };
        let mut best = 0;
        for (i, m) in mu.iter().enumerate() {
            if *m < mu[best] {
                best = i;
            }
        }
        Some(best)
    }

    /// `Delta_i = mu_i - mu_{i*}` for stochastic models.
    pub fn gaps(&self) -> Option<Vec<f64>> {
        let LossModel::StochasticBernoulli { mu } = self else {
            return None;
        };
        let best = mu[self.i_star()?];
        Some(mu.iter().map(|m| m - best).collect())
    }

    /// Smallest positive gap, when the best arm is unique.
    pub fn min_gap(&self) -> Option<f64> {
        let gaps = self.gaps()?;
        let i_star = self.i_star()?;
        let d = gaps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != i_star)
            .map(|(_, g)| *g)
            .fold(f64::INFINITY, f64::min);
        (d > 0.0 && d.is_finite()).then_some(d)
    }

    /// Fills `out` with the loss vector of round `t ≥ 1`.
    pub fn next_loss_into<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut [f64]) -> Result<(), EnvError> {
        if t == 0 {
            return Err(EnvError::InvalidParameter("rounds start at 1"));
        }
        match self {
            LossModel::StochasticBernoulli { mu } => bernoulli_into(mu, rng, out),
            LossModel::FixedSchedule { rows } => {
                let row = rows.get((t - 1) as usize).ok_or(EnvError::ScheduleExhausted { t, rows: rows.len() })?;
                out.copy_from_slice(row);
            }
            LossModel::SwitchingAdversary { phase, mu1, mu2 } => {
                let mu = if ((t - 1) / phase).is_multiple_of(2) { mu1 } else { mu2 };
                bernoulli_into(mu, rng, out);
            }
        }
        Ok(())
    }

    pub fn next_loss<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> Result<Vec<f64>, EnvError> {
        let mut out = vec![0.0; self.arms()];
        self.next_loss_into(t, rng, &mut out)?;
        Ok(out)
    }
}

fn bernoulli_into<R: Rng + ?Sized>(mu: &[f64], rng: &mut R, out: &mut [f64]) {
    for (o, m) in out.iter_mut().zip(mu) {
        // draw even for degenerate means so the stream layout is fixed
        let u: f64 = rng.random();
        *o = if u < *m { 1.0 } else { 0.0 };
    }
}

/// Running regret: pseudo-regret (gap sum) for stochastic models, realized
/// regret against the best fixed arm otherwise.
#[derive(Clone, Debug)]
pub struct RegretTracker {
    gaps: Option<Vec<f64>>,
    arm_totals: Vec<f64>,
    played_total: f64,
    pseudo: f64,
}

impl RegretTracker {
    pub fn new(model: &LossModel) -> Self {
        RegretTracker {
            gaps: model.gaps(),
            arm_totals: vec![0.0; model.arms()],
            played_total: 0.0,
            pseudo: 0.0,
        }
    }

    pub fn record(&mut self, arm: usize, loss: &[f64]) {
        for (a, l) in self.arm_totals.iter_mut().zip(loss) {
            *a += l;
        }
        self.played_total += loss[arm];
        if let Some(g) = &self.gaps {
            self.pseudo += g[arm];
        }
    }

    pub fn value(&self) -> f64 {
        match self.gaps {
            Some(_) => self.pseudo,
            None => {
                let best = self.arm_totals.iter().copied().fold(f64::INFINITY, f64::min);
                self.played_total - best
            }
        }
    }
}

/// Regret after every round of a trace of `(arm, loss vector)` pairs.
pub fn regret(trace: &[(usize, Vec<f64>)], model: &LossModel) -> (Vec<f64>, f64) {
    let mut tracker = RegretTracker::new(model);
    let curve: Vec<f64> = trace
        .iter()
        .map(|(arm, loss)| {
            tracker.record(*arm, loss);
            tracker.value()
        })
        .collect();
    let last = curve.last().copied().unwrap_or(0.0);
    (curve, last)
}

/// Checkpoints `{⌈1.25^k⌉} ∩ [1, T]` plus `T`, strictly increasing.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut x = 1.0f64;
    loop {
        let t = x.ceil() as u64;
        if t > horizon {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        x *= 1.25;
    }
    if out.last() != Some(&horizon) && horizon > 0 {
        out.push(horizon);
    }
    out
}

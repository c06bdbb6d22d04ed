//! FTPL with geometric resampling and FTRL with Tsallis or Shannon
//! regularizers, behind one [`BanditPolicy`] interface.
//!
//! Both learners use the learning rate `eta_t = m / sqrt(t)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::distributions::PerturbationDistribution;
use crate::math::softmin;
use crate::rng::ChaCha8Rng;
use crate::roots::brent;
use crate::selection::perturbed_leader;

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyError {
    InvalidParameter(&'static str),
    SolverDiverged { residual: f64 },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::InvalidParameter(m) => write!(f, "invalid policy parameter: {m}"),
            PolicyError::SolverDiverged { residual } => {
                write!(f, "simplex solver did not converge (residual {residual:e})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    /// `-(1/(1-beta)) Σ p_i^beta`
    Tsallis { tsallis_beta: f64 },
    /// `Σ p_i ln p_i`
    Shannon,
}

/// Truncation of the geometric resampling loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResampleCap {
    /// `⌈factor · K · sqrt(t)⌉`
    Sqrt { factor: f64 },
    Fixed(u64),
}

impl Default for ResampleCap {
    fn default() -> Self {
        ResampleCap::Sqrt { factor: 2.0 }
    }
}

#[derive(Clone, Debug)]
pub struct PolicyState {
    pub t: u64,
    pub m: f64,
    pub lhat: Vec<f64>,
    pub rng: ChaCha8Rng,
    pub resample_cap: ResampleCap,
    pub last_w: Option<Vec<f64>>,
    scratch: Vec<f64>,
}

impl PolicyState {
    pub fn new(k: usize, m: f64, rng: ChaCha8Rng) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::InvalidParameter("need at least one arm"));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(PolicyError::InvalidParameter("m must be positive"));
        }
        Ok(PolicyState {
            t: 1,
            m,
            lhat: vec![0.0; k],
            rng,
            resample_cap: ResampleCap::default(),
            last_w: None,
            scratch: vec![0.0; k],
        })
    }

    pub fn with_cap(mut self, cap: ResampleCap) -> Self {
        self.resample_cap = cap;
        self
    }

    pub fn arms(&self) -> usize {
        self.lhat.len()
    }

    pub fn eta(&self) -> f64 {
        self.m / (self.t as f64).sqrt()
    }

    /// Current resampling cap `M`.
    pub fn cap(&self) -> u64 {
        match self.resample_cap {
            ResampleCap::Sqrt { factor } => {
                (factor * self.arms() as f64 * (self.t as f64).sqrt()).ceil().max(1.0) as u64
            }
            ResampleCap::Fixed(m) => m.max(1),
        }
    }

    /// Perturbed leader `argmin_i Lhat_i - r_i/eta_t` for a fresh draw.
    pub fn ftpl_select(&mut self, dist: &PerturbationDistribution) -> usize {
        dist.sample_into(&mut self.rng, &mut self.scratch);
        perturbed_leader(&self.lhat, &self.scratch, 1.0 / self.eta())
    }

    /// Number of fresh draws until `chosen` leads again (inclusive), capped
    /// at `M`. Estimates `1/w_chosen`.
    pub fn geometric_resample(&mut self, dist: &PerturbationDistribution, chosen: usize) -> u64 {
        let cap = self.cap();
        for count in 1..=cap {
            if self.ftpl_select(dist) == chosen {
                return count;
            }
        }
        cap
    }

    pub fn ftpl_update(&mut self, arm: usize, loss: f64, west: f64) {
        self.lhat[arm] += loss * west;
        self.t += 1;
    }

    /// Solves the regularized leader on the simplex and samples an arm from it.
    pub fn ftrl_select(&mut self, reg: Regularizer) -> Result<(usize, Vec<f64>), PolicyError> {
        let p = ftrl_weights(&self.lhat, self.eta(), reg)?;
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut arm = p.len() - 1;
        for (i, w) in p.iter().enumerate() {
            acc += w;
            if u < acc {
                arm = i;
                break;
            }
        }
        self.last_w = Some(p.clone());
        Ok((arm, p))
    }

    pub fn ftrl_update(&mut self, arm: usize, loss: f64, p: &[f64]) {
        self.lhat[arm] += loss / p[arm];
        self.t += 1;
    }
}

/// `∂V/∂p_i`.
pub fn regularizer_gradient(reg: Regularizer, p: f64) -> f64 {
    match reg {
        Regularizer::Tsallis { tsallis_beta: b } => -b / (1.0 - b) * p.powf(b - 1.0),
        Regularizer::Shannon => p.ln() + 1.0,
    }
}

/// `max_i |eta Lhat_i + ∂V/∂p_i - c|` minimized over the multiplier `c`.
pub fn kkt_residual(lhat: &[f64], eta: f64, reg: Regularizer, p: &[f64]) -> f64 {
    let lo = eta * lhat.iter().copied().fold(f64::INFINITY, f64::min);
    let (mn, mx) = lhat
        .iter()
        .zip(p)
        .map(|(l, w)| eta * l - lo + regularizer_gradient(reg, *w))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    0.5 * (mx - mn)
}

/// Exact FTRL weights `argmin_p <Lhat, p> + V(p)/eta` on the simplex.
pub fn ftrl_weights(lhat: &[f64], eta: f64, reg: Regularizer) -> Result<Vec<f64>, PolicyError> {
    match reg {
        Regularizer::Shannon => {
            let scaled: Vec<f64> = lhat.iter().map(|l| eta * l).collect();
            Ok(softmin(&scaled))
        }
        Regularizer::Tsallis { tsallis_beta: b } => {
            if !(b > 0.0 && b < 1.0) {
                return Err(PolicyError::InvalidParameter("Tsallis beta must lie in (0, 1)"));
            }
            tsallis_weights(lhat, eta, b)
        }
    }
}

fn tsallis_weights(lhat: &[f64], eta: f64, b: f64) -> Result<Vec<f64>, PolicyError> {
    let k = lhat.len() as f64;
    let lo = lhat.iter().copied().fold(f64::INFINITY, f64::min);
    // shift so the smallest score is 0; the multiplier then lies in [lo_c, hi_c]
    let x: Vec<f64> = lhat.iter().map(|l| eta * (l - lo)).collect();
    let a = b / (1.0 - b);
    let e = 1.0 / (1.0 - b);
    let weight = |c: f64, xi: f64| (a / (xi - c)).powf(e);
    let total = |c: f64| x.iter().map(|xi| weight(c, *xi)).sum::<f64>() - 1.0;
    let lo_c = -a * k.powf(1.0 - b);
    let hi_c = -a;
    let mut c = brent(total, lo_c, hi_c, 1e-15, 1e-14, 400).map_err(|_| PolicyError::SolverDiverged {
        residual: f64::NAN,
    })?;
    // polish with Newton on the normalization
    for _ in 0..3 {
        let f = total(c);
        let df: f64 = x.iter().map(|xi| e * weight(c, *xi) / (xi - c)).sum();
        if df > 0.0 {
            let next = c - f / df;
            if next < 0.0 && next.is_finite() {
                c = next;
            }
        }
    }
    let mut p: Vec<f64> = x.iter().map(|xi| weight(c, *xi)).collect();
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 || !s.is_finite() {
        return Err(PolicyError::SolverDiverged { residual: (s - 1.0).abs() });
    }
    p.iter_mut().for_each(|w| *w /= s);
    Ok(p)
}

/// A bandit learner driven one round at a time.
pub trait BanditPolicy {
    fn select(&mut self) -> Result<usize, PolicyError>;
    /// Feeds back the loss of the arm returned by the last `select`.
    fn update(&mut self, arm: usize, loss: f64);
    fn state(&self) -> &PolicyState;
}

#[derive(Clone, Debug)]
pub struct Ftpl {
    pub state: PolicyState,
    pub dist: PerturbationDistribution,
    /// Rounds in which resampling stopped at the cap.
    pub cap_hits: u64,
    pub last_west: u64,
}

impl Ftpl {
    pub fn new(state: PolicyState, dist: PerturbationDistribution) -> Self {
        Ftpl {
            state,
            dist,
            cap_hits: 0,
            last_west: 0,
        }
    }
}

impl BanditPolicy for Ftpl {
    fn select(&mut self) -> Result<usize, PolicyError> {
        Ok(self.state.ftpl_select(&self.dist))
    }

    fn update(&mut self, arm: usize, loss: f64) {
        // a zero loss leaves Lhat unchanged whatever the estimate is
        let west = if loss > 0.0 {
            let w = self.state.geometric_resample(&self.dist, arm);
            if w == self.state.cap() {
                self.cap_hits += 1;
            }
            w
        } else {
            0
        };
        self.last_west = west;
        self.state.ftpl_update(arm, loss, west as f64);
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }
}

#[derive(Clone, Debug)]
pub struct Ftrl {
    pub state: PolicyState,
    pub regularizer: Regularizer,
    /// Largest KKT residual seen so far.
    pub max_kkt: f64,
}

impl Ftrl {
    pub fn new(state: PolicyState, regularizer: Regularizer) -> Self {
        Ftrl {
            state,
            regularizer,
            max_kkt: 0.0,
        }
    }
}

impl BanditPolicy for Ftrl {
    fn select(&mut self) -> Result<usize, PolicyError> {
        let (arm, p) = self.state.ftrl_select(self.regularizer)?;
        let r = kkt_residual(&self.state.lhat, self.state.eta(), self.regularizer, &p);
        self.max_kkt = self.max_kkt.max(r);
        Ok(arm)
    }

    fn update(&mut self, arm: usize, loss: f64) {
        let p = self.state.last_w.take().expect("update called before select");
        self.state.ftrl_update(arm, loss, &p);
        self.state.last_w = Some(p);
    }

    fn state(&self) -> &PolicyState {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn state(k: usize, m: f64, seed: u64) -> PolicyState {
        PolicyState::new(k, m, stream(seed, 0)).unwrap()
    }

    #[test]
    fn eta_schedule() {
        let mut s = state(3, 0.23, 1);
        s.t = 16;
        assert_eq!(s.eta(), 0.23 / 4.0);
        assert_eq!(s.cap(), 24);
    }

    #[test]
    fn select_replays() {
        let d = PerturbationDistribution::laplace_pareto();
        let a: Vec<usize> = {
            let mut s = state(5, 0.23, 9);
            (0..50).map(|_| s.ftpl_select(&d)).collect()
        };
        let mut s = state(5, 0.23, 9);
        let b: Vec<usize> = (0..50).map(|_| s.ftpl_select(&d)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn update_arithmetic() {
        let mut s = state(2, 1.0, 1);
        s.ftpl_update(0, 0.0, 7.0);
        assert_eq!(s.lhat, vec![0.0, 0.0]);
        assert_eq!(s.t, 2);
        s.ftpl_update(1, 1.0, 4.0);
        assert_eq!(s.lhat[1], 4.0);
        s.ftrl_update(0, 1.0, &[0.25, 0.75]);
        assert_eq!(s.lhat[0], 4.0);
        s.ftrl_update(0, 0.0, &[0.25, 0.75]);
        assert_eq!(s.lhat[0], 4.0);
    }

    #[test]
    fn dominant_arm_almost_always_chosen() {
        let d = PerturbationDistribution::laplace_pareto();
        let mut s = state(4, 0.23, 2);
        s.lhat = vec![0.0, 1e6, 1e6, 1e6];
        let hits = (0..10_000).filter(|_| s.ftpl_select(&d) == 0).count();
        assert!(hits >= 9990);
    }

    #[test]
    fn single_arm_resample_is_one() {
        let d = PerturbationDistribution::symmetric_pareto(2.0).unwrap();
        let mut s = state(1, 1.0, 3);
        for _ in 0..100 {
            assert_eq!(s.geometric_resample(&d, 0), 1);
        }
    }

    #[test]
    fn two_arm_resample_mean_is_two() {
        let d = PerturbationDistribution::symmetric_pareto(2.0).unwrap();
        let mut s = state(2, 1.0, 4).with_cap(ResampleCap::Fixed(1_000_000));
        let n = 100_000;
        let total: u64 = (0..n).map(|_| s.geometric_resample(&d, 0)).sum();
        assert!((total as f64 / n as f64 - 2.0).abs() <= 0.03);
    }

    #[test]
    fn uniform_weights_at_zero() {
        for reg in [Regularizer::Shannon, Regularizer::Tsallis { tsallis_beta: 0.5 }] {
            let p = ftrl_weights(&[0.0; 5], 0.3, reg).unwrap();
            assert!(p.iter().all(|w| (w - 0.2).abs() < 1e-14));
        }
    }

    #[test]
    fn tsallis_two_arm_condition() {
        for (l2, eta) in [(3.0, 0.5), (0.1, 2.0), (40.0, 0.1), (-2.0, 1.0)] {
            let p = ftrl_weights(&[0.0, l2], eta, Regularizer::Tsallis { tsallis_beta: 0.5 }).unwrap();
            let x = p[0];
            let rhs = (1.0 - x).powf(-0.5) - x.powf(-0.5);
            assert!((eta * l2 - rhs).abs() <= 1e-8, "{l2} {eta}");
        }
    }

    #[test]
    fn shannon_softmax() {
        let eta = 0.7;
        let p = ftrl_weights(&[0.0, core::f64::consts::LN_2 / eta], eta, Regularizer::Shannon).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tsallis_kkt_on_extreme_inputs() {
        let reg = Regularizer::Tsallis { tsallis_beta: 0.5 };
        let lhat = [0.0, 1e4, 3.0, 250.0, 1e-9, 77.0];
        for eta in [1e-3, 0.1, 1.0, 10.0] {
            let p = ftrl_weights(&lhat, eta, reg).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            assert!(kkt_residual(&lhat, eta, reg, &p) <= 1e-8);
        }
        let reg = Regularizer::Tsallis { tsallis_beta: 0.2 };
        let p = ftrl_weights(&lhat, 1.0, reg).unwrap();
        assert!(kkt_residual(&lhat, 1.0, reg, &p) <= 1e-8);
    }
}

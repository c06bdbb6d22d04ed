//! FTPL and FTRL as two sides of a Legendre pair.
//!
//! With rewards `nu` (losses `lambda = -nu`) the potential is the expected
//! perturbed maximum `Phi(nu) = E[max_i nu_i + r_i]`, its gradient is the
//! selection probability vector, and the induced regularizer is the convex
//! conjugate `V(p) = sup_nu <p, nu> - Phi(nu)`.
//!
//! The second half of the module handles the two-arm picture: the quantile
//! `c(x)` of `r_2 - r_1`, the law implied by 1/2-Tsallis entropy, and the
//! characteristic-function inversion that recovers a perturbation density
//! from such a quantile.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::distributions::{PerturbationDistribution, Support};
use crate::linalg::solve;
use crate::math::open_unit;
use crate::quadrature::{integrate, QuadError, QuadOptions};
use crate::roots::{brent, increasing_root, RootError};
use crate::selection::{breakpoints, phi_jacobian, phi_only, SelectionError};

#[derive(Clone, Debug, PartialEq)]
pub enum DualityError {
    /// A tail index is at most 1, so the potential diverges.
    NonIntegrable,
    /// The regularizer needs a law supported on the whole real line.
    SupportError,
    RootFindFailed { residual: f64 },
    Domain(f64),
    GridError(&'static str),
    ToleranceNotMet { achieved: f64 },
    InvalidInput(&'static str),
}

impl fmt::Display for DualityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualityError::NonIntegrable => f.write_str("potential diverges: a tail index is at most 1"),
            DualityError::SupportError => f.write_str("distribution must be supported on the whole real line"),
            DualityError::RootFindFailed { residual } => write!(f, "root finding failed (residual {residual:e})"),
            DualityError::Domain(x) => write!(f, "argument {x} is outside (0, 1)"),
            DualityError::GridError(m) => write!(f, "bad grid: {m}"),
            DualityError::ToleranceNotMet { achieved } => {
                write!(f, "quadrature tolerance not met (achieved {achieved:e})")
            }
            DualityError::InvalidInput(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl From<QuadError> for DualityError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::ToleranceNotMet { achieved, .. } => DualityError::ToleranceNotMet { achieved },
            QuadError::InvalidBounds => DualityError::InvalidInput("bad integration bounds"),
        }
    }
}

impl From<SelectionError> for DualityError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::ToleranceNotMet { achieved } => DualityError::ToleranceNotMet { achieved },
            SelectionError::InvalidInput(m) | SelectionError::Precondition(m) => DualityError::InvalidInput(m),
        }
    }
}

impl From<RootError> for DualityError {
    fn from(e: RootError) -> Self {
        match e {
            RootError::Budget { residual, .. } => DualityError::RootFindFailed { residual },
            _ => DualityError::RootFindFailed { residual: f64::NAN },
        }
    }
}

fn open_unit_check(x: f64) -> Result<f64, DualityError> {
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(DualityError::Domain(x))
    }
}

/// `Phi(nu) = E[max_i nu_i + r_i]`.
pub fn potential(nu: &[f64], dist: &PerturbationDistribution, tol: f64) -> Result<f64, DualityError> {
    if dist.tail_index_left().min(dist.tail_index_right()) <= 1.0 {
        return Err(DualityError::NonIntegrable);
    }
    if nu.is_empty() || nu.iter().any(|v| !v.is_finite()) {
        return Err(DualityError::InvalidInput("nu must be finite and nonempty"));
    }
    let top = nu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap: Vec<f64> = nu.iter().map(|v| top - v).collect();
    let mut pts = breakpoints(&gap, dist);
    if pts[0] < 0.0 {
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }
    // E[M] = ∫_0^∞ P(M > z) dz - ∫_{-∞}^0 P(M ≤ z) dz
    let est = integrate(
        |z| {
            if z >= 0.0 {
                let s: f64 = gap.iter().map(|g| (-dist.sf(z + g)).ln_1p()).sum();
                -s.exp_m1()
            } else {
                -gap.iter().map(|g| dist.cdf(z + g)).product::<f64>()
            }
        },
        &pts,
        QuadOptions {
            abs_tol: tol,
            max_panels: 8000,
            ..Default::default()
        },
    )?;
    Ok(top + est.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityProbe {
    /// Rewards with the last entry fixed at 0.
    pub nu: Vec<f64>,
    /// `Phi(nu)`
    pub potential: f64,
    /// `phi(-nu)`
    pub phi: Vec<f64>,
    /// `max_i |∂Phi/∂nu_i - phi_i|` by central differences.
    pub grad_check: f64,
}

/// Potential, selection probabilities and the gradient identity at `nu`.
pub fn probe(nu: &[f64], dist: &PerturbationDistribution, tol: f64, h: f64) -> Result<DualityProbe, DualityError> {
    let last = *nu.last().ok_or(DualityError::InvalidInput("nu must be nonempty"))?;
    let nu: Vec<f64> = nu.iter().map(|v| v - last).collect();
    let lambda: Vec<f64> = nu.iter().map(|v| -v).collect();
    let (phi, _) = phi_only(&lambda, dist, 1e-11)?;
    let mut grad_check = 0.0f64;
    for i in 0..nu.len() {
        let mut up = nu.clone();
        up[i] += h;
        let mut dn = nu.clone();
        dn[i] -= h;
        let fd = (potential(&up, dist, tol)? - potential(&dn, dist, tol)?) / (2.0 * h);
        grad_check = grad_check.max((fd - phi[i]).abs());
    }
    Ok(DualityProbe {
        potential: potential(&nu, dist, tol)?,
        nu,
        phi,
        grad_check,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizerValue {
    pub v: f64,
    /// Rewards with `nu_K = 0` and `phi(-nu) = p`.
    pub nu: Vec<f64>,
    /// `‖phi(-nu) - p‖_∞`
    pub residual: f64,
}

const REG_TARGET: f64 = 1e-11;

fn residual(nu: &[f64], p: &[f64], dist: &PerturbationDistribution) -> Result<(Vec<f64>, f64), DualityError> {
    let lambda: Vec<f64> = nu.iter().map(|v| -v).collect();
    let (phi, _) = phi_only(&lambda, dist, 1e-12)?;
    let r: Vec<f64> = phi.iter().zip(p).map(|(a, b)| a - b).collect();
    let m = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((r, m))
}

fn newton(p: &[f64], dist: &PerturbationDistribution) -> Result<(Vec<f64>, f64), DualityError> {
    let k = p.len();
    let n = k - 1;
    let mut nu = vec![0.0; k];
    let (mut r, mut res) = residual(&nu, p, dist)?;
    for _ in 0..60 {
        if res <= REG_TARGET {
            break;
        }
        let lambda: Vec<f64> = nu.iter().map(|v| -v).collect();
        let jac = phi_jacobian(&lambda, dist, 1e-12)?;
        // ∂phi_i/∂nu_j = -∂phi_i/∂lambda_j
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = -jac[i * k + j];
            }
        }
        let b: Vec<f64> = r[..n].iter().map(|v| -v).collect();
        let Some(delta) = solve(a, b) else { break };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..k)
                .map(|i| if i < n { nu[i] + step * delta[i] } else { 0.0 })
                .collect();
            let (rt, mt) = residual(&trial, p, dist)?;
            if mt < res {
                nu = trial;
                r = rt;
                res = mt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((nu, res))
}

fn coordinate_bisection(
    p: &[f64],
    dist: &PerturbationDistribution,
    mut nu: Vec<f64>,
) -> Result<(Vec<f64>, f64), DualityError> {
    let k = p.len();
    let mut res = f64::INFINITY;
    for _ in 0..200 {
        for i in 0..k - 1 {
            let f = |v: f64| {
                let mut trial = nu.clone();
                trial[i] = v;
                let lambda: Vec<f64> = trial.iter().map(|x| -x).collect();
                phi_only(&lambda, dist, 1e-12).map(|(phi, _)| phi[i] - p[i]).unwrap_or(f64::NAN)
            };
            nu[i] = increasing_root(f, nu[i], 0.5, 1e-14, REG_TARGET / 10.0)?;
        }
        res = residual(&nu, p, dist)?.1;
        if res <= REG_TARGET {
            break;
        }
    }
    Ok((nu, res))
}

/// `V(p) = <p, nu> - Phi(nu)` at the `nu` solving `phi(-nu) = p`.
pub fn regularizer_value(
    p: &[f64],
    dist: &PerturbationDistribution,
    tol: f64,
) -> Result<RegularizerValue, DualityError> {
    if !matches!(dist.support(), Support::Real) {
        return Err(DualityError::SupportError);
    }
    if p.len() < 2 || p.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(DualityError::InvalidInput("p must be strictly inside the simplex"));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(DualityError::InvalidInput("p must sum to 1"));
    }
    let (mut nu, mut res) = newton(p, dist)?;
    if res > REG_TARGET {
        (nu, res) = coordinate_bisection(p, dist, nu)?;
    }
    if res > 1e-8 {
        return Err(DualityError::RootFindFailed { residual: res });
    }
    let v = p.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>() - potential(&nu, dist, tol)?;
    Ok(RegularizerValue { v, nu, residual: res })
}

/// `c` with `Pr[c + r_1 ≥ r_2] = x` for i.i.d. perturbations from `dist`.
pub fn two_arm_quantile(x: f64, dist: &PerturbationDistribution) -> Result<f64, DualityError> {
    open_unit_check(x)?;
    let f = |c: f64| phi_only(&[0.0, c], dist, 1e-12).map(|(p, _)| p[0] - x).unwrap_or(f64::NAN);
    Ok(increasing_root(f, 0.0, 1.0, 1e-13, 1e-11)?)
}

/// Level-`x` quantile of a law given by its CDF.
pub fn quantile_from_cdf<F: Fn(f64) -> f64>(cdf: F, x: f64) -> Result<f64, DualityError> {
    open_unit_check(x)?;
    Ok(increasing_root(|c| cdf(c) - x, 0.0, 1.0, 1e-13, 1e-13)?)
}

/// `c(p) = -(beta/(1-beta)) (p^(beta-1) - (1-p)^(beta-1))`, the quantile of
/// `r_2 - r_1` under `beta`-Tsallis FTRL with two arms.
pub fn tsallis_quantile(p: f64, beta: f64) -> Result<f64, DualityError> {
    open_unit_check(p)?;
    open_unit_check(beta)?;
    Ok(tsallis_quantile_unchecked(p, beta))
}

fn tsallis_quantile_unchecked(p: f64, beta: f64) -> f64 {
    -(beta / (1.0 - beta)) * (p.powf(beta - 1.0) - (1.0 - p).powf(beta - 1.0))
}

/// The symmetric law with quantile [`tsallis_quantile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TsallisDifferenceLaw {
    pub beta: f64,
}

impl TsallisDifferenceLaw {
    pub fn new(beta: f64) -> Result<Self, DualityError> {
        open_unit_check(beta)?;
        Ok(TsallisDifferenceLaw { beta })
    }

    pub fn quantile(&self, p: f64) -> f64 {
        tsallis_quantile_unchecked(p, self.beta)
    }

    /// Level `p ≤ 1/2` with `c(p) = y` for `y ≤ 0`, solved in `ln p`.
    fn lower_level(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.5;
        }
        let f = |u: f64| self.quantile(u.exp()) - y;
        match brent(f, -740.0, 0.5f64.ln(), 1e-15, 0.0, 400) {
            Ok(u) => u.exp(),
            Err(RootError::Budget { x, .. }) => x.exp(),
            Err(_) => 0.0,
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            self.lower_level(y)
        } else {
            1.0 - self.lower_level(-y)
        }
    }

    pub fn sf(&self, y: f64) -> f64 {
        self.cdf(-y)
    }

    /// `1 / c'(p)` at `p = F(y)`.
    pub fn pdf(&self, y: f64) -> f64 {
        let b = self.beta;
        let p = self.lower_level(-y.abs());
        1.0 / (b * (p.powf(b - 2.0) + (1.0 - p).powf(b - 2.0)))
    }

    /// `y f(y) / (1 - F(y))`
    pub fn von_mises(&self, y: f64) -> f64 {
        y * self.pdf(y) / self.sf(y)
    }
}

/// `(r_1, r_2)` with `r_2 - r_1 = c(U)`, `U` uniform: the dependent
/// perturbation that reproduces two-arm Tsallis FTRL exactly.
pub fn correlated_tsallis_sampler<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> (f64, f64) {
    let xi = tsallis_quantile_unchecked(open_unit(rng), beta);
    (-xi.max(0.0), -(-xi).max(0.0))
}

/// `∫_eps^{1-eps} exp(i t c(p)) dp`.
pub fn char_fn<Q: Fn(f64) -> f64>(t: f64, quantile: Q, eps: f64, tol: f64) -> Result<Complex64, DualityError> {
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(DualityError::InvalidInput("eps must lie in (0, 1e-3]"));
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0 - 2.0 * eps, 0.0));
    }
    let est = integrate(
        |p| {
            let (s, c) = (t * quantile(p)).sin_cos();
            Complex64::new(c, s)
        },
        &[eps, 0.5, 1.0 - eps],
        QuadOptions {
            abs_tol: tol,
            max_panels: 1_000_000,
            initial_panels: 8,
            ..Default::default()
        },
    )?;
    Ok(est.value)
}

/// `w_k = (0.5 - N/2 + k) 2π / (x_max - x_min)` for `k = 0..N`.
pub fn ift_frequencies(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * PI / (x_max - x_min);
    (0..n).map(|k| (0.5 - (n / 2) as f64 + k as f64) * step).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IftResult {
    pub x_grid: Vec<f64>,
    /// `gbar(w_k)` on the full frequency grid.
    pub gbar: Vec<Complex64>,
    pub pdf: Vec<f64>,
    pub imag_residual: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Frequencies where `gbar` had a negative real part, so the principal
    /// square root may jump in phase.
    pub phase_warnings: usize,
}

/// `(-1)^a` on the principal branch.
fn minus_one_pow(a: f64) -> Complex64 {
    let (s, c) = (PI * a).sin_cos();
    Complex64::new(c, s)
}

/// Inverts characteristic-function samples `gbar` given on the positive half
/// of [`ift_frequencies`] into the density of the i.i.d. perturbation whose
/// difference has characteristic function `gbar`.
///
/// The caller supplies an in-place forward DFT (`X_k = Σ x_j e^{-2πijk/N}`).
pub fn ift_from_gbar<F: FnOnce(&mut [Complex64])>(
    gbar_positive: &[Complex64],
    x_min: f64,
    x_max: f64,
    fft: F,
) -> Result<IftResult, DualityError> {
    let n = 2 * gbar_positive.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(DualityError::GridError("N must be a power of two"));
    }
    if !(x_min < x_max) {
        return Err(DualityError::GridError("x_min must be below x_max"));
    }
    let width = x_max - x_min;
    let dx = width / n as f64;
    let phase_warnings = gbar_positive.iter().filter(|g| g.re < 0.0).count();
    let root: Vec<Complex64> = gbar_positive.iter().map(|g| g.sqrt()).collect();
    let mut cf: Vec<Complex64> = root.iter().rev().map(|z| z.conj()).collect();
    cf.extend_from_slice(&root);
    let mut gbar: Vec<Complex64> = gbar_positive.iter().rev().map(|z| z.conj()).collect();
    gbar.extend_from_slice(gbar_positive);

    let nf = n as f64;
    for (k, v) in cf.iter_mut().enumerate() {
        *v *= minus_one_pow(-2.0 * (x_min / width) * k as f64);
    }
    fft(&mut cf);
    let mut pdf = Vec::with_capacity(n);
    let mut imag_residual = Vec::with_capacity(n);
    for (k, v) in cf.iter().enumerate() {
        let c = minus_one_pow((1.0 - 1.0 / nf) * (x_min / dx + k as f64)) / width;
        let z = c * v;
        pdf.push(z.re);
        imag_residual.push(z.im);
    }
    let mut acc = 0.0;
    let cdf = pdf
        .iter()
        .map(|p| {
            acc += p * dx;
            acc
        })
        .collect();
    Ok(IftResult {
        x_grid: (0..n).map(|k| x_min + k as f64 * dx).collect(),
        gbar,
        pdf,
        imag_residual,
        cdf,
        phase_warnings,
    })
}

/// Serial pipeline: `gbar` on the positive frequencies, then [`ift_from_gbar`].
pub fn ift_pipeline<Q: Fn(f64) -> f64, F: FnOnce(&mut [Complex64])>(
    quantile: Q,
    x_min: f64,
    x_max: f64,
    n: usize,
    eps: f64,
    tol: f64,
    fft: F,
) -> Result<IftResult, DualityError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(DualityError::GridError("N must be a power of two"));
    }
    let w = ift_frequencies(x_min, x_max, n);
    let gbar = w[n / 2..]
        .iter()
        .map(|&t| char_fn(t, &quantile, eps, tol))
        .collect::<Result<Vec<_>, _>>()?;
    ift_from_gbar(&gbar, x_min, x_max, fft)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegScanRow {
    pub x: f64,
    /// Solves `phi_1((0, c, c)) = x`.
    pub c: f64,
    /// `1/(2 sqrt(1-x)) - 1`
    pub lower: f64,
    /// `2 sqrt(2)/sqrt(1-x) - 1`
    pub upper: f64,
    /// `sqrt(2)/sqrt(1-x) - 1/sqrt(x)`, the 1/2-Tsallis derivative.
    pub tsallis_ref: f64,
    pub within: bool,
}

/// Regularizer derivative along `p = (x, (1-x)/2, (1-x)/2)` with three arms.
pub fn three_arm_regularizer_scan(
    x_grid: &[f64],
    dist: &PerturbationDistribution,
) -> Result<Vec<RegScanRow>, DualityError> {
    if x_grid.iter().any(|x| !(1.0 / 3.0 - 1e-12..=1.0 - 1e-4).contains(x)) {
        return Err(DualityError::InvalidInput("x grid must lie in [1/3, 1 - 1e-4]"));
    }
    x_grid
        .iter()
        .map(|&x| {
            let f = |c: f64| phi_only(&[0.0, c, c], dist, 1e-12).map(|(p, _)| p[0] - x).unwrap_or(f64::NAN);
            let c = increasing_root(f, 0.0, 1.0, 1e-12, 1e-11)?;
            let s = (1.0 - x).sqrt();
            let lower = 0.5 / s - 1.0;
            let upper = 2.0 * 2f64.sqrt() / s - 1.0;
            Ok(RegScanRow {
                x,
                c,
                lower,
                upper,
                tsallis_ref: 2f64.sqrt() / s - 1.0 / x.sqrt(),
                within: c >= lower && c <= upper,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::EULER_GAMMA;
    use crate::rng::stream;

    fn naive_dft(x: &mut [Complex64]) {
        let n = x.len();
        let src = x.to_vec();
        for (k, out) in x.iter_mut().enumerate() {
            *out = src
                .iter()
                .enumerate()
                .map(|(j, v)| v * minus_one_pow(-2.0 * ((j * k) % n) as f64 / n as f64))
                .sum();
        }
    }

    #[test]
    fn gumbel_potential_is_log_sum_exp() {
        let g = PerturbationDistribution::gumbel();
        let nu = [0.3, -1.0, 2.0];
        let lse = nu.iter().map(|v: &f64| v.exp()).sum::<f64>().ln();
        assert!((potential(&nu, &g, 1e-12).unwrap() - (lse + EULER_GAMMA)).abs() < 1e-9);
    }

    #[test]
    fn potential_far_leader_tends_to_mean() {
        let lp = PerturbationDistribution::laplace_pareto();
        let c = 1e4;
        let v = potential(&[c, 0.0], &lp, 1e-12).unwrap();
        assert!((v - c - 0.25).abs() < 1e-3, "{}", v - c);
    }

    #[test]
    fn potential_rejects_heavy_tails() {
        let d = PerturbationDistribution::symmetric_pareto(1.0).unwrap();
        assert_eq!(potential(&[0.0, 0.0], &d, 1e-10), Err(DualityError::NonIntegrable));
    }

    #[test]
    fn regularizer_gumbel_is_entropy() {
        let g = PerturbationDistribution::gumbel();
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let r = regularizer_value(&p, &g, 1e-12).unwrap();
        assert!((r.nu[0] - core::f64::consts::LN_2).abs() < 1e-8);
        let ent: f64 = p.iter().map(|q| q * q.ln()).sum();
        assert!((r.v - (ent - EULER_GAMMA)).abs() < 1e-6);
    }

    #[test]
    fn regularizer_needs_full_support() {
        let f = PerturbationDistribution::frechet(2.0).unwrap();
        assert_eq!(regularizer_value(&[0.5, 0.5], &f, 1e-10), Err(DualityError::SupportError));
    }

    #[test]
    fn tsallis_quantile_examples() {
        assert_eq!(tsallis_quantile(0.5, 0.3).unwrap(), 0.0);
        let v = tsallis_quantile(0.25, 0.5).unwrap();
        assert!((v + (2.0 - 2.0 / 3f64.sqrt())).abs() < 1e-15);
        for p in [0.01, 0.2, 0.4] {
            let a = tsallis_quantile(p, 0.5).unwrap();
            let b = tsallis_quantile(1.0 - p, 0.5).unwrap();
            assert!((a + b).abs() < 1e-12);
        }
        assert!(tsallis_quantile(0.0, 0.5).is_err());
    }

    #[test]
    fn difference_law_round_trip() {
        let law = TsallisDifferenceLaw::new(0.5).unwrap();
        for p in [1e-6, 0.01, 0.3, 0.5, 0.8, 0.999] {
            let y = law.quantile(p);
            assert!((law.cdf(y) - p).abs() < 1e-12, "{p}");
        }
        let h = 1e-5;
        let fd = (law.cdf(0.7 + h) - law.cdf(0.7 - h)) / (2.0 * h);
        assert!((fd - law.pdf(0.7)).abs() < 1e-8);
    }

    #[test]
    fn char_fn_basics() {
        let q = |p| tsallis_quantile_unchecked(p, 0.5);
        assert_eq!(char_fn(0.0, q, 1e-4, 1e-10).unwrap(), Complex64::new(1.0 - 2e-4, 0.0));
        for t in [0.3, 2.0, 11.0] {
            let g = char_fn(t, q, 1e-4, 1e-11).unwrap();
            assert!(g.im.abs() < 1e-10 && g.re > 0.0 && g.norm() <= 1.0);
        }
    }

    #[test]
    fn ift_twiddles_invert_a_gaussian() {
        // exact characteristic function of N(0,1): the output is N(0, 1/2)
        let (x_min, x_max, n) = (-10.0, 10.0, 256);
        let w = ift_frequencies(x_min, x_max, n);
        let g: Vec<Complex64> = w[n / 2..].iter().map(|t| Complex64::new((-t * t / 2.0).exp(), 0.0)).collect();
        let res = ift_from_gbar(&g, x_min, x_max, naive_dft).unwrap();
        for (x, p) in res.x_grid.iter().zip(&res.pdf) {
            let exact = (-x * x).exp() / PI.sqrt();
            assert!((p - exact).abs() < 1e-10, "{x}");
        }
        assert!(res.imag_residual.iter().all(|v| v.abs() < 1e-12));
        assert!((res.cdf.last().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ift_rejects_bad_grid() {
        let g = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(ift_from_gbar(&g, -1.0, 1.0, naive_dft), Err(DualityError::GridError(_))));
    }

    #[test]
    fn sampler_difference_is_tsallis_quantile() {
        let mut rng = stream(5, 0);
        for _ in 0..1000 {
            let (r1, r2) = correlated_tsallis_sampler(0.5, &mut rng);
            assert!(r1 <= 0.0 && r2 <= 0.0 && (r1 == 0.0 || r2 == 0.0));
        }
    }
}

//! Arm-selection probabilities of FTPL and their stability ratios.
//!
//! For a loss vector `lambda` the probability that arm `i` is the perturbed
//! leader is
//!
//! ```text
//! phi_i = ∫ f(z + l_i) ∏_{j≠i} F(z + l_j) dz,     l = lambda - min(lambda)
//! ```
//!
//! and `phi'_i = ∂phi_i/∂lambda_i` is the same integral with `f'` in place of
//! `f`, plus a point mass for every jump of the density.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::distributions::PerturbationDistribution;
use crate::math::linear_fit;
use crate::quadrature::{integrate, QuadError, QuadOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum SelectionError {
    InvalidInput(&'static str),
    /// A scan precondition on the distribution or the grid does not hold.
    Precondition(&'static str),
    ToleranceNotMet { achieved: f64 },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::InvalidInput(m) => write!(f, "invalid input: {m}"),
            SelectionError::Precondition(m) => write!(f, "precondition failed: {m}"),
            SelectionError::ToleranceNotMet { achieved } => {
                write!(f, "quadrature tolerance not met (achieved {achieved:e})")
            }
        }
    }
}

impl From<QuadError> for SelectionError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::ToleranceNotMet { achieved, .. } => SelectionError::ToleranceNotMet { achieved },
            QuadError::InvalidBounds => SelectionError::InvalidInput("bad integration bounds"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionProbe {
    pub lambda: Vec<f64>,
    pub lambda_gap: Vec<f64>,
    /// 1-based rank in nondecreasing order, ties by index.
    pub rank: Vec<usize>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    /// `-phi'_i / phi_i`
    pub ratio_1: Vec<f64>,
    /// `-phi'_i / phi_i^(3/2)`
    pub ratio_32: Vec<f64>,
    pub quad_error: f64,
}

fn validate(lambda: &[f64], tol: f64) -> Result<(), SelectionError> {
    if lambda.len() < 2 {
        return Err(SelectionError::InvalidInput("need at least two arms"));
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(SelectionError::InvalidInput("lambda must be finite"));
    }
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(SelectionError::InvalidInput("tol must lie in (0, 1e-4]"));
    }
    Ok(())
}

/// `lambda - min(lambda)`.
pub fn gaps(lambda: &[f64]) -> Vec<f64> {
    let m = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    lambda.iter().map(|l| l - m).collect()
}

/// 1-based ranks in nondecreasing order of `lambda`, ties by index.
pub fn ranks(lambda: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..lambda.len()).collect();
    idx.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]).then(a.cmp(&b)));
    let mut rank = vec![0; lambda.len()];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

/// Breakpoints for integrals in `z` whose factors are evaluated at `z + gap_j`.
pub(crate) fn breakpoints(gap: &[f64], dist: &PerturbationDistribution) -> Vec<f64> {
    let max_gap = gap.iter().copied().fold(0.0, f64::max);
    let x = (10.0 * max_gap).max(50.0);
    let lower = dist.support().lower();
    let mut pts = vec![-x, x];
    let anchor = dist.kink().unwrap_or(0.0);
    // a ladder of splits around every shifted body, so wide panels can't
    // step over mass concentrated near one of them
    for g in gap {
        let a = anchor - g;
        pts.push(a);
        let mut off = 1.0;
        while off < 2.0 * x {
            pts.push(a - off);
            pts.push(a + off);
            off *= 4.0;
        }
    }
    if lower.is_finite() {
        pts.extend(gap.iter().map(|g| lower - g));
    }
    for (k, _) in dist.density_jumps() {
        pts.extend(gap.iter().map(|g| k - g));
    }
    // every factor vanishes below `lower - min gap = lower`
    let z_lo = if lower.is_finite() { lower } else { f64::NEG_INFINITY };
    pts.retain(|p| *p > z_lo);
    pts.push(z_lo);
    pts.push(f64::INFINITY);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∏_{j ∉ skip} F(z + gap_j)`, switching to log space when a factor is tiny.
pub(crate) fn cdf_product(dist: &PerturbationDistribution, gap: &[f64], z: f64, skip: &[usize]) -> f64 {
    let mut prod = 1.0;
    let mut tiny = false;
    for (j, g) in gap.iter().enumerate() {
        if skip.contains(&j) {
            continue;
        }
        let c = dist.cdf(z + g);
        if c < 1e-12 {
            tiny = true;
        }
        prod *= c;
    }
    if !tiny {
        return prod;
    }
    let mut log = 0.0;
    for (j, g) in gap.iter().enumerate() {
        if !skip.contains(&j) {
            log += dist.cdf(z + g).ln();
        }
    }
    log.exp()
}

fn opts_for(tol: f64, k: usize) -> QuadOptions {
    QuadOptions {
        abs_tol: tol / (2 * k) as f64,
        max_panels: 8000,
        ..Default::default()
    }
}

/// Selection probabilities, derivatives and stability ratios at `lambda`.
pub fn phi_quadrature(
    lambda: &[f64],
    dist: &PerturbationDistribution,
    tol: f64,
) -> Result<SelectionProbe, SelectionError> {
    validate(lambda, tol)?;
    let k = lambda.len();
    let gap = gaps(lambda);
    let pts = breakpoints(&gap, dist);
    let jumps = dist.density_jumps();
    let opts = opts_for(tol, k);
    let mut phi = vec![0.0; k];
    let mut phi_prime = vec![0.0; k];
    let mut quad_error = 0.0;
    for i in 0..k {
        let gi = gap[i];
        let est = integrate(
            |z| {
                let g = cdf_product(dist, &gap, z, &[i]);
                if g == 0.0 {
                    return [0.0, 0.0];
                }
                [dist.pdf(z + gi) * g, dist.pdf_prime(z + gi).value * g]
            },
            &pts,
            opts,
        )?;
        let jump: f64 = jumps
            .iter()
            .map(|&(x0, j)| j * cdf_product(dist, &gap, x0 - gi, &[i]))
            .sum();
        phi[i] = est.value[0];
        phi_prime[i] = est.value[1] + jump;
        quad_error += est.error;
    }
    let ratio_1 = phi.iter().zip(&phi_prime).map(|(p, d)| -d / p).collect();
    let ratio_32 = phi.iter().zip(&phi_prime).map(|(p, d)| -d / p.powf(1.5)).collect();
    Ok(SelectionProbe {
        lambda: lambda.to_vec(),
        rank: ranks(lambda),
        lambda_gap: gap,
        phi,
        phi_prime,
        ratio_1,
        ratio_32,
        quad_error,
    })
}

/// Selection probabilities only, with the summed quadrature error.
pub fn phi_only(
    lambda: &[f64],
    dist: &PerturbationDistribution,
    tol: f64,
) -> Result<(Vec<f64>, f64), SelectionError> {
    validate(lambda, tol)?;
    let k = lambda.len();
    let gap = gaps(lambda);
    let pts = breakpoints(&gap, dist);
    let opts = opts_for(tol, k);
    let mut phi = vec![0.0; k];
    let mut err = 0.0;
    for i in 0..k {
        let gi = gap[i];
        let est = integrate(
            |z| {
                let g = cdf_product(dist, &gap, z, &[i]);
                if g == 0.0 {
                    0.0
                } else {
                    dist.pdf(z + gi) * g
                }
            },
            &pts,
            opts,
        )?;
        phi[i] = est.value;
        err += est.error;
    }
    Ok((phi, err))
}

/// Row-major `K×K` matrix of `∂phi_i/∂lambda_j`. Off-diagonal entries are
/// `∫ f(z+l_i) f(z+l_j) ∏_{others} F dz`; rows sum to zero.
pub fn phi_jacobian(
    lambda: &[f64],
    dist: &PerturbationDistribution,
    tol: f64,
) -> Result<Vec<f64>, SelectionError> {
    validate(lambda, tol)?;
    let k = lambda.len();
    let gap = gaps(lambda);
    let pts = breakpoints(&gap, dist);
    let opts = opts_for(tol, k);
    let mut jac = vec![0.0; k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            let (gi, gj) = (gap[i], gap[j]);
            let est = integrate(
                |z| {
                    let a = dist.pdf(z + gi);
                    let b = dist.pdf(z + gj);
                    if a == 0.0 || b == 0.0 {
                        return 0.0;
                    }
                    a * b * cdf_product(dist, &gap, z, &[i, j])
                },
                &pts,
                opts,
            )?;
            jac[i * k + j] = est.value;
            jac[j * k + i] = est.value;
        }
    }
    for i in 0..k {
        let off: f64 = (0..k).filter(|&j| j != i).map(|j| jac[i * k + j]).sum();
        jac[i * k + i] = -off;
    }
    Ok(jac)
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub phi: Vec<f64>,
    /// 95% normal-approximation halfwidths.
    pub ci_halfwidth: Vec<f64>,
    pub n: usize,
}

/// Index of the smallest `lambda_j - r_j`, lowest index on ties.
pub fn perturbed_leader(lambda: &[f64], r: &[f64], scale: f64) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (j, (l, p)) in lambda.iter().zip(r).enumerate() {
        let v = l - p * scale;
        if v < best_v {
            best_v = v;
            best = j;
        }
    }
    best
}

/// Empirical argmin frequencies of `lambda - r` over `n` perturbation draws.
pub fn phi_monte_carlo<R: Rng + ?Sized>(
    lambda: &[f64],
    dist: &PerturbationDistribution,
    n: usize,
    rng: &mut R,
) -> McEstimate {
    assert!(n > 1, "need at least two draws");
    let k = lambda.len();
    let mut counts = vec![0usize; k];
    let mut r = vec![0.0; k];
    for _ in 0..n {
        dist.sample_into(rng, &mut r);
        counts[perturbed_leader(lambda, &r, 1.0)] += 1;
    }
    let nf = n as f64;
    let phi: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
    let ci_halfwidth = phi.iter().map(|p| 1.96 * (p * (1.0 - p) / nf).sqrt()).collect();
    McEstimate { phi, ci_halfwidth, n }
}

/// Loss vectors parameterized by a scalar `c`: entry `j` is `offset_j + slope_j·c`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTemplate {
    pub terms: Vec<(f64, f64)>,
}

impl LambdaTemplate {
    /// `(0, c, …, c)`
    pub fn one_vs_rest(k: usize) -> Self {
        let mut terms = vec![(0.0, 1.0); k];
        terms[0] = (0.0, 0.0);
        LambdaTemplate { terms }
    }

    /// `(0, c, 2c, …)`
    pub fn arithmetic(k: usize) -> Self {
        LambdaTemplate {
            terms: (0..k).map(|j| (0.0, j as f64)).collect(),
        }
    }

    pub fn at(&self, c: f64) -> Vec<f64> {
        self.terms.iter().map(|(o, s)| o + s * c).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub c: f64,
    /// 0-based arm index.
    pub i: usize,
    pub sigma: usize,
    pub lambda_gap: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub ratio_1: f64,
    pub ratio_32: f64,
    pub quad_error: f64,
    /// `sigma^(-1/alpha)`
    pub rank_term: f64,
    /// `1/lambda_gap` (infinite for the leader).
    pub gap_term: f64,
    /// Running max over the scan of `ratio_1 / min(rank_term, gap_term)`.
    pub running_max: f64,
}

/// Checks the tail condition `left ≥ right + 2`, `right > 1`.
pub fn rank_bound_precondition(dist: &PerturbationDistribution) -> Result<(), SelectionError> {
    let a = dist.tail_index_right();
    let b = dist.tail_index_left();
    if !(a > 1.0) {
        return Err(SelectionError::Precondition("right tail index must exceed 1"));
    }
    if !(b >= a + 2.0) {
        return Err(SelectionError::Precondition(
            "left tail index must be at least the right tail index plus 2",
        ));
    }
    Ok(())
}

/// Stability ratio `-phi'_i/phi_i` along a family of loss vectors, next to the
/// rank and gap terms that bound it.
pub fn rank_bound_scan(
    dist: &PerturbationDistribution,
    template: &LambdaTemplate,
    c_grid: &[f64],
    tol: f64,
) -> Result<Vec<ScanRow>, SelectionError> {
    rank_bound_precondition(dist)?;
    let alpha = dist.tail_index_right();
    let mut rows = Vec::new();
    let mut running = 0.0f64;
    for &c in c_grid {
        let probe = phi_quadrature(&template.at(c), dist, tol)?;
        for i in 0..template.len() {
            let rank_term = (probe.rank[i] as f64).powf(-1.0 / alpha);
            let gap_term = 1.0 / probe.lambda_gap[i];
            let normalized = probe.ratio_1[i] / rank_term.min(gap_term);
            if normalized.is_finite() {
                running = running.max(normalized);
            }
            rows.push(ScanRow {
                c,
                i,
                sigma: probe.rank[i],
                lambda_gap: probe.lambda_gap[i],
                phi: probe.phi[i],
                phi_prime: probe.phi_prime[i],
                ratio_1: probe.ratio_1[i],
                ratio_32: probe.ratio_32[i],
                quad_error: probe.quad_error,
                rank_term,
                gap_term,
                running_max: running,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleRow {
    pub c: f64,
    /// Ratios of the leading arm (loss 0).
    pub leader_ratio_1: f64,
    pub leader_ratio_32: f64,
    /// Ratios of a trailing arm (loss `c`); all trailing arms agree.
    pub ratio_1: f64,
    pub ratio_32: f64,
    pub quad_error: f64,
    /// For the shape-2 symmetric Pareto law at `K = 3`: whether
    /// `ratio_1 ≥ 1/31` and `ratio_32 ≥ (c+1)/11`.
    pub envelope_ok: Option<bool>,
}

fn is_symmetric_pareto2(dist: &PerturbationDistribution) -> bool {
    matches!(dist.kind(), crate::Kind::SymmetricPareto { shape } if *shape == 2.0)
}

/// Stability ratios at `lambda = (0, c, …, c)`.
///
/// With three or more arms the grid must stay in `c ≥ 2√K`.
pub fn counterexample_scan(
    dist: &PerturbationDistribution,
    k: usize,
    c_grid: &[f64],
    tol: f64,
) -> Result<Vec<CounterexampleRow>, SelectionError> {
    if k < 2 {
        return Err(SelectionError::InvalidInput("need at least two arms"));
    }
    if k >= 3 && c_grid.iter().any(|&c| c < 2.0 * (k as f64).sqrt()) {
        return Err(SelectionError::Precondition("grid must satisfy c >= 2 sqrt(K)"));
    }
    let template = LambdaTemplate::one_vs_rest(k);
    let check = k == 3 && is_symmetric_pareto2(dist);
    c_grid
        .iter()
        .map(|&c| {
            let p = phi_quadrature(&template.at(c), dist, tol)?;
            let envelope_ok = check.then(|| p.ratio_1[1] >= 1.0 / 31.0 && p.ratio_32[1] >= (c + 1.0) / 11.0);
            Ok(CounterexampleRow {
                c,
                leader_ratio_1: p.ratio_1[0],
                leader_ratio_32: p.ratio_32[0],
                ratio_1: p.ratio_1[1],
                ratio_32: p.ratio_32[1],
                quad_error: p.quad_error,
                envelope_ok,
            })
        })
        .collect()
}

/// Least-squares slope of the trailing arm's `ratio_32` against `c`.
pub fn ratio_32_slope(rows: &[CounterexampleRow]) -> f64 {
    let cs: Vec<f64> = rows.iter().map(|r| r.c).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio_32).collect();
    linear_fit(&cs, &ys).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn sp2() -> PerturbationDistribution {
        PerturbationDistribution::symmetric_pareto(2.0).unwrap()
    }

    #[test]
    fn exchangeable_point_is_uniform() {
        for d in [sp2(), PerturbationDistribution::laplace_pareto(), PerturbationDistribution::gumbel()] {
            let p = phi_quadrature(&[3.0, 3.0, 3.0, 3.0], &d, 1e-10).unwrap();
            for v in &p.phi {
                assert!((v - 0.25).abs() < 1e-9, "{d:?}");
            }
        }
    }

    #[test]
    fn gumbel_logit() {
        let g = PerturbationDistribution::gumbel();
        let p = phi_quadrature(&[0.0, core::f64::consts::LN_2], &g, 1e-10).unwrap();
        assert!((p.phi[0] - 2.0 / 3.0).abs() < 1e-9);
        // d/dl_i of softmax_i = -p_i (1 - p_i)
        assert!((p.phi_prime[0] + 2.0 / 9.0).abs() < 1e-8);
    }

    #[test]
    fn jacobian_diagonal_matches_derivative_with_jumps() {
        let cases = [
            (PerturbationDistribution::pareto_lomax(2.0, 1.0).unwrap(), vec![0.0, 0.7, 2.0]),
            (PerturbationDistribution::exponential(1.0).unwrap(), vec![0.3, 0.0, 1.1]),
            (PerturbationDistribution::laplace_pareto(), vec![0.0, 1.5, 4.0]),
            (
                PerturbationDistribution::hybrid(
                    PerturbationDistribution::frechet(3.0).unwrap(),
                    PerturbationDistribution::exponential(2.0).unwrap(),
                )
                .unwrap(),
                vec![0.0, 0.4, 0.9],
            ),
        ];
        for (d, l) in cases {
            let p = phi_quadrature(&l, &d, 1e-11).unwrap();
            let j = phi_jacobian(&l, &d, 1e-11).unwrap();
            for i in 0..3 {
                assert!((p.phi_prime[i] - j[i * 3 + i]).abs() < 1e-8, "{d:?} arm {i}");
            }
        }
    }

    #[test]
    fn ranks_break_ties_by_index() {
        assert_eq!(ranks(&[2.0, 0.0, 2.0, 1.0]), vec![3, 1, 4, 2]);
    }

    #[test]
    fn monte_carlo_uniform_point() {
        let est = phi_monte_carlo(&[0.0, 0.0, 0.0], &sp2(), 200_000, &mut stream(3, 0));
        for (p, ci) in est.phi.iter().zip(&est.ci_halfwidth) {
            assert!((p - 1.0 / 3.0).abs() <= 3.0 * ci);
        }
    }

    #[test]
    fn rank_precondition() {
        let asp = PerturbationDistribution::asymmetric_pareto(2.0, 3.0).unwrap();
        assert!(matches!(
            rank_bound_scan(&asp, &LambdaTemplate::one_vs_rest(3), &[1.0], 1e-8),
            Err(SelectionError::Precondition(_))
        ));
        assert!(rank_bound_precondition(&PerturbationDistribution::laplace_pareto()).is_ok());
    }

    #[test]
    fn counterexample_grid_precondition() {
        assert!(counterexample_scan(&sp2(), 3, &[1.0], 1e-8).is_err());
        assert!(counterexample_scan(&sp2(), 2, &[0.0, 1.0], 1e-8).is_ok());
    }

    #[test]
    fn bad_inputs() {
        assert!(phi_quadrature(&[0.0], &sp2(), 1e-8).is_err());
        assert!(phi_quadrature(&[0.0, f64::NAN], &sp2(), 1e-8).is_err());
        assert!(phi_quadrature(&[0.0, 1.0], &sp2(), 1e-2).is_err());
    }
}

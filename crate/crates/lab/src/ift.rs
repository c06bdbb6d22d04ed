//! Characteristic-function inversion with `rustfft`, sampling `gbar` in
//! parallel over frequencies.

use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use ftpl_core::duality::{char_fn, ift_frequencies, ift_from_gbar, tsallis_quantile, IftResult};
use ftpl_core::math::normal_quantile;
use ftpl_core::PerturbationDistribution;

use crate::io::write_table;
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IftGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    /// Endpoint cut of the quantile integral.
    pub eps: f64,
    pub tol: f64,
}

impl Default for IftGrid {
    fn default() -> Self {
        IftGrid {
            x_min: -20.0,
            x_max: 20.0,
            n: 2048,
            eps: 1e-4,
            tol: 1e-12,
        }
    }
}

pub fn fft_forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// `gbar` on the positive half of the frequency grid, then the inversion.
pub fn invert<Q: Fn(f64) -> f64 + Sync>(quantile: Q, grid: &IftGrid) -> Result<IftResult, LabError> {
    if grid.n < 2 || !grid.n.is_power_of_two() {
        return Err(LabError::Spec(format!("N = {} must be a power of two", grid.n)));
    }
    let w = ift_frequencies(grid.x_min, grid.x_max, grid.n);
    let gbar = w[grid.n / 2..]
        .par_iter()
        .map(|&t| char_fn(t, &quantile, grid.eps, grid.tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(LabError::numeric)?;
    ift_from_gbar(&gbar, grid.x_min, grid.x_max, fft_forward).map_err(LabError::numeric)
}

/// Density of `N(0, 1/2)`, the law of each coordinate when the difference is standard normal.
pub fn half_normal_variance_pdf(x: f64) -> f64 {
    (-x * x).exp() / std::f64::consts::PI.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalSanity {
    pub eps: f64,
    pub sup_error: f64,
    pub cdf_last: f64,
}

/// Inverts the standard normal quantile and compares with `N(0, 1/2)`.
pub fn sanity_normal(grid: &IftGrid) -> Result<NormalSanity, LabError> {
    let r = invert(normal_quantile, grid)?;
    let sup_error = r
        .x_grid
        .iter()
        .zip(&r.pdf)
        .map(|(x, p)| (p - half_normal_variance_pdf(*x)).abs())
        .fold(0.0, f64::max);
    Ok(NormalSanity {
        eps: grid.eps,
        sup_error,
        cdf_last: *r.cdf.last().unwrap_or(&0.0),
    })
}

pub fn tsallis_ift(beta: f64, grid: &IftGrid) -> Result<IftResult, LabError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(LabError::Spec(format!("beta = {beta} must lie in (0, 1)")));
    }
    invert(|p| tsallis_quantile(p, beta).unwrap_or(f64::NAN), grid)
}

pub fn laplace_pdf(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IftSummary {
    pub cdf_last: f64,
    pub max_imag: f64,
    /// L1 distances on `|x| ≤ 5` to the SymmetricPareto(2) and standard Laplace densities.
    pub l1_splareto2: f64,
    pub l1_laplace: f64,
    pub phase_warnings: usize,
}

pub fn summarize(r: &IftResult) -> IftSummary {
    let sp = PerturbationDistribution::symmetric_pareto(2.0).expect("shape 2 is valid");
    let dx = r.x_grid.get(1).map_or(0.0, |x1| x1 - r.x_grid[0]);
    let (mut l1_sp, mut l1_lap) = (0.0, 0.0);
    for (x, p) in r.x_grid.iter().zip(&r.pdf) {
        if x.abs() <= 5.0 {
            l1_sp += (p - sp.pdf(*x)).abs() * dx;
            l1_lap += (p - laplace_pdf(*x)).abs() * dx;
        }
    }
    IftSummary {
        cdf_last: *r.cdf.last().unwrap_or(&0.0),
        max_imag: r.imag_residual.iter().fold(0.0, |m, v| m.max(v.abs())),
        l1_splareto2: l1_sp,
        l1_laplace: l1_lap,
        phase_warnings: r.phase_warnings,
    }
}

/// Columns `x, pdf, imag, cdf, ref_splareto2, ref_laplace`.
pub fn write_ift_csv(path: &Path, r: &IftResult, comments: &[String]) -> Result<(), LabError> {
    let sp = PerturbationDistribution::symmetric_pareto(2.0).expect("shape 2 is valid");
    let rows: Vec<Vec<f64>> = (0..r.x_grid.len())
        .map(|i| {
            let x = r.x_grid[i];
            vec![x, r.pdf[i], r.imag_residual[i], r.cdf[i], sp.pdf(x), laplace_pdf(x)]
        })
        .collect();
    write_table(path, comments, &["x", "pdf", "imag", "cdf", "ref_splareto2", "ref_laplace"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rustfft_matches_definition() {
        let mut x: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, (k * k) as f64 * 0.1)).collect();
        let src = x.clone();
        fft_forward(&mut x);
        for (k, v) in x.iter().enumerate() {
            let want: Complex64 = src
                .iter()
                .enumerate()
                .map(|(j, s)| s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / 8.0))
                .sum();
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let g = IftGrid { n: 1000, ..Default::default() };
        assert!(invert(normal_quantile, &g).is_err());
        assert!(tsallis_ift(1.5, &IftGrid::default()).is_err());
    }
}

//! Numeric estimates for the five tail assumptions used by Fréchet-type FTPL
//! analyses, plus the von Mises ratio.
//!
//! Assumptions are existential ("there is a constant such that ..."), so the
//! checker reports estimates on a finite grid and by Monte Carlo; it does not
//! certify anything.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::PerturbationDistribution;
use crate::math::{geomspace, open_unit};

/// Geometric evaluation grid on `[x_min, x_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: 1e-3,
            x_max: 1e3,
            points: 2000,
        }
    }
}

/// Block sizes and sample counts for the block-maximum expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct McSpec {
    pub block_sizes: Vec<usize>,
    pub samples: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            block_sizes: vec![10, 100, 1000, 10_000],
            samples: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMaxEstimate {
    pub k: usize,
    pub a_k: f64,
    /// `E[max/a_k]` and its 95% CI halfwidth.
    pub mean_ratio: f64,
    pub mean_ratio_ci: f64,
    /// `E[a_k/max]` and its 95% CI halfwidth.
    pub mean_inverse: f64,
    pub mean_inverse_ci: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Finding {
    /// A supremum or limit is not finite on the grid.
    NonFiniteEstimate { statistic: &'static str, at: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// sup of `f/(1-F)` over the positive grid, and where it is attained.
    pub hazard_sup: f64,
    pub hazard_argsup: f64,
    /// `f/F` nonincreasing over the whole grid (both signs for two-sided laws).
    pub ff_monotone: bool,
    pub ff_first_violation: Option<f64>,
    /// Grid point past which `f` is nonincreasing.
    pub f_unimodal_from: f64,
    pub block_max: Vec<BlockMaxEstimate>,
    /// `max_k E[max/a_k]` and `max_k E[a_k/max]`.
    pub block_max_mu: f64,
    pub block_max_ml: f64,
    /// `(min_k, max_k)` of `a_k · k^(-1/alpha)`.
    pub a_k_fit: (f64, f64),
    pub neg_logderiv_sup: f64,
    /// `x f(x)/(1-F(x))` at the last grid point where `1-F` is representable.
    pub von_mises_limit: f64,
    pub grid: GridSpec,
    pub mc_samples: usize,
    pub findings: Vec<Finding>,
}

/// One line of the tabular report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub assumption: String,
    pub statistic: String,
    pub value: f64,
    pub grid_or_mc: String,
    pub notes: String,
}

fn symmetric_grid(dist: &PerturbationDistribution, grid: &[f64]) -> Vec<f64> {
    let mut xs = Vec::with_capacity(2 * grid.len() + 1);
    if !dist.support().lower().is_finite() {
        xs.extend(grid.iter().rev().map(|x| -x));
        xs.push(0.0);
    }
    xs.extend_from_slice(grid);
    xs
}

/// Quantile of the law conditioned on `X > 0`.
fn positive_part_quantile(dist: &PerturbationDistribution, v: f64) -> f64 {
    let f0 = dist.cdf(0.0);
    dist.quantile_unchecked(f0 + v * (1.0 - f0))
}

pub fn check_assumptions<R: Rng + ?Sized>(
    dist: &PerturbationDistribution,
    grid: &GridSpec,
    mc: &McSpec,
    rng: &mut R,
) -> AssumptionReport {
    let xs = geomspace(grid.x_min, grid.x_max, grid.points);
    let mut findings = Vec::new();

    // Assumption 1: bounded hazard.
    let mut hazard_sup = f64::NEG_INFINITY;
    let mut hazard_argsup = xs[0];
    // beyond this point 1-F underflows and the ratios are meaningless
    let usable: Vec<f64> = xs.iter().copied().filter(|&x| dist.sf(x) >= f64::MIN_POSITIVE).collect();
    for &x in &usable {
        let h = dist.pdf(x) / dist.sf(x);
        let h = if h.is_nan() { f64::INFINITY } else { h };
        if h > hazard_sup {
            hazard_sup = h;
            hazard_argsup = x;
        }
    }
    if !hazard_sup.is_finite() {
        findings.push(Finding::NonFiniteEstimate {
            statistic: "hazard_sup",
            at: hazard_argsup,
        });
    }

    // Assumption 2: f/F nonincreasing.
    let full = symmetric_grid(dist, &xs);
    let mut ff_first_violation = None;
    let mut prev = f64::INFINITY;
    for &x in &full {
        let c = dist.cdf(x);
        // subnormal CDF values carry no relative precision
        if c < f64::MIN_POSITIVE {
            continue;
        }
        let r = dist.pdf(x) / c;
        if r > prev * (1.0 + 1e-9) + 1e-300 {
            ff_first_violation = Some(x);
            break;
        }
        prev = r;
    }

    // Assumption 3: eventually decreasing density.
    let mut f_unimodal_from = full[0];
    for w in full.windows(2) {
        if dist.pdf(w[1]) > dist.pdf(w[0]) * (1.0 + 1e-12) {
            f_unimodal_from = w[1];
        }
    }

    // Assumption 4: block maxima of the positive part.
    let alpha = dist.tail_index_right();
    let mut block_max = Vec::new();
    let n = mc.samples.max(2);
    for &k in &mc.block_sizes {
        let a_k = positive_part_quantile(dist, 1.0 - 1.0 / k as f64);
        let (mut s1, mut s1q, mut s2, mut s2q) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            // max of k i.i.d. draws has CDF F^k
            let m = positive_part_quantile(dist, open_unit(rng).powf(1.0 / k as f64));
            let r = m / a_k;
            s1 += r;
            s1q += r * r;
            s2 += 1.0 / r;
            s2q += 1.0 / (r * r);
        }
        let nf = n as f64;
        let m1 = s1 / nf;
        let m2 = s2 / nf;
        let sd1 = ((s1q / nf - m1 * m1).max(0.0) * nf / (nf - 1.0)).sqrt();
        let sd2 = ((s2q / nf - m2 * m2).max(0.0) * nf / (nf - 1.0)).sqrt();
        block_max.push(BlockMaxEstimate {
            k,
            a_k,
            mean_ratio: m1,
            mean_ratio_ci: 1.96 * sd1 / nf.sqrt(),
            mean_inverse: m2,
            mean_inverse_ci: 1.96 * sd2 / nf.sqrt(),
        });
    }
    let block_max_mu = block_max.iter().map(|b| b.mean_ratio).fold(f64::NAN, f64::max);
    let block_max_ml = block_max.iter().map(|b| b.mean_inverse).fold(f64::NAN, f64::max);
    let normalized: Vec<f64> = block_max
        .iter()
        .map(|b| {
            if alpha.is_finite() {
                b.a_k * (b.k as f64).powf(-1.0 / alpha)
            } else {
                b.a_k
            }
        })
        .collect();
    let a_k_fit = (
        normalized.iter().copied().fold(f64::NAN, f64::min),
        normalized.iter().copied().fold(f64::NAN, f64::max),
    );
    for (name, v) in [("block_max_mu", block_max_mu), ("block_max_ml", block_max_ml)] {
        if !v.is_finite() {
            findings.push(Finding::NonFiniteEstimate { statistic: name, at: f64::NAN });
        }
    }

    // Assumption 5: bounded -f'/f.
    let mut neg_logderiv_sup = f64::NEG_INFINITY;
    let mut nl_at = xs[0];
    for &x in &xs {
        let f = dist.pdf(x);
        if f > 0.0 {
            let v = -dist.pdf_prime(x).value / f;
            if v > neg_logderiv_sup {
                neg_logderiv_sup = v;
                nl_at = x;
            }
        }
    }
    if !neg_logderiv_sup.is_finite() {
        findings.push(Finding::NonFiniteEstimate {
            statistic: "neg_logderiv_sup",
            at: nl_at,
        });
    }

    // von Mises ratio at the grid end.
    let x_end = usable.last().copied().unwrap_or(xs[0]);
    let von_mises_limit = x_end * dist.pdf(x_end) / dist.sf(x_end);
    if !von_mises_limit.is_finite() {
        findings.push(Finding::NonFiniteEstimate {
            statistic: "von_mises_limit",
            at: x_end,
        });
    }

    AssumptionReport {
        hazard_sup,
        hazard_argsup,
        ff_monotone: ff_first_violation.is_none(),
        ff_first_violation,
        f_unimodal_from,
        block_max,
        block_max_mu,
        block_max_ml,
        a_k_fit,
        neg_logderiv_sup,
        von_mises_limit,
        grid: grid.clone(),
        mc_samples: n,
        findings,
    }
}

impl AssumptionReport {
    /// Flattens the report into `(assumption, statistic, value, grid_or_mc, notes)` rows.
    pub fn rows(&self) -> Vec<ReportRow> {
        let g = format!("grid:{}@[{:e},{:e}]", self.grid.points, self.grid.x_min, self.grid.x_max);
        let row = |a: &str, s: &str, v: f64, src: &str, notes: String| ReportRow {
            assumption: a.into(),
            statistic: s.into(),
            value: v,
            grid_or_mc: src.into(),
            notes,
        };
        let flag = |name: &str| {
            if self.findings.iter().any(|f| matches!(f, Finding::NonFiniteEstimate { statistic, .. } if *statistic == name)) {
                String::from("non-finite on grid")
            } else {
                String::new()
            }
        };
        let mut rows = vec![
            row("A1", "hazard_sup", self.hazard_sup, &g, {
                let mut n = format!("argsup={}", self.hazard_argsup);
                let extra = flag("hazard_sup");
                if !extra.is_empty() {
                    n.push_str("; ");
                    n.push_str(&extra);
                }
                n
            }),
            row(
                "A2",
                "fF_monotone",
                if self.ff_monotone { 1.0 } else { 0.0 },
                &g,
                match self.ff_first_violation {
                    Some(x) => format!("first violation at x={x}"),
                    None => String::new(),
                },
            ),
            row("A3", "f_unimodal_from", self.f_unimodal_from, &g, String::new()),
        ];
        for b in &self.block_max {
            let src = format!("mc:k={},n={}", b.k, self.mc_samples);
            rows.push(row("A4", "a_k", b.a_k, &src, String::new()));
            rows.push(row(
                "A4",
                "E[max/a_k]",
                b.mean_ratio,
                &src,
                format!("ci95=+-{:e}", b.mean_ratio_ci),
            ));
            rows.push(row(
                "A4",
                "E[a_k/max]",
                b.mean_inverse,
                &src,
                format!("ci95=+-{:e}", b.mean_inverse_ci),
            ));
        }
        rows.push(row("A4", "M_u", self.block_max_mu, "mc", flag("block_max_mu")));
        rows.push(row("A4", "M_l", self.block_max_ml, "mc", flag("block_max_ml")));
        rows.push(row("A4", "A_l", self.a_k_fit.0, "mc", String::from("min_k a_k k^(-1/alpha)")));
        rows.push(row("A4", "A_u", self.a_k_fit.1, "mc", String::from("max_k a_k k^(-1/alpha)")));
        rows.push(row("A5", "neg_logderiv_sup", self.neg_logderiv_sup, &g, flag("neg_logderiv_sup")));
        rows.push(row(
            "vonMises",
            "x f/(1-F) at grid end",
            self.von_mises_limit,
            &g,
            flag("von_mises_limit"),
        ));
        rows
    }
}

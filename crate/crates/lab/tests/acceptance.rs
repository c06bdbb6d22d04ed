//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or overruns its time budget.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use ftpl_core::duality::{probe, three_arm_regularizer_scan};
use ftpl_core::policies::{Ftrl, ResampleCap};
use ftpl_core::rng::stream;
use ftpl_core::selection::{counterexample_scan, phi_monte_carlo, phi_quadrature, ratio_32_slope};
use ftpl_core::{BanditPolicy, LossModel, PerturbationDistribution, PolicyState, Regularizer};

use ftpl_lab::config::ExperimentConfig;
use ftpl_lab::experiment::run_experiment;
use ftpl_lab::ift::{sanity_normal, summarize, tsallis_ift, IftGrid};
use ftpl_lab::verdict::{judge, EnvelopeChoice, Expect, RegretTable};

const BERN8: &str = "bern:0.1,0.3,0.3,0.3,0.3,0.3,0.3,0.3";

type Outcome = (bool, String);

fn sp2() -> PerturbationDistribution {
    PerturbationDistribution::symmetric_pareto(2.0).unwrap()
}

fn normalization_and_monte_carlo() -> Outcome {
    let pool = [
        sp2(),
        PerturbationDistribution::laplace_pareto(),
        PerturbationDistribution::asymmetric_pareto(2.0, 3.0).unwrap(),
        PerturbationDistribution::gumbel(),
        PerturbationDistribution::frechet(2.0).unwrap(),
        PerturbationDistribution::laplace(1.0).unwrap(),
    ];
    let mut rng = stream(101, 0);
    let cases: Vec<(usize, Vec<f64>)> = (0..50)
        .map(|c| {
            let k = [2, 3, 5, 10][c % 4];
            (c % pool.len(), (0..k).map(|_| rng.random_range(0.0..3.0)).collect())
        })
        .collect();
    let n = 1_000_000;
    let results: Vec<(f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(c, (d, l))| {
            let q = phi_quadrature(l, &pool[*d], 1e-10).expect("quadrature");
            let mc = phi_monte_carlo(l, &pool[*d], n, &mut stream(101, 1 + c as u64));
            let sum_err = (q.phi.iter().sum::<f64>() - 1.0).abs();
            // deviation in units of the 95% CI halfwidth implied by the quadrature value
            let worst = q
                .phi
                .iter()
                .zip(&mc.phi)
                .map(|(a, b)| {
                    let half = 1.96 * (a * (1.0 - a) / n as f64).sqrt();
                    (a - b).abs() / half.max(1e-12)
                })
                .fold(0.0, f64::max);
            (sum_err, worst)
        })
        .collect();
    let sum_err = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    (
        sum_err <= 1e-7 && worst <= 3.0,
        format!("50 cases, max |sum phi - 1| = {sum_err:.1e}, max |quad - MC| = {worst:.2} CI halfwidths (limit 3)"),
    )
}

fn gumbel_softmax() -> Outcome {
    let g = PerturbationDistribution::gumbel();
    let mut rng = stream(102, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=10);
        let l: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..6.0)).collect();
        let p = phi_quadrature(&l, &g, 1e-10).expect("quadrature");
        let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = l.iter().map(|x| (lo - x).exp()).collect();
        let z: f64 = w.iter().sum();
        for (a, b) in p.phi.iter().zip(&w) {
            worst = worst.max((a - b / z).abs());
        }
    }
    (worst <= 1e-6, format!("100 vectors, max |phi - softmax| = {worst:.1e}"))
}

fn two_arm_constants() -> Outcome {
    let grid: Vec<f64> = (0..400).map(|i| 200.0 * i as f64 / 399.0).collect();
    let rows = counterexample_scan(&sp2(), 2, &grid, 1e-10).expect("scan");
    let sup = |f: &dyn Fn(&ftpl_core::selection::CounterexampleRow) -> f64, min_c: f64| {
        rows.iter().filter(|r| r.c >= min_c).map(f).fold(0.0, f64::max)
    };
    let trailing = sup(&|r| r.ratio_32, 0.0);
    let leader = sup(&|r| r.leader_ratio_32, 0.0);
    let tail = sup(&|r| r.ratio_32, 1.5);
    let ok = trailing <= 125.0 && leader <= 2.0 * 2f64.sqrt() + 0.01 && tail <= 121.5;
    (ok, format!("sup ratio_32: trailing {trailing:.3} (<= 125), leader {leader:.4} (<= 2.8384), trailing on c >= 1.5 {tail:.3} (<= 121.5)"))
}

fn three_arm_counterexample() -> Outcome {
    let lo = 2.0 * 3f64.sqrt();
    let grid: Vec<f64> = (0..100).map(|i| lo + (100.0 - lo) * i as f64 / 99.0).collect();
    let rows = counterexample_scan(&sp2(), 3, &grid, 1e-10).expect("scan");
    let all = rows.iter().all(|r| r.envelope_ok == Some(true));
    let slope = ratio_32_slope(&rows);
    let min_r1 = rows.iter().map(|r| r.ratio_1).fold(f64::INFINITY, f64::min);
    (
        all && slope >= 1.0 / 11.0,
        format!("100 points on [2 sqrt 3, 100], min ratio_1 {min_r1:.4} (>= 1/31), all ratio_32 >= (c+1)/11: {all}, slope {slope:.4} (>= 0.0909)"),
    )
}

fn table(res: &ftpl_lab::experiment::ExperimentResult) -> RegretTable {
    RegretTable {
        config_hash: Some(res.metadata.config_hash.clone()),
        t: res.checkpoints.clone(),
        mean: res.mean.clone(),
        stderr: res.stderr.clone(),
    }
}

fn adversarial_envelope() -> Outcome {
    let res = run_experiment(&ExperimentConfig::new("ftpl:lp:m=0.23", BERN8, 20_000, 20, 105), false).expect("run");
    let r = judge(&table(&res), &res.metadata, EnvelopeChoice::AdvLp, &Expect { m: Some(0.23), k: Some(8) }, false).expect("verdict");
    let last = r.rows.last().unwrap();
    let tightest = r.rows.iter().map(|v| (v.mean + 2.0 * v.stderr) / v.envelope).fold(0.0, f64::max);
    (
        r.pass,
        format!(
            "{} checkpoints, regret(T) = {:.1} ± {:.1} vs envelope {:.1}, max (mean + 2se)/envelope = {tightest:.3}",
            r.rows.len(),
            last.mean,
            last.stderr,
            last.envelope
        ),
    )
}

fn logarithmic_regime() -> Outcome {
    let mut cfg = ExperimentConfig::new("ftpl:lp:m=0.23", BERN8, 100_000, 20, 106);
    cfg.checkpoints.tail_points = 40;
    let res = run_experiment(&cfg, false).expect("run");
    let r = judge(&table(&res), &res.metadata, EnvelopeChoice::StoLp, &Expect::default(), true).expect("verdict");
    let (slope, _, r2) = r.log_fit.unwrap();
    let last = r.rows.last().unwrap();
    (
        r.pass,
        format!(
            "fit on [T/2, T]: slope {slope:.2}, R2 {r2:.4}; regret(T) = {:.1} ± {:.1} vs envelope {:.3e}",
            last.mean, last.stderr, last.envelope
        ),
    )
}

fn gradient_identity() -> Outcome {
    let pool = [
        sp2(),
        PerturbationDistribution::laplace_pareto(),
        PerturbationDistribution::gumbel(),
        PerturbationDistribution::asymmetric_pareto(2.0, 3.0).unwrap(),
        PerturbationDistribution::laplace(1.0).unwrap(),
    ];
    let mut rng = stream(107, 0);
    let mut worst = 0.0f64;
    for case in 0..30 {
        let k = rng.random_range(2..=5);
        let nu: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        worst = worst.max(probe(&nu, &pool[case % pool.len()], 1e-12, 1e-4).expect("probe").grad_check);
    }
    (worst <= 1e-5, format!("30 probes, max |dPhi/dnu - phi| = {worst:.1e}"))
}

fn regularizer_envelope() -> Outcome {
    let xs: Vec<f64> = (0..50).map(|i| if i == 49 { 0.999 } else { 0.34 + (0.999 - 0.34) * i as f64 / 49.0 }).collect();
    let rows = three_arm_regularizer_scan(&xs, &sp2()).expect("scan");
    let inside = rows.iter().filter(|r| r.within).count();
    let last = rows.last().unwrap();
    (
        inside == rows.len(),
        format!("{inside}/50 points inside; at x = 0.999: {:.2} <= {:.2} <= {:.2}", last.lower, last.c, last.upper),
    )
}

fn ift_pipeline() -> Outcome {
    let tight = sanity_normal(&IftGrid { eps: 1e-12, ..Default::default() }).expect("normal");
    let default_cut = sanity_normal(&IftGrid::default()).expect("normal");
    let ts = summarize(&tsallis_ift(0.5, &IftGrid::default()).expect("tsallis"));
    let a = tight.sup_error <= 1e-3;
    let b = (0.98..=1.02).contains(&ts.cdf_last) && ts.max_imag <= 1e-10 && ts.l1_splareto2 < ts.l1_laplace;
    (
        a && b,
        format!(
            "(a) normal sup error {:.1e} at eps 1e-12 ({:.1e} at eps 1e-4); (b) cdf {:.4}, max|imag| {:.1e}, L1 to SP(2) {:.4} < to Laplace {:.4}",
            tight.sup_error, default_cut.sup_error, ts.cdf_last, ts.max_imag, ts.l1_splareto2, ts.l1_laplace
        ),
    )
}

fn estimator_properties() -> Outcome {
    let g = PerturbationDistribution::gumbel();
    let mut notes = Vec::new();
    let mut ok = true;
    for (j, w) in [0.05, 0.25, 0.5f64].into_iter().enumerate() {
        let mut s = PolicyState::new(2, 1.0, stream(110, j as u64)).unwrap().with_cap(ResampleCap::Fixed(1_000_000));
        s.lhat = vec![((1.0 - w) / w).ln(), 0.0];
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.geometric_resample(&g, 0) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let z = (mean - 1.0 / w) / (sd / (n as f64).sqrt());
        ok &= z.abs() <= 3.0;
        notes.push(format!("w={w}: {mean:.3} (z {z:+.2})"));
    }
    let model = LossModel::bernoulli(vec![0.1, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3]).unwrap();
    let mut learner = Ftrl::new(PolicyState::new(8, 0.23, stream(110, 10)).unwrap(), Regularizer::Tsallis { tsallis_beta: 0.5 });
    let mut env = stream(110, 11);
    let mut loss = vec![0.0; 8];
    for t in 1..=100_000 {
        let arm = learner.select().expect("ftrl");
        model.next_loss_into(t, &mut env, &mut loss).unwrap();
        learner.update(arm, loss[arm]);
    }
    ok &= learner.max_kkt <= 1e-8;
    notes.push(format!("Tsallis KKT max {:.1e} over 1e5 rounds", learner.max_kkt));
    (ok, notes.join(", "))
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("probability normalization and Monte Carlo agreement", 120, normalization_and_monte_carlo),
        ("Gumbel selection equals softmax", 30, gumbel_softmax),
        ("two-arm symmetric Pareto constants", 120, two_arm_constants),
        ("three-arm counterexample growth", 60, three_arm_counterexample),
        ("adversarial envelope, FTPL Laplace-Pareto", 300, adversarial_envelope),
        ("logarithmic stochastic regret", 900, logarithmic_regime),
        ("potential gradient identity", 120, gradient_identity),
        ("three-arm regularizer envelope", 180, regularizer_envelope),
        ("characteristic-function inversion", 60, ift_pipeline),
        ("estimator properties", 120, estimator_properties),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{:.1}s / {budget}s{}]: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

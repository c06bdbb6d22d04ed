use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ftpl_core::distributions::{check_assumptions, GridSpec, McSpec};
use ftpl_core::duality::three_arm_regularizer_scan;
use ftpl_core::rng::stream;
use ftpl_core::selection::{counterexample_scan, phi_quadrature, ratio_32_slope, rank_bound_scan, LambdaTemplate};

use ftpl_lab::config::ExperimentConfig;
use ftpl_lab::experiment::{metadata_path, run_experiment};
use ftpl_lab::ift::{sanity_normal, summarize, tsallis_ift, write_ift_csv, IftGrid};
use ftpl_lab::io::{write_table, write_text_table};
use ftpl_lab::specs::{parse_dist, parse_range, parse_vector};
use ftpl_lab::verdict::{judge, read_metadata, read_regret, EnvelopeChoice, Expect};
use ftpl_lab::LabError;

#[derive(Parser)]
#[command(name = "pll", version, about = "Perturbed-leader bandit laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a regret experiment from a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Regret CSV; defaults to `[output] path` or `regret.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-round trace of run 0.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare a regret CSV with a bound envelope.
    Verdict {
        #[arg(long)]
        csv: PathBuf,
        /// Defaults to the `.meta.json` next to the CSV.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// adv-lp, sto-lp or tsallis-ref
        #[arg(long)]
        envelope: EnvelopeChoice,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        /// Also require logarithmic growth on [T/2, T].
        #[arg(long)]
        log_fit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Selection probabilities at one loss vector, or a scan.
    AnalyzePhi {
        #[arg(long)]
        dist: String,
        /// Comma-separated cumulative losses.
        #[arg(long, conflicts_with = "scan")]
        lambda: Option<String>,
        #[arg(long, value_enum)]
        scan: Option<Scan>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// lo:hi:n
        #[arg(long, default_value = "0:200:400")]
        c: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical report on the tail assumptions of a distribution.
    CheckDist {
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Duality(Duality),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scan {
    /// `(0, c, ..., c)` with ratios of the leader and a trailing arm.
    Counterexample,
    /// Rank-bound scan over `(0, c, ..., c)`.
    RankBound,
    /// Arithmetic loss vectors `(0, c, 2c, ...)`.
    Arithmetic,
}

#[derive(Subcommand)]
enum Duality {
    /// Invert the characteristic function of the Tsallis difference law.
    Ift {
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value = "ift.csv")]
        out: PathBuf,
    },
    /// Regularizer derivative along `(x, (1-x)/2, (1-x)/2)` against its envelope.
    Regscan {
        #[arg(long, default_value = "splareto:a=2")]
        dist: String,
        /// lo:hi or lo:hi:n
        #[arg(long, default_value = "0.34:0.999")]
        x: String,
        #[arg(long, default_value = "reg.csv")]
        out: PathBuf,
    },
    /// Invert the standard normal; the output should be N(0, 1/2).
    SanityNormal {
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        max_error: f64,
    },
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli) -> Result<bool, LabError> {
    match cli.cmd {
        Cmd::Simulate { config, out, trace, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if threads.is_some() {
                cfg.output.threads = threads;
            }
            let out = out.or_else(|| cfg.output.path.clone()).unwrap_or_else(|| "regret.csv".into());
            let res = run_experiment(&cfg, trace.is_some())?;
            res.write_csv(&out)?;
            res.write_metadata(&metadata_path(&out))?;
            if let Some(t) = trace {
                res.write_trace(&t)?;
            }
            let last = res.mean.len() - 1;
            println!(
                "T={} runs={} regret={:.3} ± {:.3}  ({:.1}s on {} threads) -> {}",
                res.metadata.horizon,
                res.metadata.runs,
                res.mean[last],
                res.stderr[last],
                res.metadata.wall_time_s,
                res.metadata.threads,
                out.display()
            );
            Ok(true)
        }
        Cmd::Verdict { csv, meta, envelope, m, k, log_fit, out } => {
            let table = read_regret(&csv)?;
            let md = read_metadata(&meta.unwrap_or_else(|| metadata_path(&csv)))?;
            let report = judge(&table, &md, envelope, &Expect { m, k }, log_fit)?;
            for r in &report.rows {
                println!("t={:>8} mean={:>12.4} stderr={:>9.4} envelope={:>14.4} {}", r.t, r.mean, r.stderr, r.envelope, verdict_word(r.pass));
            }
            if let Some((slope, _, r2)) = report.log_fit {
                println!("ln t fit on [T/2, T]: slope={slope:.4} R2={r2:.4}");
            }
            if let Some(path) = out {
                let rows: Vec<Vec<f64>> = report
                    .rows
                    .iter()
                    .map(|r| vec![r.t as f64, r.mean, r.stderr, r.envelope, r.pass as u8 as f64])
                    .collect();
                write_table(&path, &[format!("envelope={:?}", report.envelope)], &["t", "mean", "stderr", "envelope", "pass"], &rows)?;
            }
            println!("{}", verdict_word(report.pass));
            Ok(report.pass)
        }
        Cmd::AnalyzePhi { dist, lambda, scan, k, c, tol, out } => {
            let d = parse_dist(&dist)?;
            let num = |e| LabError::Numeric(format!("{e:?}"));
            match (lambda, scan) {
                (Some(l), _) => {
                    let p = phi_quadrature(&parse_vector(&l)?, &d, tol).map_err(num)?;
                    let rows: Vec<Vec<f64>> = (0..p.phi.len())
                        .map(|i| vec![i as f64, p.lambda[i], p.rank[i] as f64, p.phi[i], p.phi_prime[i], p.ratio_1[i], p.ratio_32[i]])
                        .collect();
                    for r in &rows {
                        println!("arm={} lambda={} rank={} phi={:.10} phi'={:.6e} ratio_1={:.6} ratio_32={:.6}", r[0], r[1], r[2], r[3], r[4], r[5], r[6]);
                    }
                    println!("sum phi = {:.12}, quadrature error {:.2e}", p.phi.iter().sum::<f64>(), p.quad_error);
                    if let Some(path) = out {
                        write_table(&path, &[format!("dist={dist}")], &["arm", "lambda", "rank", "phi", "phi_prime", "ratio_1", "ratio_32"], &rows)?;
                    }
                    Ok(true)
                }
                (None, Some(Scan::Counterexample)) => {
                    let rows = counterexample_scan(&d, k, &parse_range(&c)?, tol).map_err(num)?;
                    let ok = rows.iter().all(|r| r.envelope_ok != Some(false));
                    println!("{} points, ratio_32 slope {:.4}", rows.len(), ratio_32_slope(&rows));
                    if let Some(path) = out {
                        let table: Vec<Vec<f64>> = rows
                            .iter()
                            .map(|r| vec![r.c, r.leader_ratio_1, r.leader_ratio_32, r.ratio_1, r.ratio_32, r.quad_error])
                            .collect();
                        write_table(&path, &[format!("dist={dist} K={k}")], &["c", "leader_ratio_1", "leader_ratio_32", "ratio_1", "ratio_32", "quad_error"], &table)?;
                    }
                    Ok(ok)
                }
                (None, Some(s)) => {
                    let template = match s {
                        Scan::Arithmetic => LambdaTemplate::arithmetic(k),
                        _ => LambdaTemplate::one_vs_rest(k),
                    };
                    let rows = rank_bound_scan(&d, &template, &parse_range(&c)?, tol).map_err(num)?;
                    let sup = rows.last().map_or(0.0, |r| r.running_max);
                    println!("{} rows, sup of ratio_1 / min(rank term, gap term) = {sup:.4}", rows.len());
                    if let Some(path) = out {
                        let table: Vec<Vec<f64>> = rows
                            .iter()
                            .map(|r| vec![r.c, r.i as f64, r.sigma as f64, r.lambda_gap, r.phi, r.phi_prime, r.ratio_1, r.ratio_32, r.rank_term, r.gap_term, r.running_max])
                            .collect();
                        write_table(
                            &path,
                            &[format!("dist={dist} K={k}")],
                            &["c", "i", "sigma", "lambda_gap", "phi", "phi_prime", "ratio_1", "ratio_32", "rank_term", "gap_term", "running_max"],
                            &table,
                        )?;
                    }
                    Ok(true)
                }
                (None, None) => Err(LabError::Spec("analyze-phi needs --lambda or --scan".into())),
            }
        }
        Cmd::CheckDist { dist, seed, out } => {
            let d = parse_dist(&dist)?;
            let report = check_assumptions(&d, &GridSpec::default(), &McSpec::default(), &mut stream(seed, 0));
            let rows = report.rows();
            for r in &rows {
                println!("{:<4} {:<22} {:>14.6} {:<28} {}", r.assumption, r.statistic, r.value, r.grid_or_mc, r.notes);
            }
            if let Some(path) = out {
                let text: Vec<Vec<String>> = rows
                    .into_iter()
                    .map(|r| vec![r.assumption, r.statistic, r.value.to_string(), r.grid_or_mc, r.notes])
                    .collect();
                write_text_table(&path, &["assumption", "statistic", "value", "grid_or_mc", "notes"], &text)?;
            }
            Ok(true)
        }
        Cmd::Duality(Duality::Ift { beta, xmin, xmax, n, eps, out }) => {
            let grid = IftGrid { x_min: xmin, x_max: xmax, n, eps, ..Default::default() };
            let r = tsallis_ift(beta, &grid)?;
            let s = summarize(&r);
            write_ift_csv(&out, &r, &[format!("beta={beta} eps={eps} N={n}")])?;
            println!(
                "cdf(x_max)={:.6} max|imag|={:.2e} L1 to splareto(2)={:.4} to laplace={:.4} phase warnings={}",
                s.cdf_last, s.max_imag, s.l1_splareto2, s.l1_laplace, s.phase_warnings
            );
            Ok((0.98..=1.02).contains(&s.cdf_last) && s.max_imag <= 1e-10 && s.l1_splareto2 < s.l1_laplace)
        }
        Cmd::Duality(Duality::Regscan { dist, x, out }) => {
            let d = parse_dist(&dist)?;
            let rows = three_arm_regularizer_scan(&parse_range(&x)?, &d).map_err(|e| LabError::Numeric(format!("{e:?}")))?;
            let table: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.x, r.c, r.lower, r.upper, r.tsallis_ref, r.within as u8 as f64])
                .collect();
            write_table(&out, &[format!("dist={dist}")], &["x", "c", "lower", "upper", "tsallis_ref", "within"], &table)?;
            let ok = rows.iter().all(|r| r.within);
            println!("{} points, all within envelope: {ok}", rows.len());
            Ok(ok)
        }
        Cmd::Duality(Duality::SanityNormal { eps, n, max_error }) => {
            let s = sanity_normal(&IftGrid { n, eps, ..Default::default() })?;
            println!("eps={:e} sup|pdf - N(0,1/2)|={:.3e} cdf(x_max)={:.8}", s.eps, s.sup_error, s.cdf_last);
            Ok(s.sup_error <= max_error)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::Command;

use ftpl_lab::config::ExperimentConfig;
use ftpl_lab::experiment::{metadata_path, run_experiment};
use ftpl_lab::verdict::{judge, read_metadata, read_regret, EnvelopeChoice, Expect};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pll-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const BERN8: &str = "bern:0.1,0.3,0.3,0.3,0.3,0.3,0.3,0.3";

#[test]
fn rerun_gives_identical_bytes() {
    let dir = scratch("rerun");
    let cfg = ExperimentConfig::new("ftpl:lp:m=0.23", "bern:0.1,0.5", 10, 1, 42);
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    run_experiment(&cfg, false).unwrap().write_csv(&a).unwrap();
    run_experiment(&cfg, false).unwrap().write_csv(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = scratch("threads");
    let mut cfg = ExperimentConfig::new("ftrl:tsallis:beta=0.5:m=0.23", BERN8, 2000, 6, 9);
    cfg.output.threads = Some(1);
    let serial = run_experiment(&cfg, false).unwrap();
    cfg.output.threads = Some(4);
    let parallel = run_experiment(&cfg, false).unwrap();
    let (a, b) = (dir.join("s.csv"), dir.join("p.csv"));
    serial.write_csv(&a).unwrap();
    parallel.write_csv(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(parallel.metadata.max_kkt.unwrap() <= 1e-8);
}

#[test]
fn written_results_round_trip_into_a_verdict() {
    let dir = scratch("verdict");
    let cfg = ExperimentConfig::new("ftpl:lp:m=0.23", BERN8, 3000, 4, 3);
    let res = run_experiment(&cfg, true).unwrap();
    let csv = dir.join("r.csv");
    res.write_csv(&csv).unwrap();
    res.write_metadata(&metadata_path(&csv)).unwrap();
    res.write_trace(&dir.join("trace.csv")).unwrap();
    let table = read_regret(&csv).unwrap();
    assert_eq!(table.t, res.checkpoints);
    assert_eq!(table.mean, res.mean);
    let md = read_metadata(&metadata_path(&csv)).unwrap();
    assert_eq!(md.config_hash, cfg.hash());
    assert!(md.cap_at_horizon.unwrap() >= 1);
    let report = judge(&table, &md, EnvelopeChoice::AdvLp, &Expect { m: Some(0.23), k: Some(8) }, false).unwrap();
    assert!(report.pass);
}

#[test]
fn run_regret_matches_trace() {
    let cfg = ExperimentConfig::new("ftpl:splareto:a=2:m=0.23", "switch:phase=50,mu1=0.2,0.8,mu2=0.8,0.2", 400, 1, 5);
    let res = run_experiment(&cfg, true).unwrap();
    let trace = res.runs[0].trace.as_ref().unwrap();
    for (t, r) in res.checkpoints.iter().zip(&res.runs[0].curve) {
        assert_eq!(trace[(*t - 1) as usize].cum_regret, *r);
    }
}

#[test]
fn tsallis_ftrl_tracks_symmetric_pareto_ftpl() {
    let t = 20_000;
    let ftrl = run_experiment(&ExperimentConfig::new("ftrl:tsallis:beta=0.5:m=0.23", BERN8, t, 20, 11), false).unwrap();
    let ftpl = run_experiment(&ExperimentConfig::new("ftpl:splareto:a=2:m=0.23", BERN8, t, 20, 11), false).unwrap();
    for (j, cp) in ftrl.checkpoints.iter().enumerate() {
        if *cp >= t / 4 {
            let ratio = ftrl.mean[j] / ftpl.mean[j];
            assert!((0.5..=2.0).contains(&ratio), "t={cp}: {} vs {}", ftrl.mean[j], ftpl.mean[j]);
        }
    }
}

fn pll(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_pll")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = scratch("cli");
    let cfg = dir.join("c.toml");
    std::fs::write(
        &cfg,
        "[experiment]\npolicy = \"ftpl:lp:m=0.23\"\nenv = \"bern:0.1,0.3\"\nhorizon = 500\nruns = 2\nseed = 1\n",
    )
    .unwrap();
    let csv = dir.join("r.csv");
    let (c, o) = (cfg.to_str().unwrap(), csv.to_str().unwrap());
    assert_eq!(pll(&["simulate", "--config", c, "--out", o]), 0);
    assert_eq!(pll(&["verdict", "--csv", o, "--envelope", "adv-lp"]), 0);
    assert_eq!(pll(&["verdict", "--csv", o, "--envelope", "adv-lp", "--k", "5"]), 2);
    assert_eq!(pll(&["simulate", "--config", "/nonexistent.toml"]), 2);
    assert_eq!(pll(&["frobnicate"]), 2);
    assert_eq!(pll(&["duality", "sanity-normal", "--eps", "1e-4", "--n", "256"]), 1);

    // an impossible envelope: rewrite the mean column to twice TsallisRef
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('t') {
            out.push_str(line);
        } else {
            let mut cells: Vec<String> = line.split(',').map(String::from).collect();
            let t: f64 = cells[0].parse().unwrap();
            cells[1] = (2.0 * (4.0 * (2.0 * t).sqrt() + 1.0)).to_string();
            out.push_str(&cells.join(","));
        }
        out.push('\n');
    }
    std::fs::write(&csv, out).unwrap();
    assert_eq!(pll(&["verdict", "--csv", o, "--envelope", "tsallis-ref"]), 1);
}

//! Envelope verdicts over a regret CSV and its metadata.

use std::path::Path;

use ftpl_core::envelope::{log_fit, verdict, BoundEnvelope, CheckpointVerdict};
use ftpl_core::Kind;

use crate::experiment::Metadata;
use crate::io::read_table;
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeChoice {
    AdvLp,
    StoLp,
    TsallisRef,
}

impl std::str::FromStr for EnvelopeChoice {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "adv-lp" => Ok(EnvelopeChoice::AdvLp),
            "sto-lp" => Ok(EnvelopeChoice::StoLp),
            "tsallis-ref" => Ok(EnvelopeChoice::TsallisRef),
            _ => Err(LabError::Spec(format!("`{s}`: envelope must be adv-lp, sto-lp or tsallis-ref"))),
        }
    }
}

/// Mean regret per checkpoint as read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTable {
    pub config_hash: Option<String>,
    pub t: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn read_regret(path: &Path) -> Result<RegretTable, LabError> {
    let table = read_table(path)?;
    let col = |name: &str| {
        table.column(name).ok_or_else(|| LabError::Format {
            path: path.to_path_buf(),
            msg: format!("missing column `{name}`"),
        })
    };
    Ok(RegretTable {
        config_hash: table.comment_value("config_sha256").map(String::from),
        t: col("t")?.into_iter().map(|t| t as u64).collect(),
        mean: col("mean")?,
        stderr: col("stderr")?,
    })
}

pub fn read_metadata(path: &Path) -> Result<Metadata, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// Values the caller expects; any that disagree with the metadata are an error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expect {
    pub m: Option<f64>,
    pub k: Option<usize>,
}

pub fn envelope_for(choice: EnvelopeChoice, md: &Metadata, expect: &Expect) -> Result<BoundEnvelope, LabError> {
    if let Some(m) = expect.m {
        if (m - md.m).abs() > 1e-12 {
            return Err(LabError::MetadataMismatch(format!("m = {m} requested, run used m = {}", md.m)));
        }
    }
    if let Some(k) = expect.k {
        if k != md.arms {
            return Err(LabError::MetadataMismatch(format!("K = {k} requested, run has K = {}", md.arms)));
        }
    }
    let lp = format!("{:?}", Kind::LaplacePareto);
    let needs_lp = || {
        if md.dist.as_deref() == Some(lp.as_str()) {
            Ok(())
        } else {
            Err(LabError::MetadataMismatch(format!(
                "the Laplace-Pareto envelopes need an ftpl:lp run, got `{}`",
                md.policy
            )))
        }
    };
    match choice {
        EnvelopeChoice::AdvLp => {
            needs_lp()?;
            Ok(BoundEnvelope::AdvLP { m: md.m, k: md.arms })
        }
        EnvelopeChoice::StoLp => {
            needs_lp()?;
            let gaps = md
                .gaps
                .as_ref()
                .ok_or_else(|| LabError::MetadataMismatch("stochastic envelope needs a stochastic environment".into()))?;
            let sub: Vec<f64> = gaps.iter().copied().filter(|g| *g > 0.0).collect();
            if sub.len() + 1 != gaps.len() {
                return Err(LabError::MetadataMismatch("stochastic envelope needs a unique best arm".into()));
            }
            Ok(BoundEnvelope::StoLP {
                m: md.m,
                k: md.arms,
                gaps: sub,
            })
        }
        EnvelopeChoice::TsallisRef => Ok(BoundEnvelope::TsallisRef { k: md.arms }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerdictReport {
    pub envelope: BoundEnvelope,
    pub rows: Vec<CheckpointVerdict>,
    /// `(slope, intercept, r2)` of mean regret against `ln t` on `[T/2, T]`.
    pub log_fit: Option<(f64, f64, f64)>,
    pub pass: bool,
}

/// Checks every checkpoint against the envelope. With `require_log_growth`
/// the fit over `[T/2, T]` must also have `R² ≥ 0.9` and positive slope.
pub fn judge(table: &RegretTable, md: &Metadata, choice: EnvelopeChoice, expect: &Expect, require_log_growth: bool) -> Result<VerdictReport, LabError> {
    if let Some(h) = &table.config_hash {
        if *h != md.config_hash {
            return Err(LabError::MetadataMismatch(format!("CSV config hash {h} differs from metadata {}", md.config_hash)));
        }
    }
    if table.t.last() != Some(&md.horizon) {
        return Err(LabError::MetadataMismatch("last checkpoint is not the horizon in the metadata".into()));
    }
    let envelope = envelope_for(choice, md, expect)?;
    let rows = verdict(&table.t, &table.mean, &table.stderr, &envelope);
    let fit = log_fit(&table.t, &table.mean, md.horizon / 2, md.horizon);
    let mut pass = rows.iter().all(|r| r.pass);
    if require_log_growth {
        pass &= fit.2 >= 0.9 && fit.0 > 0.0;
    }
    Ok(VerdictReport {
        envelope,
        rows,
        log_fit: Some(fit),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Metadata {
        Metadata {
            config_hash: "abc".into(),
            policy: "ftpl:lp:m=0.23".into(),
            env: "bern:0.1,0.3".into(),
            arms: 2,
            horizon: 100,
            runs: 1,
            master_seed: 0,
            run_streams: vec![(0, 1)],
            m: 0.23,
            dist: Some(format!("{:?}", Kind::LaplacePareto)),
            regularizer: None,
            stochastic: true,
            gaps: Some(vec![0.0, 0.2]),
            cap_rule: None,
            cap_at_horizon: None,
            cap_bias_bound: None,
            cap_hits: None,
            max_kkt: None,
            threads: 1,
            wall_time_s: 0.0,
        }
    }

    fn table(mean: Vec<f64>) -> RegretTable {
        RegretTable {
            config_hash: Some("abc".into()),
            t: vec![1, 10, 50, 100],
            stderr: vec![0.0; mean.len()],
            mean,
        }
    }

    #[test]
    fn zero_regret_passes_and_double_envelope_fails() {
        let md = meta();
        let r = judge(&table(vec![0.0; 4]), &md, EnvelopeChoice::AdvLp, &Expect::default(), false).unwrap();
        assert!(r.pass);
        let env = BoundEnvelope::AdvLP { m: 0.23, k: 2 };
        let twice = [1u64, 10, 50, 100].iter().map(|t| 2.0 * env.evaluate(*t as f64)).collect();
        let r = judge(&table(twice), &md, EnvelopeChoice::AdvLp, &Expect::default(), false).unwrap();
        assert!(r.rows.iter().all(|v| !v.pass) && !r.pass);
    }

    #[test]
    fn mismatches_are_reported() {
        let md = meta();
        let t = table(vec![0.0; 4]);
        let e = judge(&t, &md, EnvelopeChoice::AdvLp, &Expect { m: Some(0.5), k: None }, false);
        assert!(matches!(e, Err(LabError::MetadataMismatch(_))));
        let e = judge(&t, &md, EnvelopeChoice::AdvLp, &Expect { m: None, k: Some(3) }, false);
        assert!(matches!(e, Err(LabError::MetadataMismatch(_))));
        let mut other = t.clone();
        other.config_hash = Some("zzz".into());
        assert!(matches!(judge(&other, &md, EnvelopeChoice::AdvLp, &Expect::default(), false), Err(LabError::MetadataMismatch(_))));
        let mut adv = md.clone();
        adv.gaps = None;
        assert!(matches!(judge(&t, &adv, EnvelopeChoice::StoLp, &Expect::default(), false), Err(LabError::MetadataMismatch(_))));
        let mut sp = md;
        sp.dist = Some("SymmetricPareto { shape: 2.0 }".into());
        assert!(matches!(judge(&t, &sp, EnvelopeChoice::AdvLp, &Expect::default(), false), Err(LabError::MetadataMismatch(_))));
    }
}

//! TOML experiment configs.
//!
//! ```toml
//! [experiment]
//! policy = "ftpl:lp:m=0.23"
//! env = "bern:0.1,0.3,0.3,0.3"
//! horizon = 20000
//! runs = 20
//! seed = 1
//!
//! [checkpoints]
//! tail_points = 40    # extra evenly spaced checkpoints on [T/2, T]
//!
//! [output]
//! path = "regret.csv"
//! threads = 8
//! ```
//!
//! Only `[experiment]` and `[checkpoints]` enter the config hash, so the
//! output location and thread count never change the CSV bytes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ftpl_core::environments::checkpoints;
use ftpl_core::LossModel;

use crate::specs::{parse_env, parse_policy, PolicySpec};
use crate::LabError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub policy: String,
    pub env: String,
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointGrid {
    #[serde(default)]
    pub tail_points: usize,
}

impl CheckpointGrid {
    /// `⌈1.25^k⌉` up to `T`, plus `tail_points` evenly spaced on `[T/2, T]`.
    pub fn points(&self, horizon: u64) -> Vec<u64> {
        let mut t = checkpoints(horizon);
        if self.tail_points > 1 {
            let lo = horizon / 2;
            let n = self.tail_points as u64;
            t.extend((0..n).map(|i| lo + (horizon - lo) * i / (n - 1)).filter(|x| *x >= 1));
            t.sort_unstable();
            t.dedup();
        }
        t
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub checkpoints: CheckpointGrid,
    #[serde(default)]
    pub output: OutputSection,
    /// File the config was read from; relative paths resolve against its directory.
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

/// A config with its specs parsed.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub policy: PolicySpec,
    pub env: LossModel,
    pub checkpoints: Vec<u64>,
    pub hash: String,
}

impl ExperimentConfig {
    pub fn new(policy: &str, env: &str, horizon: u64, runs: u64, seed: u64) -> Self {
        ExperimentConfig {
            experiment: ExperimentSection {
                policy: policy.into(),
                env: env.into(),
                horizon,
                runs,
                seed,
            },
            checkpoints: CheckpointGrid::default(),
            output: OutputSection::default(),
            source: None,
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, LabError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.source = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Self::from_toml(&text, path)
    }

    /// SHA-256 of the canonical TOML of the result-determining sections.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            experiment: &'a ExperimentSection,
            checkpoints: &'a CheckpointGrid,
        }
        let canon = toml::to_string(&Hashed {
            experiment: &self.experiment,
            checkpoints: &self.checkpoints,
        })
        .expect("config sections serialize");
        Sha256::digest(canon.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self) -> Result<Resolved, LabError> {
        let field = |name: &str, e: LabError| LabError::Config {
            path: self.source.clone().unwrap_or_default(),
            msg: format!("experiment.{name}: {e}"),
        };
        let ex = &self.experiment;
        let policy = parse_policy(&ex.policy).map_err(|e| field("policy", e))?;
        let env = parse_env(&ex.env, self.source.as_deref().and_then(Path::parent)).map_err(|e| field("env", e))?;
        if ex.horizon == 0 {
            return Err(field("horizon", LabError::Spec("must be at least 1".into())));
        }
        if ex.runs == 0 {
            return Err(field("runs", LabError::Spec("must be at least 1".into())));
        }
        Ok(Resolved {
            checkpoints: self.checkpoints.points(ex.horizon),
            policy,
            env,
            hash: self.hash(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"
[experiment]
policy = "ftpl:lp:m=0.23"
env = "bern:0.1,0.3"
horizon = 1000
runs = 4
seed = 7

[checkpoints]
tail_points = 11
"#;

    #[test]
    fn parses_and_hashes_stably() {
        let a = ExperimentConfig::from_toml(CFG, Path::new("a.toml")).unwrap();
        let mut b = a.clone();
        b.output.threads = Some(3);
        b.output.path = Some("elsewhere.csv".into());
        assert_eq!(a.hash(), b.hash());
        b.experiment.seed = 8;
        assert_ne!(a.hash(), b.hash());
        let r = a.resolve().unwrap();
        assert_eq!(*r.checkpoints.last().unwrap(), 1000);
        assert!(r.checkpoints.contains(&500) && r.checkpoints.contains(&550));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = CFG.replace("ftpl:lp:m=0.23", "ftpl:lp");
        let e = ExperimentConfig::from_toml(&bad, Path::new("a.toml")).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("experiment.policy"), "{e}");
        let typo = CFG.replace("horizon", "horizn");
        let e = ExperimentConfig::from_toml(&typo, Path::new("a.toml")).unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
    }
}

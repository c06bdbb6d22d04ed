//! The small spec languages used on the command line and in configs.
//!
//! Distributions: `splareto:a=2`, `lp`, `asp:2,3`, `frechet:3`, `pareto:2`
//! (Lomax, optional scale `pareto:3,1.5`), `exp:2`, `gumbel`, `laplace:1`,
//! `hybrid:right=pareto:2,left=pareto:4`, `trunc(frechet:2)`. Arguments that
//! themselves contain commas go in parentheses: `hybrid:right=(pareto:3,1.5),left=exp:2`.
//!
//! Policies: `ftpl:<dist>:m=0.23`, `ftrl:tsallis:beta=0.5:m=0.23`,
//! `ftrl:shannon:m=0.1`; FTPL also takes `:cap=<n>` or `:capfactor=<x>`.
//!
//! Environments: `bern:0.1,0.3,0.3`, `sched:file.csv`,
//! `switch:phase=1000,mu1=0.1,0.5,mu2=0.5,0.1`.

use std::fmt;
use std::path::Path;

use ftpl_core::policies::ResampleCap;
use ftpl_core::{LossModel, PerturbationDistribution, Regularizer};

use crate::LabError;

fn bad(spec: &str, why: impl fmt::Display) -> LabError {
    LabError::Spec(format!("`{spec}`: {why}"))
}

fn number(spec: &str, s: &str) -> Result<f64, LabError> {
    s.trim().parse::<f64>().map_err(|_| bad(spec, format!("`{s}` is not a number")))
}

/// Splits on commas that are not inside parentheses.
fn top_level_split(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn unwrap_parens(s: &str) -> &str {
    let s = s.trim();
    if s.starts_with('(') && s.ends_with(')') {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Positional or `key=value` numeric arguments.
fn numeric_args(spec: &str, args: &str, keys: &[&str]) -> Result<Vec<f64>, LabError> {
    if args.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, part) in top_level_split(args).into_iter().enumerate() {
        let v = match part.split_once('=') {
            Some((k, v)) => {
                if keys.get(i) != Some(&k.trim()) {
                    return Err(bad(spec, format!("unexpected key `{k}` (expected {keys:?} in order)")));
                }
                v
            }
            None => part,
        };
        out.push(number(spec, v)?);
    }
    if out.len() > keys.len() {
        return Err(bad(spec, format!("too many arguments, expected at most {}", keys.len())));
    }
    Ok(out)
}

fn arg(spec: &str, args: &[f64], i: usize, default: Option<f64>) -> Result<f64, LabError> {
    args.get(i)
        .copied()
        .or(default)
        .ok_or_else(|| bad(spec, format!("missing argument {}", i + 1)))
}

pub fn parse_dist(spec: &str) -> Result<PerturbationDistribution, LabError> {
    let s = spec.trim();
    if let Some(inner) = s.strip_prefix("trunc(").and_then(|r| r.strip_suffix(')')) {
        return Ok(PerturbationDistribution::truncated(parse_dist(inner)?));
    }
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let d = |r: Result<PerturbationDistribution, _>| r.map_err(|e| bad(spec, e));
    match name {
        "lp" | "laplace-pareto" => Ok(PerturbationDistribution::laplace_pareto()),
        "gumbel" => Ok(PerturbationDistribution::gumbel()),
        "splareto" | "sp" => {
            let a = numeric_args(spec, args, &["a"])?;
            d(PerturbationDistribution::symmetric_pareto(arg(spec, &a, 0, None)?))
        }
        "asp" => {
            let a = numeric_args(spec, args, &["right", "left"])?;
            d(PerturbationDistribution::asymmetric_pareto(arg(spec, &a, 0, None)?, arg(spec, &a, 1, None)?))
        }
        "frechet" => {
            let a = numeric_args(spec, args, &["a"])?;
            d(PerturbationDistribution::frechet(arg(spec, &a, 0, None)?))
        }
        "pareto" | "lomax" => {
            let a = numeric_args(spec, args, &["a", "scale"])?;
            d(PerturbationDistribution::pareto_lomax(arg(spec, &a, 0, None)?, arg(spec, &a, 1, Some(1.0))?))
        }
        "exp" => {
            let a = numeric_args(spec, args, &["rate"])?;
            d(PerturbationDistribution::exponential(arg(spec, &a, 0, Some(1.0))?))
        }
        "laplace" => {
            let a = numeric_args(spec, args, &["rate"])?;
            d(PerturbationDistribution::laplace(arg(spec, &a, 0, Some(1.0))?))
        }
        "hybrid" => {
            let (mut right, mut left) = (None, None);
            for part in top_level_split(args) {
                match part.split_once('=') {
                    Some(("right", v)) => right = Some(parse_dist(unwrap_parens(v))?),
                    Some(("left", v)) => left = Some(parse_dist(unwrap_parens(v))?),
                    _ => return Err(bad(spec, "hybrid takes right=<dist>,left=<dist>")),
                }
            }
            match (right, left) {
                (Some(r), Some(l)) => d(PerturbationDistribution::hybrid(r, l)),
                _ => Err(bad(spec, "hybrid needs both right= and left=")),
            }
        }
        _ => Err(bad(spec, format!("unknown distribution `{name}`"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Ftpl {
        dist: PerturbationDistribution,
        m: f64,
        cap: ResampleCap,
    },
    Ftrl {
        regularizer: Regularizer,
        m: f64,
    },
}

impl PolicySpec {
    pub fn m(&self) -> f64 {
        match self {
            PolicySpec::Ftpl { m, .. } | PolicySpec::Ftrl { m, .. } => *m,
        }
    }
}

pub fn parse_policy(spec: &str) -> Result<PolicySpec, LabError> {
    let s = spec.trim();
    let (family, rest) = s.split_once(':').ok_or_else(|| bad(spec, "expected ftpl:... or ftrl:..."))?;
    // trailing `key=value` segments belong to the policy, the rest is the body
    let mut segs: Vec<&str> = rest.split(':').collect();
    let mut m = None;
    let mut cap = ResampleCap::default();
    let mut beta = None;
    while let Some(last) = segs.last() {
        let Some((k, v)) = last.split_once('=') else { break };
        match k {
            "m" => m = Some(number(spec, v)?),
            "cap" => cap = ResampleCap::Fixed(number(spec, v)? as u64),
            "capfactor" => cap = ResampleCap::Sqrt { factor: number(spec, v)? },
            "beta" if family == "ftrl" => beta = Some(number(spec, v)?),
            _ => break,
        }
        segs.pop();
    }
    let m = m.ok_or_else(|| bad(spec, "missing m=<learning-rate scale>"))?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(bad(spec, "m must be positive"));
    }
    let body = segs.join(":");
    match family {
        "ftpl" => Ok(PolicySpec::Ftpl {
            dist: parse_dist(&body)?,
            m,
            cap,
        }),
        "ftrl" => {
            let regularizer = match body.as_str() {
                "shannon" => Regularizer::Shannon,
                "tsallis" => Regularizer::Tsallis {
                    tsallis_beta: beta.unwrap_or(0.5),
                },
                other => return Err(bad(spec, format!("unknown regularizer `{other}`"))),
            };
            Ok(PolicySpec::Ftrl { regularizer, m })
        }
        other => Err(bad(spec, format!("unknown policy family `{other}`"))),
    }
}

fn number_list(spec: &str, parts: &[&str]) -> Result<Vec<f64>, LabError> {
    parts.iter().map(|p| number(spec, p)).collect()
}

/// Parses an environment spec. Relative schedule paths resolve against `base`.
pub fn parse_env(spec: &str, base: Option<&Path>) -> Result<LossModel, LabError> {
    let s = spec.trim();
    let (name, args) = s.split_once(':').ok_or_else(|| bad(spec, "expected bern:, sched: or switch:"))?;
    let e = |r: Result<LossModel, _>| r.map_err(|err| bad(spec, err));
    match name {
        "bern" => {
            let parts: Vec<&str> = args.split(',').collect();
            e(LossModel::bernoulli(number_list(spec, &parts)?))
        }
        "sched" => {
            let path = match base {
                Some(b) if Path::new(args).is_relative() => b.join(args),
                _ => Path::new(args).to_path_buf(),
            };
            let rows = crate::io::read_schedule(&path)?;
            e(LossModel::schedule(rows))
        }
        "switch" => {
            let mut phase = None;
            let mut lists: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
            let mut current = None;
            for part in args.split(',') {
                match part.split_once('=') {
                    Some(("phase", v)) => {
                        phase = Some(number(spec, v)? as u64);
                        current = None;
                    }
                    Some(("mu1", v)) => {
                        lists[0].push(v);
                        current = Some(0);
                    }
                    Some(("mu2", v)) => {
                        lists[1].push(v);
                        current = Some(1);
                    }
                    Some((k, _)) => return Err(bad(spec, format!("unknown key `{k}`"))),
                    None => match current {
                        Some(i) => lists[i].push(part),
                        None => return Err(bad(spec, format!("stray value `{part}`"))),
                    },
                }
            }
            let phase = phase.ok_or_else(|| bad(spec, "missing phase="))?;
            e(LossModel::switching(phase, number_list(spec, &lists[0])?, number_list(spec, &lists[1])?))
        }
        other => Err(bad(spec, format!("unknown environment `{other}`"))),
    }
}

/// `a:b` or `a:b:n` as `n` evenly spaced points (default 50).
pub fn parse_range(spec: &str) -> Result<Vec<f64>, LabError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (a, b, n) = match parts.as_slice() {
        [a, b] => (number(spec, a)?, number(spec, b)?, 50),
        [a, b, n] => (number(spec, a)?, number(spec, b)?, number(spec, n)? as usize),
        _ => return Err(bad(spec, "expected lo:hi or lo:hi:n")),
    };
    if n < 2 || !(a < b) {
        return Err(bad(spec, "need lo < hi and at least two points"));
    }
    Ok((0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect())
}

/// Comma-separated numbers.
pub fn parse_vector(spec: &str) -> Result<Vec<f64>, LabError> {
    let parts: Vec<&str> = spec.split(',').collect();
    number_list(spec, &parts)
}

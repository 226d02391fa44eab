//! Experiment configuration files.
//!
//! A config is TOML with optional top-level `seed`, `jobs` and `out_dir`
//! keys and one `[experiment.<id>]` section per experiment:
//!
//! ```toml
//! seed = 7
//!
//! [experiment.inner]
//! kind = "entropy"
//! set = { type = "ksigma", alpha = 1.0, truncation = 40 }
//! n = [1, 5]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::RateModel;
use crate::spaces::NormSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub experiment: BTreeMap<String, Experiment>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NormName {
    Euclidean,
    Max,
    P,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Ksigma {
        alpha: f64,
        truncation: usize,
        scale: Option<f64>,
    },
    Points {
        points: Vec<Vec<f64>>,
        #[serde(default = "default_norm")]
        norm: NormName,
        p: Option<f64>,
        scale: Option<f64>,
    },
    /// Uniform in the cube `[-1, 1]^dim`, or on the unit sphere.
    Random {
        count: usize,
        dim: usize,
        #[serde(default = "default_norm")]
        norm: NormName,
        p: Option<f64>,
        #[serde(default)]
        sphere: bool,
        #[serde(default = "one")]
        instances: usize,
        scale: Option<f64>,
    },
}

fn default_norm() -> NormName {
    NormName::Euclidean
}

fn one() -> usize {
    1
}

pub(crate) fn norm_spec(name: NormName, p: Option<f64>, dim: usize) -> Result<NormSpec> {
    match (name, p) {
        (NormName::Euclidean, None) => NormSpec::euclidean(dim),
        (NormName::Max, None) => NormSpec::max(dim),
        (NormName::P, Some(p)) => NormSpec::p(p, dim),
        (NormName::P, None) => Err(Error::InvalidArgument("norm = \"p\" needs an exponent p".into())),
        (_, Some(_)) => Err(Error::InvalidArgument("exponent p given for a norm other than \"p\"".into())),
    }
}

impl SetSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, SetSpec::Random { .. })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyKind {
    Inner,
    Outer,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleName {
    #[default]
    Linear,
    Exponential,
    PolyPower,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySpec {
    pub set: SetSpec,
    pub n: [usize; 2],
    #[serde(default)]
    pub entropy: EntropyKind,
    pub node_budget: Option<u64>,
    pub fit: Option<RateModel>,
    pub window: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearWidthSpec {
    pub set: SetSpec,
    pub n: [usize; 2],
    pub restarts: Option<usize>,
    pub fit: Option<RateModel>,
    pub window: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearWidthSpec {
    pub set: SetSpec,
    pub n: [usize; 2],
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSpec {
    pub set: SetSpec,
    pub n: [usize; 2],
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    pub pairs: Option<usize>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlSpec {
    /// Either a set, or explicit series `e` and `d`.
    pub set: Option<SetSpec>,
    pub e: Option<Vec<f64>>,
    pub d: Option<Vec<f64>>,
    pub r: Vec<f64>,
    pub window: [usize; 2],
    #[serde(default)]
    pub schedule: ScheduleName,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyFromWidthSpec {
    pub set: SetSpec,
    pub n: [usize; 2],
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    pub eps: Option<f64>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L6Spec {
    pub set: SetSpec,
    /// Rate exponents of the width hypothesis.
    pub rate_alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub lambda: f64,
    pub window: [usize; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MtermSpec {
    #[serde(rename = "J")]
    pub size: usize,
    pub n_k: usize,
    pub a2: f64,
    pub m: Vec<usize>,
    /// Number of random coefficient sets.
    pub sets: usize,
    /// Vectors per set.
    #[serde(default = "default_members")]
    pub members: usize,
    /// Coefficient `j` is scaled by `j^{-decay}`.
    #[serde(default)]
    pub decay: f64,
}

fn default_members() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceSpec {
    pub alpha: f64,
    pub n: [usize; 2],
    /// Also compute the entropy numbers of the truncated cloud `J = 2^n + 8`.
    #[serde(default)]
    pub numeric: bool,
    #[serde(default = "two")]
    pub lambda: f64,
    pub window: Option<[usize; 2]>,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Entropy(EntropySpec),
    LinearWidth(LinearWidthSpec),
    NonlinearWidth(NonlinearWidthSpec),
    Lipschitz(LipschitzSpec),
    Carl(CarlSpec),
    EntropyFromWidth(EntropyFromWidthSpec),
    #[serde(rename = "L6")]
    L6(L6Spec),
    Mterm(MtermSpec),
    KsigmaReproduce(ReproduceSpec),
}

impl Experiment {
    /// Whether any computation of the experiment draws random numbers.
    pub fn is_stochastic(&self) -> bool {
        match self {
            Experiment::Entropy(s) => s.set.is_random(),
            Experiment::Carl(s) => s.set.as_ref().is_some_and(|s| s.is_random()),
            Experiment::L6(_) | Experiment::KsigmaReproduce(_) => false,
            _ => true,
        }
    }
}

fn range_ok(id: &str, key: &str, r: [usize; 2]) -> Result<()> {
    if r[0] > r[1] {
        return Err(Error::InvalidArgument(format!("experiment {id}: empty range {key} = [{}, {}]", r[0], r[1])));
    }
    Ok(())
}

fn list_ok<T>(id: &str, key: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("experiment {id}: empty list {key}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) | Error::InvalidArgument(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Grids must be nonempty.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::InvalidArgument("no [experiment.<id>] sections".into()));
        }
        for (id, e) in &self.experiment {
            match e {
                Experiment::Entropy(s) => range_ok(id, "n", s.n)?,
                Experiment::LinearWidth(s) => range_ok(id, "n", s.n)?,
                Experiment::NonlinearWidth(s) => {
                    range_ok(id, "n", s.n)?;
                    list_ok(id, "N", &s.big_n)?;
                }
                Experiment::Lipschitz(s) => {
                    range_ok(id, "n", s.n)?;
                    list_ok(id, "N", &s.big_n)?;
                }
                Experiment::Carl(s) => {
                    range_ok(id, "window", s.window)?;
                    list_ok(id, "r", &s.r)?;
                    match (&s.set, &s.e, &s.d) {
                        (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                        _ => {
                            return Err(Error::InvalidArgument(format!(
                                "experiment {id}: give either `set` or both `e` and `d`"
                            )))
                        }
                    }
                }
                Experiment::EntropyFromWidth(s) => {
                    range_ok(id, "n", s.n)?;
                    list_ok(id, "N", &s.big_n)?;
                }
                Experiment::L6(s) => range_ok(id, "window", s.window)?,
                Experiment::Mterm(s) => {
                    list_ok(id, "m", &s.m)?;
                    if s.sets == 0 || s.members == 0 {
                        return Err(Error::InvalidArgument(format!("experiment {id}: sets and members must be positive")));
                    }
                }
                Experiment::KsigmaReproduce(s) => range_ok(id, "n", s.n)?,
            }
        }
        Ok(())
    }

    pub fn is_stochastic(&self) -> bool {
        self.experiment.values().any(Experiment::is_stochastic)
    }
}

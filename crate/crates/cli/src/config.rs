//! Experiment configuration, parameter access and the run record.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use qex_core::RngSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    SampleHaar,
    Cayley,
    Certify,
    Gap,
    Mix,
    Separate,
    OrbitDist,
    StrongSep,
    Norming,
    DeltaOverlap,
    DcbBound,
    Pack,
    Cover,
    Bounds,
    Subgauss,
    Appendix,
    Validate,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SampleHaar => "sample-haar",
            Self::Cayley => "cayley",
            Self::Certify => "certify",
            Self::Gap => "gap",
            Self::Mix => "mix",
            Self::Separate => "separate",
            Self::OrbitDist => "orbit-dist",
            Self::StrongSep => "strong-sep",
            Self::Norming => "norming",
            Self::DeltaOverlap => "delta-overlap",
            Self::DcbBound => "dcb-bound",
            Self::Pack => "pack",
            Self::Cover => "cover",
            Self::Bounds => "bounds",
            Self::Subgauss => "subgauss",
            Self::Appendix => "appendix",
            Self::Validate => "validate",
        }
    }

    /// What the command computes, recorded in `run.json`.
    pub fn anchor(self) -> &'static str {
        match self {
            Self::SampleHaar => "Haar-random unitary tuple",
            Self::Cayley => {
                "left regular representation of a Cayley graph; classical vs quantum gap"
            }
            Self::Certify => "expander certificate: gap on traceless matrices, epsilon = 1 - gap/n",
            Self::Gap => "operator norm of the averaging superoperator on traceless matrices",
            Self::Mix => "mixing of the averaging channel toward the maximally mixed state",
            Self::Separate => "delta-separation: 1 - |sum u_j (x) conj v_j| / n",
            Self::OrbitDist => "orbit distance d' = inf over U, V of d(U u V, v)",
            Self::StrongSep => {
                "strong separation: sup over unitary recombinations w of the cross norm"
            }
            Self::Norming => "norming tuple for a unitary tuple and orbit membership",
            Self::DeltaOverlap => "overlap constant n^2 sup_{i != j} |tau(t_i t_j*)|",
            Self::DcbBound => "cb-distance lower bound 1/(1 - delta) from strong separation",
            Self::Pack => {
                "greedy delta-separated family of certified expanders (exp(beta n N^2) growth)"
            }
            Self::Cover => "greedy cover of a sample cloud and net duality",
            Self::Bounds => "closed-form packing and net size bounds",
            Self::Subgauss => "subgaussian tail of sum_j Re tr(U_j) against exp(-K lambda^2 / n)",
            Self::Appendix => "unitary vs Gaussian tensor sums, chi_N, b_N and the twirl identity",
            Self::Validate => "tuple file validation",
        }
    }
}

/// A command together with its parameters; round-trips through JSON and
/// rejects unknown keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: RngSpec,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            params: BTreeMap::new(),
            seed: RngSpec::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: RngSpec) -> Self {
        self.seed = seed;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| anyhow!("config line {} column {}: {e}", e.line(), e.column()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Typed access to `params`; every key must be read before [`Params::finish`].
pub struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    used: RefCell<BTreeSet<&'static str>>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a BTreeMap<String, Value>) -> Self {
        Self {
            map,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn get(&self, key: &'static str) -> Option<&'a Value> {
        self.used.borrow_mut().insert(key);
        self.map.get(key).filter(|v| !v.is_null())
    }

    pub fn opt_usize(&self, key: &'static str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.as_u64().map(|x| x as usize).ok_or_else(|| {
                    anyhow!("params.{key}: expected a non-negative integer, found {v}")
                })
            })
            .transpose()
    }

    pub fn usize(&self, key: &'static str) -> Result<usize> {
        self.opt_usize(key)?
            .ok_or_else(|| anyhow!("params.{key}: required"))
    }

    pub fn usize_or(&self, key: &'static str, default: usize) -> Result<usize> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    pub fn opt_f64(&self, key: &'static str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| anyhow!("params.{key}: expected a number, found {v}"))
            })
            .transpose()
    }

    pub fn f64(&self, key: &'static str) -> Result<f64> {
        self.opt_f64(key)?
            .ok_or_else(|| anyhow!("params.{key}: required"))
    }

    pub fn f64_or(&self, key: &'static str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &'static str, default: bool) -> Result<bool> {
        self.get(key)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| anyhow!("params.{key}: expected true or false, found {v}"))
            })
            .transpose()
            .map(|b| b.unwrap_or(default))
    }

    pub fn opt_str(&self, key: &'static str) -> Result<Option<String>> {
        self.get(key)
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| anyhow!("params.{key}: expected a string, found {v}"))
            })
            .transpose()
    }

    pub fn str(&self, key: &'static str) -> Result<String> {
        self.opt_str(key)?
            .ok_or_else(|| anyhow!("params.{key}: required"))
    }

    pub fn str_or(&self, key: &'static str, default: &str) -> Result<String> {
        Ok(self.opt_str(key)?.unwrap_or_else(|| default.to_string()))
    }

    /// Errors on any key that no accessor asked for.
    pub fn finish(&self, command: CommandKind) -> Result<()> {
        let used = self.used.borrow();
        if let Some(k) = self.map.keys().find(|k| !used.contains(k.as_str())) {
            let mut known: Vec<&str> = used.iter().copied().collect();
            known.sort_unstable();
            bail!(
                "params.{k}: unknown parameter for command {} (accepted: {})",
                command.name(),
                known.join(", ")
            );
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub anchor: String,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    /// Paths relative to `out_dir`.
    pub artifacts: Vec<String>,
    pub summary: BTreeMap<String, Value>,
    pub tool_version: String,
}

impl RunRecord {
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let c = ExperimentConfig::new(CommandKind::Pack, "out")
            .with_param("n", 6)
            .with_param("eps", 0.05)
            .with_param("strong", false)
            .with_seed(RngSpec::new(7, 3));
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"command": "gap", "out_dir": "x", "colour": 1}"#;
        assert!(ExperimentConfig::from_json(text).is_err());

        let c = ExperimentConfig::new(CommandKind::Gap, "x")
            .with_param("tuple", "pauli")
            .with_param("bogus", 1);
        let p = Params::new(&c.params);
        p.str("tuple").unwrap();
        let err = p.finish(c.command).unwrap_err().to_string();
        assert!(err.contains("params.bogus"), "{err}");
    }

    #[test]
    fn type_errors_name_the_field() {
        let c = ExperimentConfig::new(CommandKind::Pack, "x").with_param("n", "six");
        let err = Params::new(&c.params).usize("n").unwrap_err().to_string();
        assert!(err.contains("params.n"), "{err}");
    }
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 50_000;
pub const DEFAULT_CUTOFF: usize = 10_000;

/// A registry name plus free-form parameters, written either as `"name"` or
/// as `{"name": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NamedRepr")]
pub struct Named {
    pub name: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NamedRepr {
    Bare(String),
    Full(NamedFull),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedFull {
    name: String,
    #[serde(default)]
    params: Value,
}

impl From<NamedRepr> for Named {
    fn from(r: NamedRepr) -> Self {
        match r {
            NamedRepr::Bare(name) => Self { name, params: Value::Null },
            NamedRepr::Full(f) => Self { name: f.name, params: f.params },
        }
    }
}

impl Named {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), params: Value::Null }
    }

    pub fn with_params(name: impl Into<String>, params: Value) -> Self {
        Self { name: name.into(), params }
    }

    /// Sets one parameter, turning a null parameter block into an object.
    pub fn set_param(&mut self, key: &str, value: Value) -> Result<()> {
        if self.params.is_null() {
            self.params = Value::Object(Map::new());
        }
        match &mut self.params {
            Value::Object(m) => {
                m.insert(key.to_owned(), value);
                Ok(())
            }
            _ => Err(Error::Config(format!("params of `{}` must be an object", self.name))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: Named,
    pub agent: Named,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

fn default_runs() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(env: Named, agent: Named) -> Self {
        Self { env, agent, steps: DEFAULT_STEPS, cutoff: DEFAULT_CUTOFF, runs: 1, seed: 0, output: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.cutoff == 0 {
            return Err(Error::Config("cutoff must be positive".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parameter grid: each key maps to the list of values to sweep. Keys
/// prefixed with `env.` address environment parameters; the rest go to the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    axes: Vec<(String, Vec<Value>)>,
}

pub const ENV_PREFIX: &str = "env.";

impl SweepGrid {
    pub fn new(axes: Vec<(String, Vec<Value>)>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Config("sweep grid has no parameters".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (key, values) in &axes {
            if key.is_empty() || key == ENV_PREFIX {
                return Err(Error::Config("sweep grid has an empty parameter name".into()));
            }
            if values.is_empty() {
                return Err(Error::Config(format!("sweep parameter `{key}` has no values")));
            }
            if !seen.insert(key.as_str()) {
                return Err(Error::Config(format!("sweep parameter `{key}` listed twice")));
            }
        }
        Ok(Self { axes })
    }

    /// Parses `{"p": [0.1, 0.01], "env.noise_std": [0.1]}`; keys are kept in
    /// sorted order.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("grid: {e}")))?;
        let Value::Object(m) = v else {
            return Err(Error::Config("grid must be a JSON object".into()));
        };
        let axes = m
            .into_iter()
            .map(|(k, v)| match v {
                Value::Array(vals) => Ok((k, vals)),
                _ => Err(Error::Config(format!("grid entry `{k}` must be an array"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.axes.iter().map(|(k, _)| k.as_str())
    }

    /// Number of cells, saturating at `usize::MAX`.
    pub fn num_cells(&self) -> usize {
        self.axes.iter().fold(1usize, |n, (_, v)| n.saturating_mul(v.len()))
    }

    /// Every combination of values, in odometer order over the axes.
    pub fn cells(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for (_, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut cell = prefix.clone();
                        cell.push(v.clone());
                        cell
                    })
                })
                .collect();
        }
        out
    }

    /// `base` with one grid cell's values applied.
    pub fn apply(&self, base: &ExperimentConfig, cell: &[Value]) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        for ((key, _), value) in self.axes.iter().zip(cell) {
            match key.strip_prefix(ENV_PREFIX) {
                Some(k) => cfg.env.set_param(k, value.clone())?,
                None => cfg.agent.set_param(key, value.clone())?,
            }
        }
        Ok(cfg)
    }
}

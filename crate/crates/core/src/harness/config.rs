use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SampledBoost,
    Adaboost,
    AdversarySim,
    TailCheck,
    BoundsTable,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SampledBoost,
        ExperimentKind::Adaboost,
        ExperimentKind::AdversarySim,
        ExperimentKind::TailCheck,
        ExperimentKind::BoundsTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SampledBoost => "sampled-boost",
            ExperimentKind::Adaboost => "adaboost",
            ExperimentKind::AdversarySim => "adversary-sim",
            ExperimentKind::TailCheck => "tail-check",
            ExperimentKind::BoundsTable => "bounds-table",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::InvalidInput(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(LabError::InvalidInput(format!("unknown output format {s:?}"))),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Where the table goes; `None` keeps it in memory only.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Prefix the output with a line carrying a generation timestamp.
    #[serde(default = "yes")]
    pub header_meta: bool,
    /// Directory for per-job JSON traces and state dumps.
    #[serde(default)]
    pub trace_dir: Option<PathBuf>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: OutputFormat::Csv,
            header_meta: true,
            trace_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Scalars are fixed; lists are grid axes.
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One point of the parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub index: usize,
    /// `key=value` pairs joined by `;`, in key order.
    pub key: String,
    pub values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seeds: Vec<u64>) -> Self {
        Self {
            kind,
            parameters: BTreeMap::new(),
            seeds,
            output: OutputSpec::default(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::InvalidInput(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parameters after kind defaults: an empty tail-check map means the
    /// default grid.
    pub fn effective_parameters(&self) -> BTreeMap<String, Value> {
        if self.kind == ExperimentKind::TailCheck && self.parameters.is_empty() {
            default_tail_grid()
        } else {
            self.parameters.clone()
        }
    }

    /// Cartesian product of list-valued parameters, in key order with the
    /// last key varying fastest.
    pub fn grid(&self) -> Result<Vec<GridCell>> {
        let params = self.effective_parameters();
        let mut cells: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
        for (key, value) in &params {
            let choices = match value {
                Value::Array(items) if items.is_empty() => {
                    return Err(LabError::InvalidInput(format!("parameter {key:?} has an empty list")))
                }
                Value::Array(items) => items.clone(),
                other => vec![other.clone()],
            };
            if let Some(bad) = choices.iter().find(|v| v.is_array() || v.is_object()) {
                return Err(LabError::InvalidInput(format!("parameter {key:?} has a nested value {bad}")));
            }
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    choices.iter().map(move |v| {
                        let mut next = cell.clone();
                        next.insert(key.clone(), v.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(cells
            .into_iter()
            .enumerate()
            .map(|(index, values)| GridCell {
                index,
                key: values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
                values,
            })
            .collect())
    }
}

/// The tail-check grid used when no parameters are given: two populations,
/// `ρ ∈ {1, 4}`, `n ∈ {20, 80}`, `δ ∈ {0.3, 0.5}` and both tails.
pub fn default_tail_grid() -> BTreeMap<String, Value> {
    let mut grid = BTreeMap::new();
    grid.insert("population".into(), serde_json::json!(["bernoulli", "even"]));
    grid.insert("rho".into(), serde_json::json!([1.0, 4.0]));
    grid.insert("n".into(), serde_json::json!([20, 80]));
    grid.insert("delta".into(), serde_json::json!([0.3, 0.5]));
    grid.insert("side".into(), serde_json::json!(["lower", "upper"]));
    grid
}

/// Parses seed lists such as `7`, `1,2,5` or `1..50` (inclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || LabError::InvalidInput(format!("bad seed list {text:?}"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(seeds)
}

//! Experiment configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::{Element, LipschitzTestFunction, Nilmanifold, NilmanifoldSpec};
use crate::polyseq::{PolySequence, PolySequenceJson};
use crate::scalar::{Dd, RealConst};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Binary,
}

/// Table kinds the tool can build or load.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TableKind {
    Mobius,
    Liouville,
    #[serde(alias = "von_mangoldt")]
    #[value(alias = "von_mangoldt")]
    Mangoldt,
    Tau,
    #[serde(alias = "lambda_pi_gl2")]
    #[value(alias = "lambda_pi_gl2")]
    LambdaDelta,
    MobiusTimesLambda,
    /// The constant function 1.
    One,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Mobius => "mobius",
            TableKind::Liouville => "liouville",
            TableKind::Mangoldt => "mangoldt",
            TableKind::Tau => "tau",
            TableKind::LambdaDelta => "lambda_delta",
            TableKind::MobiusTimesLambda => "mobius_times_lambda",
            TableKind::One => "one",
        }
    }
}

/// `{kind = "mobius"}`, or `{file = "coeffs.json"}` for an imported table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Builtin { kind: TableKind },
    Imported { file: PathBuf },
}

/// A sequence either in binomial coefficients or through its values
/// `g(0), …, g(d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Coeffs { coeffs: Vec<Vec<serde_json::Value>> },
    Values { values: Vec<Vec<serde_json::Value>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelateParams {
    pub function: FunctionSpec,
    /// `"heisenberg"`, `"torus"`, or a full manifold spec.
    pub manifold: serde_json::Value,
    pub sequence: SequenceSpec,
    pub test_function: LipschitzTestFunction,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u64>,
    #[serde(rename = "W", default = "one")]
    pub w: u64,
    #[serde(default = "one")]
    pub b: u64,
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
    /// Also report the log-weighted decomposition at each `N`.
    #[serde(default)]
    pub decompose: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquidistMode {
    Empirical,
    #[default]
    Total,
    Leibman,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistParams {
    pub manifold: serde_json::Value,
    pub sequence: SequenceSpec,
    #[serde(rename = "N")]
    pub n: u64,
    pub delta: f64,
    #[serde(default)]
    pub mode: EquidistMode,
    /// Test functions; defaults to horizontal characters up to `kmax`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_functions: Option<Vec<LipschitzTestFunction>>,
    #[serde(default = "default_kmax")]
    pub kmax: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Sieve {
        kind: TableKind,
        n: u64,
    },
    Correlate(CorrelateParams),
    Scan(CorrelateParams),
    Equidist(EquidistParams),
    Conditions {
        kind: TableKind,
        n: u64,
        #[serde(rename = "W", alias = "w")]
        w: u64,
        b: u64,
        #[serde(rename = "C", alias = "c")]
        c: f64,
    },
    Vaughan {
        n: u64,
    },
    Ingest {
        file: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sieve { .. } => "sieve",
            Command::Correlate(_) => "correlate",
            Command::Scan(_) => "scan",
            Command::Equidist(_) => "equidist",
            Command::Conditions { .. } => "conditions",
            Command::Vaughan { .. } => "vaughan",
            Command::Ingest { .. } => "ingest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, with = "seed_repr")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn one() -> u64 {
    1
}

fn default_chunk() -> usize {
    1 << 16
}

fn default_kmax() -> u64 {
    5
}

fn config_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.to_string(),
    }
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            seed: 0,
            output_path: None,
            format: Format::default(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`. A missing
    /// `command` field is filled from `default_command`.
    pub fn parse(text: &str, default_command: Option<&str>) -> Result<Self> {
        let mut value: serde_json::Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| config_err("<json>", e))?
        } else {
            let t: toml::Value = toml::from_str(text).map_err(|e| config_err("<toml>", e.message()))?;
            serde_json::to_value(t).map_err(|e| config_err("<toml>", e))?
        };
        let obj = value
            .as_object_mut()
            .ok_or_else(|| config_err("<root>", "expected a table"))?;
        match (obj.get("command").and_then(|c| c.as_str()), default_command) {
            (None, Some(d)) => {
                obj.insert("command".into(), d.into());
            }
            (Some(c), Some(d)) if c != d => {
                return Err(config_err("command", format!("config is for `{c}`, not `{d}`")));
            }
            (None, None) => return Err(config_err("command", "missing")),
            _ => {}
        }
        serde_json::from_value(value).map_err(|e| config_err("<root>", e))
    }

    pub fn load(path: &Path, default_command: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, default_command)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err("<toml>", e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Builds the manifold named or described by a config value.
pub fn manifold_from_value(v: &serde_json::Value, seq_len: usize) -> Result<Arc<Nilmanifold>> {
    match v {
        serde_json::Value::String(s) if s == "heisenberg" => Ok(Nilmanifold::heisenberg()),
        serde_json::Value::String(s) if s == "torus" => {
            Ok(Nilmanifold::torus(1, seq_len.saturating_sub(1).max(1)))
        }
        serde_json::Value::String(s) => Err(config_err("manifold", format!("unknown manifold {s:?}"))),
        other => {
            let spec = NilmanifoldSpec::from_value(other).map_err(|e| config_err("manifold", e))?;
            Ok(Arc::new(Nilmanifold::build(spec).map_err(|e| config_err("manifold", e))?))
        }
    }
}

fn parse_rows(rows: &[Vec<serde_json::Value>], field: &str) -> Result<Vec<Element<Dd>>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    RealConst::from_json(v)
                        .map(|c| c.to_scalar::<Dd>())
                        .ok_or_else(|| config_err(&format!("sequence.{field}[{i}][{j}]"), format!("cannot read {v}")))
                })
                .collect::<Result<Vec<Dd>>>()
                .map(Element::new)
        })
        .collect()
}

/// The sequence described by `manifold` and `sequence`, in double-double precision.
pub fn sequence_from_config(manifold: &serde_json::Value, seq: &SequenceSpec) -> Result<PolySequence<Dd>> {
    match seq {
        SequenceSpec::Coeffs { coeffs } => {
            let m = manifold_from_value(manifold, coeffs.len())?;
            let json = PolySequenceJson {
                manifold_ref: String::new(),
                coeffs: coeffs.clone(),
            };
            PolySequence::from_json(&json, m).map_err(|e| match e {
                Error::Config { .. } => e,
                other => config_err("sequence.coeffs", other),
            })
        }
        SequenceSpec::Values { values } => {
            let m = manifold_from_value(manifold, values.len())?;
            let pts = parse_rows(values, "values")?;
            if let Some(bad) = pts.iter().position(|p| p.dim() != m.dim()) {
                return Err(config_err(
                    &format!("sequence.values[{bad}]"),
                    format!("expected {} coordinates", m.dim()),
                ));
            }
            Ok(PolySequence::interpolate(m, &pts))
        }
    }
}

//! Versioned JSON run configuration. Angles are in units of π.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qtrace_core::ensemble::{Component, EnsembleSpec, PROB_SUM_TOL};
use qtrace_core::qcore::{ProductGate, RotationParams};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// The four-component reference ensemble shipped with the binary.
pub const BUNDLED_REFERENCE: &str = include_str!("../configs/reference.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub n_qubits: usize,
    pub components: Vec<ComponentConfig>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub prob: f64,
    /// One `[θ, φ, λ]` triple per qubit (most significant first), or a single
    /// triple applied to every qubit.
    pub angles: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Oracle,
    Ht,
    Gst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact outcome probabilities.
    Exact,
    /// Finite-shot readout.
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Enumerate,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum SweepParameter {
    Shots,
    EpsilonTrunc,
    HtSigma,
    GstSigma,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Shots => "shots",
            SweepParameter::EpsilonTrunc => "epsilon_trunc",
            SweepParameter::HtSigma => "ht_sigma",
            SweepParameter::GstSigma => "gst_sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub power: Option<OneOrMany<usize>>,
    pub g_power: Option<OneOrMany<usize>>,
    pub order: Option<usize>,
    pub estimator: Option<Estimator>,
    pub mode: Option<Mode>,
    pub strategy: Option<Strategy>,
    /// Shots per HT trial, or per measured GST entry.
    pub shots: Option<u64>,
    /// HT circuits, or GST words in Monte Carlo mode.
    pub trials: Option<u64>,
    pub epsilon_trunc: Option<f64>,
    /// Dressing angle in radians.
    pub theta_basis: Option<f64>,
    pub seed: Option<u64>,
    pub enumeration_cap: Option<u64>,
    pub ht_sigma: Option<f64>,
    pub gst_sigma: Option<f64>,
    pub sweep: Option<SweepConfig>,
    pub bounds: Option<BoundsConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub d: Option<usize>,
    pub eps_tilde: Option<f64>,
    pub delta_tilde: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub n_layers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    pub path: Option<String>,
}

/// Parses and validates; every failure carries the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::schema("$", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn check_unit_interval(field: &str, v: Option<f64>, open: bool) -> Result<(), CliError> {
    if let Some(v) = v {
        let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
        if !ok {
            return Err(CliError::schema(field, format!("{v} is out of range")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::schema(
                "schema",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        if self.n_qubits == 0 {
            return Err(CliError::schema("n_qubits", "must be >= 1"));
        }
        if self.components.is_empty() {
            return Err(CliError::schema("components", "at least one component is required"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.prob.is_finite() && c.prob >= 0.0) {
                return Err(CliError::schema(format!("components[{i}].prob"), "must be finite and >= 0"));
            }
            if c.angles.len() != 1 && c.angles.len() != self.n_qubits {
                return Err(CliError::schema(
                    format!("components[{i}].angles"),
                    format!("expected 1 or {} triples, got {}", self.n_qubits, c.angles.len()),
                ));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.prob).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(CliError::schema("components", format!("probabilities sum to {total}, not 1")));
        }
        let p = &self.params;
        if let Some(pw) = &p.power {
            if pw.to_vec().contains(&0) {
                return Err(CliError::schema("params.power", "powers must be >= 1"));
            }
        }
        if p.order == Some(0) {
            return Err(CliError::schema("params.order", "must be >= 1"));
        }
        if p.shots == Some(0) {
            return Err(CliError::schema("params.shots", "must be >= 1"));
        }
        if p.trials == Some(0) {
            return Err(CliError::schema("params.trials", "must be >= 1"));
        }
        check_unit_interval("params.epsilon_trunc", p.epsilon_trunc, true)?;
        for (field, v) in [("params.ht_sigma", p.ht_sigma), ("params.gst_sigma", p.gst_sigma), ("params.theta_basis", p.theta_basis)] {
            if let Some(v) = v {
                if !v.is_finite() || (field != "params.theta_basis" && v < 0.0) {
                    return Err(CliError::schema(field, format!("{v} is out of range")));
                }
            }
        }
        if let Some(s) = &p.sweep {
            if s.values.is_empty() {
                return Err(CliError::schema("params.sweep.values", "must not be empty"));
            }
        }
        if let Some(b) = &p.bounds {
            check_unit_interval("params.bounds.eps_tilde", b.eps_tilde, true)?;
            check_unit_interval("params.bounds.delta_tilde", b.delta_tilde, true)?;
        }
        Ok(())
    }

    pub fn ensemble(&self) -> Result<EnsembleSpec, CliError> {
        let mut components = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            let factors = (0..self.n_qubits)
                .map(|q| {
                    let [t, ph, l] = if c.angles.len() == 1 { c.angles[0] } else { c.angles[q] };
                    RotationParams::from_pi_units(t, ph, l)
                        .map_err(|e| CliError::schema(format!("components[{i}].angles"), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let gate = ProductGate::new(factors)?;
            components.push(Component { prob: c.prob, gate });
        }
        Ok(EnsembleSpec::new(self.n_qubits, components)?)
    }
}

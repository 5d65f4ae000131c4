//! Run records: the configuration of a solve together with its summary.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use egpe_core::Classification;
use toml::{Table, Value};

use crate::config::{fmt_array, fmt_f64, PartialConfig, RunConfig};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSummary {
    pub classification: Classification,
    pub converged: bool,
    pub iterations: usize,
    pub energy: f64,
    pub chemical_potential: f64,
    pub peak: f64,
    pub peak_location: Vec<f64>,
    /// η_θ at the configured θ; absent without a ground state.
    pub eta: Option<f64>,
    pub residual: f64,
    pub boundary_ratio: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: RunConfig,
    pub result: ResultSummary,
}

impl RunRecord {
    pub fn to_toml(&self) -> String {
        let r = &self.result;
        let mut s = format!(
            "schema_version = {SCHEMA_VERSION}\n\n[config]\n{}\n[result]\n",
            self.config.to_toml()
        );
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put(
            "classification",
            format!("\"{}\"", r.classification.as_str()),
        );
        put("converged", r.converged.to_string());
        put("iterations", r.iterations.to_string());
        put("energy", fmt_f64(r.energy));
        put("chemical_potential", fmt_f64(r.chemical_potential));
        put("peak", fmt_f64(r.peak));
        put("peak_location", fmt_array(&r.peak_location));
        if let Some(eta) = r.eta {
            put("eta", fmt_f64(eta));
        }
        put("residual", fmt_f64(r.residual));
        put("boundary_ratio", fmt_f64(r.boundary_ratio));
        put("wall_time_seconds", fmt_f64(r.wall_time_seconds));
        s
    }

    pub fn from_toml(text: &str) -> Result<RunRecord> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| anyhow!("{e}"))?;
        match table.get("schema_version").and_then(Value::as_integer) {
            Some(SCHEMA_VERSION) => {}
            Some(v) => bail!("unsupported record schema_version {v}"),
            None => bail!("not a run record: `schema_version` missing"),
        }
        let config = RunConfig::resolve(&PartialConfig::from_toml(text)?)?;
        let res = match table.get("result") {
            Some(Value::Table(t)) => t,
            _ => bail!("run record has no [result] table"),
        };
        let float = |k: &str| -> Result<f64> {
            match res.get(k) {
                Some(Value::Float(f)) => Ok(*f),
                Some(Value::Integer(i)) => Ok(*i as f64),
                _ => bail!("[result] `{k}` missing or not a number"),
            }
        };
        let class = res
            .get("classification")
            .and_then(Value::as_str)
            .and_then(Classification::parse)
            .ok_or_else(|| anyhow!("[result] `classification` missing or unknown"))?;
        let peak_location = res
            .get("peak_location")
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(Value::as_float).collect::<Option<Vec<f64>>>())
            .ok_or_else(|| anyhow!("[result] `peak_location` missing"))?;
        Ok(RunRecord {
            config,
            result: ResultSummary {
                classification: class,
                converged: res
                    .get("converged")
                    .and_then(Value::as_bool)
                    .ok_or_else(|| anyhow!("[result] `converged` missing"))?,
                iterations: res
                    .get("iterations")
                    .and_then(Value::as_integer)
                    .and_then(|i| usize::try_from(i).ok())
                    .ok_or_else(|| anyhow!("[result] `iterations` missing"))?,
                energy: float("energy")?,
                chemical_potential: float("chemical_potential")?,
                peak: float("peak")?,
                peak_location,
                eta: res.get("eta").map(|_| float("eta")).transpose()?,
                residual: float("residual")?,
                boundary_ratio: float("boundary_ratio")?,
                wall_time_seconds: float("wall_time_seconds")?,
            },
        })
    }

    pub fn read(path: &Path) -> Result<RunRecord> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read record {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }
}

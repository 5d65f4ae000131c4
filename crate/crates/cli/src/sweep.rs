//! Phase-sweep orchestration and its CSV output.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use egpe_core::{phase_sweep, PhaseDiagramCell, RadiusPolicy, SolverConfig, SweepConfig};
use toml::{Table, Value};

use crate::config::fmt_f64;

/// Sweep settings as given in a file or on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSettings {
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub nb: Option<usize>,
    pub nl: Option<usize>,
    pub theta: Option<f64>,
    pub threshold: Option<f64>,
    pub c: Option<f64>,
    pub cells: Option<usize>,
    pub outer_radius: Option<f64>,
    pub radius_factor: Option<f64>,
    pub tau: Option<f64>,
    pub tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub warm_start: Option<bool>,
}

impl SweepSettings {
    pub fn merged(self, over: &SweepSettings) -> SweepSettings {
        SweepSettings {
            beta_min: over.beta_min.or(self.beta_min),
            beta_max: over.beta_max.or(self.beta_max),
            lambda_min: over.lambda_min.or(self.lambda_min),
            lambda_max: over.lambda_max.or(self.lambda_max),
            nb: over.nb.or(self.nb),
            nl: over.nl.or(self.nl),
            theta: over.theta.or(self.theta),
            threshold: over.threshold.or(self.threshold),
            c: over.c.or(self.c),
            cells: over.cells.or(self.cells),
            outer_radius: over.outer_radius.or(self.outer_radius),
            radius_factor: over.radius_factor.or(self.radius_factor),
            tau: over.tau.or(self.tau),
            tol: over.tol.or(self.tol),
            max_iterations: over.max_iterations.or(self.max_iterations),
            warm_start: over.warm_start.or(self.warm_start),
        }
    }

    pub fn from_file(path: &Path) -> Result<SweepSettings> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read sweep config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<SweepSettings> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| anyhow!("{e}"))?;
        let mut s = SweepSettings::default();
        for (key, value) in &table {
            let line = text
                .lines()
                .position(|l| l.trim_start().starts_with(key.as_str()))
                .map(|i| i + 1)
                .unwrap_or(0);
            let float = || match value {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => bail!("line {line}: `{key}` must be a number"),
            };
            let uint = || {
                value
                    .as_integer()
                    .and_then(|i| usize::try_from(i).ok())
                    .ok_or_else(|| anyhow!("line {line}: `{key}` must be a nonnegative integer"))
            };
            match key.as_str() {
                "beta_min" => s.beta_min = Some(float()?),
                "beta_max" => s.beta_max = Some(float()?),
                "lambda_min" => s.lambda_min = Some(float()?),
                "lambda_max" => s.lambda_max = Some(float()?),
                "nb" => s.nb = Some(uint()?),
                "nl" => s.nl = Some(uint()?),
                "theta" => s.theta = Some(float()?),
                "threshold" => s.threshold = Some(float()?),
                "c" => s.c = Some(float()?),
                "M" => s.cells = Some(uint()?),
                "R" => s.outer_radius = Some(float()?),
                "radius_factor" => s.radius_factor = Some(float()?),
                "tau" => s.tau = Some(float()?),
                "tol" => s.tol = Some(float()?),
                "max_iterations" => s.max_iterations = Some(uint()?),
                "warm_start" => {
                    s.warm_start =
                        Some(value.as_bool().ok_or_else(|| {
                            anyhow!("line {line}: `warm_start` must be a boolean")
                        })?)
                }
                other => bail!("line {line}: unknown key `{other}`"),
            }
        }
        Ok(s)
    }

    pub fn resolve(&self) -> Result<SweepConfig> {
        let d = SweepConfig::default();
        if self.outer_radius.is_some() && self.radius_factor.is_some() {
            bail!("give either R or radius_factor, not both");
        }
        let radius = match (self.outer_radius, self.radius_factor) {
            (Some(r), _) => RadiusPolicy::Fixed(r),
            (None, Some(k)) => RadiusPolicy::FlatTopScaled(k),
            (None, None) => d.radius,
        };
        let base = SolverConfig::radial_default();
        let cfg = SweepConfig {
            beta_range: (
                self.beta_min.unwrap_or(d.beta_range.0),
                self.beta_max.unwrap_or(d.beta_range.1),
            ),
            lambda_range: (
                self.lambda_min.unwrap_or(d.lambda_range.0),
                self.lambda_max.unwrap_or(d.lambda_range.1),
            ),
            resolution: (
                self.nb.unwrap_or(d.resolution.0),
                self.nl.unwrap_or(d.resolution.1),
            ),
            theta: self.theta.unwrap_or(d.theta),
            eta_threshold: self.threshold.unwrap_or(d.eta_threshold),
            mass: self.c.unwrap_or(d.mass),
            radius,
            cells: self.cells.unwrap_or(d.cells),
            solver: SolverConfig {
                time_step: self.tau.unwrap_or(base.time_step),
                stop_tolerance: self.tol.unwrap_or(base.stop_tolerance),
                max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
                ..base
            },
            warm_start: self.warm_start.unwrap_or(d.warm_start),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Worker count: the request (or all cores), capped by `EGPS_THREADS`.
pub fn worker_count(requested: Option<usize>, cap: Option<&str>) -> Result<usize> {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut n = requested.unwrap_or(available);
    if n == 0 {
        bail!("worker count must be at least 1");
    }
    if let Some(cap) = cap {
        let cap: usize = cap
            .trim()
            .parse()
            .map_err(|_| anyhow!("EGPS_THREADS must be a positive integer, got `{cap}`"))?;
        if cap == 0 {
            bail!("EGPS_THREADS must be a positive integer");
        }
        n = n.min(cap);
    }
    Ok(n)
}

pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<PhaseDiagramCell>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(|| phase_sweep(cfg))?)
}

/// CSV with a versioned comment header; identical for any worker count.
pub fn to_csv(cfg: &SweepConfig, cells: &[PhaseDiagramCell]) -> String {
    let mut s = String::from("#schema=1\n");
    let radius = match cfg.radius {
        RadiusPolicy::Fixed(r) => format!("R={}", fmt_f64(r)),
        RadiusPolicy::FlatTopScaled(k) => format!("radius_factor={}", fmt_f64(k)),
    };
    s.push_str(&format!(
        "# theta={} threshold={} c={} M={} {radius} warm_start={}\n",
        fmt_f64(cfg.theta),
        fmt_f64(cfg.eta_threshold),
        fmt_f64(cfg.mass),
        cfg.cells,
        cfg.warm_start
    ));
    for c in cells.iter().filter(|c| c.near_threshold) {
        s.push_str(&format!(
            "# boundary beta={} lambda={}\n",
            fmt_f64(c.beta),
            fmt_f64(c.lambda)
        ));
    }
    for c in cells {
        if let Some(e) = &c.error {
            s.push_str(&format!(
                "# error beta={} lambda={}: {}\n",
                fmt_f64(c.beta),
                fmt_f64(c.lambda),
                e.replace('\n', " ")
            ));
        }
    }
    s.push_str("beta,lambda,eta,regime,iterations,converged\n");
    for c in cells {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(c.beta),
            fmt_f64(c.lambda),
            c.eta.map(fmt_f64).unwrap_or_default(),
            c.regime.as_str(),
            c.iterations,
            c.converged
        ));
    }
    s
}

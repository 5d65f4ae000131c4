//! Run configuration: a flat key-value TOML file merged under command-line
//! flags, then completed with defaults.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use egpe_core::{
    Grid, ModelParams, Potential, RadialGrid, SolverConfig, SpreadDetection, StopMetric, TensorGrid,
};
use toml::{Table, Value};

/// Settings that may come from a file or from flags; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub dim: Option<usize>,
    pub radial: Option<bool>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub mass: Option<f64>,
    pub potential: Option<String>,
    pub harmonic: Option<Vec<f64>>,
    pub lattice_amplitude: Option<f64>,
    pub lattice_wavenumber: Option<f64>,
    pub power_coefficient: Option<f64>,
    pub power_exponent: Option<f64>,
    pub outer_radius: Option<f64>,
    pub cells: Option<usize>,
    pub half_width: Option<f64>,
    pub nodes: Option<usize>,
    pub tau: Option<f64>,
    pub tol: Option<f64>,
    pub metric: Option<String>,
    pub max_iterations: Option<usize>,
    pub window: Option<usize>,
    pub peak_decay: Option<f64>,
    pub linear_tol: Option<f64>,
    pub initial_width: Option<f64>,
    pub theta: Option<f64>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl PartialConfig {
    /// Fields set in `over` replace those of `self`.
    pub fn merged(mut self, over: &PartialConfig) -> PartialConfig {
        merge_fields!(self, over; dim, radial, beta, lambda, mass, potential, harmonic,
            lattice_amplitude, lattice_wavenumber, power_coefficient, power_exponent,
            outer_radius, cells, half_width, nodes, tau, tol, metric, max_iterations,
            window, peak_decay, linear_tol, initial_width, theta);
        self
    }

    /// Reads a flat config file, or the `[config]` table of a run record.
    pub fn from_file(path: &Path) -> Result<PartialConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<PartialConfig> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| anyhow!("{e}"))?;
        let table = match table.get("config") {
            Some(Value::Table(t)) => t.clone(),
            Some(_) => bail!("{}: `config` must be a table", locate(text, "config")),
            None => table,
        };
        let mut c = PartialConfig::default();
        for (key, value) in &table {
            let at = || locate(text, key);
            let float =
                || as_float(value).ok_or_else(|| anyhow!("{}: `{key}` must be a number", at()));
            let uint = || {
                value
                    .as_integer()
                    .and_then(|i| usize::try_from(i).ok())
                    .ok_or_else(|| anyhow!("{}: `{key}` must be a nonnegative integer", at()))
            };
            let string = || {
                value
                    .as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| anyhow!("{}: `{key}` must be a string", at()))
            };
            match key.as_str() {
                "schema_version" => {}
                "dim" => c.dim = Some(uint()?),
                "radial" => {
                    c.radial = Some(
                        value
                            .as_bool()
                            .ok_or_else(|| anyhow!("{}: `radial` must be a boolean", at()))?,
                    )
                }
                "beta" => c.beta = Some(float()?),
                "lambda" => c.lambda = Some(float()?),
                "c" => c.mass = Some(float()?),
                "potential" => c.potential = Some(string()?),
                "harmonic" => {
                    c.harmonic = Some(match value {
                        Value::Array(items) => items
                            .iter()
                            .map(as_float)
                            .collect::<Option<Vec<f64>>>()
                            .ok_or_else(|| {
                                anyhow!("{}: `harmonic` entries must be numbers", at())
                            })?,
                        _ => vec![float()?],
                    })
                }
                "lattice_amplitude" => c.lattice_amplitude = Some(float()?),
                "lattice_wavenumber" => c.lattice_wavenumber = Some(float()?),
                "power_coefficient" => c.power_coefficient = Some(float()?),
                "power_exponent" => c.power_exponent = Some(float()?),
                "R" => c.outer_radius = Some(float()?),
                "M" => c.cells = Some(uint()?),
                "half_width" => c.half_width = Some(float()?),
                "nodes" => c.nodes = Some(uint()?),
                "tau" => c.tau = Some(float()?),
                "tol" => c.tol = Some(float()?),
                "metric" => c.metric = Some(string()?),
                "max_iterations" => c.max_iterations = Some(uint()?),
                "window" => c.window = Some(uint()?),
                "peak_decay" => c.peak_decay = Some(float()?),
                "linear_tol" => c.linear_tol = Some(float()?),
                "initial_width" => c.initial_width = Some(float()?),
                "theta" => c.theta = Some(float()?),
                other => bail!("{}: unknown key `{other}`", at()),
            }
        }
        Ok(c)
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// "line N" of the first line assigning `key`, for error messages.
fn locate(text: &str, key: &str) -> String {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| {
                let rest = rest.trim_start();
                rest.starts_with('=') || (key == "config" && l.starts_with('['))
            }) || l == format!("[{key}]")
        })
        .map(|i| format!("line {}", i + 1))
        .unwrap_or_else(|| "config".into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Harmonic(Vec<f64>),
    Lattice { amplitude: f64, wavenumber: f64 },
    Power { coefficient: f64, exponent: f64 },
}

/// A fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub radial: bool,
    pub beta: f64,
    pub lambda: f64,
    pub mass: f64,
    pub potential: PotentialSpec,
    /// R for radial runs, the half-width of the cube otherwise.
    pub extent: f64,
    /// M for radial runs, nodes per axis otherwise.
    pub resolution: usize,
    pub tau: f64,
    pub tol: f64,
    pub metric: StopMetric,
    pub max_iterations: usize,
    pub window: usize,
    pub peak_decay: f64,
    pub linear_tol: f64,
    pub initial_width: Option<f64>,
    pub theta: f64,
}

pub fn metric_name(m: StopMetric) -> &'static str {
    match m {
        StopMetric::MaxDiff => "max",
        StopMetric::L2Diff => "l2",
    }
}

impl RunConfig {
    pub fn resolve(p: &PartialConfig) -> Result<RunConfig> {
        let dim = p.dim.unwrap_or(3);
        if !(1..=3).contains(&dim) {
            bail!("dim must be 1, 2 or 3, got {dim}");
        }
        let radial = p.radial.unwrap_or(false);
        let potential = resolve_potential(p, dim)?;
        let gamma_min = match &potential {
            PotentialSpec::Harmonic(g) => g
                .iter()
                .cloned()
                .filter(|g| *g > 0.0)
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        };
        // Wide enough for the harmonic ground mode to decay below 1e-14.
        let default_extent = if gamma_min.is_finite() {
            (8.0 / gamma_min.sqrt()).max(1.0)
        } else {
            1.0
        };
        let (extent, resolution) = if radial {
            (
                p.outer_radius.unwrap_or(default_extent),
                p.cells.unwrap_or(2048),
            )
        } else {
            let nodes = match dim {
                1 => 1024,
                2 => 256,
                _ => 64,
            };
            (
                p.half_width.unwrap_or(default_extent),
                p.nodes.unwrap_or(nodes),
            )
        };
        let defaults = if radial {
            SolverConfig::radial_default()
        } else {
            SolverConfig::tensor_default()
        };
        let metric = match p.metric.as_deref() {
            None => defaults.stop_metric,
            Some("max") => StopMetric::MaxDiff,
            Some("l2") => StopMetric::L2Diff,
            Some(other) => bail!("metric must be `max` or `l2`, got `{other}`"),
        };
        Ok(RunConfig {
            dim,
            radial,
            beta: p.beta.unwrap_or(0.0),
            lambda: p.lambda.unwrap_or(0.0),
            mass: p.mass.unwrap_or(1.0),
            potential,
            extent,
            resolution,
            tau: p.tau.unwrap_or(defaults.time_step),
            tol: p.tol.unwrap_or(defaults.stop_tolerance),
            metric,
            max_iterations: p.max_iterations.unwrap_or(defaults.max_iterations),
            window: p.window.unwrap_or(defaults.spread_detection.window),
            peak_decay: p
                .peak_decay
                .unwrap_or(defaults.spread_detection.peak_decay_threshold),
            linear_tol: p.linear_tol.unwrap_or(defaults.linear_tolerance),
            initial_width: p.initial_width,
            theta: p.theta.unwrap_or(0.99),
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(if self.radial {
            Grid::Radial(RadialGrid::new(self.dim, self.extent, self.resolution)?)
        } else {
            Grid::Tensor(TensorGrid::cube(self.dim, self.extent, self.resolution)?)
        })
    }

    pub fn model(&self) -> Result<ModelParams> {
        let potential = match &self.potential {
            PotentialSpec::Zero => Potential::Zero,
            PotentialSpec::Harmonic(g) => Potential::Harmonic(g.clone()),
            PotentialSpec::Lattice {
                amplitude,
                wavenumber,
            } => Potential::OpticalLattice {
                amplitude: *amplitude,
                wavenumber: *wavenumber,
            },
            PotentialSpec::Power {
                coefficient,
                exponent,
            } => Potential::RadialPower {
                coefficient: *coefficient,
                exponent: *exponent,
            },
        };
        Ok(ModelParams::new(
            self.dim,
            self.beta,
            self.lambda,
            self.mass,
            potential,
        )?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            time_step: self.tau,
            stop_tolerance: self.tol,
            stop_metric: self.metric,
            max_iterations: self.max_iterations,
            spread_detection: SpreadDetection {
                window: self.window,
                peak_decay_threshold: self.peak_decay,
            },
            linear_tolerance: self.linear_tol,
            linear_max_iterations: 20_000,
        }
    }

    /// The `[config]` table of a run record, floats at 17 significant digits.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("dim", self.dim.to_string());
        put("radial", self.radial.to_string());
        put("beta", fmt_f64(self.beta));
        put("lambda", fmt_f64(self.lambda));
        put("c", fmt_f64(self.mass));
        match &self.potential {
            PotentialSpec::Zero => put("potential", "\"zero\"".into()),
            PotentialSpec::Harmonic(g) => {
                put("potential", "\"harmonic\"".into());
                put("harmonic", fmt_array(g));
            }
            PotentialSpec::Lattice {
                amplitude,
                wavenumber,
            } => {
                put("potential", "\"lattice\"".into());
                put("lattice_amplitude", fmt_f64(*amplitude));
                put("lattice_wavenumber", fmt_f64(*wavenumber));
            }
            PotentialSpec::Power {
                coefficient,
                exponent,
            } => {
                put("potential", "\"power\"".into());
                put("power_coefficient", fmt_f64(*coefficient));
                put("power_exponent", fmt_f64(*exponent));
            }
        }
        if self.radial {
            put("R", fmt_f64(self.extent));
            put("M", self.resolution.to_string());
        } else {
            put("half_width", fmt_f64(self.extent));
            put("nodes", self.resolution.to_string());
        }
        put("tau", fmt_f64(self.tau));
        put("tol", fmt_f64(self.tol));
        put("metric", format!("\"{}\"", metric_name(self.metric)));
        put("max_iterations", self.max_iterations.to_string());
        put("window", self.window.to_string());
        put("peak_decay", fmt_f64(self.peak_decay));
        put("linear_tol", fmt_f64(self.linear_tol));
        if let Some(w) = self.initial_width {
            put("initial_width", fmt_f64(w));
        }
        put("theta", fmt_f64(self.theta));
        s
    }
}

fn resolve_potential(p: &PartialConfig, dim: usize) -> Result<PotentialSpec> {
    let kind = match p.potential.as_deref() {
        Some(k) => k.to_owned(),
        None if p.harmonic.is_some() => "harmonic".into(),
        None if p.lattice_amplitude.is_some() => "lattice".into(),
        None if p.power_coefficient.is_some() => "power".into(),
        None => "zero".into(),
    };
    Ok(match kind.as_str() {
        "zero" => PotentialSpec::Zero,
        "harmonic" => {
            let g = p
                .harmonic
                .clone()
                .ok_or_else(|| anyhow!("harmonic potential needs `harmonic`"))?;
            match g.len() {
                1 => PotentialSpec::Harmonic(vec![g[0]; dim]),
                n if n == dim => PotentialSpec::Harmonic(g),
                n => bail!("`harmonic` needs 1 or {dim} values, got {n}"),
            }
        }
        "lattice" => PotentialSpec::Lattice {
            amplitude: p
                .lattice_amplitude
                .ok_or_else(|| anyhow!("lattice potential needs `lattice_amplitude`"))?,
            wavenumber: p.lattice_wavenumber.unwrap_or(5.0 * PI),
        },
        "power" => PotentialSpec::Power {
            coefficient: p
                .power_coefficient
                .ok_or_else(|| anyhow!("power potential needs `power_coefficient`"))?,
            exponent: p.power_exponent.unwrap_or(2.0),
        },
        other => bail!("unknown potential `{other}` (zero, harmonic, lattice, power)"),
    })
}

/// 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_array(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults_fill_the_rest() {
        let file =
            PartialConfig::from_toml("beta = -10\nlambda = 0.1\nradial = true\nM = 512\n").unwrap();
        let flags = PartialConfig {
            beta: Some(-20.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&file.merged(&flags)).unwrap();
        assert_eq!(cfg.beta, -20.0);
        assert_eq!(cfg.lambda, 0.1);
        assert_eq!(cfg.resolution, 512);
        assert_eq!(cfg.extent, 1.0);
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.metric, StopMetric::MaxDiff);
    }

    #[test]
    fn config_table_round_trips() {
        let p = PartialConfig {
            dim: Some(2),
            beta: Some(-1.0 / 3.0),
            lambda: Some(0.1),
            harmonic: Some(vec![0.7, 1.0 / 7.0]),
            initial_width: Some(0.123456789),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&p).unwrap();
        let text = format!("schema_version = 1\n\n[config]\n{}", cfg.to_toml());
        let back = RunConfig::resolve(&PartialConfig::from_toml(&text).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn harmonic_traps_widen_the_box() {
        let p = PartialConfig {
            dim: Some(1),
            harmonic: Some(vec![1.0]),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&p).unwrap();
        assert_eq!(cfg.extent, 8.0);
        assert_eq!(cfg.resolution, 1024);
    }

    #[test]
    fn errors_name_the_line() {
        let err = PartialConfig::from_toml("beta = -1\nlambda = \"x\"\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
        let err = PartialConfig::from_toml("dim = 3\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = PartialConfig::from_toml("beta = = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let p = PartialConfig {
            metric: Some("sup".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&p).is_err());
    }

    #[test]
    fn float_format_is_lossless() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 1e-300, 4166.666666666667] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}

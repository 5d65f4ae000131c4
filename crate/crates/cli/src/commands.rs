use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use egpe_core::analysis::{compare_values, flat_top_estimate, FlatTopEstimate};
use egpe_core::flow::solver_for;
use egpe_core::model::InteractionCoefficients;
use egpe_core::{
    default_initial_gaussian, eta_indicator, nondimensionalize, reduce_dimension,
    run_to_convergence, Classification, ModelParams, PhysicalParams, Potential, ReducedModel,
    ReductionCase,
};

use crate::config::{fmt_f64, PartialConfig, RunConfig};
use crate::dump::{read_field, write_field};
use crate::record::{ResultSummary, RunRecord};

/// Process exit status for a finished solve.
pub fn exit_code(c: Classification) -> i32 {
    match c {
        Classification::GroundState => 0,
        Classification::SpreadingNoGroundState => 2,
        Classification::MaxIterations => 3,
    }
}

pub struct SolveRequest {
    pub config_file: Option<PathBuf>,
    pub flags: PartialConfig,
    pub init: Option<PathBuf>,
    pub dump_field: Option<PathBuf>,
}

pub fn solve(req: &SolveRequest) -> Result<RunRecord> {
    let file = match &req.config_file {
        Some(p) => PartialConfig::from_file(p)?,
        None => PartialConfig::default(),
    };
    let cfg = RunConfig::resolve(&file.merged(&req.flags))?;
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let solver_cfg = cfg.solver();
    let initial = match &req.init {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read initial field {}", path.display()))?;
            let (field, _) = read_field(&text).with_context(|| format!("in {}", path.display()))?;
            if field.grid() != &grid {
                bail!(
                    "initial field {} is on a different grid than the run",
                    path.display()
                );
            }
            field
        }
        None => default_initial_gaussian(&grid, cfg.mass, cfg.initial_width)?,
    };
    let mut solver = solver_for(&grid, &solver_cfg);
    let start = Instant::now();
    let r = run_to_convergence(&initial, &model, &solver_cfg, solver.as_mut())?;
    let wall = start.elapsed().as_secs_f64();
    let eta = match r.classification {
        Classification::GroundState => Some(eta_indicator(&r.field, cfg.theta)?),
        _ => None,
    };
    if let Some(path) = &req.dump_field {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?,
        );
        write_field(&mut out, &r.field, cfg.mass)?;
        out.flush()?;
    }
    Ok(RunRecord {
        result: ResultSummary {
            classification: r.classification,
            converged: r.converged,
            iterations: r.iterations,
            energy: r.energy,
            chemical_potential: r.chemical_potential,
            peak: r.peak_value,
            peak_location: r.peak_location.clone(),
            eta,
            residual: r.residual,
            boundary_ratio: r.boundary_ratio,
            wall_time_seconds: wall,
        },
        config: cfg,
    })
}

pub struct FlatTopRequest {
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub mass: Option<f64>,
    pub dim: usize,
    pub compare: Option<PathBuf>,
}

pub fn flattop(req: &FlatTopRequest) -> Result<String> {
    let record = req.compare.as_deref().map(RunRecord::read).transpose()?;
    let pick = |flag: Option<f64>, from: fn(&RunConfig) -> f64, name: &str| -> Result<f64> {
        match (flag, &record) {
            (Some(v), _) => Ok(v),
            (None, Some(r)) => Ok(from(&r.config)),
            (None, None) if name == "c" => Ok(1.0),
            (None, None) => bail!("--{name} is required"),
        }
    };
    let beta = pick(req.beta, |c| c.beta, "beta")?;
    let lambda = pick(req.lambda, |c| c.lambda, "lambda")?;
    let mass = pick(req.mass, |c| c.mass, "c")?;
    let est: FlatTopEstimate = flat_top_estimate(&ModelParams::free(req.dim, beta, lambda, mass)?)?;
    let mut out = String::new();
    let mut put = |k: &str, v: f64| out.push_str(&format!("{k} = {}\n", fmt_f64(v)));
    put("a", est.plateau_value);
    put("E_app", est.approx_energy);
    put("support_volume", est.support_volume);
    put("support_radius", est.support_radius(req.dim));
    if let Some(rec) = &record {
        if rec.result.classification != Classification::GroundState {
            bail!(
                "record {} is not a ground state ({})",
                req.compare
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
                rec.result.classification.as_str()
            );
        }
        let cmp = compare_values(rec.result.peak, rec.result.energy, &est);
        put("peak", cmp.computed_peak);
        put("energy", cmp.computed_energy);
        put("e_a", cmp.e_a);
        put("e_E", cmp.e_e);
    }
    Ok(out)
}

pub fn nondim(p: &PhysicalParams) -> Result<String> {
    let InteractionCoefficients { beta, lambda } = nondimensionalize(p)?;
    Ok(format!(
        "beta = {}\nlambda = {}\ntime_scale = {}\n",
        fmt_f64(beta),
        fmt_f64(lambda),
        fmt_f64(p.time_scale())
    ))
}

pub struct ReduceRequest {
    pub case: ReductionCase,
    pub sigma: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mass: f64,
    pub harmonic: Option<Vec<f64>>,
}

pub fn reduce(req: &ReduceRequest) -> Result<String> {
    let potential = match &req.harmonic {
        None => Potential::Zero,
        Some(g) if g.len() == 3 => Potential::Harmonic(g.clone()),
        Some(g) if g.len() == 1 => Potential::harmonic_isotropic(3, g[0]),
        Some(g) => bail!("--harmonic needs 1 or 3 values, got {}", g.len()),
    };
    let m = ModelParams::new(3, req.beta, req.lambda, req.mass, potential)?;
    let ReducedModel {
        beta_reduced,
        lambda_reduced,
        phase_constant,
        target_dimension,
    } = reduce_dimension(&m, req.sigma, req.case)?;
    Ok(format!(
        "beta_reduced = {}\nlambda_reduced = {}\nphase_constant = {}\ntarget_dimension = {target_dimension}\n",
        fmt_f64(beta_reduced),
        fmt_f64(lambda_reduced),
        fmt_f64(phase_constant)
    ))
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use egpe_cli::commands::{self, FlatTopRequest, ReduceRequest, SolveRequest};
use egpe_cli::config::PartialConfig;
use egpe_cli::sweep::{self, SweepSettings};
use egpe_core::{PhysicalParams, ReductionCase};

#[derive(Parser)]
#[command(
    name = "egpe",
    version,
    about = "Ground states of the extended Gross-Pitaevskii equation"
)]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the normalized gradient flow and print a run record.
    Solve(SolveArgs),
    /// Classify a (β, λ) grid of free-space 3D runs; writes CSV.
    Sweep(SweepArgs),
    /// Flat-top droplet estimate, optionally compared with a run record.
    Flattop(FlatTopArgs),
    /// Dimensionless β and λ from physical parameters.
    Nondim(NondimArgs),
    /// Reduce a 3D model to 2D (disk) or 1D (cigar).
    Reduce(ReduceArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SolveArgs {
    /// Flat TOML config or a run record; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Use the radially symmetric reduction.
    #[arg(long)]
    radial: bool,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Mass c = ‖φ‖₂.
    #[arg(long)]
    c: Option<f64>,
    /// Harmonic trap frequencies γ (one value for isotropic).
    #[arg(long, num_args = 1..=3)]
    harmonic: Option<Vec<f64>>,
    /// Optical lattice amplitude V₀.
    #[arg(long)]
    lattice: Option<f64>,
    /// Optical lattice wavenumber (default 5π).
    #[arg(long)]
    wavenumber: Option<f64>,
    /// Coefficient k of V = k·rᵖ.
    #[arg(long)]
    power: Option<f64>,
    /// Exponent p of V = k·rᵖ (default 2).
    #[arg(long)]
    exponent: Option<f64>,
    /// Radial truncation radius.
    #[arg(long = "R")]
    outer_radius: Option<f64>,
    /// Radial cell count.
    #[arg(long = "M")]
    cells: Option<usize>,
    /// Half-width of the tensor box.
    #[arg(long)]
    half_width: Option<f64>,
    /// Tensor nodes per axis.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Stop metric: max or l2.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Spread detector window.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    peak_decay: Option<f64>,
    #[arg(long)]
    linear_tol: Option<f64>,
    /// Width of the Gaussian initial guess.
    #[arg(long)]
    width: Option<f64>,
    /// θ of the η indicator in the record.
    #[arg(long)]
    theta: Option<f64>,
    /// Start from a field dump instead of a Gaussian.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Write the run record here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the converged field as CSV.
    #[arg(long)]
    dump_field: Option<PathBuf>,
}

impl SolveArgs {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            dim: self.dim,
            radial: self.radial.then_some(true),
            beta: self.beta,
            lambda: self.lambda,
            mass: self.c,
            potential: None,
            harmonic: self.harmonic.clone(),
            lattice_amplitude: self.lattice,
            lattice_wavenumber: self.wavenumber,
            power_coefficient: self.power,
            power_exponent: self.exponent,
            outer_radius: self.outer_radius,
            cells: self.cells,
            half_width: self.half_width,
            nodes: self.nodes,
            tau: self.tau,
            tol: self.tol,
            metric: self.metric.clone(),
            max_iterations: self.max_iter,
            window: self.window,
            peak_decay: self.peak_decay,
            linear_tol: self.linear_tol,
            initial_width: self.width,
            theta: self.theta,
        }
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Samples along β.
    #[arg(long)]
    nb: Option<usize>,
    /// Samples along λ (geometric).
    #[arg(long)]
    nl: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "M")]
    cells: Option<usize>,
    /// Fixed truncation radius for every cell.
    #[arg(long = "R")]
    outer_radius: Option<f64>,
    /// Truncation radius as a multiple of the flat-top radius.
    #[arg(long)]
    radius_factor: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    no_warm_start: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FlatTopArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Dimension used for the support radius.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Run record to compare against.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct NondimArgs {
    /// Atomic mass in kg.
    #[arg(long)]
    mass_kg: f64,
    /// Scattering length in m.
    #[arg(long)]
    scattering_length: f64,
    #[arg(long)]
    particles: f64,
    /// Length unit in m.
    #[arg(long)]
    length_scale: f64,
    /// LHY prefactor (default 64/(15√π)).
    #[arg(long)]
    lhy_constant: Option<f64>,
    /// Norm c of the scaled wave function.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Disk,
    Cigar,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Width of the frozen Gaussian mode.
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Trap frequencies (γx, γy, γz) of the 3D model.
    #[arg(long, num_args = 1..=3)]
    harmonic: Option<Vec<f64>>,
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(a) => {
            let req = SolveRequest {
                config_file: a.config.clone(),
                flags: a.flags(),
                init: a.init.clone(),
                dump_field: a.dump_field.clone(),
            };
            let record = commands::solve(&req)?;
            commands::emit(a.output.as_deref(), &record.to_toml())?;
            Ok(commands::exit_code(record.result.classification) as u8)
        }
        Command::Sweep(a) => {
            let file = match &a.config {
                Some(p) => SweepSettings::from_file(p)?,
                None => SweepSettings::default(),
            };
            let flags = SweepSettings {
                beta_min: a.beta_min,
                beta_max: a.beta_max,
                lambda_min: a.lambda_min,
                lambda_max: a.lambda_max,
                nb: a.nb,
                nl: a.nl,
                theta: a.theta,
                threshold: a.threshold,
                c: a.c,
                cells: a.cells,
                outer_radius: a.outer_radius,
                radius_factor: a.radius_factor,
                tau: a.tau,
                tol: a.tol,
                max_iterations: a.max_iter,
                warm_start: a.no_warm_start.then_some(false),
            };
            let cfg = file.merged(&flags).resolve()?;
            let cap = std::env::var("EGPS_THREADS").ok();
            let workers = sweep::worker_count(a.workers, cap.as_deref())?;
            let cells = sweep::run_sweep(&cfg, workers)?;
            commands::emit(a.output.as_deref(), &sweep::to_csv(&cfg, &cells))?;
            Ok(0)
        }
        Command::Flattop(a) => {
            let text = commands::flattop(&FlatTopRequest {
                beta: a.beta,
                lambda: a.lambda,
                mass: a.c,
                dim: a.dim,
                compare: a.compare,
            })?;
            commands::emit(None, &text)?;
            Ok(0)
        }
        Command::Nondim(a) => {
            let p = PhysicalParams {
                mass_kg: a.mass_kg,
                scattering_length: a.scattering_length,
                particle_number: a.particles,
                length_scale: a.length_scale,
                lhy_constant: a
                    .lhy_constant
                    .unwrap_or(64.0 / (15.0 * std::f64::consts::PI.sqrt())),
                norm_constant: a.c,
            };
            commands::emit(None, &commands::nondim(&p)?)?;
            Ok(0)
        }
        Command::Reduce(a) => {
            let req = ReduceRequest {
                case: match a.case {
                    CaseArg::Disk => ReductionCase::Disk,
                    CaseArg::Cigar => ReductionCase::Cigar,
                },
                sigma: a.sigma,
                beta: a.beta,
                lambda: a.lambda,
                mass: a.c,
                harmonic: a.harmonic,
            };
            commands::emit(None, &commands::reduce(&req)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

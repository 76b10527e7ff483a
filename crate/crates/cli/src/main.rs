#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use charge_sphere::nalgebra::Vector3;
use charge_sphere::quadrature::QuadOrder;
use clap::{Parser, Subcommand};

use commands::RunConfig;
use error::CliError;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  invalid arguments, invalid input or I/O failure
  2  unsupported topology (three or more charges in one component) or missing input file
  3  no convergence (map fit failed or did not round-trip)
  4  map failed validation
  5  a verification check failed

Environment:
  CHARGE_SPHERE_THREADS  maximum number of worker threads";

#[derive(Debug, Parser)]
#[command(name = "charge-sphere", version, about = "Equilibrium supports on the sphere under point charges", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input JSON: charge configuration, map or solution depending on the command.
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Gauss-Legendre radial order; the angular order is twice this.
    #[arg(long, global = true, default_value_t = 128)]
    quad_order: usize,

    /// Number of particles for `fekete`.
    #[arg(long, global = true, default_value_t = 1000)]
    n_particles: usize,

    /// Seed for particle initialization and support sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Gradient steps for `fekete`.
    #[arg(long, global = true, default_value_t = 2000)]
    iterations: usize,

    /// Tolerance for `verify` checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Viewing direction of the sphere figure, as x,y,z.
    #[arg(long, global = true, default_value = "0,1,0", value_parser = parse_vector)]
    view: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve a charge configuration: solution.json, boundary.csv and figures.
    Solve,
    /// Quadrature data, charges and figures for a rational map.
    AnalyzeMap,
    /// Check a solution: Frostman residual, boundary integral, quadrature identities.
    Verify,
    /// Minimize weighted Fekete energy: particles.csv and fekete.json.
    Fekete,
    /// Redraw figures and boundary.csv from a solution.
    Render,
}

fn parse_vector(text: &str) -> Result<Vector3<f64>, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Vector3::new(x, y, z)),
        _ => Err(format!("expected three comma-separated numbers, got {}", parts.len())),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CHARGE_SPHERE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Argument(format!(
            "CHARGE_SPHERE_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Argument(e.to_string()))
}

fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    let input = cli
        .input
        .ok_or_else(|| CliError::Argument("--input is required".into()))?;
    let config = RunConfig {
        input,
        out_dir: cli.out_dir,
        quad_order: QuadOrder::new(cli.quad_order, 2 * cli.quad_order),
        n_particles: cli.n_particles,
        seed: cli.seed,
        iterations: cli.iterations,
        tol: cli.tol,
        view: cli.view,
    };
    config.validate()?;
    match cli.command {
        Command::Solve => commands::solve(&config),
        Command::AnalyzeMap => commands::analyze_map_cmd(&config),
        Command::Verify => commands::verify(&config),
        Command::Fekete => commands::fekete(&config),
        Command::Render => commands::render(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share exit code 1 with other invalid input.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

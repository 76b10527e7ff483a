use std::fs;
use std::path::PathBuf;

use charge_sphere::equilibrium::{analyze_map, solve_with, SolveOptions};
use charge_sphere::fekete::{exclusion_fraction, MinimizeReport, ParticleSystem, StepSchedule};
use charge_sphere::nalgebra::{Rotation3, Vector3};
use charge_sphere::quadrature::QuadOrder;
use charge_sphere::region::ExclusionRegion;
use charge_sphere::verification::{
    f3_boundary_check, frostman_residual_for, identity_suite, support_points, F3_SAMPLES,
};
use charge_sphere::{ChargeConfig, EquilibriumSolution, RationalMap};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::CliError;
use crate::render::{Scene, TRACE_POINTS};

/// Support points used by `verify`, and their distance from every region.
const VERIFY_SUPPORT_POINTS: usize = 200;
const VERIFY_MARGIN: f64 = 0.1;
const F3_POINTS: usize = 20;
const FEKETE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub quad_order: QuadOrder,
    pub n_particles: usize,
    pub seed: u64,
    pub iterations: usize,
    pub tol: f64,
    pub view: Vector3<f64>,
}

impl RunConfig {
    /// Checks paths and tolerances before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0) {
            return Err(CliError::Argument(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.quad_order.radial < 2 {
            return Err(CliError::Argument("--quad-order must be at least 2".into()));
        }
        if !(self.view.norm() > 0.0) {
            return Err(CliError::Argument("--view must be a nonzero vector".into()));
        }
        if !self.input.is_file() {
            return Err(CliError::MissingInput(self.input.clone()));
        }
        fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        Ok(())
    }

    fn read_input(&self) -> Result<String, CliError> {
        fs::read_to_string(&self.input).map_err(|e| CliError::io(&self.input, e))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn write_scene(&self, scene: &Scene) -> Result<(), CliError> {
        self.write("boundary.csv", &scene.boundary_csv())?;
        self.write("figure_sphere.svg", &scene.sphere_svg(&self.view))?;
        self.write("figure_plane.svg", &scene.plane_svg())?;
        Ok(())
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

fn load_solution(config: &RunConfig) -> Result<EquilibriumSolution, CliError> {
    Ok(EquilibriumSolution::from_json(&config.read_input()?)?)
}

fn solution_scene(solution: &EquilibriumSolution) -> Result<Scene, CliError> {
    Ok(Scene {
        regions: solution.regions()?,
        charges: solution.charges.clone(),
    })
}

pub fn solve(config: &RunConfig) -> Result<String, CliError> {
    let cfg = ChargeConfig::from_json(&config.read_input()?)?;
    let opts = SolveOptions {
        quad_order: config.quad_order,
        ..Default::default()
    };
    let solution = solve_with(&cfg, &opts)?;
    config.write("solution.json", &solution.to_json())?;
    config.write_scene(&solution_scene(&solution)?)?;
    let mut summary = format!(
        "regime: {:?}, {} cap(s), {} map(s)",
        solution.regime,
        solution.caps.len(),
        solution.maps.len()
    );
    for m in &solution.maps {
        let terms: Vec<String> = m
            .map
            .terms()
            .iter()
            .map(|t| format!("A={:.10} C={:.10}", t.a, t.c))
            .collect();
        summary.push_str(&format!(
            "\n  charges {:?}: {} (residual {:.1e})",
            m.charges,
            terms.join(", "),
            m.fit_residual
        ));
    }
    if let Some(f) = solution.frostman_constant {
        summary.push_str(&format!("\n  Frostman constant {f:.10}"));
    }
    Ok(summary)
}

pub fn analyze_map_cmd(config: &RunConfig) -> Result<String, CliError> {
    let map: RationalMap = serde_json::from_str(&config.read_input()?).map_err(charge_sphere::Error::from)?;
    let analysis = analyze_map(&map)?;
    config.write("analysis.json", &to_pretty(&analysis))?;
    let scene = Scene {
        regions: vec![ExclusionRegion::Mapped {
            frame: Rotation3::identity(),
            map: map.clone(),
        }],
        charges: analysis.charges.clone(),
    };
    config.write_scene(&scene)?;
    let mut summary = String::new();
    for (label, data) in [("planar", &analysis.planar), ("spherical", &analysis.spherical)] {
        for p in &data.points {
            summary.push_str(&format!(
                "{label:>9} node {:+.12} coefficient {:.12}\n",
                p.node.re, p.coefficient
            ));
        }
    }
    for c in analysis.charges.charges() {
        let [x, y, z] = c.position.coords();
        summary.push_str(&format!(
            "   charge ({x:+.6}, {y:+.6}, {z:+.6}) intensity {:.12}\n",
            c.intensity
        ));
    }
    if let Some(d) = analysis.disc {
        summary.push_str(&format!("     disc center {:.12} radius {:.12}\n", d.center, d.radius));
    }
    Ok(summary.trim_end().to_string())
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct FrostmanSummary {
    points: usize,
    mean: f64,
    std: f64,
    max_dev: f64,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    tolerance: f64,
    passed: bool,
    checks: Vec<Check>,
    frostman: FrostmanSummary,
    f3_residuals: Vec<Vec<f64>>,
    identities: Vec<Vec<charge_sphere::verification::IdentityCheck>>,
}

/// Exterior points of a map component, on a spiral outside its boundary.
fn exterior_points(map: &RationalMap) -> Vec<Complex64> {
    let reach = map
        .boundary_trace(TRACE_POINTS)
        .iter()
        .map(|w| w.norm())
        .fold(0.0, f64::max);
    (0..F3_POINTS)
        .map(|k| {
            let r = reach * (1.3 + 0.5 * k as f64 / F3_POINTS as f64);
            Complex64::from_polar(r, 0.3 + std::f64::consts::TAU * k as f64 / F3_POINTS as f64)
        })
        .collect()
}

pub fn verify(config: &RunConfig) -> Result<String, CliError> {
    let solution = load_solution(config)?;
    let regions = solution.regions()?;
    let points = support_points(&regions, VERIFY_SUPPORT_POINTS, config.seed, VERIFY_MARGIN)?;
    let frostman = frostman_residual_for(&solution, &points, config.quad_order)?;
    let mut checks = vec![Check {
        name: "frostman std".into(),
        value: frostman.std,
        passed: frostman.std < config.tol,
    }];

    let mut f3_residuals = Vec::new();
    let mut identities = Vec::new();
    for (k, component) in solution.maps.iter().enumerate() {
        let residuals = exterior_points(&component.map)
            .into_iter()
            .map(|z| f3_boundary_check(component, &solution.charges, z, F3_SAMPLES))
            .collect::<Result<Vec<_>, _>>()?;
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        checks.push(Check {
            name: format!("boundary integral #{k}"),
            value: worst,
            passed: worst < config.tol,
        });
        f3_residuals.push(residuals);

        let suite = identity_suite(&component.map, config.quad_order)?;
        let worst = suite.iter().map(|c| c.relative_error).fold(0.0, f64::max);
        checks.push(Check {
            name: format!("quadrature identities #{k}"),
            value: worst,
            passed: worst < config.tol,
        });
        identities.push(suite);
    }

    let failed = checks.iter().filter(|c| !c.passed).count();
    let report = VerifyReport {
        tolerance: config.tol,
        passed: failed == 0,
        frostman: FrostmanSummary {
            points: points.len(),
            mean: frostman.mean,
            std: frostman.std,
            max_dev: frostman.max_dev,
        },
        checks,
        f3_residuals,
        identities,
    };
    config.write("report.json", &to_pretty(&report))?;

    let mut table = format!("{:<28} {:>12} {:>12}  status\n", "check", "value", "tolerance");
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        table.push_str(&format!(
            "{:<28} {:>12.3e} {:>12.1e}  {status}\n",
            c.name, c.value, config.tol
        ));
    }
    if failed > 0 {
        print!("{table}");
        return Err(CliError::ChecksFailed {
            failed,
            total: report.checks.len(),
        });
    }
    Ok(table.trim_end().to_string())
}

#[derive(Debug, Serialize)]
struct FeketeReport {
    particles: usize,
    seed: u64,
    minimization: MinimizeReport,
    exclusion_margin: f64,
    exclusion_fraction: Option<f64>,
    solve_error: Option<String>,
}

pub fn fekete(config: &RunConfig) -> Result<String, CliError> {
    let cfg = ChargeConfig::from_json(&config.read_input()?)?;
    let mut system = ParticleSystem::new(config.n_particles, &cfg, config.seed)?;
    let minimization = system.minimize(config.iterations, &StepSchedule::default())?;
    config.write("particles.csv", &system.to_csv())?;

    let opts = SolveOptions {
        quad_order: config.quad_order,
        frostman_samples: 0,
        ..Default::default()
    };
    let (exclusion_fraction, solve_error) = match solve_with(&cfg, &opts).and_then(|s| s.regions()) {
        Ok(regions) => (
            Some(exclusion_fraction(&system.positions(), &regions, FEKETE_MARGIN)),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = FeketeReport {
        particles: system.len(),
        seed: config.seed,
        minimization,
        exclusion_margin: FEKETE_MARGIN,
        exclusion_fraction,
        solve_error,
    };
    config.write("fekete.json", &to_pretty(&report))?;
    let fraction = report
        .exclusion_fraction
        .map_or("n/a".to_string(), |f| format!("{f:.4}"));
    Ok(format!(
        "{} particles, {} iterations, energy {:.6} -> {:.6}, fraction inside eroded regions {fraction}",
        report.particles,
        report.minimization.iterations,
        report.minimization.initial_energy,
        report.minimization.final_energy
    ))
}

pub fn render(config: &RunConfig) -> Result<String, CliError> {
    let solution = load_solution(config)?;
    config.write_scene(&solution_scene(&solution)?)?;
    Ok(format!("figures written to {}", config.out_dir.display()))
}

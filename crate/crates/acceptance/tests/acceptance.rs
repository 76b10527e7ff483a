//! Acceptance run: one line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use charge_sphere::equilibrium::{
    analyze_map, canonical_rotation, charges_from_map, fit_map, fit_map_to_charges, fit_planar, solve_with, FitOptions,
    FitTarget, SolveOptions,
};
use charge_sphere::fekete::{cap_discrepancy, empirical_cap_radius, exclusion_fraction, ParticleSystem, StepSchedule};
use charge_sphere::geometry::{chordal_distance, project, spherical_density, unproject};
use charge_sphere::quadrature::{DiscRule, QuadOrder};
use charge_sphere::region::ExclusionRegion;
use charge_sphere::schwarz::{planar_quadrature_data, spherical_quadrature_data};
use charge_sphere::verification::{
    f3_boundary_check, frostman_residual, frostman_residual_for, identity_suite, F3_SAMPLES,
};
use charge_sphere::{ChargeConfig, PointCharge, RationalMap, SpherePoint};
use common::*;
use nalgebra::Rotation3;
use num_complex::Complex64;
use serde_json::json;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            notes: Vec::new(),
        }
    }

    fn note(mut self, note: String) -> Self {
        self.notes.push(note);
        self
    }
}

fn quick() -> SolveOptions {
    SolveOptions {
        frostman_samples: 0,
        ..Default::default()
    }
}

fn within_budget(outcome: Outcome, elapsed: Duration, budget: Option<f64>) -> Outcome {
    match budget {
        Some(limit) if elapsed.as_secs_f64() > limit => {
            let detail = format!(
                "{}; runtime {:.2}s exceeds {limit}s",
                outcome.detail,
                elapsed.as_secs_f64()
            );
            Outcome {
                pass: false,
                detail,
                notes: outcome.notes,
            }
        }
        _ => outcome,
    }
}

fn oval_forward() -> Outcome {
    let a = match analyze_map(&oval_map()) {
        Ok(a) => a,
        Err(e) => return Outcome::new(false, format!("analysis failed: {e}")),
    };
    let node_err = a
        .planar
        .points
        .iter()
        .zip([-8.0 / 15.0, 8.0 / 15.0])
        .map(|(p, e)| (p.node - Complex64::new(e, 0.0)).norm())
        .fold(0.0, f64::max);
    let coef_err = a
        .planar
        .points
        .iter()
        .map(|p| (p.coefficient - 136.0 * PI / 225.0).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        node_err < 1e-10 && coef_err < 1e-10 && a.planar.points.len() == 2,
        format!("node error {node_err:.1e}, coefficient error {coef_err:.1e}"),
    )
}

fn oval_charges() -> Outcome {
    let cfg = match charges_from_map(&oval_map()) {
        Ok(c) => c,
        Err(e) => return Outcome::new(false, format!("charges_from_map failed: {e}")),
    };
    let reference = reference_oval_intensity();
    let pos_err = cfg
        .charges()
        .iter()
        .map(|c| {
            oval_positions()
                .iter()
                .map(|p| chordal_distance(p, &c.position))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let int_err = cfg
        .charges()
        .iter()
        .map(|c| (c.intensity - reference).abs())
        .fold(0.0, f64::max);
    let coefficient = spherical_quadrature_data(&oval_map())
        .map(|d| d.points[0].coefficient)
        .unwrap_or(f64::NAN);
    Outcome::new(
        pos_err < 1e-8 && int_err < 1e-8,
        format!(
            "position error {pos_err:.1e}; derived intensity {:.9} vs reference {reference:.9} (error {int_err:.1e})",
            cfg.charges()[0].intensity
        ),
    )
    .note(format!(
        "the spherical coefficient q_i/(1+q) of the oval is {coefficient:.12}, equal to the reference intensity to {:.1e}",
        (coefficient - reference).abs()
    ))
    .note(format!("derived intensity equals (sqrt(41)-3)/6 to {:.1e}", (cfg.charges()[0].intensity - physical_oval_intensity()).abs()))
}

fn oval_round_trip() -> Outcome {
    let reference = oval_config_with(reference_oval_intensity());
    let sol = match solve_with(&reference, &quick()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("solve failed: {e}")),
    };
    let m = &sol.maps[0];
    let t = m.map.terms()[0];
    let (a, c) = (t.a.abs(), t.c.abs());
    let param_err = (a - 2.0).abs().max((c - 2.0).abs());
    let mut outcome = Outcome::new(
        m.fit_residual < 1e-8 && param_err < 1e-6,
        format!(
            "data residual {:.1e} (round trip gate 1e-8 passed); recovered (A, C) = ({a:.9}, {c:.9})",
            m.fit_residual
        ),
    );
    if let Ok(phys) = solve_with(&oval_config_with(physical_oval_intensity()), &quick()) {
        let t = phys.maps[0].map.terms()[0];
        outcome = outcome.note(format!(
            "with intensity (sqrt(41)-3)/6 at the same positions: (A, C) = ({:.12}, {:.12}), residual {:.1e}",
            t.a.abs(),
            t.c.abs(),
            phys.maps[0].fit_residual
        ));
    }
    outcome
}

fn support_circle_points(frame: &Rotation3<f64>) -> Vec<SpherePoint> {
    let inverse = frame.inverse();
    [(1.5, 67), (3.0, 67), (10.0, 66)]
        .iter()
        .flat_map(|&(r, n)| {
            (0..n).map(move |k| {
                let angle = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                unproject(Complex64::from_polar(r, angle)).rotate(&inverse)
            })
        })
        .collect()
}

fn frostman() -> Outcome {
    let cfg = match charges_from_map(&oval_map()) {
        Ok(c) => c,
        Err(e) => return Outcome::new(false, format!("{e}")),
    };
    let sol = match solve_with(&cfg, &quick()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("solve failed: {e}")),
    };
    let points = support_circle_points(&sol.maps[0].frame().unwrap());
    let good = frostman_residual_for(&sol, &points, QuadOrder::default());
    let inflated: Vec<ExclusionRegion> = sol.regions().unwrap().iter().map(|r| r.scaled(1.05).unwrap()).collect();
    let bad = frostman_residual(&inflated, &cfg, &points, QuadOrder::default());
    match (good, bad) {
        (Ok(g), Ok(b)) => Outcome::new(
            g.std < 1e-6 && b.max_dev > 1e-3,
            format!(
                "{} points, std {:.1e}, inflated max_dev {:.1e}",
                points.len(),
                g.std,
                b.max_dev
            ),
        ),
        (g, b) => Outcome::new(false, format!("evaluation failed: {:?} {:?}", g.err(), b.err())),
    }
}

fn criterion_maps() -> Vec<(String, RationalMap)> {
    let mut maps = vec![
        ("oval (2,2)".to_string(), oval_map()),
        ("disc c=0.5 r=0.8".to_string(), RationalMap::disc(0.5, 0.8).unwrap()),
    ];
    for (k, m) in random_valid_maps(2024, 5).into_iter().enumerate() {
        maps.push((format!("random #{k}"), m));
    }
    maps
}

fn identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, m) in criterion_maps() {
        match identity_suite(&m, QuadOrder::default()) {
            Ok(checks) => worst = checks.iter().map(|c| c.relative_error).fold(worst, f64::max),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    Outcome::new(
        worst < 1e-8 && failures.is_empty(),
        format!(
            "7 maps x 5 functions x 2 measures, worst relative error {worst:.1e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; errors {failures:?}")
            }
        ),
    )
}

fn f3() -> Outcome {
    let cfg = match charges_from_map(&oval_map()) {
        Ok(c) => c,
        Err(e) => return Outcome::new(false, format!("{e}")),
    };
    let sol = match solve_with(&cfg, &quick()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("solve failed: {e}")),
    };
    let points: Vec<Complex64> = (0..20)
        .map(|k| Complex64::from_polar(1.5 + 0.45 * k as f64, 0.3 + 2.0 * PI * k as f64 / 20.0))
        .collect();
    let worst = points
        .iter()
        .map(|&z| f3_boundary_check(&sol.maps[0], &cfg, z, F3_SAMPLES).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    Outcome::new(worst < 1e-8, format!("20 exterior points, worst residual {worst:.1e}"))
}

fn mass_identity() -> Outcome {
    let rule = DiscRule::new(QuadOrder::default());
    let mut worst: f64 = 0.0;
    let mut worst_area: f64 = 0.0;
    for (_, m) in criterion_maps() {
        let (Ok(data), Ok(cfg)) = (spherical_quadrature_data(&m), charges_from_map(&m)) else {
            return Outcome::new(false, "quadrature data unavailable".into());
        };
        let q = cfg.total_charge();
        worst = worst.max((data.total_mass() - q / (1.0 + q)).abs());
        let area: f64 = rule.integrate_over_image(&m, spherical_density);
        worst_area = worst_area.max((area - q / (1.0 + q)).abs());
    }
    Outcome::new(
        worst < 1e-8 && worst_area < 1e-8,
        format!("|sum c - q/(1+q)| <= {worst:.1e}; |sigma(region) - q/(1+q)| <= {worst_area:.1e}"),
    )
}

fn fekete_oval() -> Outcome {
    let cfg = oval_config_with(physical_oval_intensity());
    let sol = match solve_with(&cfg, &quick()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("solve failed: {e}")),
    };
    let mut sys = ParticleSystem::new(1000, &cfg, 1).unwrap();
    let report = match sys.minimize(20_000, &StepSchedule::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("minimization failed: {e}")),
    };
    let fraction = exclusion_fraction(&sys.positions(), &sol.regions().unwrap(), 0.05);
    let mut uniform = ParticleSystem::new(500, &ChargeConfig::empty(), 1).unwrap();
    let uniform_ok = uniform.minimize(2000, &StepSchedule::default()).is_ok();
    let discrepancy = cap_discrepancy(&uniform.positions(), 100, 7);
    Outcome::new(
        fraction < 0.01 && uniform_ok && discrepancy < 0.05,
        format!(
            "N=1000, {} iterations ({} accepted): exclusion fraction {fraction:.4}; no-field N=500 cap discrepancy {discrepancy:.4}",
            report.iterations, report.accepted
        ),
    )
}

fn skew_reconciliation() -> Outcome {
    let cfg = reference_skew_config();
    let regime = cfg.detect_regime();
    let caps = cfg.caps().unwrap();
    let [a, b] = [cfg.charges()[0].position, cfg.charges()[1].position];
    let separation = a.angle_to(&b);
    let fit = fit_map_to_charges(&cfg, &[0, 1], &FitOptions::default());

    // Forced fit ignoring the regime precondition.
    let rot = canonical_rotation(&b, &a);
    let scale = 1.0 + cfg.total_charge();
    let forced_target = FitTarget {
        nodes: [
            project(&a.rotate(&rot)).unwrap().re,
            project(&b.rotate(&rot)).unwrap().re,
        ],
        masses: [0.12 / scale, 0.07 / scale],
    };
    let forced = fit_map(&forced_target, &FitOptions::default());

    // Map recovered from the reference planar data.
    let planar_target = FitTarget {
        nodes: [-1.79, 0.45],
        masses: [10.66, 1.15],
    };
    let recovered = fit_planar(&planar_target, &FitOptions::default());
    let recovered_report = match &recovered {
        Ok(f) => {
            let planar = planar_quadrature_data(&f.map).map(|d| d.sorted());
            let spherical = spherical_quadrature_data(&f.map);
            let charges = charges_from_map(&f.map);
            json!({
                "map": f.map,
                "residual": f.residual,
                "planar": planar.ok(),
                "spherical_coefficients_over_pi": spherical.as_ref().ok().map(|d| d.points.iter().map(|p| p.coefficient / PI).collect::<Vec<_>>()),
                "charges": charges.ok(),
            })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };

    let (pass, detail) = match &fit {
        Ok(f) => {
            let planar = planar_quadrature_data(&f.outcome.map).map(|d| d.sorted());
            let close = planar.as_ref().is_ok_and(|d| {
                (d.points[0].node.re + 1.79).abs() < 0.02
                    && (d.points[1].node.re - 0.45).abs() < 0.02
                    && (d.points[0].coefficient - 10.66).abs() < 0.02
                    && (d.points[1].coefficient - 1.15).abs() < 0.02
            });
            (
                true,
                format!(
                    "valid map {:?}; planar data within 0.02 of print: {close}",
                    f.outcome.map
                ),
            )
        }
        Err(e) => (
            false,
            format!(
                "no valid map: {e}; regime {:?}, separation {separation:.4} rad > cap radius sum {:.4} rad",
                regime.regime,
                caps[0].angular_radius + caps[1].angular_radius
            ),
        ),
    };
    let report = json!({
        "reference_charges": cfg,
        "regime": regime,
        "cap_radii": [caps[0].angular_radius, caps[1].angular_radius],
        "separation": separation,
        "forced_fit": match &forced { Ok(f) => json!({"map": f.map, "residual": f.residual}), Err(e) => json!({"error": e.to_string()}) },
        "map_from_reference_planar_data": recovered_report,
    });
    Outcome::new(pass, detail).note(format!("report {report}"))
}

fn single_caps() -> Outcome {
    let center = SpherePoint::new(0.3, -0.4, -(0.75f64).sqrt()).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for q in [0.1, 0.5, 1.0, 2.0] {
        let cfg = ChargeConfig::new(vec![PointCharge::new(center, q)]).unwrap();
        let cap = cfg.cap_of_influence(0).unwrap();
        let mut sys = ParticleSystem::new(1000, &cfg, 1).unwrap();
        if let Err(e) = sys.minimize(1000, &StepSchedule::default()) {
            return Outcome::new(false, format!("q={q}: {e}"));
        }
        let empirical = empirical_cap_radius(&sys.positions(), &center, q);
        worst = worst.max((empirical - cap.angular_radius).abs());
        parts.push(format!("q={q}: {:.4}/{:.4}", cap.angular_radius, empirical));
    }
    Outcome::new(
        worst < 0.05,
        format!(
            "closed form/empirical radius {}; worst gap {worst:.4} rad",
            parts.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<f64>); 10] = [
        ("oval forward exactness", oval_forward, Some(1.0)),
        ("oval charge recovery", oval_charges, Some(1.0)),
        ("inverse solver round trip", oval_round_trip, Some(10.0)),
        ("Frostman constancy", frostman, Some(60.0)),
        ("quadrature identity suite", identities, Some(30.0)),
        ("boundary Cauchy integral", f3, Some(10.0)),
        ("mass identity", mass_identity, None),
        ("Fekete cross-validation", fekete_oval, Some(300.0)),
        ("skewed example reconciliation", skew_reconciliation, Some(30.0)),
        ("single cap vs Fekete", single_caps, None),
    ];
    let mut passed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = within_budget(check(), start.elapsed(), *budget);
        println!(
            "criterion {:>2} {:<32} {} ({:.2}s) {}",
            k + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        for note in &outcome.notes {
            println!("    note: {note}");
        }
        passed += outcome.pass as usize;
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

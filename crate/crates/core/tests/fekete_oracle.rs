mod common;

use charge_sphere::equilibrium::{solve_with, SolveOptions};
use charge_sphere::fekete::{
    cap_discrepancy, density_ratios, empirical_cap_radius, exclusion_fraction, ParticleSystem, StepSchedule,
};
use charge_sphere::region::ExclusionRegion;
use charge_sphere::{ChargeConfig, PointCharge, SpherePoint};
use common::*;

#[test]
fn no_field_particles_spread_uniformly() {
    let mut sys = ParticleSystem::new(500, &ChargeConfig::empty(), 3).unwrap();
    let report = sys.minimize(1500, &StepSchedule::default()).unwrap();
    assert!(report.final_energy <= report.initial_energy);
    assert!(cap_discrepancy(&sys.positions(), 100, 8) < 0.05);
}

#[test]
fn unit_charge_empties_its_hemisphere() {
    let center = SpherePoint::new(0.0, 0.6, -0.8).unwrap();
    let cfg = ChargeConfig::new(vec![PointCharge::new(center, 1.0)]).unwrap();
    let mut sys = ParticleSystem::new(1000, &cfg, 1).unwrap();
    sys.minimize(1000, &StepSchedule::default()).unwrap();
    let points = sys.positions();
    let cap = ExclusionRegion::Cap(cfg.cap_of_influence(0).unwrap());
    assert!(exclusion_fraction(&points, std::slice::from_ref(&cap), 0.05) <= 0.01);
    assert!((empirical_cap_radius(&points, &center, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 0.05);

    let ratios = density_ratios(&points, &[cap], 1.0, 0.2, 40, 4);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let within = ratios.iter().filter(|r| (*r - 1.0).abs() <= 0.15).count();
    assert!((mean - 1.0).abs() < 0.05, "{ratios:?}");
    assert!(within as f64 >= 0.8 * ratios.len() as f64, "{ratios:?}");
}

#[test]
fn small_run_keeps_particles_out_of_the_oval() {
    let cfg = oval_config_with(physical_oval_intensity());
    let sol = solve_with(
        &cfg,
        &SolveOptions {
            frostman_samples: 0,
            ..Default::default()
        },
    )
    .unwrap();
    let mut sys = ParticleSystem::new(400, &cfg, 2).unwrap();
    sys.minimize(1500, &StepSchedule::default()).unwrap();
    let regions = sol.regions().unwrap();
    assert!(exclusion_fraction(&sys.positions(), &regions, 0.05) <= 0.01);
    // Negative control: a region far too large holds many particles.
    let inflated: Vec<_> = regions.iter().map(|r| r.scaled(1.6).unwrap()).collect();
    assert!(exclusion_fraction(&sys.positions(), &inflated, 0.05) > 0.05);
}

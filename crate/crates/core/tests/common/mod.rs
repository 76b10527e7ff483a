#![allow(dead_code)]

use charge_sphere::conformal::{winding_number, PoleTerm, RationalMap};
use charge_sphere::schwarz::spherical_quadrature_data;
use charge_sphere::{ChargeConfig, PointCharge, Regime, SpherePoint};
use nalgebra::{Rotation3, Unit, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn s41() -> f64 {
    41f64.sqrt()
}

pub fn oval_map() -> RationalMap {
    RationalMap::symmetric(2.0, 2.0).unwrap()
}

/// Reference intensity of the oval example, `(41 - 3√41)/82`.
pub fn reference_oval_intensity() -> f64 {
    (41.0 - 3.0 * s41()) / 82.0
}

/// Intensity at which the oval is the exclusion region, `(√41 - 3)/6`.
pub fn physical_oval_intensity() -> f64 {
    (s41() - 3.0) / 6.0
}

pub fn oval_positions() -> [SpherePoint; 2] {
    let z = -3.0 * s41() / 25.0;
    [
        SpherePoint::new(16.0 / 25.0, 0.0, z).unwrap(),
        SpherePoint::new(-16.0 / 25.0, 0.0, z).unwrap(),
    ]
}

pub fn oval_config_with(q: f64) -> ChargeConfig {
    let [a, b] = oval_positions();
    ChargeConfig::new(vec![PointCharge::new(a, q), PointCharge::new(b, q)]).unwrap()
}

/// The two-decimal reference charge data for the skewed example, normalized
/// onto the sphere.
pub fn reference_skew_config() -> ChargeConfig {
    ChargeConfig::new(vec![
        PointCharge::new(SpherePoint::with_tolerance(-0.95, 0.0, -0.31, 0.01).unwrap(), 0.12),
        PointCharge::new(SpherePoint::with_tolerance(0.62, 0.0, -0.79, 0.01).unwrap(), 0.07),
    ])
    .unwrap()
}

pub fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis = Unit::new_normalize(Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ));
    Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Valid two-pole maps with well-defined spherical data whose images avoid
/// the singularities `5` and `3i` of the identity test functions.
pub fn random_valid_maps(seed: u64, count: usize) -> Vec<RationalMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let m = RationalMap::new(vec![
            PoleTerm::new(rng.gen_range(0.3..2.0), rng.gen_range(1.3..3.0)),
            PoleTerm::new(rng.gen_range(0.3..2.0), rng.gen_range(-3.0..-1.3)),
        ])
        .unwrap();
        if !m.validate().valid || spherical_quadrature_data(&m).is_err() {
            continue;
        }
        let trace = m.boundary_trace(2048);
        let clear = [Complex64::new(5.0, 0.0), Complex64::new(0.0, 3.0)]
            .iter()
            .all(|&p| winding_number(&trace, p) == 0 && trace.iter().all(|w| (w - p).norm() > 0.5));
        if clear {
            out.push(m);
        }
    }
    out
}

/// Two-charge configurations in the merged regime, at random orientation,
/// half of them mirror-symmetric.
pub fn random_merged_pairs(seed: u64, count: usize) -> Vec<ChargeConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let half: f64 = rng.gen_range(0.25..0.7);
        let q1 = rng.gen_range(0.2..1.0);
        let q2 = if out.len() % 2 == 0 {
            q1
        } else {
            q1 * rng.gen_range(0.6..1.6)
        };
        let r = random_rotation(&mut rng);
        let a = SpherePoint::new(half.sin(), 0.0, -half.cos()).unwrap().rotate(&r);
        let b = SpherePoint::new(-half.sin(), 0.0, -half.cos()).unwrap().rotate(&r);
        let cfg = ChargeConfig::new(vec![PointCharge::new(a, q1), PointCharge::new(b, q2)]).unwrap();
        if cfg.detect_regime().regime == Regime::Merged {
            out.push(cfg);
        }
    }
    out
}

//! Numerical checks of the equilibrium: Frostman constancy on the support,
//! the boundary Cauchy integral of a component, quadrature identities and
//! discrete potentials.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charges::ChargeConfig;
use crate::conformal::RationalMap;
use crate::equilibrium::{EquilibriumSolution, MapComponent};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, project, spherical_density, ExtendedPoint, PlanePoint, SpherePoint};
use crate::quadrature::{DiscRule, QuadOrder};
use crate::region::{ExclusionRegion, RegionShape};
use crate::schwarz::{planar_quadrature_data, spherical_quadrature_data, QuadratureData};

/// Minimal planar distance between a test point and an exclusion region.
pub const TEST_POINT_MARGIN: f64 = 1e-3;

/// Boundary samples for the Cauchy integral check.
pub const F3_SAMPLES: usize = 8192;

/// `U^σ`, constant on the sphere.
pub const SIGMA_ENERGY: f64 = 0.5 - LN_2;

/// `Σ m_k ln(1/|p - y_k|)`.
pub fn potential_of_discrete(atoms: &[(SpherePoint, f64)], p: &SpherePoint) -> Result<f64> {
    atoms.iter().enumerate().try_fold(0.0, |acc, (index, (y, m))| {
        let d = chordal_distance(p, y);
        if d <= 0.0 {
            return Err(Error::SingularPotential { index });
        }
        Ok(acc - m * d.ln())
    })
}

/// Planar counterpart `Σ m_k ln(1/|z - z_k|)`.
pub fn planar_potential_of_discrete(atoms: &[(PlanePoint, f64)], z: PlanePoint) -> Result<f64> {
    atoms.iter().enumerate().try_fold(0.0, |acc, (index, (w, m))| {
        let d = (z - w).norm();
        if d <= 0.0 {
            return Err(Error::SingularPotential { index });
        }
        Ok(acc - m * d.ln())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrostmanSample {
    pub point: SpherePoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub samples: Vec<FrostmanSample>,
    pub mean: f64,
    pub std: f64,
    pub max_dev: f64,
}

impl FrostmanReport {
    fn from_samples(samples: Vec<FrostmanSample>) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().map(|s| s.value).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s.value - mean).powi(2)).sum::<f64>() / n;
        let max_dev = samples.iter().map(|s| (s.value - mean).abs()).fold(0.0, f64::max);
        Self {
            samples,
            mean,
            std: var.sqrt(),
            max_dev,
        }
    }
}

/// `F_Q` from the mean of the residual, `F_Q = (1 + q) U^σ - R`.
pub fn frostman_constant(cfg: &ChargeConfig, mean_residual: f64) -> f64 {
    (1.0 + cfg.total_charge()) * SIGMA_ENERGY - mean_residual
}

/// Errors unless every point is outside all regions by at least
/// [`TEST_POINT_MARGIN`] in each region's plane.
pub fn check_test_points(shapes: &[RegionShape], points: &[SpherePoint]) -> Result<()> {
    for (index, p) in points.iter().enumerate() {
        for shape in shapes {
            if let ExtendedPoint::Finite(w) = shape.to_plane(p) {
                if shape.contains_plane(w) || shape.plane_distance_to_boundary(w) < TEST_POINT_MARGIN {
                    return Err(Error::TestPointInsideDomain { index });
                }
            }
        }
    }
    Ok(())
}

/// Uniform random points of the support whose geodesic distance to every
/// region exceeds `margin`.
pub fn support_points(regions: &[ExclusionRegion], count: usize, seed: u64, margin: f64) -> Result<Vec<SpherePoint>> {
    let shapes: Vec<RegionShape> = regions.iter().map(|r| r.shape()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::InvalidConfig("support is too small to sample".into()));
        }
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let r = (1.0 - z * z).sqrt();
        let p = SpherePoint::new(r * phi.cos(), r * phi.sin(), z)?;
        let clear = shapes
            .iter()
            .all(|s| !s.contains(&p) && s.geodesic_distance_to_boundary(&p) > margin);
        if clear && check_test_points(&shapes, &[p]).is_ok() {
            out.push(p);
        }
    }
    Ok(out)
}

/// `R(x) = (1 + q) U^{σ|Ω}(x) - Q(x)` at support points, with `Ω` the union
/// of the regions. On the support of the equilibrium measure `R` equals
/// `(1 + q) U^σ - F_Q`, so its spread measures the Frostman defect.
pub fn frostman_residual(
    regions: &[ExclusionRegion],
    cfg: &ChargeConfig,
    points: &[SpherePoint],
    order: QuadOrder,
) -> Result<FrostmanReport> {
    let shapes: Vec<RegionShape> = regions.iter().map(|r| r.shape()).collect();
    check_test_points(&shapes, points)?;
    let rule = DiscRule::new(order);
    let quads: Vec<_> = regions.iter().map(|r| r.discretize(&rule)).collect();
    let atoms: Vec<(SpherePoint, f64)> = cfg.charges().iter().map(|c| (c.position, c.intensity)).collect();
    let scale = 1.0 + cfg.total_charge();
    let samples = points
        .par_iter()
        .map(|p| {
            let x = p.to_vector();
            let region_part: f64 = quads.iter().map(|q| q.log_potential(&x)).sum();
            let field = potential_of_discrete(&atoms, p)?;
            Ok(FrostmanSample {
                point: *p,
                value: scale * region_part - field,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrostmanReport::from_samples(samples))
}

pub fn frostman_residual_for(
    solution: &EquilibriumSolution,
    points: &[SpherePoint],
    order: QuadOrder,
) -> Result<FrostmanReport> {
    frostman_residual(&solution.regions()?, &solution.charges, points, order)
}

/// Support points on circles `|w| = r` of the plane of `frame`, `per_circle`
/// points each, offset by half a step so the real axis is avoided.
pub fn circle_points(frame: &nalgebra::Rotation3<f64>, radii: &[f64], per_circle: usize) -> Vec<SpherePoint> {
    let inverse = frame.inverse();
    radii
        .iter()
        .flat_map(|&r| {
            (0..per_circle).map(move |k| {
                let angle = TAU * (k as f64 + 0.5) / per_circle as f64;
                crate::geometry::unproject(Complex64::from_polar(r, angle)).rotate(&inverse)
            })
        })
        .collect()
}

/// `|LHS - RHS|` for the boundary Cauchy integral
/// `(1/2πi) ∮ w̄/(1 + |w|²) · dw/(w - z) = (1/(1+q)) Σ q_i/(z_i - z)`
/// over the boundary of one component, in its own frame.
pub fn f3_boundary_check(component: &MapComponent, cfg: &ChargeConfig, z: PlanePoint, samples: usize) -> Result<f64> {
    let frame = component.frame()?;
    let lhs = boundary_cauchy_integral(&component.map, z, samples);
    let scale = 1.0 + cfg.total_charge();
    let mut rhs = Complex64::new(0.0, 0.0);
    for &i in &component.charges {
        let c = cfg.charges()[i];
        let zi = project(&c.position.rotate(&frame))?;
        rhs += c.intensity / (zi - z);
    }
    Ok((lhs - rhs / scale).norm())
}

/// Trapezoid rule for `(1/2πi) ∮_{φ(∂D)} w̄/(1 + |w|²) dw/(w - z)`.
pub fn boundary_cauchy_integral(map: &RationalMap, z: PlanePoint, samples: usize) -> Complex64 {
    let sum: Complex64 = (0..samples)
        .map(|k| {
            let zeta = Complex64::from_polar(1.0, TAU * k as f64 / samples as f64);
            let w = map.eval_unchecked(zeta);
            let g = w.conj() / (1.0 + w.norm_sqr());
            g * map.derivative_unchecked(zeta) * zeta / (w - z)
        })
        .sum();
    sum / samples as f64
}

/// Test functions for the quadrature identities, analytic on the domains
/// in use as long as these avoid `5` and `3i`.
pub const IDENTITY_FUNCTIONS: [&str; 5] = ["1", "w", "w^2", "1/(w-5)", "1/(w-3i)"];

pub fn identity_function(index: usize, w: Complex64) -> Complex64 {
    match index {
        0 => Complex64::new(1.0, 0.0),
        1 => w,
        2 => w * w,
        3 => 1.0 / (w - 5.0),
        _ => 1.0 / (w - Complex64::new(0.0, 3.0)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub function: String,
    pub measure: crate::schwarz::Measure,
    pub integral: [f64; 2],
    pub quadrature: [f64; 2],
    pub relative_error: f64,
}

fn identity_check(
    name: &str,
    data: &QuadratureData,
    integral: Complex64,
    f: impl Fn(Complex64) -> Complex64,
) -> IdentityCheck {
    let rhs = data.apply(&f);
    let size: f64 = data.points.iter().map(|p| (f(p.node) * p.coefficient).norm()).sum();
    IdentityCheck {
        function: name.to_string(),
        measure: data.measure,
        integral: [integral.re, integral.im],
        quadrature: [rhs.re, rhs.im],
        relative_error: (integral - rhs).norm() / rhs.norm().max(size),
    }
}

/// Planar and spherical quadrature identities `∫_{φ(D)} f dμ = Σ c_k f(w_k)`
/// for the five test functions, integrals by pullback to the disc.
pub fn identity_suite(map: &RationalMap, order: QuadOrder) -> Result<Vec<IdentityCheck>> {
    let planar = planar_quadrature_data(map)?;
    let spherical = spherical_quadrature_data(map)?;
    let rule = DiscRule::new(order);
    let mut out = Vec::with_capacity(10);
    for (k, name) in IDENTITY_FUNCTIONS.iter().enumerate() {
        let f = |w| identity_function(k, w);
        let area: Complex64 = rule.integrate_over_image(map, f);
        let sphere: Complex64 = rule.integrate_over_image(map, |w| f(w) * spherical_density(w));
        out.push(identity_check(name, &planar, area, f));
        out.push(identity_check(name, &spherical, sphere, f));
    }
    Ok(out)
}

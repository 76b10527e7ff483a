//! Points on the unit sphere, the extended complex plane and the stereographic
//! projection from the north pole onto the equatorial plane.
//!
//! The projection is `w = (x + iy) / (1 - z)`; the south pole maps to the
//! origin and the equator to the unit circle. Under this projection the
//! normalized surface measure has planar density `1 / (π (1 + |w|²)²)`.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type PlanePoint = Complex64;

/// Points closer than this (in the chordal metric) to the north pole are
/// refused by [`project`].
pub const NORTH_POLE_TOLERANCE: f64 = 1e-14;

/// Unit-norm tolerance enforced on construction.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint {
    x: f64,
    y: f64,
    z: f64,
}

impl SpherePoint {
    pub const SOUTH: SpherePoint = SpherePoint {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };
    pub const NORTH: SpherePoint = SpherePoint { x: 0.0, y: 0.0, z: 1.0 };

    /// Builds a point that must already be on the sphere to within
    /// [`UNIT_TOLERANCE`]; the coordinates are renormalized.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::with_tolerance(x, y, z, UNIT_TOLERANCE)
    }

    /// Accepts any point whose norm is within `tolerance` of one and rescales
    /// it onto the sphere.
    pub fn with_tolerance(x: f64, y: f64, z: f64, tolerance: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(Error::NotOnSphere { norm });
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Radial projection of a nonzero vector onto the sphere.
    pub fn from_direction(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotOnSphere { norm });
        }
        Ok(Self {
            x: v.x / norm,
            y: v.y / norm,
            z: v.z / norm,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Geodesic (great-circle) distance in radians.
    pub fn angle_to(&self, other: &SpherePoint) -> f64 {
        let a = self.to_vector();
        let b = other.to_vector();
        a.cross(&b).norm().atan2(a.dot(&b))
    }

    pub fn rotate(&self, rotation: &Rotation3<f64>) -> SpherePoint {
        let v = rotation * self.to_vector();
        // Rotations preserve the norm up to rounding; renormalize to keep the
        // invariant tight across repeated rotations.
        SpherePoint::from_direction(v).expect("rotation of a unit vector")
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// The point at geodesic distance `angle` from `self` along the great
    /// circle towards `toward`.
    pub fn toward(&self, toward: &SpherePoint, angle: f64) -> Result<SpherePoint> {
        let a = self.to_vector();
        let tangent = toward.to_vector() - a * a.dot(&toward.to_vector());
        let norm = tangent.norm();
        if norm < 1e-15 {
            return Err(Error::InvalidConfig("no unique great circle between points".into()));
        }
        SpherePoint::from_direction(a * angle.cos() + tangent * (angle.sin() / norm))
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        SpherePoint::new(v[0], v[1], v[2])
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.coords()
    }
}

/// A point of the Riemann sphere seen from the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPoint {
    Finite(PlanePoint),
    Infinity,
}

/// Stereographic projection from the north pole.
pub fn project(p: &SpherePoint) -> Result<PlanePoint> {
    match project_extended(p) {
        ExtendedPoint::Finite(w) => Ok(w),
        ExtendedPoint::Infinity => Err(Error::NorthPole),
    }
}

pub fn project_extended(p: &SpherePoint) -> ExtendedPoint {
    let chord_to_north = (p.x * p.x + p.y * p.y + (1.0 - p.z) * (1.0 - p.z)).sqrt();
    if chord_to_north <= NORTH_POLE_TOLERANCE {
        return ExtendedPoint::Infinity;
    }
    let w = Complex64::new(p.x, p.y);
    if p.z <= 0.0 {
        ExtendedPoint::Finite(w / (1.0 - p.z))
    } else {
        // (x+iy)/(1-z) = (x+iy)(1+z)/(x²+y²) avoids cancellation near the pole.
        ExtendedPoint::Finite(w * (1.0 + p.z) / w.norm_sqr())
    }
}

/// Inverse stereographic projection.
pub fn unproject(w: PlanePoint) -> SpherePoint {
    let r2 = w.norm_sqr();
    let d = 1.0 + r2;
    if !r2.is_finite() {
        return SpherePoint::NORTH;
    }
    let (x, y, z) = (2.0 * w.re / d, 2.0 * w.im / d, (r2 - 1.0) / d);
    let norm = (x * x + y * y + z * z).sqrt();
    SpherePoint {
        x: x / norm,
        y: y / norm,
        z: z / norm,
    }
}

/// Planar density of the normalized spherical surface measure.
pub fn spherical_density(w: PlanePoint) -> f64 {
    let d = 1.0 + w.norm_sqr();
    1.0 / (PI * d * d)
}

/// Euclidean chord length in R³.
pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    (p.to_vector() - q.to_vector()).norm()
}

/// Chord length between the preimages of two plane points, through the
/// inversion identity `|x - y| = 2|z - w| / (|z - N| |w - N|)` with `N` the
/// north pole and `z`, `w` embedded in the equatorial plane of R³.
pub fn chordal_distance_plane(z: PlanePoint, w: PlanePoint) -> f64 {
    2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
}

/// The rotation taking `from` onto `to` along the great circle through both;
/// antipodal pairs rotate by π about an axis orthogonal to `from`.
pub fn rotation_between(from: &SpherePoint, to: &SpherePoint) -> Rotation3<f64> {
    let a = from.to_vector();
    let b = to.to_vector();
    match Rotation3::rotation_between(&a, &b) {
        Some(r) if a.dot(&b) > -1.0 + 1e-12 => r,
        _ => {
            let helper = if a.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let axis = Unit::new_normalize(a.cross(&helper));
            Rotation3::from_axis_angle(&axis, PI)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_quad::GaussLegendre;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng) -> SpherePoint {
        loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return SpherePoint::from_direction(v).unwrap();
            }
        }
    }

    #[test]
    fn project_reference_points() {
        assert_eq!(project(&SpherePoint::SOUTH).unwrap(), Complex64::new(0.0, 0.0));
        let eq = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
        assert!((project(&eq).unwrap() - 1.0).norm() < 1e-15);
        let s41 = 41f64.sqrt();
        let charge = SpherePoint::new(16.0 / 25.0, 0.0, -3.0 * s41 / 25.0).unwrap();
        let w = project(&charge).unwrap();
        assert!((w.re - (25.0 - 3.0 * s41) / 16.0).abs() < 1e-15);
        assert!((w.re - 0.361915).abs() < 1e-6);
    }

    #[test]
    fn north_pole_is_rejected() {
        assert_eq!(project(&SpherePoint::NORTH), Err(Error::NorthPole));
        assert_eq!(project_extended(&SpherePoint::NORTH), ExtendedPoint::Infinity);
        let near = SpherePoint::new(1e-7, 0.0, (1.0f64 - 1e-14).sqrt()).unwrap();
        assert!(project(&near).is_ok());
    }

    #[test]
    fn unproject_reference_points() {
        assert_eq!(unproject(Complex64::new(0.0, 0.0)), SpherePoint::SOUTH);
        let p = unproject(Complex64::new(8.0 / 15.0, 0.0));
        assert!((p.x() - 240.0 / 289.0).abs() < 1e-15);
        assert!(p.y().abs() < 1e-15);
        assert!((p.z() + 161.0 / 289.0).abs() < 1e-15);
    }

    #[test]
    fn density_reference_values() {
        assert!((spherical_density(Complex64::new(0.0, 0.0)) - 1.0 / PI).abs() < 1e-16);
        assert!((spherical_density(Complex64::new(1.0, 0.0)) - 0.25 / PI).abs() < 1e-16);
    }

    #[test]
    fn density_integrates_to_one() {
        // Radial panels in log scale out to R, analytic tail 1/(1+R²) beyond.
        let rule = GaussLegendre::new(32).unwrap();
        let radius = 1e4f64;
        let edges: Vec<f64> = std::iter::once(0.0)
            .chain((0..=40).map(|k| 1e-3 * (radius / 1e-3).powf(k as f64 / 40.0)))
            .collect();
        let inner: f64 = edges
            .windows(2)
            .map(|e| rule.integrate(e[0], e[1], |r| 2.0 * PI * r * spherical_density(Complex64::new(r, 0.0))))
            .sum();
        let total = inner + 1.0 / (1.0 + radius * radius);
        assert!((total - 1.0).abs() < 1e-10, "total {total}");
    }

    #[test]
    fn chordal_distance_reference_values() {
        let p = SpherePoint::new(0.6, 0.0, 0.8).unwrap();
        assert!((chordal_distance(&p, &p.antipode()) - 2.0).abs() < 1e-15);
        assert_eq!(chordal_distance(&p, &p), 0.0);
    }

    #[test]
    fn chordal_distance_matches_inversion_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let north = SpherePoint::NORTH.to_vector();
        for _ in 0..1000 {
            let (p, q) = (random_point(&mut rng), random_point(&mut rng));
            if chordal_distance(&p, &SpherePoint::NORTH) < 1e-3 || chordal_distance(&q, &SpherePoint::NORTH) < 1e-3 {
                continue;
            }
            let (z, w) = (project(&p).unwrap(), project(&q).unwrap());
            let (z3, w3) = (Vector3::new(z.re, z.im, 0.0), Vector3::new(w.re, w.im, 0.0));
            let via_inversion = 2.0 * (z - w).norm() / ((z3 - north).norm() * (w3 - north).norm());
            let direct = chordal_distance(&p, &q);
            assert!((via_inversion - direct).abs() <= 1e-10 * direct.max(1e-300));
            assert!((chordal_distance_plane(z, w) - direct).abs() <= 1e-10 * direct.max(1e-300));
        }
    }

    #[test]
    fn round_trip_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 10_000 {
            let p = random_point(&mut rng);
            if chordal_distance(&p, &SpherePoint::NORTH) < 1e-6 {
                continue;
            }
            let back = unproject(project(&p).unwrap());
            assert!(chordal_distance(&p, &back) < 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn rotation_between_handles_antipodes() {
        let r = rotation_between(&SpherePoint::NORTH, &SpherePoint::SOUTH);
        assert!(chordal_distance(&SpherePoint::NORTH.rotate(&r), &SpherePoint::SOUTH) < 1e-15);
        let p = SpherePoint::new(0.0, 0.6, -0.8).unwrap();
        let r = rotation_between(&p, &SpherePoint::SOUTH);
        assert!(chordal_distance(&p.rotate(&r), &SpherePoint::SOUTH) < 1e-15);
    }

    proptest! {
        #[test]
        fn plane_round_trip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let w = Complex64::new(re, im);
            let back = project(&unproject(w)).unwrap();
            prop_assert!((back - w).norm() <= 1e-12 * w.norm().max(1.0));
        }
    }
}

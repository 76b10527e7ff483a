//! Exclusion regions on the sphere. Every region is described by a frame
//! rotation and a planar map: a point `x` lies in the region when the
//! projection of `frame · x` lies in `φ(D)`. Caps use a centered disc map.

use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;

use crate::charges::CapRegion;
use crate::conformal::{distance_to_polygon, winding_number, RationalMap};
use crate::error::Result;
use crate::geometry::{project_extended, rotation_between, spherical_density, unproject, ExtendedPoint, SpherePoint};
use crate::quadrature::DiscRule;

/// Boundary samples used for membership and distance tests.
pub const TRACE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum ExclusionRegion {
    Cap(CapRegion),
    Mapped { frame: Rotation3<f64>, map: RationalMap },
}

impl ExclusionRegion {
    /// Rotation into the frame where the region projects onto `φ(D)`.
    pub fn frame(&self) -> Rotation3<f64> {
        match self {
            ExclusionRegion::Cap(cap) => rotation_between(&cap.center, &SpherePoint::SOUTH),
            ExclusionRegion::Mapped { frame, .. } => *frame,
        }
    }

    pub fn planar_map(&self) -> RationalMap {
        match self {
            ExclusionRegion::Cap(cap) => RationalMap::disc(0.0, cap.planar_radius()).expect("positive radius"),
            ExclusionRegion::Mapped { map, .. } => map.clone(),
        }
    }

    /// Region grown (factor > 1) or shrunk in its own plane.
    pub fn scaled(&self, factor: f64) -> Result<ExclusionRegion> {
        Ok(match self {
            ExclusionRegion::Cap(cap) => {
                ExclusionRegion::Cap(CapRegion::from_radius(cap.center, cap.angular_radius * factor)?)
            }
            ExclusionRegion::Mapped { frame, map } => ExclusionRegion::Mapped {
                frame: *frame,
                map: map.scaled(factor),
            },
        })
    }

    /// Precomputes boundary traces for repeated membership queries.
    pub fn shape(&self) -> RegionShape {
        let frame = self.frame();
        let map = self.planar_map();
        let plane = map.boundary_trace(TRACE_SAMPLES);
        let inverse = frame.inverse();
        let sphere = plane.iter().map(|&w| inverse * unproject(w).to_vector()).collect();
        RegionShape {
            region: self.clone(),
            frame,
            plane,
            sphere,
        }
    }

    /// Nodes and weights of the normalized surface measure restricted to the
    /// region, obtained by pulling the planar density back to the disc.
    pub fn discretize(&self, rule: &DiscRule) -> RegionQuadrature {
        let map = self.planar_map();
        let inverse = self.frame().inverse();
        let (points, weights) = rule
            .nodes()
            .into_iter()
            .map(|(zeta, w)| {
                let image = map.eval_unchecked(zeta);
                let weight = w * spherical_density(image) * map.derivative_unchecked(zeta).norm_sqr();
                (inverse * unproject(image).to_vector(), weight)
            })
            .unzip();
        RegionQuadrature { points, weights }
    }
}

#[derive(Debug, Clone)]
pub struct RegionShape {
    region: ExclusionRegion,
    frame: Rotation3<f64>,
    plane: Vec<Complex64>,
    sphere: Vec<Vector3<f64>>,
}

impl RegionShape {
    pub fn region(&self) -> &ExclusionRegion {
        &self.region
    }

    pub fn frame(&self) -> &Rotation3<f64> {
        &self.frame
    }

    pub fn plane_trace(&self) -> &[Complex64] {
        &self.plane
    }

    pub fn sphere_trace(&self) -> &[Vector3<f64>] {
        &self.sphere
    }

    /// Projection of `p` in this region's frame.
    pub fn to_plane(&self, p: &SpherePoint) -> ExtendedPoint {
        project_extended(&p.rotate(&self.frame))
    }

    /// Membership in the closed region, tested in its plane.
    pub fn contains(&self, p: &SpherePoint) -> bool {
        match self.to_plane(p) {
            ExtendedPoint::Infinity => false,
            ExtendedPoint::Finite(w) => self.contains_plane(w),
        }
    }

    pub fn contains_plane(&self, w: Complex64) -> bool {
        match &self.region {
            ExclusionRegion::Cap(cap) => w.norm() <= cap.planar_radius(),
            ExclusionRegion::Mapped { .. } => winding_number(&self.plane, w) != 0,
        }
    }

    pub fn plane_distance_to_boundary(&self, w: Complex64) -> f64 {
        match &self.region {
            ExclusionRegion::Cap(cap) => (w.norm() - cap.planar_radius()).abs(),
            ExclusionRegion::Mapped { .. } => distance_to_polygon(&self.plane, w),
        }
    }

    /// Geodesic distance from `p` to the region's boundary.
    pub fn geodesic_distance_to_boundary(&self, p: &SpherePoint) -> f64 {
        match &self.region {
            ExclusionRegion::Cap(cap) => (cap.center.angle_to(p) - cap.angular_radius).abs(),
            ExclusionRegion::Mapped { .. } => {
                let v = p.to_vector();
                let max_dot = self.sphere.iter().map(|b| b.dot(&v)).fold(f64::NEG_INFINITY, f64::max);
                // Refine across the best segment's neighbours; samples are dense.
                max_dot.clamp(-1.0, 1.0).acos()
            }
        }
    }

    /// Strictly inside the region eroded by a geodesic margin.
    pub fn contains_eroded(&self, p: &SpherePoint, margin: f64) -> bool {
        self.contains(p) && self.geodesic_distance_to_boundary(p) > margin
    }
}

/// Weighted point set approximating `σ` restricted to a region.
#[derive(Debug, Clone)]
pub struct RegionQuadrature {
    pub points: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl RegionQuadrature {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ ln(1/|x - y|) dσ|_region(y)`.
    pub fn log_potential(&self, x: &Vector3<f64>) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| -0.5 * w * (x - y).norm_squared().ln())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadOrder;
    use std::f64::consts::PI;

    fn cap() -> CapRegion {
        CapRegion::from_radius(SpherePoint::new(0.0, 0.6, 0.8).unwrap(), 0.7).unwrap()
    }

    #[test]
    fn cap_region_membership() {
        let shape = ExclusionRegion::Cap(cap()).shape();
        let center = cap().center;
        assert!(shape.contains(&center));
        assert!(!shape.contains(&center.antipode()));
        let inside = center.toward(&SpherePoint::SOUTH, 0.6).unwrap();
        let outside = center.toward(&SpherePoint::SOUTH, 0.8).unwrap();
        assert!(shape.contains(&inside) && !shape.contains(&outside));
        assert!((shape.geodesic_distance_to_boundary(&inside) - 0.1).abs() < 1e-12);
        assert!(shape.contains_eroded(&inside, 0.05) && !shape.contains_eroded(&inside, 0.15));
    }

    #[test]
    fn cap_boundary_trace_sits_on_the_rim() {
        let shape = ExclusionRegion::Cap(cap()).shape();
        let center = cap().center.to_vector();
        for b in shape.sphere_trace().iter().step_by(97) {
            assert!((b.dot(&center).acos() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_discretization_has_the_cap_mass() {
        let q = ExclusionRegion::Cap(cap()).discretize(&DiscRule::new(QuadOrder::new(64, 128)));
        assert!((q.mass() - cap().sigma_mass).abs() < 1e-12);
    }

    #[test]
    fn cap_log_potential_matches_closed_form_at_antipode() {
        // At the antipode of the center, |x - y|² = 2(1 + cos γ) for a point
        // at angle γ from the center, so the potential is an elementary
        // integral in cos γ.
        let c = cap();
        let q = ExclusionRegion::Cap(c).discretize(&DiscRule::new(QuadOrder::new(64, 128)));
        let x = c.center.antipode().to_vector();
        let u0 = c.angular_radius.cos();
        // ∫_{u0}^{1} -½ ln(2(1+u)) du / 2
        let f = |u: f64| (1.0 + u) * (2.0 * (1.0 + u)).ln() - (1.0 + u);
        let exact = -0.25 * (f(1.0) - f(u0));
        assert!((q.log_potential(&x) - exact).abs() < 1e-12);
        assert!(exact.is_finite() && PI > 0.0);
    }

    #[test]
    fn mapped_region_membership_in_the_plane() {
        let region = ExclusionRegion::Mapped {
            frame: Rotation3::identity(),
            map: RationalMap::symmetric(2.0, 2.0).unwrap(),
        };
        let shape = region.shape();
        assert!(shape.contains_plane(Complex64::new(1.2, 0.0)));
        assert!(!shape.contains_plane(Complex64::new(1.4, 0.0)));
        assert!(shape.contains(&SpherePoint::SOUTH));
        assert!(!shape.contains(&SpherePoint::NORTH));
        assert!((shape.plane_distance_to_boundary(Complex64::new(2.0, 0.0)) - 2.0 / 3.0).abs() < 1e-6);
    }
}

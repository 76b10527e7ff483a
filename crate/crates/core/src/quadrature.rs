//! Tensor-product quadrature on the closed unit disc: Gauss–Legendre in the
//! radius, trapezoid (spectrally accurate for periodic integrands) in the angle.

use std::f64::consts::TAU;
use std::iter::Sum;
use std::ops::Mul;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::RationalMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadOrder {
    pub radial: usize,
    pub angular: usize,
}

impl Default for QuadOrder {
    fn default() -> Self {
        Self {
            radial: 128,
            angular: 256,
        }
    }
}

impl QuadOrder {
    pub fn new(radial: usize, angular: usize) -> Self {
        Self { radial, angular }
    }
}

#[derive(Debug, Clone)]
pub struct DiscRule {
    /// `(r, w_r · r)` with the polar Jacobian folded into the weight.
    radial: Vec<(f64, f64)>,
    angular: usize,
}

impl DiscRule {
    pub fn new(order: QuadOrder) -> Self {
        let rule = GaussLegendre::new(order.radial.max(2)).expect("degree >= 2");
        let radial = rule
            .iter()
            .map(|(x, w)| {
                let r = 0.5 * (x + 1.0);
                (r, 0.5 * w * r)
            })
            .collect();
        Self {
            radial,
            angular: order.angular.max(3),
        }
    }

    pub fn order(&self) -> QuadOrder {
        QuadOrder {
            radial: self.radial.len(),
            angular: self.angular,
        }
    }

    /// All nodes `ζ` with their area weights.
    pub fn nodes(&self) -> Vec<(Complex64, f64)> {
        let dtheta = TAU / self.angular as f64;
        self.radial
            .iter()
            .flat_map(|&(r, w)| {
                (0..self.angular).map(move |k| (Complex64::from_polar(r, dtheta * k as f64), w * dtheta))
            })
            .collect()
    }

    /// `∫_D f(ζ) dA_ζ`.
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: Send + Sum + Mul<f64, Output = T>,
        F: Fn(Complex64) -> T + Sync,
    {
        let dtheta = TAU / self.angular as f64;
        self.radial
            .par_iter()
            .map(|&(r, w)| {
                let ring: T = (0..self.angular)
                    .map(|k| f(Complex64::from_polar(r, dtheta * k as f64)))
                    .sum();
                ring * (w * dtheta)
            })
            .sum()
    }

    /// Pullback of a planar integral over `φ(D)`:
    /// `∫_{φ(D)} g dA = ∫_D g(φ(ζ)) |φ'(ζ)|² dA_ζ`.
    pub fn integrate_over_image<T, G>(&self, map: &RationalMap, g: G) -> T
    where
        T: Send + Sum + Mul<f64, Output = T>,
        G: Fn(Complex64) -> T + Sync,
    {
        self.integrate(|zeta| {
            let w = map.eval_unchecked(zeta);
            let jac = map.derivative_unchecked(zeta).norm_sqr();
            g(w) * jac
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomials_over_the_disc() {
        let rule = DiscRule::new(QuadOrder::new(16, 32));
        let area: f64 = rule.integrate(|_| 1.0);
        assert!((area - PI).abs() < 1e-13);
        let second: f64 = rule.integrate(|z| z.norm_sqr());
        assert!((second - PI / 2.0).abs() < 1e-13);
        let analytic: Complex64 = rule.integrate(|z| z * z + z);
        assert!(analytic.norm() < 1e-13);
    }

    #[test]
    fn node_weights_sum_to_area() {
        let rule = DiscRule::new(QuadOrder::new(8, 12));
        let total: f64 = rule.nodes().iter().map(|(_, w)| w).sum();
        assert!((total - PI).abs() < 1e-13);
        assert_eq!(rule.nodes().len(), 96);
    }
}

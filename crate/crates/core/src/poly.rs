//! Dense real polynomials and their complex roots.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    /// `a + b x`.
    pub fn linear(a: f64, b: f64) -> Self {
        Poly(vec![a, b])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.0.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    fn trimmed(&self) -> Vec<f64> {
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut coeffs = self.0.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= 1e-14 * scale) {
            coeffs.pop();
        }
        coeffs
    }

    /// All complex roots, by Aberth–Ehrlich iteration followed by a Newton
    /// polish on the undeflated polynomial.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let coeffs = self.trimmed();
        let n = coeffs.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = coeffs[n];
        let monic = Poly(coeffs.iter().map(|c| c / lead).collect());
        // Cauchy bound on root moduli.
        let bound = 1.0 + monic.0[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let angle = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4;
                Complex64::from_polar(0.5 * bound, angle)
            })
            .collect();
        const MAX_ITERATIONS: usize = 500;
        let mut converged = false;
        let mut last_step = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            last_step = 0.0;
            for k in 0..n {
                let (p, dp) = monic.eval_with_derivative(z[k]);
                if p == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
                let step = ratio / (1.0 - ratio * repulsion);
                z[k] -= step;
                last_step = last_step.max(step.norm() / z[k].norm().max(1.0));
            }
            if last_step < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged && last_step > 1e-9 {
            return Err(Error::NoConvergence {
                what: "polynomial roots",
                iterations: MAX_ITERATIONS,
                residual: last_step,
            });
        }
        for root in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = monic.eval_with_derivative(*root);
                if dp.norm() == 0.0 {
                    break;
                }
                *root -= p / dp;
            }
        }
        Ok(z)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(0.0) + rhs.0.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

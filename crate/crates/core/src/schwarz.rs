//! Schwarz function of a mapped domain and its quadrature data.
//!
//! For a real map `φ`, `conj(φ(ζ)) = φ(1/ζ)` on the unit circle, so the
//! Schwarz function is `S(φ(ζ)) = φ(1/ζ)`. Its poles in the domain sit at
//! `φ(1/C_k)` and carry the planar quadrature data. With respect to the
//! projected spherical measure `dA / (π (1 + |w|²)²)` the relevant function is
//! `S / (1 + wS)`, whose poles are the images of the in-disc roots of
//! `1 + φ(ζ) φ(1/ζ) = 0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::RationalMap;
use crate::error::{Error, Result};
use crate::poly::Poly;

const RESIDUE_TOLERANCE: f64 = 1e-10;
const CONTOUR_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    PlanarLebesgue,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureNode {
    #[serde(with = "complex_pair")]
    pub node: Complex64,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureData {
    pub measure: Measure,
    pub points: Vec<QuadratureNode>,
}

impl QuadratureData {
    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.coefficient).sum()
    }

    /// Right-hand side of the quadrature identity, `Σ c_k f(z_k)`.
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        self.points.iter().map(|p| f(p.node) * p.coefficient).sum()
    }

    /// Points ordered by real part, then imaginary part.
    pub fn sorted(mut self) -> Self {
        self.points
            .sort_by(|a, b| a.node.re.total_cmp(&b.node.re).then(a.node.im.total_cmp(&b.node.im)));
        self
    }
}

pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

fn require_poles_outside(m: &RationalMap) -> Result<()> {
    match m
        .terms()
        .iter()
        .find(|t| t.c.abs() <= 1.0 + crate::conformal::POLE_MARGIN)
    {
        Some(t) => Err(Error::InvalidMap(format!("pole inside unit disc (C = {})", t.c))),
        None => Ok(()),
    }
}

/// `S(w) = φ(1/φ⁻¹(w))`.
pub fn schwarz_eval(m: &RationalMap, w: Complex64, seed: Complex64) -> Result<Complex64> {
    let zeta = m.invert(w, seed)?;
    for t in m.terms() {
        if (zeta * t.c - 1.0).norm() < 1e-9 {
            return Err(Error::PoleOfS);
        }
    }
    Ok(m.eval_reciprocal(zeta))
}

/// `S'(w)` from `S'(φ(ζ)) φ'(ζ) = d/dζ φ(1/ζ)`.
pub fn schwarz_derivative(m: &RationalMap, w: Complex64, seed: Complex64) -> Result<Complex64> {
    let zeta = m.invert(w, seed)?;
    Ok(m.reciprocal_derivative(zeta) / m.derivative_unchecked(zeta))
}

/// `(1/2πi) ∮_{|ζ - center| = radius} f(ζ) dζ` by the trapezoid rule.
fn contour_residue<F: Fn(Complex64) -> Complex64>(f: F, center: Complex64, radius: f64) -> Complex64 {
    let n = CONTOUR_POINTS;
    let sum: Complex64 = (0..n)
        .map(|k| {
            let e = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            f(center + e * radius) * e
        })
        .sum();
    sum * radius / n as f64
}

fn check_agreement(closed_form: Complex64, contour: Complex64) -> Result<()> {
    if (closed_form - contour).norm() > RESIDUE_TOLERANCE * closed_form.norm().max(1.0) {
        return Err(Error::ResidueMismatch {
            closed_form: closed_form.re,
            contour: contour.re,
        });
    }
    Ok(())
}

fn real_positive(c: Complex64) -> Result<f64> {
    if c.re > 0.0 && c.im.abs() <= 1e-9 * c.re.max(1.0) {
        Ok(c.re)
    } else {
        Err(Error::NonPositiveCoefficient { re: c.re, im: c.im })
    }
}

/// Nodes `φ(1/C_k)` with coefficients `π A_k φ'(1/C_k) / C_k²`, each
/// coefficient checked against a contour integral of `φ(1/ζ) φ'(ζ)` around
/// `ζ = 1/C_k`.
pub fn planar_quadrature_data(m: &RationalMap) -> Result<QuadratureData> {
    require_poles_outside(m)?;
    let terms = m.terms();
    let mut points = Vec::with_capacity(terms.len());
    for (k, t) in terms.iter().enumerate() {
        let zeta = Complex64::new(1.0 / t.c, 0.0);
        let node = m.eval_unchecked(zeta);
        let closed_form = m.derivative_unchecked(zeta) * (PI * t.a / (t.c * t.c));

        let mut gap = f64::INFINITY;
        for (j, other) in terms.iter().enumerate() {
            gap = gap.min((other.c - zeta.re).abs());
            if j != k {
                gap = gap.min((1.0 / other.c - zeta.re).abs());
            }
        }
        let residue = contour_residue(|z| m.eval_reciprocal(z) * m.derivative_unchecked(z), zeta, gap / 3.0);
        check_agreement(closed_form, residue * PI)?;
        points.push(QuadratureNode {
            node,
            coefficient: real_positive(closed_form)?,
        });
    }
    Ok(QuadratureData {
        measure: Measure::PlanarLebesgue,
        points,
    })
}

/// Numerator of `1 + φ(ζ) φ(1/ζ)` after clearing denominators; degree ≤ 2n.
pub fn spherical_node_polynomial(m: &RationalMap) -> Poly {
    let terms = m.terms();
    // φ(ζ) = N/D with D = Π (C_k - ζ); φ(1/ζ) = M/E with E = Π (C_k ζ - 1).
    let d = terms
        .iter()
        .fold(Poly::constant(1.0), |acc, t| &acc * &Poly::linear(t.c, -1.0));
    let e = terms
        .iter()
        .fold(Poly::constant(1.0), |acc, t| &acc * &Poly::linear(-1.0, t.c));
    let mut n = d.scale(m.offset());
    let mut mm = e.scale(m.offset());
    for (k, t) in terms.iter().enumerate() {
        let others = terms.iter().enumerate().filter(|&(j, _)| j != k);
        let dn = others
            .clone()
            .fold(Poly::constant(t.a), |acc, (_, o)| &acc * &Poly::linear(o.c, -1.0));
        let en = others.fold(Poly::linear(0.0, t.a), |acc, (_, o)| &acc * &Poly::linear(-1.0, o.c));
        n = &n + &dn;
        mm = &mm + &en;
    }
    &(&d * &e) + &(&n * &mm)
}

/// In-disc roots `ζ*` of `1 + φ(ζ)φ(1/ζ)`, the preimages of the spherical
/// quadrature nodes.
pub fn spherical_node_preimages(m: &RationalMap) -> Result<Vec<Complex64>> {
    require_poles_outside(m)?;
    let roots = spherical_node_polynomial(m).roots()?;
    if let Some(r) = roots.iter().find(|r| (r.norm() - 1.0).abs() <= 1e-9) {
        return Err(Error::DegenerateTangency { modulus: r.norm() });
    }
    let inside: Vec<Complex64> = roots.into_iter().filter(|r| r.norm() < 1.0).collect();
    if inside.len() != m.order() {
        return Err(Error::RootCountMismatch {
            expected: m.order(),
            found: inside.len(),
        });
    }
    for (i, a) in inside.iter().enumerate() {
        if inside[i + 1..].iter().any(|b| (a - b).norm() < 1e-7) {
            return Err(Error::ConfluentNode);
        }
        if a.norm() >= 1.0 - 1e-9 {
            return Err(Error::NodeOutsideDomain);
        }
    }
    Ok(inside)
}

/// `S / (S + w S')` at a root of `1 + w S`, written as `1 / (1 - S'/S²)` so
/// that a node sitting on a pole of `S` is covered by the limit
/// `1 / (1 + C² / (A φ'(ζ)))`.
fn spherical_coefficient(m: &RationalMap, zeta: Complex64) -> Complex64 {
    let dphi = m.derivative_unchecked(zeta);
    if let Some(t) = m.terms().iter().find(|t| (zeta * t.c - 1.0).norm() < 1e-9) {
        return 1.0 / (1.0 + t.c * t.c / (dphi * t.a));
    }
    let s = m.eval_reciprocal(zeta);
    let ds = m.reciprocal_derivative(zeta) / dphi;
    1.0 / (1.0 - ds / (s * s))
}

/// Spherical nodes `φ(ζ*)` with coefficients
/// `π Res S̃ = S / (S + w S')`, each checked against a contour integral of
/// `φ(1/ζ) φ'(ζ) / (1 + φ(ζ) φ(1/ζ))` around `ζ*`.
pub fn spherical_quadrature_data(m: &RationalMap) -> Result<QuadratureData> {
    let preimages = spherical_node_preimages(m)?;
    let mut singular: Vec<Complex64> = m
        .terms()
        .iter()
        .flat_map(|t| [Complex64::new(t.c, 0.0), Complex64::new(1.0 / t.c, 0.0)])
        .collect();
    singular.extend(preimages.iter().filter(|z| z.norm() > 0.0).map(|z| 1.0 / z));
    let mut points = Vec::with_capacity(preimages.len());
    for (k, &zeta) in preimages.iter().enumerate() {
        let w = m.eval_unchecked(zeta);
        let closed_form = spherical_coefficient(m, zeta);

        let gap = singular
            .iter()
            .filter(|z| (*z - zeta).norm() > 1e-9)
            .chain(preimages.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, z)| z))
            .map(|z| (z - zeta).norm())
            .fold(f64::INFINITY, f64::min);
        let residue = contour_residue(
            |z| {
                let sz = m.eval_reciprocal(z);
                sz * m.derivative_unchecked(z) / (1.0 + m.eval_unchecked(z) * sz)
            },
            zeta,
            gap / 3.0,
        );
        check_agreement(closed_form, residue)?;
        points.push(QuadratureNode {
            node: w,
            coefficient: real_positive(closed_form)?,
        });
    }
    let data = QuadratureData {
        measure: Measure::Spherical,
        points,
    };
    if data.total_mass() >= 1.0 {
        return Err(Error::MassOverflow {
            total: data.total_mass(),
        });
    }
    Ok(data.sorted())
}

//! Real rational maps `φ(ζ) = B + Σ_k A_k / (C_k - ζ)` of the unit disc.
//!
//! A univalent map of this form sends the disc onto a quadrature domain whose
//! order is the number of pole terms. The constant `B` is zero for every map
//! produced by the fitter; it exists so that discs not containing their own
//! pole image (e.g. discs centered at the origin) are representable.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Poles must satisfy `|C_k| > 1 + POLE_MARGIN`.
pub const POLE_MARGIN: f64 = 1e-9;

const NEAR_POLE: f64 = 1e-12;
const INVERT_BUDGET: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl PoleTerm {
    pub fn new(a: f64, c: f64) -> Self {
        Self { a, c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDoc", into = "MapDoc")]
pub struct RationalMap {
    offset: f64,
    terms: Vec<PoleTerm>,
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    terms: Vec<PoleTerm>,
    #[serde(default, rename = "B", skip_serializing_if = "is_zero")]
    offset: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl TryFrom<MapDoc> for RationalMap {
    type Error = Error;

    fn try_from(doc: MapDoc) -> Result<Self> {
        RationalMap::with_offset(doc.offset, doc.terms)
    }
}

impl From<RationalMap> for MapDoc {
    fn from(m: RationalMap) -> Self {
        MapDoc {
            terms: m.terms,
            offset: m.offset,
        }
    }
}

impl RationalMap {
    /// Structural checks only (one or two finite terms, nonzero residues,
    /// distinct poles); pole placement and univalence are checked by
    /// [`RationalMap::validate`].
    pub fn new(terms: Vec<PoleTerm>) -> Result<Self> {
        Self::with_offset(0.0, terms)
    }

    pub fn with_offset(offset: f64, terms: Vec<PoleTerm>) -> Result<Self> {
        if terms.is_empty() || terms.len() > 2 {
            return Err(Error::InvalidMap(format!(
                "order {} is not supported (1 or 2 terms)",
                terms.len()
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidMap("non-finite offset".into()));
        }
        for t in &terms {
            if !(t.a.is_finite() && t.c.is_finite()) || t.a == 0.0 {
                return Err(Error::InvalidMap(format!("degenerate term A={} C={}", t.a, t.c)));
            }
        }
        if terms.len() == 2 && (terms[0].c - terms[1].c).abs() < 1e-12 {
            return Err(Error::InvalidMap("repeated pole".into()));
        }
        Ok(Self { offset, terms })
    }

    /// `A/(C - ζ) + A/(-C - ζ)`, the mirror-symmetric two-pole map.
    pub fn symmetric(a: f64, c: f64) -> Result<Self> {
        Self::new(vec![PoleTerm::new(a, c), PoleTerm::new(a, -c)])
    }

    /// An order-one map onto the disc with the given real center and radius,
    /// using the pole `C = center / radius` when that lies outside the closed
    /// disc and `C = 2` plus an offset otherwise.
    pub fn disc(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidMap(format!("disc radius {radius}")));
        }
        let natural = center / radius;
        let pole = if natural.abs() >= 1.5 { natural } else { 2.0 };
        Self::disc_with_pole(center, radius, pole)
    }

    /// `φ(ζ) = center + radius · (ζ - 1/C)/(1 - ζ/C)` written in pole form.
    pub fn disc_with_pole(center: f64, radius: f64, pole: f64) -> Result<Self> {
        Self::with_offset(
            center - radius * pole,
            vec![PoleTerm::new(radius * (pole * pole - 1.0), pole)],
        )
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    fn check_pole_distance(&self, zeta: Complex64) -> Result<()> {
        for t in &self.terms {
            let distance = (zeta - t.c).norm();
            if distance < NEAR_POLE {
                return Err(Error::NearPole { pole: t.c, distance });
            }
        }
        Ok(())
    }

    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        self.check_pole_distance(zeta)?;
        Ok(self.eval_unchecked(zeta))
    }

    pub fn eval_unchecked(&self, zeta: Complex64) -> Complex64 {
        self.terms
            .iter()
            .fold(Complex64::new(self.offset, 0.0), |acc, t| acc + t.a / (t.c - zeta))
    }

    pub fn derivative(&self, zeta: Complex64) -> Result<Complex64> {
        self.check_pole_distance(zeta)?;
        Ok(self.derivative_unchecked(zeta))
    }

    pub fn derivative_unchecked(&self, zeta: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let d = t.c - zeta;
                t.a / (d * d)
            })
            .sum()
    }

    /// `φ(1/ζ)`, written so that `ζ = 0` is a regular point.
    pub fn eval_reciprocal(&self, zeta: Complex64) -> Complex64 {
        self.terms.iter().fold(Complex64::new(self.offset, 0.0), |acc, t| {
            acc + t.a * zeta / (t.c * zeta - 1.0)
        })
    }

    /// `d/dζ φ(1/ζ) = -φ'(1/ζ)/ζ²`.
    pub fn reciprocal_derivative(&self, zeta: Complex64) -> Complex64 {
        -self
            .terms
            .iter()
            .map(|t| {
                let d = t.c * zeta - 1.0;
                t.a / (d * d)
            })
            .sum::<Complex64>()
    }

    /// Preimage of `w` in the closed disc by damped Newton iteration from
    /// `seed`, restarting from a 32-point polar grid if the first run stalls
    /// or lands outside the disc.
    pub fn invert(&self, w: Complex64, seed: Complex64) -> Result<Complex64> {
        let mut budget = INVERT_BUDGET;
        let mut best = f64::INFINITY;
        if let Some(z) = self.newton_invert(w, seed, &mut budget, &mut best) {
            return Ok(z);
        }
        let mut starts: Vec<Complex64> = [0.2, 0.45, 0.7, 0.9]
            .iter()
            .flat_map(|&r| (0..8).map(move |k| Complex64::from_polar(r, TAU * (k as f64 + 0.5 * r) / 8.0)))
            .collect();
        let residual = |z: &Complex64| (self.eval_unchecked(*z) - w).norm();
        starts.sort_by(|a, b| residual(a).total_cmp(&residual(b)));
        for start in starts {
            if budget == 0 {
                break;
            }
            if let Some(z) = self.newton_invert(w, start, &mut budget, &mut best) {
                return Ok(z);
            }
        }
        Err(Error::NoConvergence {
            what: "map inversion",
            iterations: INVERT_BUDGET,
            residual: best,
        })
    }

    fn newton_invert(&self, w: Complex64, start: Complex64, budget: &mut usize, best: &mut f64) -> Option<Complex64> {
        let tolerance = 1e-11 * w.norm().max(1.0);
        let mut z = start;
        let mut r = self.eval_unchecked(z) - w;
        while *budget > 0 {
            *best = best.min(r.norm());
            if r.norm() <= tolerance {
                // One more step to reach rounding level.
                let d = self.derivative_unchecked(z);
                let polished = z - r / d;
                if (self.eval_unchecked(polished) - w).norm() <= r.norm() {
                    z = polished;
                }
                return (z.norm() <= 1.0 + 1e-9).then_some(z);
            }
            *budget -= 1;
            let step = r / self.derivative_unchecked(z);
            if !step.is_finite() {
                return None;
            }
            let mut t = 1.0;
            loop {
                let candidate = z - step * t;
                let rc = self.eval_unchecked(candidate) - w;
                if rc.norm() < r.norm() {
                    z = candidate;
                    r = rc;
                    break;
                }
                t *= 0.5;
                if t < 1e-4 {
                    return None;
                }
            }
        }
        None
    }

    /// `φ(e^{2πik/n})`, `k = 0..n`, counterclockwise in `ζ`.
    pub fn boundary_trace(&self, samples: usize) -> Vec<Complex64> {
        let n = samples.max(16);
        (0..n)
            .map(|k| self.eval_unchecked(Complex64::from_polar(1.0, TAU * k as f64 / n as f64)))
            .collect()
    }

    /// Univalence report: poles outside the closed disc, `φ'` bounded away
    /// from zero on a 64×64 polar grid, no self-intersection of the
    /// 4096-sample boundary polygon.
    pub fn validate(&self) -> MapReport {
        if let Some(t) = self.terms.iter().find(|t| t.c.abs() <= 1.0 + POLE_MARGIN) {
            return MapReport::failed(MapFailure::PoleInsideDisc { pole: t.c }, f64::NAN);
        }
        let mut min_derivative = f64::INFINITY;
        for i in 0..64 {
            let r = i as f64 / 63.0;
            for j in 0..64 {
                let d = self
                    .derivative_unchecked(Complex64::from_polar(r, TAU * j as f64 / 64.0))
                    .norm();
                min_derivative = min_derivative.min(d);
            }
        }
        if !(min_derivative > 1e-8) {
            return MapReport::failed(MapFailure::VanishingDerivative { min: min_derivative }, min_derivative);
        }
        let trace = self.boundary_trace(4096);
        if let Some((first, second)) = first_self_intersection(&trace) {
            return MapReport::failed(MapFailure::SelfIntersection { first, second }, min_derivative);
        }
        MapReport {
            valid: true,
            failure: None,
            min_derivative,
        }
    }

    /// Re-scales the image by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> RationalMap {
        RationalMap {
            offset: self.offset * factor,
            terms: self.terms.iter().map(|t| PoleTerm::new(t.a * factor, t.c)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum MapFailure {
    PoleInsideDisc { pole: f64 },
    VanishingDerivative { min: f64 },
    SelfIntersection { first: usize, second: usize },
}

impl fmt::Display for MapFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapFailure::PoleInsideDisc { pole } => write!(f, "pole inside unit disc (C = {pole})"),
            MapFailure::VanishingDerivative { min } => {
                write!(f, "derivative vanishes in the disc (min |φ'| = {min:e})")
            }
            MapFailure::SelfIntersection { first, second } => {
                write!(f, "boundary self-intersection between segments {first} and {second}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub valid: bool,
    pub failure: Option<MapFailure>,
    pub min_derivative: f64,
}

impl MapReport {
    fn failed(failure: MapFailure, min_derivative: f64) -> Self {
        Self {
            valid: false,
            failure: Some(failure),
            min_derivative,
        }
    }

    pub fn into_result(self) -> Result<()> {
        match self.failure {
            None => Ok(()),
            Some(f) => Err(Error::InvalidMap(f.to_string())),
        }
    }
}

fn orientation(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn segments_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    if p1.re.max(p2.re) < q1.re.min(q2.re)
        || q1.re.max(q2.re) < p1.re.min(p2.re)
        || p1.im.max(p2.im) < q1.im.min(q2.im)
        || q1.im.max(q2.im) < p1.im.min(p2.im)
    {
        return false;
    }
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// First pair of non-adjacent edges of a closed polygon that cross.
pub fn first_self_intersection(polygon: &[Complex64]) -> Option<(usize, usize)> {
    let n = polygon.len();
    let edge = |i: usize| (polygon[i], polygon[(i + 1) % n]);
    for i in 0..n {
        let (p1, p2) = edge(i);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (q1, q2) = edge(j);
            if segments_cross(p1, p2, q1, q2) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Winding number of a closed polygon around `z`.
pub fn winding_number(polygon: &[Complex64], z: Complex64) -> i64 {
    let n = polygon.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = polygon[i] - z;
        let b = polygon[(i + 1) % n] - z;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

/// Distance from `z` to a closed polygon.
pub fn distance_to_polygon(polygon: &[Complex64], z: Complex64) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            let ab = b - a;
            let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
            (a + ab * t - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

//! Inverse problem: find a two-pole map whose spherical quadrature data
//! match prescribed real nodes and masses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conformal::{PoleTerm, RationalMap, POLE_MARGIN};
use crate::error::{Error, Result};
use crate::schwarz::{planar_quadrature_data, spherical_quadrature_data, QuadratureData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Target Euclidean norm of the residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial number of continuation steps in the asymmetric case.
    pub continuation_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            fd_step: 1e-7,
            tolerance: 1e-12,
            max_iterations: 60,
            continuation_steps: 10,
        }
    }
}

/// Two real spherical nodes in ascending order and their masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitTarget {
    pub nodes: [f64; 2],
    pub masses: [f64; 2],
}

impl FitTarget {
    fn is_symmetric(&self) -> bool {
        let scale = self.nodes[1].abs().max(1.0);
        (self.nodes[0] + self.nodes[1]).abs() <= 1e-12 * scale
            && (self.masses[0] - self.masses[1]).abs() <= 1e-12 * self.masses[0].abs().max(1e-300)
    }

    fn blend(&self, other: &FitTarget, lambda: f64) -> FitTarget {
        let mix = |a: f64, b: f64| (1.0 - lambda) * a + lambda * b;
        FitTarget {
            nodes: [mix(self.nodes[0], other.nodes[0]), mix(self.nodes[1], other.nodes[1])],
            masses: [
                mix(self.masses[0], other.masses[0]),
                mix(self.masses[1], other.masses[1]),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub map: RationalMap,
    pub residual: f64,
    pub symmetric: bool,
    pub iterations: usize,
}

fn data_residual(map: &RationalMap, target: &FitTarget) -> Option<Vec<f64>> {
    residual_against(spherical_quadrature_data(map).ok()?, target)
}

fn residual_against(data: QuadratureData, target: &FitTarget) -> Option<Vec<f64>> {
    let data = data.sorted();
    if data.points.len() != 2 {
        return None;
    }
    let mut r = Vec::with_capacity(4);
    for (p, t) in data.points.iter().zip(target.nodes) {
        if p.node.im.abs() > 1e-8 * p.node.re.abs().max(1.0) {
            return None;
        }
        r.push(p.node.re - t);
    }
    for (p, s) in data.points.iter().zip(target.masses) {
        r.push(p.coefficient - s);
    }
    Some(r)
}

fn symmetric_map(p: &[f64]) -> Option<RationalMap> {
    let (a, c) = (p[0], p[1]);
    if !(a > 0.0 && c > 1.0 + POLE_MARGIN) {
        return None;
    }
    RationalMap::symmetric(a, c).ok()
}

fn general_map(p: &[f64]) -> Option<RationalMap> {
    if !(p[0] > 0.0 && p[2] > 0.0 && p[1] > 1.0 + POLE_MARGIN && p[3] < -1.0 - POLE_MARGIN) {
        return None;
    }
    RationalMap::new(vec![PoleTerm::new(p[0], p[1]), PoleTerm::new(p[2], p[3])]).ok()
}

fn symmetric_residual(p: &[f64], target: &FitTarget) -> Option<Vec<f64>> {
    let r = data_residual(&symmetric_map(p)?, target)?;
    Some(vec![r[1], r[3]])
}

fn general_residual(p: &[f64], target: &FitTarget) -> Option<Vec<f64>> {
    data_residual(&general_map(p)?, target)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct NewtonResult {
    params: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Damped Newton with a forward-difference Jacobian. Iterates that leave
/// the admissible set are rejected by the line search.
fn newton<F>(start: &[f64], f: F, opts: &FitOptions) -> Result<NewtonResult>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let fail = |iterations, residual| Error::NoConvergence {
        what: "map fit",
        iterations,
        residual,
    };
    let mut p = start.to_vec();
    let mut r = f(&p).ok_or(fail(0, f64::INFINITY))?;
    let n = p.len();
    for iteration in 0..opts.max_iterations {
        let rn = norm(&r);
        if rn < opts.tolerance {
            return Ok(NewtonResult {
                params: p,
                residual: rn,
                iterations: iteration,
            });
        }
        let mut jac = DMatrix::zeros(r.len(), n);
        for j in 0..n {
            let h = opts.fd_step * p[j].abs().max(1.0);
            let mut q = p.clone();
            q[j] += h;
            let column = match f(&q) {
                Some(rq) => rq.iter().zip(&r).map(|(a, b)| (a - b) / h).collect::<Vec<_>>(),
                None => {
                    q[j] = p[j] - h;
                    let rq = f(&q).ok_or(fail(iteration, rn))?;
                    rq.iter().zip(&r).map(|(a, b)| (b - a) / h).collect()
                }
            };
            for (i, v) in column.into_iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        let rhs = -DVector::from_column_slice(&r);
        let step = jac.lu().solve(&rhs).ok_or(fail(iteration, rn))?;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-8 {
            let candidate: Vec<f64> = p.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(rc) = f(&candidate) {
                if norm(&rc) < (1.0 - 1e-4 * lambda) * rn {
                    accepted = Some((candidate, rc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((candidate, rc)) => {
                p = candidate;
                r = rc;
            }
            None => {
                if rn < 1e3 * opts.tolerance {
                    // Stalled at the rounding floor.
                    return Ok(NewtonResult {
                        params: p,
                        residual: rn,
                        iterations: iteration,
                    });
                }
                return Err(fail(iteration, rn));
            }
        }
    }
    let rn = norm(&r);
    if rn < opts.tolerance {
        Ok(NewtonResult {
            params: p,
            residual: rn,
            iterations: opts.max_iterations,
        })
    } else {
        Err(fail(opts.max_iterations, rn))
    }
}

fn geomspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(move |k| lo * (ratio * k as f64).exp())
}

/// Fits `A/(C-ζ) + A/(-C-ζ)` to a mirror-symmetric target. Starting points
/// come from a scan over the pole `C` and the boundary crossing `φ(1) = L`.
pub fn fit_symmetric(node: f64, mass: f64, opts: &FitOptions) -> Result<FitOutcome> {
    let target = FitTarget {
        nodes: [-node, node],
        masses: [mass, mass],
    };
    let mut candidates = Vec::new();
    for gap in geomspace(1e-3, 30.0, 60) {
        let c = 1.0 + gap;
        for l in geomspace(0.02, 50.0, 60) {
            let a = l * (c * c - 1.0) / 2.0;
            if let Some(r) = symmetric_residual(&[a, c], &target) {
                let score = r[0].abs() / node.abs().max(1e-3) + r[1].abs() / mass;
                candidates.push((score, [a, c]));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut last = Error::NoConvergence {
        what: "map fit",
        iterations: 0,
        residual: f64::INFINITY,
    };
    for (_, start) in candidates.iter().take(8) {
        match newton(start, |p| symmetric_residual(p, &target), opts) {
            Ok(res) => {
                let map = symmetric_map(&res.params).expect("admissible");
                if map.validate().valid {
                    return Ok(FitOutcome {
                        map,
                        residual: res.residual,
                        symmetric: true,
                        iterations: res.iterations,
                    });
                }
                last = Error::InvalidResult(map.validate().failure.map(|f| f.to_string()).unwrap_or_default());
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Fits a two-pole map to the target, continuing from the symmetric fit of
/// the averaged target when the target is not mirror-symmetric.
pub fn fit_map(target: &FitTarget, opts: &FitOptions) -> Result<FitOutcome> {
    if !(target.nodes[0] < target.nodes[1]) || target.masses.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidConfig(format!("unusable fit target {target:?}")));
    }
    let half = 0.5 * (target.nodes[1] - target.nodes[0]);
    if target.is_symmetric() {
        return fit_symmetric(half, target.masses[0], opts);
    }
    let mean = 0.5 * (target.masses[0] + target.masses[1]);
    let start = fit_symmetric(half, mean, opts)?;
    let a = start.map.terms()[0].a;
    let c = start.map.terms()[0].c.abs();
    let origin = FitTarget {
        nodes: [-half, half],
        masses: [mean, mean],
    };

    let mut params = vec![a, c, a, -c];
    let mut lambda = 0.0;
    let mut step = 1.0 / opts.continuation_steps.max(1) as f64;
    let mut iterations = start.iterations;
    let mut residual = start.residual;
    while lambda < 1.0 {
        let next = (lambda + step).min(1.0);
        let goal = origin.blend(target, next);
        match newton(&params, |p| general_residual(p, &goal), opts) {
            Ok(res) => {
                params = res.params;
                iterations += res.iterations;
                residual = res.residual;
                lambda = next;
                step = (step * 1.5).min(0.25);
            }
            Err(e) => {
                step *= 0.5;
                if step < 1e-4 {
                    return Err(e);
                }
            }
        }
    }
    let map = general_map(&params).expect("admissible");
    map.validate()
        .into_result()
        .map_err(|e| Error::InvalidResult(e.to_string()))?;
    Ok(FitOutcome {
        map,
        residual,
        symmetric: false,
        iterations,
    })
}

/// Fits a two-pole map to planar (Lebesgue) quadrature data by Newton from
/// a grid of starting points, returning the valid fit with least residual.
pub fn fit_planar(target: &FitTarget, opts: &FitOptions) -> Result<FitOutcome> {
    let residual = |p: &[f64]| residual_against(planar_quadrature_data(&general_map(p)?).ok()?, target);
    let mut best: Option<FitOutcome> = None;
    let mut last = Error::NoConvergence {
        what: "planar map fit",
        iterations: 0,
        residual: f64::INFINITY,
    };
    for a1 in [0.3, 1.0, 3.0] {
        for c1 in [1.2, 2.0, 4.0] {
            for a2 in [0.3, 1.0, 3.0] {
                for c2 in [-1.2, -2.0, -4.0] {
                    match newton(&[a1, c1, a2, c2], residual, opts) {
                        Ok(res) => {
                            let map = general_map(&res.params).expect("admissible");
                            if map.validate().valid && best.as_ref().is_none_or(|b| res.residual < b.residual) {
                                best = Some(FitOutcome {
                                    map,
                                    residual: res.residual,
                                    symmetric: false,
                                    iterations: res.iterations,
                                });
                            }
                        }
                        Err(e) => last = e,
                    }
                }
            }
        }
    }
    best.ok_or(last)
}

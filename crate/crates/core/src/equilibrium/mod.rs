//! Assembly of the equilibrium support: caps of influence for isolated
//! charges, fitted quadrature domains for merged pairs.

mod fit;

pub use fit::{fit_map, fit_planar, fit_symmetric, FitOptions, FitOutcome, FitTarget};

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::charges::{CapRegion, ChargeConfig, PointCharge, Regime};
use crate::conformal::{MapReport, RationalMap};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, project, unproject, SpherePoint};
use crate::quadrature::QuadOrder;
use crate::region::ExclusionRegion;
use crate::schwarz::{planar_quadrature_data, spherical_quadrature_data, QuadratureData};
use crate::verification;

/// Gate for the charges → map → charges round trip.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-8;

/// Charges whose spherical quadrature data a map reproduces, assuming the
/// map is the whole exclusion region (unit background mass).
pub fn charges_from_map(m: &RationalMap) -> Result<ChargeConfig> {
    charges_from_map_with_background(m, 1.0)
}

/// As [`charges_from_map`] for one component of a larger configuration:
/// `background` is the reduced mass `1 + q - Σ_{component} q_i`.
pub fn charges_from_map_with_background(m: &RationalMap, background: f64) -> Result<ChargeConfig> {
    let data = spherical_quadrature_data(m)?;
    let total = data.total_mass();
    let own = background * total / (1.0 - total);
    ChargeConfig::new(
        data.points
            .iter()
            .map(|p| PointCharge::new(unproject(p.node), p.coefficient * (background + own)))
            .collect(),
    )
}

/// Disc image of an order-one map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscSummary {
    pub center: f64,
    pub radius: f64,
}

/// Forward pipeline for a single map: validation, quadrature data for both
/// measures and the charges the map represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapAnalysis {
    pub map: RationalMap,
    pub validation: MapReport,
    pub planar: QuadratureData,
    pub spherical: QuadratureData,
    pub charges: ChargeConfig,
    pub disc: Option<DiscSummary>,
}

pub fn analyze_map(m: &RationalMap) -> Result<MapAnalysis> {
    let validation = m.validate();
    validation.into_result()?;
    let disc = (m.order() == 1).then(|| {
        let (right, left) = (m.eval_unchecked(1.0.into()).re, m.eval_unchecked((-1.0).into()).re);
        DiscSummary {
            center: 0.5 * (right + left),
            radius: 0.5 * (right - left).abs(),
        }
    });
    Ok(MapAnalysis {
        map: m.clone(),
        validation,
        planar: planar_quadrature_data(m)?.sorted(),
        spherical: spherical_quadrature_data(m)?,
        charges: charges_from_map(m)?,
        disc,
    })
}

/// Rotation sending two charges to the xz-plane, symmetric about the
/// z-axis, with their midpoint toward the south pole. The first point lands
/// on the positive x side.
pub fn canonical_rotation(first: &SpherePoint, second: &SpherePoint) -> Rotation3<f64> {
    let (a, b) = (first.to_vector(), second.to_vector());
    let ex = (a - b).normalize();
    let sum = a + b;
    let ez = if sum.norm() > 1e-12 {
        -sum.normalize()
    } else {
        let helper = if ex.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
        (helper - ex * ex.dot(&helper)).normalize()
    };
    let ey = ez.cross(&ex);
    Rotation3::from_matrix_unchecked(Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]))
}

pub fn rotation_to_rows(r: &Rotation3<f64>) -> [[f64; 3]; 3] {
    let m = r.matrix();
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

pub fn rotation_from_rows(rows: &[[f64; 3]; 3]) -> Result<Rotation3<f64>> {
    let m = Matrix3::from_fn(|i, j| rows[i][j]);
    let defect = (m * m.transpose() - Matrix3::identity()).norm();
    if !(defect < 1e-9) || (m.determinant() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "matrix is not a rotation (orthogonality defect {defect:e})"
        )));
    }
    Ok(Rotation3::from_matrix_unchecked(m))
}

/// A fitted merged component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFit {
    pub indices: Vec<usize>,
    pub reduced_mass: f64,
    pub rotation: Rotation3<f64>,
    pub outcome: FitOutcome,
}

/// Fits the map of the merged component formed by `indices` in the frame
/// of [`canonical_rotation`].
pub fn fit_map_to_charges(cfg: &ChargeConfig, indices: &[usize], opts: &FitOptions) -> Result<ComponentFit> {
    let component = cfg
        .components()
        .into_iter()
        .find(|c| indices.first().is_some_and(|i| c.indices.contains(i)))
        .ok_or_else(|| Error::NotMerged(indices.to_vec()))?;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if component.indices != sorted || indices.len() < 2 {
        if component.indices.len() > 2 {
            return Err(Error::UnsupportedTopology {
                charges: component.indices.len(),
            });
        }
        return Err(Error::NotMerged(indices.to_vec()));
    }
    if indices.len() > 2 {
        return Err(Error::UnsupportedTopology { charges: indices.len() });
    }
    let (i, j) = (indices[0], indices[1]);
    let charges = cfg.charges();
    // Place the first charge on the positive side so the targets ascend.
    let rotation = canonical_rotation(&charges[j].position, &charges[i].position);
    let scale = 1.0 + cfg.total_charge();
    let left = project(&charges[i].position.rotate(&rotation))?;
    let right = project(&charges[j].position.rotate(&rotation))?;
    let target = FitTarget {
        nodes: [left.re, right.re],
        masses: [charges[i].intensity / scale, charges[j].intensity / scale],
    };
    let outcome = fit_map(&target, opts)?;
    Ok(ComponentFit {
        indices: vec![i, j],
        reduced_mass: component.reduced_mass,
        rotation,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapComponent {
    pub charge: usize,
    pub cap: CapRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapComponent {
    pub charges: Vec<usize>,
    pub reduced_mass: f64,
    /// Row-major rotation into the frame where the map applies.
    pub rotation: [[f64; 3]; 3],
    pub map: RationalMap,
    pub symmetric: bool,
    pub fit_residual: f64,
    pub planar: QuadratureData,
    pub spherical: QuadratureData,
}

impl MapComponent {
    pub fn frame(&self) -> Result<Rotation3<f64>> {
        rotation_from_rows(&self.rotation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub regime: Regime,
    pub charges: ChargeConfig,
    pub caps: Vec<CapComponent>,
    pub maps: Vec<MapComponent>,
    /// Estimated Frostman constant `F_Q`, when computed.
    pub frostman_constant: Option<f64>,
    /// Canonical frame of the first merged component, identity otherwise.
    pub rotation: [[f64; 3]; 3],
}

impl EquilibriumSolution {
    pub fn regions(&self) -> Result<Vec<ExclusionRegion>> {
        let mut out: Vec<ExclusionRegion> = self.caps.iter().map(|c| ExclusionRegion::Cap(c.cap)).collect();
        for m in &self.maps {
            out.push(ExclusionRegion::Mapped {
                frame: m.frame()?,
                map: m.map.clone(),
            });
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub fit: FitOptions,
    pub quad_order: QuadOrder,
    /// Support samples for the Frostman constant; zero skips it.
    pub frostman_samples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            quad_order: QuadOrder::default(),
            frostman_samples: 100,
        }
    }
}

pub fn solve(cfg: &ChargeConfig) -> Result<EquilibriumSolution> {
    solve_with(cfg, &SolveOptions::default())
}

pub fn solve_with(cfg: &ChargeConfig, opts: &SolveOptions) -> Result<EquilibriumSolution> {
    let report = cfg.detect_regime();
    let mut caps = Vec::new();
    let mut maps = Vec::new();
    let mut rotation = Rotation3::identity();
    for component in cfg.components() {
        match component.indices.len() {
            1 => {
                let i = component.indices[0];
                caps.push(CapComponent {
                    charge: i,
                    cap: cfg.cap_of_influence(i)?,
                });
            }
            2 => {
                let fit = fit_map_to_charges(cfg, &component.indices, &opts.fit)?;
                check_round_trip(cfg, &fit)?;
                if maps.is_empty() {
                    rotation = fit.rotation;
                }
                maps.push(MapComponent {
                    charges: fit.indices,
                    reduced_mass: fit.reduced_mass,
                    rotation: rotation_to_rows(&fit.rotation),
                    planar: planar_quadrature_data(&fit.outcome.map)?.sorted(),
                    spherical: spherical_quadrature_data(&fit.outcome.map)?,
                    map: fit.outcome.map,
                    symmetric: fit.outcome.symmetric,
                    fit_residual: fit.outcome.residual,
                });
            }
            n => return Err(Error::UnsupportedTopology { charges: n }),
        }
    }
    let mut solution = EquilibriumSolution {
        regime: report.regime,
        charges: cfg.clone(),
        caps,
        maps,
        frostman_constant: None,
        rotation: rotation_to_rows(&rotation),
    };
    let regions = solution.regions()?;
    check_disjoint(&regions)?;
    if opts.frostman_samples > 0 {
        let points = verification::support_points(&regions, opts.frostman_samples, 0x5eed, 0.1)?;
        let r = verification::frostman_residual(&regions, cfg, &points, opts.quad_order)?;
        solution.frostman_constant = Some(verification::frostman_constant(cfg, r.mean));
    }
    Ok(solution)
}

fn check_round_trip(cfg: &ChargeConfig, fit: &ComponentFit) -> Result<()> {
    let derived = charges_from_map_with_background(&fit.outcome.map, fit.reduced_mass)?;
    let back = derived.rotated(&fit.rotation.inverse());
    for &i in &fit.indices {
        let original = cfg.charges()[i];
        let nearest = back
            .charges()
            .iter()
            .min_by(|a, b| {
                chordal_distance(&a.position, &original.position)
                    .total_cmp(&chordal_distance(&b.position, &original.position))
            })
            .ok_or_else(|| Error::RoundTrip("map produced no charges".into()))?;
        let dp = chordal_distance(&nearest.position, &original.position);
        let dq = (nearest.intensity - original.intensity).abs();
        if dp > ROUND_TRIP_TOLERANCE || dq > ROUND_TRIP_TOLERANCE {
            return Err(Error::RoundTrip(format!(
                "charge {i}: position error {dp:e}, intensity error {dq:e}"
            )));
        }
    }
    Ok(())
}

fn check_disjoint(regions: &[ExclusionRegion]) -> Result<()> {
    let shapes: Vec<_> = regions.iter().map(|r| r.shape()).collect();
    for (i, a) in shapes.iter().enumerate() {
        for (j, b) in shapes.iter().enumerate().skip(i + 1) {
            let touches = |x: &crate::region::RegionShape, y: &crate::region::RegionShape| {
                x.sphere_trace()
                    .iter()
                    .step_by(8)
                    .any(|v| SpherePoint::from_direction(*v).map(|p| y.contains(&p)).unwrap_or(false))
            };
            if touches(a, b) || touches(b, a) {
                return Err(Error::RegionsOverlap { first: i, second: j });
            }
        }
    }
    Ok(())
}

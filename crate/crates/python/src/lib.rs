//! Python module `charge_sphere`.

use charge_sphere::equilibrium::{self, SolveOptions};
use charge_sphere::fekete::{self, StepSchedule};
use charge_sphere::geometry;
use charge_sphere::quadrature::QuadOrder;
use charge_sphere::verification;
use charge_sphere::{PointCharge, PoleTerm, SpherePoint};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(charge_sphere, ChargeSphereError, PyValueError);

fn py_err(e: charge_sphere::Error) -> PyErr {
    ChargeSphereError::new_err(e.to_string())
}

fn point(p: [f64; 3]) -> PyResult<SpherePoint> {
    SpherePoint::new(p[0], p[1], p[2]).map_err(py_err)
}

fn quad_order(order: usize) -> QuadOrder {
    QuadOrder::new(order, 2 * order)
}

fn regime_name(regime: charge_sphere::Regime) -> String {
    serde_json::to_value(regime)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn data_pairs(data: &charge_sphere::QuadratureData) -> Vec<(Complex64, f64)> {
    data.points.iter().map(|p| (p.node, p.coefficient)).collect()
}

#[pyclass(name = "ChargeConfig", module = "charge_sphere", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyChargeConfig {
    inner: charge_sphere::ChargeConfig,
}

#[pymethods]
impl PyChargeConfig {
    #[new]
    #[pyo3(signature = (positions, intensities))]
    fn new(positions: Vec<[f64; 3]>, intensities: Vec<f64>) -> PyResult<Self> {
        if positions.len() != intensities.len() {
            return Err(PyValueError::new_err("positions and intensities differ in length"));
        }
        let charges = positions
            .into_iter()
            .zip(intensities)
            .map(|(p, q)| Ok(PointCharge::new(point(p)?, q)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: charge_sphere::ChargeConfig::new(charges).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: charge_sphere::ChargeConfig::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn positions(&self) -> Vec<[f64; 3]> {
        self.inner.charges().iter().map(|c| c.position.coords()).collect()
    }

    #[getter]
    fn intensities(&self) -> Vec<f64> {
        self.inner.charges().iter().map(|c| c.intensity).collect()
    }

    #[getter]
    fn total_charge(&self) -> f64 {
        self.inner.total_charge()
    }

    /// "uniform", "disjoint_caps" or "merged".
    #[getter]
    fn regime(&self) -> String {
        regime_name(self.inner.detect_regime().regime)
    }

    fn components(&self) -> Vec<Vec<usize>> {
        self.inner.detect_regime().components
    }

    /// Angular radii of the caps of influence.
    fn cap_radii(&self) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .caps()
            .map_err(py_err)?
            .iter()
            .map(|c| c.angular_radius)
            .collect())
    }

    /// External field `Q(x) = Σ q_i ln(1/|x - x_i|)`.
    fn field(&self, x: [f64; 3]) -> PyResult<f64> {
        self.inner.field(&point(x)?).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChargeConfig({} charges, total {:.6})",
            self.inner.len(),
            self.inner.total_charge()
        )
    }
}

#[pyclass(name = "RationalMap", module = "charge_sphere", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyRationalMap {
    inner: charge_sphere::RationalMap,
}

#[pymethods]
impl PyRationalMap {
    /// `φ(ζ) = offset + Σ A/(C - ζ)` from `(A, C)` pairs.
    #[new]
    #[pyo3(signature = (terms, offset = 0.0))]
    fn new(terms: Vec<(f64, f64)>, offset: f64) -> PyResult<Self> {
        let terms = terms.into_iter().map(|(a, c)| PoleTerm::new(a, c)).collect();
        Ok(Self {
            inner: charge_sphere::RationalMap::with_offset(offset, terms).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn symmetric(a: f64, c: f64) -> PyResult<Self> {
        Ok(Self {
            inner: charge_sphere::RationalMap::symmetric(a, c).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn disc(center: f64, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: charge_sphere::RationalMap::disc(center, radius).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| py_err(e.into()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).unwrap()
    }

    #[getter]
    fn terms(&self) -> Vec<(f64, f64)> {
        self.inner.terms().iter().map(|t| (t.a, t.c)).collect()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.offset()
    }

    fn __call__(&self, zeta: Complex64) -> PyResult<Complex64> {
        self.inner.eval(zeta).map_err(py_err)
    }

    fn derivative(&self, zeta: Complex64) -> PyResult<Complex64> {
        self.inner.derivative(zeta).map_err(py_err)
    }

    /// Image of `samples` equally spaced points of the unit circle.
    #[pyo3(signature = (samples = 512))]
    fn boundary(&self, samples: usize) -> Vec<Complex64> {
        self.inner.boundary_trace(samples)
    }

    /// Raises `ChargeSphereError` when the map is not admissible.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().into_result().map_err(py_err)
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().into_result().is_ok()
    }

    /// `[(node, coefficient)]` for area measure, sorted by node.
    fn planar_data(&self) -> PyResult<Vec<(Complex64, f64)>> {
        Ok(data_pairs(
            &charge_sphere::schwarz::planar_quadrature_data(&self.inner)
                .map_err(py_err)?
                .sorted(),
        ))
    }

    /// `[(node, coefficient)]` for the normalized spherical measure.
    fn spherical_data(&self) -> PyResult<Vec<(Complex64, f64)>> {
        Ok(data_pairs(
            &charge_sphere::schwarz::spherical_quadrature_data(&self.inner)
                .map_err(py_err)?
                .sorted(),
        ))
    }

    /// Charges whose equilibrium excludes exactly this domain.
    fn charges(&self) -> PyResult<PyChargeConfig> {
        Ok(PyChargeConfig {
            inner: equilibrium::charges_from_map(&self.inner).map_err(py_err)?,
        })
    }

    /// Worst relative error of the quadrature identities over both measures.
    #[pyo3(signature = (quad_order = 128))]
    fn identity_error(&self, quad_order: usize) -> PyResult<f64> {
        let checks = verification::identity_suite(&self.inner, self::quad_order(quad_order)).map_err(py_err)?;
        Ok(checks.iter().map(|c| c.relative_error).fold(0.0, f64::max))
    }

    fn __repr__(&self) -> String {
        format!("RationalMap(terms={:?}, offset={})", self.terms(), self.inner.offset())
    }
}

#[pyclass(name = "EquilibriumSolution", module = "charge_sphere", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySolution {
    inner: charge_sphere::EquilibriumSolution,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: charge_sphere::EquilibriumSolution::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn regime(&self) -> String {
        regime_name(self.inner.regime)
    }

    #[getter]
    fn charges(&self) -> PyChargeConfig {
        PyChargeConfig {
            inner: self.inner.charges.clone(),
        }
    }

    #[getter]
    fn maps(&self) -> Vec<PyRationalMap> {
        self.inner
            .maps
            .iter()
            .map(|m| PyRationalMap { inner: m.map.clone() })
            .collect()
    }

    /// `(charge index, angular radius)` per isolated cap.
    #[getter]
    fn caps(&self) -> Vec<(usize, f64)> {
        self.inner
            .caps
            .iter()
            .map(|c| (c.charge, c.cap.angular_radius))
            .collect()
    }

    #[getter]
    fn frostman_constant(&self) -> Option<f64> {
        self.inner.frostman_constant
    }

    /// Rotation rows into the frame of each map component.
    #[getter]
    fn rotations(&self) -> Vec<[[f64; 3]; 3]> {
        self.inner.maps.iter().map(|m| m.rotation).collect()
    }

    /// Frostman residual over random support points: `(mean, std, max_dev)`.
    #[pyo3(signature = (points = 200, seed = 1, margin = 0.1, quad_order = 128))]
    fn frostman_residual(&self, points: usize, seed: u64, margin: f64, quad_order: usize) -> PyResult<(f64, f64, f64)> {
        let regions = self.inner.regions().map_err(py_err)?;
        let sample = verification::support_points(&regions, points, seed, margin).map_err(py_err)?;
        let report =
            verification::frostman_residual_for(&self.inner, &sample, self::quad_order(quad_order)).map_err(py_err)?;
        Ok((report.mean, report.std, report.max_dev))
    }

    /// Whether `x` lies in one of the exclusion regions.
    fn excludes(&self, x: [f64; 3]) -> PyResult<bool> {
        let p = point(x)?;
        Ok(self
            .inner
            .regions()
            .map_err(py_err)?
            .iter()
            .any(|r| r.shape().contains(&p)))
    }

    fn __repr__(&self) -> String {
        format!(
            "EquilibriumSolution(regime={:?}, caps={}, maps={})",
            self.regime(),
            self.inner.caps.len(),
            self.inner.maps.len()
        )
    }
}

#[pyclass(name = "ParticleSystem", module = "charge_sphere")]
pub struct PyParticleSystem {
    inner: fekete::ParticleSystem,
}

#[pymethods]
impl PyParticleSystem {
    #[new]
    #[pyo3(signature = (n, config, seed = 1))]
    fn new(n: usize, config: &PyChargeConfig, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: fekete::ParticleSystem::new(n, &config.inner, seed).map_err(py_err)?,
        })
    }

    /// Runs gradient steps; returns `(initial_energy, final_energy)`.
    fn minimize(&mut self, py: Python<'_>, iterations: usize) -> PyResult<(f64, f64)> {
        let inner = &mut self.inner;
        let report = py
            .detach(|| inner.minimize(iterations, &StepSchedule::default()))
            .map_err(py_err)?;
        Ok((report.initial_energy, report.final_energy))
    }

    fn energy(&self) -> PyResult<f64> {
        self.inner.energy().map_err(py_err)
    }

    #[getter]
    fn positions(&self) -> Vec<[f64; 3]> {
        self.inner.positions().iter().map(|p| p.coords()).collect()
    }

    /// Fraction of particles deeper than `margin` inside the solution's regions.
    #[pyo3(signature = (solution, margin = 0.05))]
    fn exclusion_fraction(&self, solution: &PySolution, margin: f64) -> PyResult<f64> {
        let regions = solution.inner.regions().map_err(py_err)?;
        Ok(fekete::exclusion_fraction(&self.inner.positions(), &regions, margin))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Equilibrium support for a charge configuration.
#[pyfunction]
#[pyo3(signature = (config, quad_order = 128, frostman_samples = 100))]
fn solve(py: Python<'_>, config: &PyChargeConfig, quad_order: usize, frostman_samples: usize) -> PyResult<PySolution> {
    let opts = SolveOptions {
        quad_order: self::quad_order(quad_order),
        frostman_samples,
        ..Default::default()
    };
    let cfg = config.inner.clone();
    let inner = py.detach(|| equilibrium::solve_with(&cfg, &opts)).map_err(py_err)?;
    Ok(PySolution { inner })
}

/// Full forward analysis of a map as a JSON document.
#[pyfunction]
fn analyze_map(map: &PyRationalMap) -> PyResult<String> {
    let analysis = equilibrium::analyze_map(&map.inner).map_err(py_err)?;
    Ok(serde_json::to_string(&analysis).unwrap())
}

/// Stereographic projection from the north pole.
#[pyfunction]
fn project(x: [f64; 3]) -> PyResult<Complex64> {
    geometry::project(&point(x)?).map_err(py_err)
}

#[pyfunction]
fn unproject(w: Complex64) -> [f64; 3] {
    geometry::unproject(w).coords()
}

#[pymodule]
#[pyo3(name = "charge_sphere")]
pub fn charge_sphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ChargeSphereError", m.py().get_type::<ChargeSphereError>())?;
    m.add_class::<PyChargeConfig>()?;
    m.add_class::<PyRationalMap>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyParticleSystem>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_map, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(unproject, m)?)?;
    Ok(())
}

//! Point-charge configurations, the external field they generate and their
//! caps of influence.

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, SpherePoint};

/// Caps are considered overlapping unless the centers are separated by more
/// than the sum of the angular radii plus this margin.
pub const REGIME_MARGIN: f64 = 1e-9;

/// Minimum chordal separation between two charges.
pub const MIN_SEPARATION: f64 = 1e-9;

/// Positions read from JSON are rescaled onto the sphere if their norm is
/// within this distance of one.
pub const JSON_UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCharge {
    pub position: SpherePoint,
    pub intensity: f64,
}

impl PointCharge {
    pub fn new(position: SpherePoint, intensity: f64) -> Self {
        Self { position, intensity }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChargeConfigDoc", into = "ChargeConfigDoc")]
pub struct ChargeConfig {
    charges: Vec<PointCharge>,
    total: f64,
}

#[derive(Serialize, Deserialize)]
struct ChargeDoc {
    pos: [f64; 3],
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct ChargeConfigDoc {
    charges: Vec<ChargeDoc>,
}

impl TryFrom<ChargeConfigDoc> for ChargeConfig {
    type Error = Error;

    fn try_from(doc: ChargeConfigDoc) -> Result<Self> {
        let charges = doc
            .charges
            .into_iter()
            .map(|c| {
                let [x, y, z] = c.pos;
                let position = SpherePoint::with_tolerance(x, y, z, JSON_UNIT_TOLERANCE)?;
                Ok(PointCharge::new(position, c.q))
            })
            .collect::<Result<Vec<_>>>()?;
        ChargeConfig::new(charges)
    }
}

impl From<ChargeConfig> for ChargeConfigDoc {
    fn from(cfg: ChargeConfig) -> Self {
        ChargeConfigDoc {
            charges: cfg
                .charges
                .iter()
                .map(|c| ChargeDoc {
                    pos: c.position.coords(),
                    q: c.intensity,
                })
                .collect(),
        }
    }
}

impl ChargeConfig {
    pub fn new(charges: Vec<PointCharge>) -> Result<Self> {
        for c in &charges {
            if !(c.intensity.is_finite() && c.intensity > 0.0) {
                return Err(Error::InvalidIntensity(c.intensity));
            }
        }
        for (i, a) in charges.iter().enumerate() {
            for (j, b) in charges.iter().enumerate().skip(i + 1) {
                if chordal_distance(&a.position, &b.position) <= MIN_SEPARATION {
                    return Err(Error::InvalidConfig(format!("charges {i} and {j} coincide")));
                }
            }
        }
        let total = charges.iter().map(|c| c.intensity).sum();
        Ok(Self { charges, total })
    }

    pub fn empty() -> Self {
        Self {
            charges: Vec::new(),
            total: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("charge config serializes")
    }

    pub fn charges(&self) -> &[PointCharge] {
        &self.charges
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// Total intensity `q`.
    pub fn total_charge(&self) -> f64 {
        self.total
    }

    pub fn rotated(&self, rotation: &Rotation3<f64>) -> ChargeConfig {
        ChargeConfig {
            charges: self
                .charges
                .iter()
                .map(|c| PointCharge::new(c.position.rotate(rotation), c.intensity))
                .collect(),
            total: self.total,
        }
    }

    /// `Q(p) = Σ q_i ln(1/|p - a_i|)`.
    pub fn field(&self, p: &SpherePoint) -> Result<f64> {
        let mut value = 0.0;
        for (index, c) in self.charges.iter().enumerate() {
            let d = chordal_distance(p, &c.position);
            if d <= 1e-12 {
                return Err(Error::SingularField { index });
            }
            value -= c.intensity * d.ln();
        }
        Ok(value)
    }

    /// The cap swept clean by charge `i` when it acts in isolation. Its
    /// normalized area is `q_i / (1 + q)`, which is what the uniform density
    /// `(1 + q) σ` of the equilibrium measure needs to balance the charge.
    pub fn cap_of_influence(&self, i: usize) -> Result<CapRegion> {
        let c = self
            .charges
            .get(i)
            .ok_or_else(|| Error::InvalidConfig(format!("no charge with index {i}")))?;
        CapRegion::from_mass(c.position, c.intensity / (1.0 + self.total))
    }

    pub fn caps(&self) -> Result<Vec<CapRegion>> {
        (0..self.len()).map(|i| self.cap_of_influence(i)).collect()
    }

    /// Groups the charges into connected components of the cap-overlap graph.
    pub fn detect_regime(&self) -> RegimeReport {
        let n = self.len();
        if n == 0 {
            return RegimeReport {
                regime: Regime::Uniform,
                components: Vec::new(),
            };
        }
        let radii: Vec<f64> = self
            .caps()
            .expect("valid configurations have valid caps")
            .iter()
            .map(|cap| cap.angular_radius)
            .collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut merged = false;
        for i in 0..n {
            for j in i + 1..n {
                let separation = self.charges[i].position.angle_to(&self.charges[j].position);
                if separation <= radii[i] + radii[j] + REGIME_MARGIN {
                    merged = true;
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = components.len();
                components.push(Vec::new());
            }
            components[slot[root]].push(i);
        }
        let regime = if merged { Regime::Merged } else { Regime::DisjointCaps };
        RegimeReport { regime, components }
    }

    pub fn components(&self) -> Vec<ChargeComponent> {
        self.detect_regime()
            .components
            .into_iter()
            .map(|indices| {
                let own: f64 = indices.iter().map(|&i| self.charges[i].intensity).sum();
                ChargeComponent {
                    indices,
                    reduced_mass: 1.0 + self.total - own,
                }
            })
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<ChargeConfig> {
        ChargeConfig::new(indices.iter().map(|&i| self.charges[i]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No charges: the equilibrium measure is σ itself.
    Uniform,
    DisjointCaps,
    Merged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Connected components of the cap-overlap graph, each sorted ascending.
    pub components: Vec<Vec<usize>>,
}

/// Charges whose caps overlap, together with the mass
/// `t_j = 1 + q - Σ_{i ∈ component} q_i` of the equilibrium problem they see
/// in isolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeComponent {
    pub indices: Vec<usize>,
    pub reduced_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CapDoc", into = "CapDoc")]
pub struct CapRegion {
    pub center: SpherePoint,
    pub angular_radius: f64,
    pub sigma_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct CapDoc {
    center: SpherePoint,
    angular_radius: f64,
    #[serde(default)]
    sigma_mass: Option<f64>,
}

impl TryFrom<CapDoc> for CapRegion {
    type Error = Error;

    // The stored mass is informational; the radius is authoritative.
    fn try_from(doc: CapDoc) -> Result<Self> {
        CapRegion::from_radius(doc.center, doc.angular_radius)
    }
}

impl From<CapRegion> for CapDoc {
    fn from(cap: CapRegion) -> Self {
        CapDoc {
            center: cap.center,
            angular_radius: cap.angular_radius,
            sigma_mass: Some(cap.sigma_mass),
        }
    }
}

impl CapRegion {
    /// Cap of normalized area `mass`, i.e. `cos θ = 1 - 2 mass`.
    pub fn from_mass(center: SpherePoint, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::InvalidIntensity(mass));
        }
        // acos(1 - 2m) = 2 asin(√m) without cancellation for small m.
        let angular_radius = 2.0 * mass.sqrt().asin();
        Ok(Self {
            center,
            angular_radius,
            sigma_mass: mass,
        })
    }

    pub fn from_radius(center: SpherePoint, angular_radius: f64) -> Result<Self> {
        if !(angular_radius > 0.0 && angular_radius < std::f64::consts::PI) {
            return Err(Error::InvalidConfig(format!(
                "cap radius {angular_radius} out of (0, π)"
            )));
        }
        let s = (0.5 * angular_radius).sin();
        Ok(Self {
            center,
            angular_radius,
            sigma_mass: s * s,
        })
    }

    /// Radius of the planar disc this cap projects to when its center sits at
    /// the south pole.
    pub fn planar_radius(&self) -> f64 {
        (0.5 * self.angular_radius).tan()
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.center.angle_to(p) < self.angular_radius
    }
}

//! Weighted Fekete points: `N` unit particles on the sphere minimizing
//! `Σ_{i<j} ln(1/|x_i - x_j|) + (N - 1) Σ_i Q(x_i)`. Their empirical
//! measure approximates the equilibrium measure, independently of any
//! conformal machinery.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charges::ChargeConfig;
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::region::{ExclusionRegion, RegionShape};

pub const MIN_PARTICLES: usize = 50;
pub const COLLISION_DISTANCE: f64 = 1e-10;
pub const INITIAL_NOISE: f64 = 0.01;
pub const MAX_ITERATIONS: usize = 50_000;

/// Fixed number of reduction blocks, independent of the thread count, so
/// that sums are associated identically on every run.
const BLOCKS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    positions: Vec<Vector3<f64>>,
    charges: Vec<(Vector3<f64>, f64)>,
    seed: u64,
}

/// Step lengths are the largest geodesic displacement of any particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub initial: f64,
    pub max: f64,
    pub growth: f64,
    pub shrink: f64,
    pub min: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            initial: 0.01,
            max: 0.05,
            growth: 1.2,
            shrink: 0.5,
            min: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub iterations: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub final_step: f64,
}

fn fibonacci(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            Vector3::new(r * t.cos(), r * t.sin(), z)
        })
        .collect()
}

impl ParticleSystem {
    /// Fibonacci lattice perturbed by seeded noise of amplitude 0.01.
    pub fn new(n: usize, cfg: &ChargeConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = fibonacci(n)
            .into_iter()
            .map(|p| {
                let noise = Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                (p + noise * INITIAL_NOISE).normalize()
            })
            .collect();
        Self::from_positions(positions, cfg, seed)
    }

    pub fn from_positions(positions: Vec<Vector3<f64>>, cfg: &ChargeConfig, seed: u64) -> Result<Self> {
        if positions.len() < MIN_PARTICLES {
            return Err(Error::InvalidConfig(format!(
                "{} particles, need at least {MIN_PARTICLES}",
                positions.len()
            )));
        }
        let charges: Vec<_> = cfg
            .charges()
            .iter()
            .map(|c| (c.position.to_vector(), c.intensity))
            .collect();
        for p in &positions {
            for (index, (a, _)) in charges.iter().enumerate() {
                if (p - a).norm() < 1e-9 {
                    return Err(Error::SingularField { index });
                }
            }
        }
        Ok(Self {
            positions,
            charges,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn positions(&self) -> Vec<SpherePoint> {
        self.positions
            .iter()
            .map(|p| SpherePoint::from_direction(*p).expect("unit vector"))
            .collect()
    }

    pub fn energy(&self) -> Result<f64> {
        Ok(energy_and_gradient(&self.positions, &self.charges)?.0)
    }

    /// Projected gradient descent with backtracking: a step that raises the
    /// energy is retried at `shrink` times the length, an accepted step
    /// grows the next one by `growth`.
    pub fn minimize(&mut self, iterations: usize, schedule: &StepSchedule) -> Result<MinimizeReport> {
        let iterations = iterations.min(MAX_ITERATIONS);
        let (mut energy, mut gradient) = energy_and_gradient(&self.positions, &self.charges)?;
        let initial_energy = energy;
        let mut step = schedule.initial;
        let (mut accepted, mut rejected) = (0, 0);
        let mut done = 0;
        for _ in 0..iterations {
            if step < schedule.min {
                break;
            }
            done += 1;
            let tangent: Vec<Vector3<f64>> = self
                .positions
                .iter()
                .zip(&gradient)
                .map(|(x, g)| g - x * g.dot(x))
                .collect();
            let largest = tangent.iter().map(|t| t.norm()).fold(0.0, f64::max);
            if largest == 0.0 {
                break;
            }
            let scale = step / largest;
            let trial: Vec<Vector3<f64>> = self
                .positions
                .iter()
                .zip(&tangent)
                .map(|(x, t)| (x - t * scale).normalize())
                .collect();
            match energy_and_gradient(&trial, &self.charges) {
                Ok((e, g)) if e <= energy => {
                    assert!(e <= energy, "energy increased on an accepted step");
                    self.positions = trial;
                    energy = e;
                    gradient = g;
                    accepted += 1;
                    step = (step * schedule.growth).min(schedule.max);
                }
                Ok(_) | Err(Error::Collision(..)) => {
                    rejected += 1;
                    step *= schedule.shrink;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(MinimizeReport {
            iterations: done,
            accepted,
            rejected,
            initial_energy,
            final_energy: energy,
            final_step: step,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for p in &self.positions {
            out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", p.x, p.y, p.z));
        }
        out
    }
}

fn energy_and_gradient(
    positions: &[Vector3<f64>],
    charges: &[(Vector3<f64>, f64)],
) -> Result<(f64, Vec<Vector3<f64>>)> {
    let n = positions.len();
    let weight = (n - 1) as f64;
    let partials = (0..BLOCKS)
        .into_par_iter()
        .map(|block| -> Result<(f64, Vec<Vector3<f64>>)> {
            let mut grad = vec![Vector3::zeros(); n];
            let mut energy = 0.0;
            for i in (block..n).step_by(BLOCKS) {
                let xi = positions[i];
                let mut gi = Vector3::zeros();
                for (j, xj) in positions.iter().enumerate().skip(i + 1) {
                    let d = xi - xj;
                    let d2 = d.norm_squared();
                    if d2 < COLLISION_DISTANCE * COLLISION_DISTANCE {
                        return Err(Error::Collision(i, j));
                    }
                    energy -= 0.5 * d2.ln();
                    let g = d / d2;
                    gi -= g;
                    grad[j] += g;
                }
                for (a, q) in charges {
                    let d = xi - a;
                    let d2 = d.norm_squared();
                    energy -= 0.5 * weight * q * d2.ln();
                    gi -= d * (weight * q / d2);
                }
                grad[i] += gi;
            }
            Ok((energy, grad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut energy = 0.0;
    let mut grad = vec![Vector3::zeros(); n];
    for (e, g) in partials {
        energy += e;
        for (total, part) in grad.iter_mut().zip(g) {
            *total += part;
        }
    }
    Ok((energy, grad))
}

/// Fraction of points strictly inside some region eroded by a geodesic
/// margin.
pub fn exclusion_fraction(points: &[SpherePoint], regions: &[ExclusionRegion], margin: f64) -> f64 {
    let shapes: Vec<RegionShape> = regions.iter().map(|r| r.shape()).collect();
    let inside = points
        .par_iter()
        .filter(|p| shapes.iter().any(|s| s.contains_eroded(p, margin)))
        .count();
    inside as f64 / points.len().max(1) as f64
}

fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    SpherePoint::new(r * phi.cos(), r * phi.sin(), z).expect("unit")
}

/// Largest gap between the empirical and normalized surface measure over
/// `count` random caps.
pub fn cap_discrepancy(points: &[SpherePoint], count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let center = random_point(&mut rng);
            let radius: f64 = rng.gen_range(0.1..PI - 0.1);
            let mass = 0.5 * (1.0 - radius.cos());
            let inside = points.iter().filter(|p| center.angle_to(p) < radius).count();
            (inside as f64 / points.len() as f64 - mass).abs()
        })
        .fold(0.0, f64::max)
}

/// Ratios of empirical to predicted mass `(1 + q) σ(cap)` for random caps of
/// the given radius lying in the support at geodesic distance `clearance`
/// from every region.
pub fn density_ratios(
    points: &[SpherePoint],
    regions: &[ExclusionRegion],
    total_charge: f64,
    radius: f64,
    count: usize,
    seed: u64,
) -> Vec<f64> {
    let shapes: Vec<RegionShape> = regions.iter().map(|r| r.shape()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let predicted = (1.0 + total_charge) * 0.5 * (1.0 - radius.cos()) * points.len() as f64;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count {
        attempts += 1;
        let center = random_point(&mut rng);
        let clear = shapes
            .iter()
            .all(|s| !s.contains(&center) && s.geodesic_distance_to_boundary(&center) > radius + 0.05);
        if clear {
            let inside = points.iter().filter(|p| center.angle_to(p) < radius).count();
            out.push(inside as f64 / predicted);
        }
    }
    out
}

/// Angular radius of the particle-free cap around `center`, extrapolated
/// from the ranked angles of the nearest quarter of the particles: outside
/// the cap the count within angle `θ` grows like
/// `N (1 + q) (σ(θ) - σ(θ₀))`.
pub fn empirical_cap_radius(points: &[SpherePoint], center: &SpherePoint, total_charge: f64) -> f64 {
    let mut angles: Vec<f64> = points.iter().map(|p| center.angle_to(p)).collect();
    angles.sort_by(f64::total_cmp);
    let n = points.len() as f64;
    let window = points.len() / 4;
    let mass: f64 = angles[..window]
        .iter()
        .enumerate()
        .map(|(k, theta)| 0.5 * (1.0 - theta.cos()) - (k as f64 + 0.5) / (n * (1.0 + total_charge)))
        .sum::<f64>()
        / window as f64;
    2.0 * mass.clamp(0.0, 1.0).sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::{CapRegion, PointCharge};

    #[test]
    fn initial_positions_are_unit_and_seeded() {
        let cfg = ChargeConfig::empty();
        let a = ParticleSystem::new(100, &cfg, 9).unwrap();
        let b = ParticleSystem::new(100, &cfg, 9).unwrap();
        let c = ParticleSystem::new(100, &cfg, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.vectors().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        assert!(ParticleSystem::new(49, &cfg, 1).is_err());
    }

    #[test]
    fn minimization_is_deterministic_and_monotone() {
        let cfg = ChargeConfig::new(vec![PointCharge::new(SpherePoint::SOUTH, 0.5)]).unwrap();
        let mut a = ParticleSystem::new(120, &cfg, 4).unwrap();
        let mut b = a.clone();
        let ra = a.minimize(200, &StepSchedule::default()).unwrap();
        b.minimize(200, &StepSchedule::default()).unwrap();
        assert_eq!(a.vectors(), b.vectors());
        assert!(ra.final_energy < ra.initial_energy);
        assert!(a.vectors().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cfg = ChargeConfig::new(vec![PointCharge::new(SpherePoint::SOUTH, 0.3)]).unwrap();
        let sys = ParticleSystem::new(60, &cfg, 2).unwrap();
        let (e0, g) = energy_and_gradient(sys.vectors(), &sys.charges).unwrap();
        let h = 1e-6;
        for (i, axis) in [(3, 0), (17, 1), (42, 2)] {
            let mut moved = sys.vectors().to_vec();
            moved[i][axis] += h;
            let e1 = energy_and_gradient(&moved, &sys.charges).unwrap().0;
            assert!(((e1 - e0) / h - g[i][axis]).abs() < 1e-3 * g[i][axis].abs().max(1.0));
        }
    }

    #[test]
    fn uniform_samples_fill_a_hemisphere_by_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<SpherePoint> = (0..2000).map(|_| random_point(&mut rng)).collect();
        let cap = ExclusionRegion::Cap(CapRegion::from_radius(SpherePoint::SOUTH, PI / 2.0).unwrap());
        assert!((exclusion_fraction(&points, std::slice::from_ref(&cap), 0.0) - 0.5).abs() < 0.05);
        assert_eq!(exclusion_fraction(&points, &[cap], 2.0), 0.0);
    }

    #[test]
    fn csv_has_one_row_per_particle() {
        let sys = ParticleSystem::new(64, &ChargeConfig::empty(), 1).unwrap();
        let csv = sys.to_csv();
        assert_eq!(csv.lines().count(), 65);
        assert!(csv.starts_with("x,y,z\n"));
    }
}

//! Equilibrium supports of the logarithmic potential on the unit sphere in the
//! presence of finitely many positive point charges.
//!
//! The region swept clean of charge is computed in the plane after
//! stereographic projection, where it is a quadrature domain: either a union of
//! discs (isolated caps of influence) or the image of the unit disc under a
//! real rational map with one simple pole per charge.
//!
//! ```
//! use charge_sphere::conformal::RationalMap;
//! use charge_sphere::schwarz::planar_quadrature_data;
//!
//! let oval = RationalMap::symmetric(2.0, 2.0).unwrap();
//! let data = planar_quadrature_data(&oval).unwrap().sorted();
//! assert!((data.points[1].node.re - 8.0 / 15.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charges;
pub mod conformal;
pub mod equilibrium;
pub mod error;
pub mod fekete;
pub mod geometry;
pub mod poly;
pub mod quadrature;
pub mod region;
pub mod schwarz;
pub mod verification;

pub use charges::{CapRegion, ChargeConfig, PointCharge, Regime, RegimeReport};
pub use conformal::{MapReport, PoleTerm, RationalMap};
pub use equilibrium::{solve, EquilibriumSolution};
pub use error::{Error, Result};
pub use geometry::{PlanePoint, SpherePoint};
pub use nalgebra;
pub use schwarz::{Measure, QuadratureData};

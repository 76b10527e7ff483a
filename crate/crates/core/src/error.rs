use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the north pole has no finite stereographic image")]
    NorthPole,
    #[error("point is not on the unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },
    #[error("external field is singular at charge {index}")]
    SingularField { index: usize },
    #[error("potential is singular at atom {index}")]
    SingularPotential { index: usize },
    #[error("invalid intensity {0}")]
    InvalidIntensity(f64),
    #[error("invalid charge configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid rational map: {0}")]
    InvalidMap(String),
    #[error("evaluation point lies within {distance:e} of the pole at {pole}")]
    NearPole { pole: f64, distance: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("the Schwarz function has a pole at the requested point")]
    PoleOfS,
    #[error("residue routes disagree: closed form {closed_form}, contour {contour}")]
    ResidueMismatch { closed_form: f64, contour: f64 },
    #[error("expected {expected} spherical nodes inside the disc, found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("spherical node condition has a root on the unit circle (|root| = {modulus})")]
    DegenerateTangency { modulus: f64 },
    #[error("confluent quadrature nodes are not supported")]
    ConfluentNode,
    #[error("quadrature node lies outside the mapped domain")]
    NodeOutsideDomain,
    #[error("quadrature coefficient {re}{im:+}i is not real and positive")]
    NonPositiveCoefficient { re: f64, im: f64 },
    #[error("spherical coefficients sum to {total} >= 1")]
    MassOverflow { total: f64 },
    #[error("fitted map failed validation: {0}")]
    InvalidResult(String),
    #[error("component with {charges} charges is not supported (at most 2)")]
    UnsupportedTopology { charges: usize },
    #[error("charges {0:?} do not form a merged component")]
    NotMerged(Vec<usize>),
    #[error("exclusion regions {first} and {second} overlap")]
    RegionsOverlap { first: usize, second: usize },
    #[error("round trip mismatch: {0}")]
    RoundTrip(String),
    #[error("test point {index} lies inside or too close to an exclusion region")]
    TestPointInsideDomain { index: usize },
    #[error("particles {0} and {1} collided")]
    Collision(usize, usize),
    #[error("{0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

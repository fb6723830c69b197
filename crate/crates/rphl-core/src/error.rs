use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lattice dimension must be 1, 2 or 3 (got {0})")]
    BadDimension(usize),

    #[error("torus side length must be even and at least 2 (got {0})")]
    BadSideLength(usize),

    #[error("site index {index} out of range for {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("sites {0} and {1} are not nearest neighbours")]
    NotNeighbours(usize, usize),

    #[error("momentum is not on the lattice grid")]
    OffGridMomentum,

    #[error("coupling profile is not symmetric: {0}")]
    AsymmetricProfile(String),

    #[error("coupling Fourier transform has imaginary part {0:e}")]
    ComplexFourier(f64),

    #[error("infrared mass m0 = {m0} outside (0, 2*pi/L = {bound})")]
    BadInfraredMass { m0: f64, bound: f64 },

    #[error("invalid photon sector: {0}")]
    BadPhotonSector(String),

    #[error("Hilbert-space dimension {dim} exceeds the guard {limit}")]
    DimensionExceeded { dim: usize, limit: usize },

    #[error("operator space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("{what} relation violated (residual {residual:e})")]
    RelationViolated { what: &'static str, residual: f64 },

    #[error("coupling transform is negative ({min:e}) at grid momentum {at:?}")]
    NegativeCoupling { min: f64, at: [i64; 3] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

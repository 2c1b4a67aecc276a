use crate::Kind;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("moment index {k} is beyond the resolvable quadrature band {band}")]
    QuadratureBandExceeded { k: i64, band: i64 },
    #[error("series for {what} did not converge after {terms} terms")]
    SeriesNotConverged { what: &'static str, terms: usize },
    #[error("moment window [{have_lo}, {have_hi}] does not cover [{need_lo}, {need_hi}]")]
    MomentWindowTooSmall {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },
    #[error("{kind} determinant of size {n} at offset {offset} vanishes")]
    SingularDeterminant { kind: Kind, n: usize, offset: i64 },
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("Christoffel-Darboux denominator vanishes at this point")]
    DegenerateCdPoint,
    #[error("oracle needs {evals} grid evaluations, budget is {budget}")]
    CostLimitExceeded { evals: u128, budget: u128 },
    #[error("point too close to the unit circle for the Cauchy expansion (bound {bound:e})")]
    RegionTooCloseToCircle { bound: f64 },
    #[error("|z| = {modulus} lies inside the excluded annulus around the unit circle")]
    AnnulusExcluded { modulus: f64 },
    #[error("residual {residual:e} is within the rounding bound {floor:e}")]
    PrecisionLoss { residual: f64, floor: f64 },
    #[error("invalid minor: {0}")]
    InvalidMinor(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("operation expects a {expected} system")]
    KindMismatch { expected: Kind },
}

pub type Result<T> = std::result::Result<T, Error>;

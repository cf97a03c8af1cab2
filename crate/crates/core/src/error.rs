use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-invertible series: constant coefficient is zero")]
    NonInvertibleSeries,
    #[error("point outside the closed unit ball: |z| = {0}")]
    OutsideBall(f64),
    #[error("dilation radius {0} outside [0, 1]")]
    BadRadius(f64),
    #[error("the Bergman form needs alpha < 0 (got alpha = {0})")]
    BergmanAlpha(f64),
    #[error("parameter {0} outside chart domain")]
    OutOfDomain(f64),
    #[error("empty set")]
    EmptySet,
    #[error("invalid dissection ratio lambda = {0}: must lie in (0, 1/2)")]
    BadLambda(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("coincident atoms {0} and {1} under the exclude-diagonal policy")]
    CoincidentAtoms(usize, usize),
    #[error("profile too coarse: {0}")]
    TooCoarse(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("numerically singular Gram matrix (condition estimate {0:.3e}); lower the degree")]
    SingularGram(f64),
    #[error("Monte-Carlo relative standard error {0:.3e} too high; increase the budget")]
    McVariance(f64),
    #[error("phi must be decreasing: derivative {0:.3e} at t = {1:.3e}")]
    NotDecreasing(f64, f64),
    #[error("weight vanishes without a floor at theta = {0}")]
    ZeroWeight(f64),
    #[error("truncation unstable: degree {0} and {1} differ by {2:.1}%")]
    TruncationUnstable(usize, usize, f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by unstable numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::SingularGram(_)
                | Error::McVariance(_)
                | Error::TruncationUnstable(..)
        )
    }
}

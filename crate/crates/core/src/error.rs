use thiserror::Error;

pub type Result<T> = std::result::Result<T, BqcError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BqcError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("sequence length {got} does not match the period N = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("norm exponent p = {0} is not in [1, inf]")]
    InvalidExponent(f64),

    #[error("values are not mean-zero: sum = {sum:e} exceeds tolerance {tol:e}")]
    NotMeanZero { sum: f64, tol: f64 },

    #[error("radius r = {0} must be positive")]
    NonpositiveRadius(f64),

    #[error("derivative order {0} is not in 0..=4")]
    DerivativeOrder(usize),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("strain y'_{site} = {strain} is not positive")]
    NonpositiveStrain { site: usize, strain: f64 },

    #[error("min strain {min} is below the second-neighbour floor r*/2 = {floor}")]
    BelowInflectionFloor { min: f64, floor: f64 },

    #[error("invalid blend shape: {0}")]
    InvalidShape(String),

    #[error("blend geometry does not fit the period: {0}")]
    GeometryDoesNotFit(String),

    #[error("invalid blending weights: {0}")]
    InvalidWeights(String),

    #[error("N = {n} exceeds the dense solver cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("coercivity does not change sign on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no admissible step found after {halvings} halvings")]
    AdmissibilityLost { halvings: usize },

    #[error("equilibrium is not stable (coercivity {coercivity:e})")]
    Unstable { coercivity: f64 },

    #[error("rate fit: {0}")]
    InvalidFit(String),

    #[error("sweep: {0}")]
    InvalidSweep(String),
}

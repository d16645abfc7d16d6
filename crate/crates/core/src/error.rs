use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmgError {
    #[error("spin length must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
    #[error("magnetic number m = {m} is not a valid state for J = {j}")]
    MagneticOutOfRange { j: f64, m: f64 },
    #[error("energy unit epsilon0 must be positive and finite, got {0}")]
    InvalidEnergyUnit(f64),
    #[error("J = 1/2 is only defined for vanishing couplings (2J-1 = 0)")]
    SingularCouplingScale,
    #[error("tridiagonal eigensolver failed (no convergence or non-finite values) for the {block} block")]
    NoConvergence { block: String },
    #[error("prediction outside degenerate-pair regime: {0}")]
    OutsideDegenerateRegime(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("only {used} of {requested} TWA trajectories could be integrated")]
    EnsembleFailure { used: usize, requested: usize },
    #[error("no admissible classical trajectory: {0}")]
    NoTrajectory(String),
}

pub type Result<T> = std::result::Result<T, LmgError>;

//! Dense complex linear algebra for low-dimensional quantum mechanics.
//!
//! States, density matrices, measurement operator sets, channels, and the
//! two non-orthogonal signal states transmitted by the quantum protocol.
//! Everything is a dense matrix over `Complex<f64>` in dimension at most
//! [`MAX_DIM`]; the protocol itself never needs more than three qubits.

mod channel;
pub mod linalg;
mod measure;
mod signal;
mod state;

pub use channel::{depolarizing_from_fidelity, QuantumChannel};
pub use measure::{born_sample, sample_index, MeasurementOperatorSet};
pub use signal::{make_signal_pair, SignalPair};
pub use state::{fidelity_pure, trace_distance, DensityMatrix, StateVector, Subsystem};

use thiserror::Error;

/// Tolerance for validity checks (normalization, Hermiticity, trace,
/// completeness).
pub const VALIDITY_TOL: f64 = 1e-10;

/// Tolerance for derived numerical identities.
pub const DERIVED_TOL: f64 = 1e-9;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("dimension {0} is not the product of subsystem dimensions {1}x{2}")]
    BadFactorization(usize, usize, usize),
    #[error("state vector norm deviates from one by {0:.3e}")]
    NotNormalized(f64),
    #[error("matrix deviates from Hermitian by {0:.3e}")]
    NotHermitian(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("trace deviates from one by {0:.3e}")]
    TraceNotOne(f64),
    #[error("measurement operators deviate from completeness by {0:.3e}")]
    IncompleteMeasurement(f64),
    #[error("channel deviates from trace preservation by {0:.3e}")]
    NotTracePreserving(f64),
    #[error("theta = {0} outside the valid range (0, pi/2]")]
    InvalidTheta(f64),
    #[error("channel fidelity {0} outside the valid range [0.5, 1]")]
    InvalidChannelFidelity(f64),
    #[error("computed outcome probability {0:.3e} is negative beyond tolerance")]
    NegativeProbability(f64),
    #[error("operator set is empty")]
    EmptySet,
}

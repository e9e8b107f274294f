//! The two non-orthogonal signal states and their swap symmetry.

use super::linalg::{CMatrix, C64};
use super::state::StateVector;
use super::{QuantumError, VALIDITY_TOL};

/// The signal pair `psi_0 = (cos(theta/2), sin(theta/2))`,
/// `psi_1 = (cos(theta/2), -sin(theta/2))`, with squared overlap
/// `cos^2(theta)`, together with the unitary that swaps them.
///
/// This real-amplitude embedding makes the swap unitary diagonal,
/// `U = diag(1, -1)`, and the swap exact in floating point.
#[derive(Debug, Clone)]
pub struct SignalPair {
    theta: f64,
    psi0: StateVector,
    psi1: StateVector,
    swap_unitary: CMatrix,
}

impl SignalPair {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn psi1(&self) -> &StateVector {
        &self.psi1
    }

    /// The signal state for a declared bit.
    pub fn psi(&self, bit: u8) -> &StateVector {
        if bit == 0 {
            &self.psi0
        } else {
            &self.psi1
        }
    }

    /// The unitary with `U psi_0 = psi_1` and `U psi_1 = psi_0`.
    pub fn swap_unitary(&self) -> &CMatrix {
        &self.swap_unitary
    }

    /// The normalized bisector of the two signals, `(1, 0)` in this
    /// embedding.
    pub fn bisector(&self) -> StateVector {
        StateVector::basis(2, 0)
    }

    /// Squared overlap `|<psi_0|psi_1>|^2`.
    pub fn squared_overlap(&self) -> f64 {
        self.psi0.inner(&self.psi1).norm_sqr()
    }
}

/// Builds the signal pair for `theta` in `(0, pi/2]`.
pub fn make_signal_pair(theta: f64) -> Result<SignalPair, QuantumError> {
    if !theta.is_finite() || theta <= 0.0 || theta > std::f64::consts::FRAC_PI_2 {
        return Err(QuantumError::InvalidTheta(theta));
    }
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let psi0 = StateVector::from_real(&[c, s])?;
    let psi1 = StateVector::from_real(&[c, -s])?;
    let swap_unitary = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    );
    let pair = SignalPair {
        theta,
        psi0,
        psi1,
        swap_unitary,
    };
    debug_assert!((pair.squared_overlap() - theta.cos().powi(2)).abs() <= VALIDITY_TOL);
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn orthogonal_at_theta_pi_over_two() {
        let pair = make_signal_pair(std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(pair.psi0().inner(pair.psi1()).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn squared_overlap_matches_cos2_theta() {
        let theta = std::f64::consts::FRAC_PI_3;
        let pair = make_signal_pair(theta).unwrap();
        assert_abs_diff_eq!(pair.squared_overlap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn swap_unitary_exchanges_signals_exactly() {
        for &theta in &[0.1, 0.7, std::f64::consts::FRAC_PI_2] {
            let pair = make_signal_pair(theta).unwrap();
            let mapped = pair.swap_unitary() * pair.psi0().amplitudes();
            // The sign flip of the second amplitude is exact in floating point.
            assert_eq!(mapped[0], pair.psi1().amplitudes()[0]);
            assert_eq!(mapped[1], pair.psi1().amplitudes()[1]);
            let back = pair.swap_unitary() * pair.psi1().amplitudes();
            assert_eq!(back[0], pair.psi0().amplitudes()[0]);
            assert_eq!(back[1], pair.psi0().amplitudes()[1]);
        }
    }

    #[test]
    fn rejects_theta_outside_range() {
        assert!(make_signal_pair(0.0).is_err());
        assert!(make_signal_pair(-0.3).is_err());
        assert!(make_signal_pair(std::f64::consts::FRAC_PI_2 + 1e-6).is_err());
        assert!(make_signal_pair(f64::NAN).is_err());
    }
}

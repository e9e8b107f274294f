//! Trace-preserving quantum channels in Kraus form.

use num_complex::Complex;

use super::linalg::{self, CMatrix, C64};
use super::signal::SignalPair;
use super::state::DensityMatrix;
use super::{QuantumError, VALIDITY_TOL};

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dim: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let dim = match kraus.first() {
            Some(k) => k.nrows(),
            None => return Err(QuantumError::EmptySet),
        };
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(QuantumError::DimensionMismatch(k.nrows(), dim));
            }
            sum += k.adjoint() * k;
        }
        sum -= linalg::identity(dim);
        let dev = sum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > VALIDITY_TOL {
            return Err(QuantumError::NotTracePreserving(dev));
        }
        Ok(Self { kraus, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![linalg::identity(dim)],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.kraus.len() == 1 && {
            let dev = (&self.kraus[0] - linalg::identity(self.dim))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            dev < VALIDITY_TOL
        }
    }

    /// Applies the channel to a state of matching dimension.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        if rho.dim() != self.dim {
            return Err(QuantumError::DimensionMismatch(rho.dim(), self.dim));
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Applies the channel to the second factor of a bipartite state,
    /// leaving the first factor untouched.
    pub fn apply_to_second(
        &self,
        joint: &DensityMatrix,
        dim_first: usize,
    ) -> Result<DensityMatrix, QuantumError> {
        if dim_first * self.dim != joint.dim() {
            return Err(QuantumError::BadFactorization(joint.dim(), dim_first, self.dim));
        }
        let eye = linalg::identity(dim_first);
        let mut out = CMatrix::zeros(joint.dim(), joint.dim());
        for k in &self.kraus {
            let lifted = linalg::kron(&eye, k);
            out += &lifted * joint.matrix() * lifted.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Fidelity averaged over the two honest signal states:
    /// `(<psi0|S(psi0)|psi0> + <psi1|S(psi1)|psi1>) / 2`.
    pub fn average_signal_fidelity(&self, signal: &SignalPair) -> Result<f64, QuantumError> {
        let f0 = super::fidelity_pure(&self.apply(&DensityMatrix::pure(signal.psi0()))?, signal.psi0())?;
        let f1 = super::fidelity_pure(&self.apply(&DensityMatrix::pure(signal.psi1()))?, signal.psi1())?;
        Ok(0.5 * (f0 + f1))
    }
}

/// Qubit depolarizing channel `rho -> (1-p) rho + p I/2` with `p = 2(1-f0)`,
/// so that every pure input comes out with fidelity exactly `f0`.
pub fn depolarizing_from_fidelity(f0: f64) -> Result<QuantumChannel, QuantumError> {
    if !(0.5..=1.0).contains(&f0) {
        return Err(QuantumError::InvalidChannelFidelity(f0));
    }
    let p = 2.0 * (1.0 - f0);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    let pauli_x = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let pauli_y = CMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]);
    let pauli_z = CMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
    let c_id = C64::new((1.0 - 0.75 * p).sqrt(), 0.0);
    let c_p = C64::new((0.25 * p).sqrt(), 0.0);
    QuantumChannel::new(vec![
        linalg::identity(2) * c_id,
        pauli_x * c_p,
        pauli_y * c_p,
        pauli_z * c_p,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity_pure, StateVector};
    use crate::seeding;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_pure(rng: &mut rand_chacha::ChaCha8Rng) -> StateVector {
        let raw: Vec<C64> = (0..2)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        StateVector::new(raw.into_iter().map(|z| z / norm).collect()).unwrap()
    }

    #[test]
    fn fidelity_one_is_identity() {
        let ch = depolarizing_from_fidelity(1.0).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let out = ch.apply(&DensityMatrix::pure(&psi)).unwrap();
        assert_abs_diff_eq!(fidelity_pure(&out, &psi).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_half_is_constant_mixed_output() {
        let ch = depolarizing_from_fidelity(0.5).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let out = ch.apply(&DensityMatrix::pure(&psi)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(out.matrix()[(i, j)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(out.matrix()[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pure_inputs_come_out_with_the_requested_fidelity() {
        // Algebraic check over random pure states.
        let ch = depolarizing_from_fidelity(0.9).unwrap();
        let mut rng = seeding::rng_for(3, seeding::stream::MEASUREMENT, 0);
        for _ in 0..200 {
            let psi = random_pure(&mut rng);
            let out = ch.apply(&DensityMatrix::pure(&psi)).unwrap();
            assert_abs_diff_eq!(fidelity_pure(&out, &psi).unwrap(), 0.9, epsilon = 1e-12);
        }
    }

    #[test]
    fn out_of_range_fidelity_rejected() {
        assert!(depolarizing_from_fidelity(0.49).is_err());
        assert!(depolarizing_from_fidelity(1.01).is_err());
    }

    #[test]
    fn channel_outputs_remain_valid_states() {
        let ch = depolarizing_from_fidelity(0.8).unwrap();
        let mut rng = seeding::rng_for(4, seeding::stream::MEASUREMENT, 0);
        for _ in 0..200 {
            let psi = random_pure(&mut rng);
            let out = ch.apply(&DensityMatrix::pure(&psi)).unwrap();
            out.validate().unwrap();
        }
    }

    #[test]
    fn lifting_to_second_factor_matches_local_action() {
        let ch = depolarizing_from_fidelity(0.85).unwrap();
        let a = StateVector::basis(2, 1);
        let b = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let joint = DensityMatrix::pure(&a.tensor(&b));
        let out = ch.apply_to_second(&joint, 2).unwrap();
        let expected = DensityMatrix::pure(&a).tensor(&ch.apply(&DensityMatrix::pure(&b)).unwrap());
        let dev = (out.matrix() - expected.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }
}

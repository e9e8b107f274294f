//! Pure states and density matrices.

use super::linalg::{self, CMatrix, CVector, C64, Half};
use super::{QuantumError, MAX_DIM, VALIDITY_TOL};

/// Labels the two factors of a bipartite system.
pub type Subsystem = Half;

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Builds a state from amplitudes, checking normalization.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, QuantumError> {
        let v = CVector::from_vec(amplitudes);
        if v.len() > MAX_DIM {
            return Err(QuantumError::DimensionTooLarge(v.len()));
        }
        if v.is_empty() {
            return Err(QuantumError::EmptySet);
        }
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > VALIDITY_TOL {
            return Err(QuantumError::NotNormalized((norm2 - 1.0).abs()));
        }
        Ok(Self { amplitudes: v })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self, QuantumError> {
        Self::new(amplitudes.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    /// Computational basis state `|k>` in the given dimension.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        Self {
            amplitudes: CVector::from_vec(v),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        (self.amplitudes.adjoint() * &other.amplitudes)[(0, 0)]
    }

    /// The rank-one projector `|psi><psi|`.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// The state orthogonal to a qubit state.
    pub fn qubit_orthogonal(&self) -> Result<StateVector, QuantumError> {
        if self.dim() != 2 {
            return Err(QuantumError::DimensionMismatch(self.dim(), 2));
        }
        let a = self.amplitudes[0];
        let b = self.amplitudes[1];
        Ok(StateVector {
            amplitudes: CVector::from_vec(vec![-b.conj(), a.conj()]),
        })
    }

    /// Tensor product, first factor on the most significant index.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amplitudes.iter() {
            for b in other.amplitudes.iter() {
                out.push(a * b);
            }
        }
        StateVector {
            amplitudes: CVector::from_vec(out),
        }
    }
}

/// A mixed state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Builds a density matrix, checking all three validity conditions.
    pub fn new(matrix: CMatrix) -> Result<Self, QuantumError> {
        let dm = Self { matrix };
        dm.validate()?;
        Ok(dm)
    }

    /// Wraps a matrix known to be valid by construction (channel outputs,
    /// normalized measurement updates of valid states, and the like).
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Checks Hermiticity, positivity, and unit trace at [`VALIDITY_TOL`].
    pub fn validate(&self) -> Result<(), QuantumError> {
        let m = &self.matrix;
        if m.nrows() != m.ncols() {
            return Err(QuantumError::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if m.nrows() > MAX_DIM {
            return Err(QuantumError::DimensionTooLarge(m.nrows()));
        }
        let herm = linalg::hermitian_deviation(m);
        if herm > VALIDITY_TOL {
            return Err(QuantumError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > VALIDITY_TOL || tr.im.abs() > VALIDITY_TOL {
            return Err(QuantumError::TraceNotOne((tr.re - 1.0).abs().max(tr.im.abs())));
        }
        let min_eig = linalg::min_eigenvalue(m);
        if min_eig < -VALIDITY_TOL {
            return Err(QuantumError::NotPositive(min_eig));
        }
        Ok(())
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self {
            matrix: psi.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Tensor product of two density matrices.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    /// Traces out one subsystem of a bipartite state with the given factor
    /// dimensions.
    pub fn partial_trace(
        &self,
        dims: (usize, usize),
        traced: Subsystem,
    ) -> Result<DensityMatrix, QuantumError> {
        if dims.0 * dims.1 != self.dim() {
            return Err(QuantumError::BadFactorization(self.dim(), dims.0, dims.1));
        }
        Ok(DensityMatrix {
            matrix: linalg::partial_trace(&self.matrix, dims.0, dims.1, traced),
        })
    }
}

/// Trace distance `D(a, b) = (1/2) * sum of singular values of (a - b)`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, QuantumError> {
    if a.dim() != b.dim() {
        return Err(QuantumError::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * linalg::hermitian_trace_norm(&diff))
}

/// Fidelity of a mixed state with a pure state: `<psi|rho|psi>`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64, QuantumError> {
    if rho.dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch(rho.dim(), psi.dim()));
    }
    Ok(linalg::expectation(rho.matrix(), psi.amplitudes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(QuantumError::NotNormalized(_))
        ));
    }

    #[test]
    fn rejects_oversized_dimension() {
        let mut v = vec![0.0; 32];
        v[0] = 1.0;
        assert!(matches!(
            StateVector::from_real(&v),
            Err(QuantumError::DimensionTooLarge(32))
        ));
    }

    #[test]
    fn trace_distance_identical_is_zero() {
        let rho = DensityMatrix::pure(&StateVector::basis(2, 0));
        assert_abs_diff_eq!(trace_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_orthogonal_pure_is_one() {
        let a = DensityMatrix::pure(&StateVector::basis(2, 0));
        let b = DensityMatrix::pure(&StateVector::basis(2, 1));
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_zero_vs_plus() {
        // Eigendecomposition of the 2x2 difference matrix gives 1/sqrt(2).
        let zero = DensityMatrix::pure(&StateVector::basis(2, 0));
        let plus = DensityMatrix::pure(
            &StateVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2])
                .unwrap(),
        );
        assert_abs_diff_eq!(
            trace_distance(&zero, &plus).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-10
        );
    }

    #[test]
    fn fidelity_with_own_projector_is_one() {
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let rho = DensityMatrix::pure(&psi);
        assert_abs_diff_eq!(fidelity_pure(&rho, &psi).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_with_maximally_mixed_is_half() {
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity_pure(&rho, &psi).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(4);
        let psi = StateVector::basis(2, 0);
        assert!(fidelity_pure(&rho, &psi).is_err());
        let sigma = DensityMatrix::maximally_mixed(2);
        assert!(trace_distance(&rho, &sigma).is_err());
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let zero = StateVector::basis(2, 0);
        let zz = DensityMatrix::pure(&zero.tensor(&zero));
        let reduced = zz.partial_trace((2, 2), Subsystem::First).unwrap();
        assert_abs_diff_eq!(reduced.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);

        let bell = StateVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0, std::f64::consts::FRAC_1_SQRT_2])
            .unwrap();
        let reduced = DensityMatrix::pure(&bell)
            .partial_trace((2, 2), Subsystem::First)
            .unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(trace_distance(&reduced, &mixed).unwrap() < 1e-12);
    }
}

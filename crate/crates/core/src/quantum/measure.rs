//! Measurement operator sets and Born-rule sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::linalg::{self, CMatrix};
use super::state::{DensityMatrix, StateVector};
use super::{QuantumError, VALIDITY_TOL};

/// A finite set of Hermitian positive semidefinite operators summing to the
/// identity. The element index is the outcome label.
#[derive(Debug, Clone)]
pub struct MeasurementOperatorSet {
    elements: Vec<CMatrix>,
    dim: usize,
}

impl MeasurementOperatorSet {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let dim = match elements.first() {
            Some(e) => e.nrows(),
            None => return Err(QuantumError::EmptySet),
        };
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(QuantumError::DimensionMismatch(e.nrows(), dim));
            }
            let herm = linalg::hermitian_deviation(e);
            if herm > VALIDITY_TOL {
                return Err(QuantumError::NotHermitian(herm));
            }
            let min_eig = linalg::min_eigenvalue(e);
            if min_eig < -VALIDITY_TOL {
                return Err(QuantumError::NotPositive(min_eig));
            }
            sum += e;
        }
        sum -= linalg::identity(dim);
        let dev = sum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > VALIDITY_TOL {
            return Err(QuantumError::IncompleteMeasurement(dev));
        }
        Ok(Self { elements, dim })
    }

    /// Two-outcome von Neumann test `{|psi><psi|, I - |psi><psi|}`.
    /// Outcome 0 is the pass branch.
    pub fn projective_test(psi: &StateVector) -> Self {
        let p = psi.projector();
        let dim = psi.dim();
        let rest = linalg::identity(dim) - &p;
        Self {
            elements: vec![p, rest],
            dim,
        }
    }

    /// Complete orthonormal-basis measurement `{|psi><psi|, |psi_perp><psi_perp|}`
    /// for a qubit. Outcome 0 is `|psi>`.
    pub fn qubit_basis(psi: &StateVector) -> Result<Self, QuantumError> {
        let perp = psi.qubit_orthogonal()?;
        Ok(Self {
            elements: vec![psi.projector(), perp.projector()],
            dim: 2,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &CMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Outcome probabilities `Tr(M_k rho)` under the Born rule.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>, QuantumError> {
        if rho.dim() != self.dim {
            return Err(QuantumError::DimensionMismatch(rho.dim(), self.dim));
        }
        let mut probs = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let p = (e * rho.matrix()).trace().re;
            if p < -VALIDITY_TOL {
                return Err(QuantumError::NegativeProbability(p));
            }
            probs.push(p.max(0.0));
        }
        Ok(probs)
    }
}

/// Samples an outcome of `m` on `rho` and returns the outcome index together
/// with the post-measurement state `sqrt(M_k) rho sqrt(M_k) / p_k`.
pub fn born_sample(
    rho: &DensityMatrix,
    m: &MeasurementOperatorSet,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, DensityMatrix), QuantumError> {
    let probs = m.probabilities(rho)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > VALIDITY_TOL {
        return Err(QuantumError::IncompleteMeasurement((total - 1.0).abs()));
    }
    let outcome = sample_index(&probs, rng);
    let sqrt = linalg::psd_sqrt(m.element(outcome));
    let p = probs[outcome].max(f64::MIN_POSITIVE);
    let post = &sqrt * rho.matrix() * sqrt.adjoint() / num_complex::Complex::new(p, 0.0);
    Ok((outcome, DensityMatrix::from_matrix_unchecked(post)))
}

/// Inverse-CDF sampling from a probability vector. The final index absorbs
/// any rounding slack.
pub fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::make_signal_pair;
    use crate::seeding;
    use approx::assert_abs_diff_eq;

    fn z_basis() -> MeasurementOperatorSet {
        MeasurementOperatorSet::projective_test(&StateVector::basis(2, 0))
    }

    #[test]
    fn incomplete_set_rejected() {
        let p = StateVector::basis(2, 0).projector();
        assert!(matches!(
            MeasurementOperatorSet::new(vec![p.clone(), p]),
            Err(QuantumError::IncompleteMeasurement(_))
        ));
    }

    #[test]
    fn zero_state_measures_zero_with_certainty() {
        let rho = DensityMatrix::pure(&StateVector::basis(2, 0));
        let mut rng = seeding::rng_for(1, seeding::stream::MEASUREMENT, 0);
        for _ in 0..32 {
            let (k, post) = born_sample(&rho, &z_basis(), &mut rng).unwrap();
            assert_eq!(k, 0);
            assert_abs_diff_eq!(post.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_is_unbiased() {
        // Symmetry puts the empirical frequency within 3 sigma of one half.
        let rho = DensityMatrix::maximally_mixed(2);
        let m = z_basis();
        let mut rng = seeding::rng_for(2, seeding::stream::MEASUREMENT, 0);
        let trials = 100_000;
        let mut zeros = 0u32;
        for _ in 0..trials {
            let (k, _) = born_sample(&rho, &m, &mut rng).unwrap();
            if k == 0 {
                zeros += 1;
            }
        }
        let freq = f64::from(zeros) / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn signal_tested_against_other_projector_passes_cos2() {
        let theta = std::f64::consts::FRAC_PI_3;
        let pair = make_signal_pair(theta).unwrap();
        let m = MeasurementOperatorSet::projective_test(pair.psi1());
        let rho = DensityMatrix::pure(pair.psi0());
        let probs = m.probabilities(&rho).unwrap();
        assert_abs_diff_eq!(probs[0], theta.cos() * theta.cos(), epsilon = 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let rho = DensityMatrix::maximally_mixed(2);
        let m = z_basis();
        let draw = |seed| {
            let mut rng = seeding::rng_for(seed, seeding::stream::MEASUREMENT, 7);
            (0..64)
                .map(|_| born_sample(&rho, &m, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}

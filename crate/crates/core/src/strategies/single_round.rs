//! Single-round cheating strategies for Alice and their closed-form
//! analysis.
//!
//! A strategy is a joint state on A x B together with two two-outcome
//! measurements on A, one for each value of Bob's bit; the outcome index is
//! the declared bit. The analysis computes, without sampling, the expected
//! test fidelity `E(f)` and the probability `E(q)` that the round bit
//! `a xor b` lands on the strategy's target, and the symmetrization
//! construction adds a control qubit that balances the two declaration
//! branches without changing either expectation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::quantum::linalg::{self, CMatrix, C64, Half};
use crate::quantum::{
    DensityMatrix, MeasurementOperatorSet, QuantumChannel, QuantumError, SignalPair, StateVector,
};
use crate::seeding;

/// A joint state plus the pair of declaration measurements (Bob's subsystem
/// is always a qubit; the kept subsystem has dimension 2 or 4).
#[derive(Debug, Clone)]
pub struct SingleRoundAliceStrategy {
    rho_ab: DensityMatrix,
    /// Measurement when Bob announces 0; element index = declared bit.
    m0: MeasurementOperatorSet,
    /// Measurement when Bob announces 1; element index = declared bit.
    m1: MeasurementOperatorSet,
    target: u8,
    dim_a: usize,
}

impl SingleRoundAliceStrategy {
    pub fn new(
        rho_ab: DensityMatrix,
        m0: MeasurementOperatorSet,
        m1: MeasurementOperatorSet,
        target: u8,
    ) -> Result<Self, QuantumError> {
        let dim_a = m0.dim();
        if rho_ab.dim() != dim_a * 2 {
            return Err(QuantumError::BadFactorization(rho_ab.dim(), dim_a, 2));
        }
        for m in [&m0, &m1] {
            if m.dim() != dim_a {
                return Err(QuantumError::DimensionMismatch(m.dim(), dim_a));
            }
            if m.len() != 2 {
                return Err(QuantumError::DimensionMismatch(m.len(), 2));
            }
        }
        Ok(Self {
            rho_ab,
            m0,
            m1,
            target,
            dim_a,
        })
    }

    pub fn rho_ab(&self) -> &DensityMatrix {
        &self.rho_ab
    }

    pub fn measurement(&self, b: u8) -> &MeasurementOperatorSet {
        if b == 0 {
            &self.m0
        } else {
            &self.m1
        }
    }

    pub fn target(&self) -> u8 {
        self.target
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    /// The same strategy with the transmitted subsystem passed through a
    /// channel (used when a strategy does not replace the noisy channel).
    pub fn with_transmitted_through(
        &self,
        channel: &QuantumChannel,
    ) -> Result<Self, QuantumError> {
        Ok(Self {
            rho_ab: channel.apply_to_second(&self.rho_ab, self.dim_a)?,
            m0: self.m0.clone(),
            m1: self.m1.clone(),
            target: self.target,
            dim_a: self.dim_a,
        })
    }

    /// Honest behaviour in joint form: a uniform classical record in A
    /// correlated with the matching signal in B, declarations reading the
    /// record regardless of `b`.
    pub fn honest(signal: &SignalPair) -> Self {
        let half = C64::new(0.5, 0.0);
        let rho = linalg::kron(&StateVector::basis(2, 0).projector(), &signal.psi0().projector())
            * half
            + linalg::kron(&StateVector::basis(2, 1).projector(), &signal.psi1().projector())
                * half;
        let read_record = MeasurementOperatorSet::new(vec![
            StateVector::basis(2, 0).projector(),
            StateVector::basis(2, 1).projector(),
        ])
        .expect("projective record readout is complete");
        Self {
            rho_ab: DensityMatrix::from_matrix_unchecked(rho),
            m0: read_record.clone(),
            m1: read_record,
            target: 0,
            dim_a: 2,
        }
    }

    /// Send `psi_0` and always declare `a = b xor target`.
    pub fn always_agree(signal: &SignalPair, target: u8) -> Self {
        Self::deterministic_declaration(signal.psi0(), target)
    }

    /// Send the normalized bisector of the signals and always declare
    /// `a = b xor target`.
    pub fn midpoint(signal: &SignalPair, target: u8) -> Self {
        Self::deterministic_declaration(&signal.bisector(), target)
    }

    /// Joint form of a product-state strategy that declares `a = b xor
    /// target` deterministically: subsystem A is an unused qubit and the
    /// declaration measurements are trivial.
    fn deterministic_declaration(sent: &StateVector, target: u8) -> Self {
        let rho = linalg::kron(&StateVector::basis(2, 0).projector(), &sent.projector());
        let sure = |bit: u8| {
            let mut elements = vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
            elements[bit as usize] = linalg::identity(2);
            MeasurementOperatorSet::new(elements).expect("identity split is complete")
        };
        Self {
            rho_ab: DensityMatrix::from_matrix_unchecked(rho),
            m0: sure(target),
            m1: sure(1 ^ target),
            target,
            dim_a: 2,
        }
    }
}

/// The two closed-form expectations of a single round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleRoundAnalysis {
    /// Expected test pass probability `E(f)`.
    pub e_f: f64,
    /// Probability that `a xor b` equals the strategy's target.
    pub e_q: f64,
}

/// Unnormalized state of Bob's subsystem on the branch where Alice measured
/// element `m` of her declaration measurement: `Tr_A[(m x I) rho]`.
fn branch_operator(rho: &CMatrix, dim_a: usize, m: &CMatrix) -> CMatrix {
    let lifted = linalg::kron(m, &linalg::identity(2));
    linalg::partial_trace(&(lifted * rho), dim_a, 2, Half::First)
}

/// Computes `E(f)` and `E(q)` for a strategy in closed form.
///
/// With `T[b][k] = Tr_A[(M_bk x I) rho]`, the expected density matrix on
/// the declare-0 branch is `rho_0 = T[0][0] + T[1][0]`, on the declare-1
/// branch `rho_1 = T[1][1] + T[0][1]`, and
/// `E(f) = (<psi_0|rho_0|psi_0> + <psi_1|rho_1|psi_1>) / 2`.
pub fn analyze_single_round(
    s: &SingleRoundAliceStrategy,
    signal: &SignalPair,
) -> Result<SingleRoundAnalysis, QuantumError> {
    let rho = s.rho_ab.matrix();
    let t00 = branch_operator(rho, s.dim_a, s.m0.element(0));
    let t01 = branch_operator(rho, s.dim_a, s.m0.element(1));
    let t10 = branch_operator(rho, s.dim_a, s.m1.element(0));
    let t11 = branch_operator(rho, s.dim_a, s.m1.element(1));
    let rho0 = &t00 + &t10;
    let rho1 = &t11 + &t01;
    let e_f = 0.5
        * (linalg::expectation(&rho0, signal.psi0().amplitudes())
            + linalg::expectation(&rho1, signal.psi1().amplitudes()));
    // Probability of declaring 0 under each measurement.
    let q = linalg::trace_re(&t00);
    let q_prime = linalg::trace_re(&t11);
    let agree = 0.5 * (q + q_prime);
    let e_q = if s.target == 0 { agree } else { 1.0 - agree };
    Ok(SingleRoundAnalysis { e_f, e_q })
}

/// Bob-side conditional states and branch probabilities of a strategy.
#[derive(Debug, Clone)]
pub struct ConditionalStats {
    /// Probability of declaring 0 when measuring `M_0`.
    pub q: f64,
    /// Probability of declaring 1 when measuring `M_1`.
    pub q_prime: f64,
    /// Bob's state conditioned on outcome `M_00`, when reachable.
    pub sigma: Option<DensityMatrix>,
    /// Conditioned on `M_01`.
    pub sigma_bar: Option<DensityMatrix>,
    /// Conditioned on `M_11`.
    pub tau: Option<DensityMatrix>,
    /// Conditioned on `M_10`.
    pub tau_bar: Option<DensityMatrix>,
}

/// Extracts branch probabilities and normalized conditional states.
pub fn conditional_stats(s: &SingleRoundAliceStrategy) -> ConditionalStats {
    let rho = s.rho_ab.matrix();
    let normalized = |t: CMatrix| {
        let p = linalg::trace_re(&t);
        if p > 1e-12 {
            Some(DensityMatrix::from_matrix_unchecked(t / C64::new(p, 0.0)))
        } else {
            None
        }
    };
    let t00 = branch_operator(rho, s.dim_a, s.m0.element(0));
    let t01 = branch_operator(rho, s.dim_a, s.m0.element(1));
    let t10 = branch_operator(rho, s.dim_a, s.m1.element(0));
    let t11 = branch_operator(rho, s.dim_a, s.m1.element(1));
    ConditionalStats {
        q: linalg::trace_re(&t00),
        q_prime: linalg::trace_re(&t11),
        sigma: normalized(t00),
        sigma_bar: normalized(t01),
        tau: normalized(t11),
        tau_bar: normalized(t10),
    }
}

/// Symmetrizes a dimension-4 strategy by adding a control qubit that flips
/// between the strategy and its swap-conjugated mirror. The result has the
/// same `E(f)` and `E(q)` but balanced branches: `q = q'` and matching
/// signal overlaps of the conditional states.
pub fn symmetrize(
    s: &SingleRoundAliceStrategy,
    signal: &SignalPair,
) -> Result<SingleRoundAliceStrategy, QuantumError> {
    if s.dim_a != 2 {
        return Err(QuantumError::DimensionMismatch(s.dim_a, 2));
    }
    let half = C64::new(0.5, 0.0);
    let p0 = StateVector::basis(2, 0).projector();
    let p1 = StateVector::basis(2, 1).projector();
    let u = linalg::kron(&linalg::identity(2), signal.swap_unitary());
    let mirrored = &u * s.rho_ab.matrix() * u.adjoint();
    let rho = linalg::kron(&p0, s.rho_ab.matrix()) * half + linalg::kron(&p1, &mirrored) * half;

    // Control 0 runs the original strategy; control 1 runs the mirrored one,
    // which swaps the roles of M_0 and M_1 and permutes their outcomes.
    let m00 = linalg::kron(&p0, s.m0.element(0)) + linalg::kron(&p1, s.m1.element(1));
    let m01 = linalg::kron(&p0, s.m0.element(1)) + linalg::kron(&p1, s.m1.element(0));
    let m10 = linalg::kron(&p0, s.m1.element(0)) + linalg::kron(&p1, s.m0.element(1));
    let m11 = linalg::kron(&p0, s.m1.element(1)) + linalg::kron(&p1, s.m0.element(0));

    SingleRoundAliceStrategy::new(
        DensityMatrix::from_matrix_unchecked(rho),
        MeasurementOperatorSet::new(vec![m00, m01])?,
        MeasurementOperatorSet::new(vec![m10, m11])?,
        s.target,
    )
}

/// A random valid strategy: a Hilbert-Schmidt random two-qubit state and two
/// random two-outcome measurements built from Hermitian contractions.
pub fn random_single_round_strategy(seed: u64) -> SingleRoundAliceStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::splitmix64(seed));
    let rho = random_density(4, &mut rng);
    let m0 = random_two_outcome(2, &mut rng);
    let m1 = random_two_outcome(2, &mut rng);
    let target = u8::from(rng.gen::<bool>());
    SingleRoundAliceStrategy::new(rho, m0, m1, target)
        .expect("generated strategy satisfies the type invariants")
}

fn random_complex_matrix(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

/// Hilbert-Schmidt random state `G G^dag / Tr(G G^dag)`.
fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = random_complex_matrix(dim, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace();
    DensityMatrix::from_matrix_unchecked(gg / tr)
}

/// Random two-outcome measurement `{E, I - E}` with `E` a random Hermitian
/// contraction.
fn random_two_outcome(dim: usize, rng: &mut ChaCha8Rng) -> MeasurementOperatorSet {
    let g = random_complex_matrix(dim, rng);
    let h = &g * g.adjoint();
    let top = linalg::hermitian_eigen(&h).0.last().copied().unwrap_or(1.0);
    let scale = rng.gen::<f64>() / top.max(f64::MIN_POSITIVE);
    let e = h * C64::new(scale, 0.0);
    let rest = linalg::identity(dim) - &e;
    MeasurementOperatorSet::new(vec![e, rest]).expect("contraction split is a valid measurement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::cal_f;
    use crate::quantum::make_signal_pair;
    use approx::assert_abs_diff_eq;

    const THETAS: [f64; 3] = [0.4, 1.0, std::f64::consts::FRAC_PI_2];

    #[test]
    fn honest_strategy_has_full_fidelity_and_no_bias() {
        for theta in THETAS {
            let signal = make_signal_pair(theta).unwrap();
            let analysis =
                analyze_single_round(&SingleRoundAliceStrategy::honest(&signal), &signal).unwrap();
            assert_abs_diff_eq!(analysis.e_f, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(analysis.e_q, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn always_agree_trades_fidelity_for_certainty() {
        for theta in THETAS {
            let signal = make_signal_pair(theta).unwrap();
            for target in 0..2u8 {
                let s = SingleRoundAliceStrategy::always_agree(&signal, target);
                let analysis = analyze_single_round(&s, &signal).unwrap();
                assert_abs_diff_eq!(analysis.e_q, 1.0, epsilon = 1e-12);
                let expected = 1.0 - theta.sin().powi(2) / 2.0;
                assert_abs_diff_eq!(analysis.e_f, expected, epsilon = 1e-12);
            }
        }
        // Orthogonal signals: half the rounds test against the state she
        // did not send, so E(f) bottoms out at 1/2. No fixed sent state can
        // do better there, since psi_0 psi_0* + psi_1 psi_1* = I.
        let signal = make_signal_pair(std::f64::consts::FRAC_PI_2).unwrap();
        let s = SingleRoundAliceStrategy::always_agree(&signal, 0);
        assert_abs_diff_eq!(
            analyze_single_round(&s, &signal).unwrap().e_f,
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn midpoint_reaches_cos_half_theta_squared() {
        for theta in THETAS {
            let signal = make_signal_pair(theta).unwrap();
            let s = SingleRoundAliceStrategy::midpoint(&signal, 1);
            let analysis = analyze_single_round(&s, &signal).unwrap();
            assert_abs_diff_eq!(analysis.e_q, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                analysis.e_f,
                (theta / 2.0).cos().powi(2),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn symmetrize_preserves_expectations_and_balances_branches() {
        let signal = make_signal_pair(1.1).unwrap();
        let named = [
            SingleRoundAliceStrategy::honest(&signal),
            SingleRoundAliceStrategy::always_agree(&signal, 0),
            SingleRoundAliceStrategy::midpoint(&signal, 1),
        ];
        let random = (0..50).map(|k| random_single_round_strategy(1000 + k));
        for s in named.into_iter().chain(random) {
            let before = analyze_single_round(&s, &signal).unwrap();
            let sym = symmetrize(&s, &signal).unwrap();
            assert_eq!(sym.dim_a(), 4);
            let after = analyze_single_round(&sym, &signal).unwrap();
            assert_abs_diff_eq!(before.e_f, after.e_f, epsilon = 1e-9);
            assert_abs_diff_eq!(before.e_q, after.e_q, epsilon = 1e-9);

            let stats = conditional_stats(&sym);
            assert_abs_diff_eq!(stats.q, stats.q_prime, epsilon = 1e-9);
            // Matching overlaps of conditional states with the two signals.
            if let (Some(sigma), Some(tau)) = (&stats.sigma, &stats.tau) {
                let lhs = crate::quantum::fidelity_pure(sigma, signal.psi0()).unwrap();
                let rhs = crate::quantum::fidelity_pure(tau, signal.psi1()).unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
            }
            if let (Some(sigma_bar), Some(tau_bar)) = (&stats.sigma_bar, &stats.tau_bar) {
                let lhs = crate::quantum::fidelity_pure(sigma_bar, signal.psi0()).unwrap();
                let rhs = crate::quantum::fidelity_pure(tau_bar, signal.psi1()).unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn symmetrize_rejects_wrong_dimension() {
        let signal = make_signal_pair(1.0).unwrap();
        let sym = symmetrize(&SingleRoundAliceStrategy::honest(&signal), &signal).unwrap();
        assert!(symmetrize(&sym, &signal).is_err());
    }

    #[test]
    fn random_strategies_are_valid_and_reproducible() {
        let a = random_single_round_strategy(42);
        let b = random_single_round_strategy(42);
        assert_eq!(a.rho_ab().matrix(), b.rho_ab().matrix());
        assert_eq!(a.target(), b.target());
        for seed in 0..20 {
            let s = random_single_round_strategy(seed);
            s.rho_ab().validate().unwrap();
            // Measurement sets were validated at construction; spot-check
            // probabilities stay in range on the reduced state.
            let reduced = s
                .rho_ab()
                .partial_trace((2, 2), crate::quantum::Subsystem::Second)
                .unwrap();
            for m in [s.measurement(0), s.measurement(1)] {
                for p in m.probabilities(&reduced).unwrap() {
                    assert!((0.0..=1.0 + 1e-12).contains(&p));
                }
            }
        }
    }

    #[test]
    fn named_and_random_strategies_respect_the_single_round_cap() {
        for theta in THETAS {
            let signal = make_signal_pair(theta).unwrap();
            let named = [
                SingleRoundAliceStrategy::honest(&signal),
                SingleRoundAliceStrategy::always_agree(&signal, 0),
                SingleRoundAliceStrategy::midpoint(&signal, 0),
            ];
            let random = (0..100).map(|k| random_single_round_strategy(7000 + k));
            for s in named.into_iter().chain(random) {
                let analysis = analyze_single_round(&s, &signal).unwrap();
                let cap = cal_f(analysis.e_f.clamp(0.0, 1.0), theta).unwrap();
                assert!(
                    analysis.e_q <= cap + 1e-9,
                    "E(q) = {} exceeds F(E(f)) = {cap} at theta = {theta}",
                    analysis.e_q
                );
            }
        }
    }
}

//! The round-by-round protocol engine.
//!
//! Message order within a round is fixed: state send, Bob's bit, Alice's
//! bit, Bob's measurement, and (second variant) outcome reveal. A cheating
//! Bob strategy receives the physical system and may measure it on arrival;
//! an honest Bob only ever sees measurement outcomes. Cheaters that declare
//! channel replacement bypass the configured noisy channel.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::quantum::linalg::{self, Half};
use crate::quantum::{
    born_sample, fidelity_pure, sample_index, DensityMatrix, MeasurementOperatorSet, QuantumError,
};
use crate::seeding::{self, stream};
use crate::strategies::{
    AliceMove, AliceRoundView, AliceStrategy, BobArrival, BobStrategy, SingleRoundAliceStrategy,
};

use super::{
    fidelity_test, BitString, ProtocolError, ProtocolOutcome, ProtocolParams, RoundRecord,
    Transcript, Variant,
};

/// What the round's quantum system looks like after Alice sends.
enum Hold {
    /// Bob holds a qubit; Alice's declaration is a classical rule.
    Product {
        bob: DensityMatrix,
        declare_on_b: [u8; 2],
    },
    /// Alice keeps subsystem A of a joint state.
    Joint {
        state: DensityMatrix,
        strategy: SingleRoundAliceStrategy,
    },
}

/// Executes one protocol run and returns the outputs plus the transcript.
/// Deterministic given the seed: Alice's coins, Bob's coins, and all Born
/// sampling draw from separate derived streams.
pub fn run_protocol(
    params: &ProtocolParams,
    alice: &dyn AliceStrategy,
    bob: &dyn BobStrategy,
    seed: u64,
) -> Result<(ProtocolOutcome, Transcript), ProtocolError> {
    let signal = params.signal();
    let mut alice_rng = seeding::rng_for(seed, stream::ALICE, 0);
    let mut bob_rng = seeding::rng_for(seed, stream::BOB_BITS, 0);
    let mut meas_rng = seeding::rng_for(seed, stream::MEASUREMENT, 0);
    let channel_active =
        !alice.replaces_channel() && !bob.replaces_channel() && !params.channel.is_identity();

    let mut records: Vec<RoundRecord> = Vec::with_capacity(params.n);
    let mut views: Vec<AliceRoundView> = Vec::with_capacity(params.n);
    let mut abandoned_at = None;

    for i in 0..params.n {
        // 1. Alice prepares and sends.
        let mut hold = match alice.propose(i, &views) {
            AliceMove::Abandon => {
                abandoned_at = Some(i);
                break;
            }
            AliceMove::HonestSignal => {
                let a = u8::from(alice_rng.gen::<bool>());
                Hold::Product {
                    bob: DensityMatrix::pure(signal.psi(a)),
                    declare_on_b: [a, a],
                }
            }
            AliceMove::Classical {
                sent, declare_on_b, ..
            } => {
                if sent.dim() != 2 {
                    return Err(ProtocolError::WrongStateDimension {
                        got: sent.dim(),
                        expected: 2,
                    });
                }
                Hold::Product {
                    bob: sent,
                    declare_on_b,
                }
            }
            AliceMove::Joint(strategy) => Hold::Joint {
                state: strategy.rho_ab().clone(),
                strategy,
            },
        };
        if channel_active {
            match &mut hold {
                Hold::Product { bob, .. } => *bob = params.channel.apply(bob)?,
                Hold::Joint { state, strategy } => {
                    *state = params.channel.apply_to_second(state, strategy.dim_a())?;
                }
            }
        }

        // 2. Bob receives, possibly measures on arrival, and announces b.
        let b = match bob.arrival(i) {
            BobArrival::Abandon => {
                abandoned_at = Some(i);
                break;
            }
            BobArrival::Honest => u8::from(bob_rng.gen::<bool>()),
            BobArrival::Measure {
                povm,
                b_for_outcome,
            } => {
                if b_for_outcome.len() != povm.len() {
                    return Err(ProtocolError::BadOutcomeMap {
                        got: b_for_outcome.len(),
                        expected: povm.len(),
                    });
                }
                let outcome = match &mut hold {
                    Hold::Product { bob: state, .. } => {
                        let (k, post) = born_sample(state, &povm, &mut meas_rng)?;
                        *state = post;
                        k
                    }
                    Hold::Joint { state, strategy } => {
                        let (k, post) =
                            measure_second(state, strategy.dim_a(), &povm, &mut meas_rng)?;
                        *state = post;
                        k
                    }
                };
                b_for_outcome[outcome]
            }
        };

        // 3. Alice declares a.
        let (a, bob_state) = match hold {
            Hold::Product { bob, declare_on_b } => (declare_on_b[b as usize], bob),
            Hold::Joint { state, strategy } => {
                let (k, marginal) = measure_first_marginal(
                    &state,
                    strategy.dim_a(),
                    strategy.measurement(b),
                    &mut meas_rng,
                )?;
                (k as u8, marginal)
            }
        };

        // 4. Bob tests against the declared signal state. The full-basis
        // measurement of the second variant has the same pass branch; its
        // outcome index is revealed to Alice.
        let p_pass = fidelity_pure(&bob_state, signal.psi(a))?.clamp(0.0, 1.0);
        let f = u8::from(meas_rng.gen::<f64>() < p_pass);
        let revealed_outcome = match params.variant {
            Variant::Protocol1 => None,
            Variant::Protocol2 => Some(1 - f),
        };

        records.push(RoundRecord {
            a,
            b,
            f,
            revealed_outcome,
        });
        views.push(AliceRoundView {
            a,
            b,
            revealed_outcome,
        });
    }

    if let Some(i) = abandoned_at {
        // The honest party aborts when the other walks away; the deserter
        // has no protocol output either.
        let transcript = Transcript {
            rounds: records,
            pass: false,
            abandoned_at: Some(i),
        };
        return Ok((
            ProtocolOutcome {
                n: params.n,
                x: None,
                y: None,
            },
            transcript,
        ));
    }

    let pass = fidelity_test(&records, params.f_star);
    let x = BitString::from_bits(records.iter().map(|r| r.a ^ r.b).collect());
    let y = pass.then(|| x.clone());
    let transcript = Transcript {
        rounds: records,
        pass,
        abandoned_at: None,
    };
    Ok((
        ProtocolOutcome {
            n: params.n,
            x: Some(x),
            y,
        },
        transcript,
    ))
}

/// Samples a measurement on the transmitted (second) subsystem of a joint
/// state and collapses the whole state.
fn measure_second(
    joint: &DensityMatrix,
    dim_a: usize,
    povm: &MeasurementOperatorSet,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, DensityMatrix), QuantumError> {
    if dim_a * povm.dim() != joint.dim() {
        return Err(QuantumError::BadFactorization(joint.dim(), dim_a, povm.dim()));
    }
    let eye = linalg::identity(dim_a);
    let mut probs = Vec::with_capacity(povm.len());
    for e in povm.elements() {
        let p = (linalg::kron(&eye, e) * joint.matrix()).trace().re;
        if p < -crate::quantum::VALIDITY_TOL {
            return Err(QuantumError::NegativeProbability(p));
        }
        probs.push(p.max(0.0));
    }
    let outcome = sample_index(&probs, rng);
    let sqrt = linalg::kron(&eye, &linalg::psd_sqrt(povm.element(outcome)));
    let p = probs[outcome].max(f64::MIN_POSITIVE);
    let post = &sqrt * joint.matrix() * sqrt.adjoint() / num_complex::Complex::new(p, 0.0);
    Ok((outcome, DensityMatrix::from_matrix_unchecked(post)))
}

/// Samples a measurement on the kept (first) subsystem of a joint state and
/// returns the conditional state of the transmitted subsystem,
/// `Tr_A[(M_k x I) rho] / p_k`. The kept subsystem is discarded afterwards,
/// so no square roots are needed.
fn measure_first_marginal(
    joint: &DensityMatrix,
    dim_a: usize,
    povm: &MeasurementOperatorSet,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, DensityMatrix), QuantumError> {
    if dim_a != povm.dim() || joint.dim() % dim_a != 0 {
        return Err(QuantumError::BadFactorization(joint.dim(), povm.dim(), 2));
    }
    let dim_b = joint.dim() / dim_a;
    let eye = linalg::identity(dim_b);
    let mut branches = Vec::with_capacity(povm.len());
    let mut probs = Vec::with_capacity(povm.len());
    for e in povm.elements() {
        let unnorm = linalg::partial_trace(
            &(linalg::kron(e, &eye) * joint.matrix()),
            dim_a,
            dim_b,
            Half::First,
        );
        let p = unnorm.trace().re;
        if p < -crate::quantum::VALIDITY_TOL {
            return Err(QuantumError::NegativeProbability(p));
        }
        probs.push(p.max(0.0));
        branches.push(unnorm);
    }
    let outcome = sample_index(&probs, rng);
    let p = probs[outcome].max(f64::MIN_POSITIVE);
    let marginal = &branches[outcome] / num_complex::Complex::new(p, 0.0);
    Ok((outcome, DensityMatrix::from_matrix_unchecked(marginal)))
}

//! Honest and adversarial strategies for both parties.
//!
//! An Alice strategy proposes, per round, what to send and how to declare;
//! a Bob strategy decides whether to measure the signal on arrival and how
//! to pick his bit. Proposals are deterministic functions of the visible
//! past; all in-round randomness (honest coins, Born sampling) lives in the
//! protocol runner, which is what makes the analytic per-round expectations
//! exact.

mod alice;
mod bob;
mod single_round;

pub use alice::{
    revealed_pass_fraction, threshold_policy, AbandoningAlice, AdaptiveAlice, AlwaysAgreeAlice,
    FixedJointAlice, HonestAlice, MidpointAlice,
};
pub use bob::{AbandoningBob, HelstromBob, HonestBob};
pub use single_round::{
    analyze_single_round, conditional_stats, random_single_round_strategy, symmetrize,
    ConditionalStats, SingleRoundAliceStrategy, SingleRoundAnalysis,
};

use crate::quantum::{
    fidelity_pure, DensityMatrix, MeasurementOperatorSet, QuantumChannel, QuantumError, SignalPair,
};

/// What a past round looks like from Alice's side: her declared bit, Bob's
/// bit, and (second variant only) Bob's revealed measurement outcome. Bob's
/// private test results are never part of this view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceRoundView {
    pub a: u8,
    pub b: u8,
    pub revealed_outcome: Option<u8>,
}

/// Alice's proposal for one round.
#[derive(Debug, Clone)]
pub enum AliceMove {
    /// Honest behaviour: sample a uniform bit `a`, send `psi_a`, declare `a`.
    HonestSignal,
    /// Send a fixed qubit state; declare `declare_on_b[b]` once Bob's bit
    /// arrives. `target` is the bit the strategy is steering `a xor b`
    /// toward, used only for analysis.
    Classical {
        sent: DensityMatrix,
        declare_on_b: [u8; 2],
        target: u8,
    },
    /// Keep subsystem A of a joint state, send subsystem B, and measure
    /// `M_b` on A when Bob's bit arrives.
    Joint(SingleRoundAliceStrategy),
    /// Walk away from the protocol; the honest party aborts.
    Abandon,
}

/// Analytic expectations of one proposed round: the probability Bob's test
/// passes and the probability the round bit lands on the strategy's target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundExpectations {
    pub e_f: f64,
    pub e_q: f64,
}

/// Static per-round context handed to strategies for analysis.
pub struct RoundContext<'a> {
    pub signal: &'a SignalPair,
    /// The channel the transmission will traverse; `None` once a cheater
    /// has replaced it with a perfect one.
    pub channel: Option<&'a QuantumChannel>,
}

/// Closed-form expectations of a proposed move, `None` for abandonment.
pub fn move_expectations(
    mv: &AliceMove,
    ctx: &RoundContext<'_>,
) -> Result<Option<RoundExpectations>, QuantumError> {
    let exp = match mv {
        AliceMove::HonestSignal => {
            let e_f = match ctx.channel {
                Some(ch) => ch.average_signal_fidelity(ctx.signal)?,
                None => 1.0,
            };
            RoundExpectations { e_f, e_q: 0.5 }
        }
        AliceMove::Classical {
            sent,
            declare_on_b,
            target,
        } => {
            let delivered = match ctx.channel {
                Some(ch) => ch.apply(sent)?,
                None => sent.clone(),
            };
            let mut e_f = 0.0;
            let mut e_q = 0.0;
            for b in 0..2u8 {
                let declared = declare_on_b[b as usize];
                e_f += 0.5 * fidelity_pure(&delivered, ctx.signal.psi(declared))?;
                if declared ^ b == *target {
                    e_q += 0.5;
                }
            }
            RoundExpectations { e_f, e_q }
        }
        AliceMove::Joint(strategy) => {
            let analyzed = match ctx.channel {
                Some(ch) => {
                    let noisy = strategy.with_transmitted_through(ch)?;
                    analyze_single_round(&noisy, ctx.signal)?
                }
                None => analyze_single_round(strategy, ctx.signal)?,
            };
            RoundExpectations {
                e_f: analyzed.e_f,
                e_q: analyzed.e_q,
            }
        }
        AliceMove::Abandon => return Ok(None),
    };
    Ok(Some(exp))
}

/// A per-round policy for Alice. Proposals must be deterministic in
/// `(round, past)`; randomness within the round belongs to the runner.
pub trait AliceStrategy: Sync {
    /// Whether the strategy substitutes a perfect channel for the noisy one.
    fn replaces_channel(&self) -> bool {
        false
    }

    fn propose(&self, round: usize, past: &[AliceRoundView]) -> AliceMove;

    /// Analytic `E(f_i | past)` and `E(q_i | past)`, when available.
    fn expectations(
        &self,
        round: usize,
        past: &[AliceRoundView],
        ctx: &RoundContext<'_>,
    ) -> Result<Option<RoundExpectations>, QuantumError> {
        move_expectations(&self.propose(round, past), ctx)
    }
}

/// Bob's behaviour when a signal arrives, before he announces his bit.
pub enum BobArrival {
    /// Leave the state untouched and draw `b` uniformly.
    Honest,
    /// Measure immediately; `b_for_outcome[k]` is the bit announced after
    /// outcome `k`.
    Measure {
        povm: MeasurementOperatorSet,
        b_for_outcome: Vec<u8>,
    },
    /// Walk away from the protocol; the honest party aborts.
    Abandon,
}

/// A per-round policy for Bob. The protocol-mandated test at the end of a
/// round is performed by the runner on whatever state is left.
pub trait BobStrategy: Sync {
    fn replaces_channel(&self) -> bool {
        false
    }

    fn arrival(&self, round: usize) -> BobArrival;
}

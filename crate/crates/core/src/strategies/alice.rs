//! Alice-side strategies.

use crate::protocol::BitString;
use crate::quantum::{DensityMatrix, SignalPair};

use super::{AliceMove, AliceRoundView, AliceStrategy, SingleRoundAliceStrategy};

/// Protocol-following Alice: uniform bit, matching signal, truthful
/// declaration.
pub struct HonestAlice;

impl AliceStrategy for HonestAlice {
    fn propose(&self, _round: usize, _past: &[AliceRoundView]) -> AliceMove {
        AliceMove::HonestSignal
    }
}

/// Sends `psi_0` every round and declares whatever makes the round bit land
/// on her target string, regardless of the state she actually sent.
pub struct AlwaysAgreeAlice {
    target: BitString,
    sent: DensityMatrix,
}

impl AlwaysAgreeAlice {
    pub fn new(signal: &SignalPair, target: BitString) -> Self {
        Self {
            target,
            sent: DensityMatrix::pure(signal.psi0()),
        }
    }
}

impl AliceStrategy for AlwaysAgreeAlice {
    fn replaces_channel(&self) -> bool {
        true
    }

    fn propose(&self, round: usize, _past: &[AliceRoundView]) -> AliceMove {
        let c = self.target.bit(round);
        AliceMove::Classical {
            sent: self.sent.clone(),
            declare_on_b: [c, 1 ^ c],
            target: c,
        }
    }
}

/// Sends the bisector of the two signals, splitting the fidelity loss evenly
/// between declarations, and declares toward her target.
pub struct MidpointAlice {
    target: BitString,
    sent: DensityMatrix,
}

impl MidpointAlice {
    pub fn new(signal: &SignalPair, target: BitString) -> Self {
        Self {
            target,
            sent: DensityMatrix::pure(&signal.bisector()),
        }
    }
}

impl AliceStrategy for MidpointAlice {
    fn replaces_channel(&self) -> bool {
        true
    }

    fn propose(&self, round: usize, _past: &[AliceRoundView]) -> AliceMove {
        let c = self.target.bit(round);
        AliceMove::Classical {
            sent: self.sent.clone(),
            declare_on_b: [c, 1 ^ c],
            target: c,
        }
    }
}

/// A multi-round cheater for the revealing protocol variant: each round's
/// single-round strategy is a deterministic function of the revealed past.
pub struct AdaptiveAlice<P>
where
    P: Fn(usize, &[AliceRoundView]) -> AliceMove + Sync,
{
    policy: P,
}

impl<P> AdaptiveAlice<P>
where
    P: Fn(usize, &[AliceRoundView]) -> AliceMove + Sync,
{
    pub fn new(policy: P) -> Self {
        Self { policy }
    }
}

impl<P> AliceStrategy for AdaptiveAlice<P>
where
    P: Fn(usize, &[AliceRoundView]) -> AliceMove + Sync,
{
    fn replaces_channel(&self) -> bool {
        true
    }

    fn propose(&self, round: usize, past: &[AliceRoundView]) -> AliceMove {
        (self.policy)(round, past)
    }
}

/// Fraction of past rounds whose revealed outcome was the pass branch;
/// unrevealed rounds count as passed and an empty past counts as 1.
pub fn revealed_pass_fraction(past: &[AliceRoundView]) -> f64 {
    if past.is_empty() {
        return 1.0;
    }
    let passed = past
        .iter()
        .filter(|v| v.revealed_outcome.unwrap_or(0) == 0)
        .count();
    passed as f64 / past.len() as f64
}

/// The threshold policy: keep playing a cheating move while the running
/// revealed pass fraction stays at or above `f_star`, fall back to honest
/// play when it drops below.
pub fn threshold_policy(
    signal: &SignalPair,
    target: BitString,
    f_star: f64,
) -> AdaptiveAlice<impl Fn(usize, &[AliceRoundView]) -> AliceMove + Sync> {
    let sent = DensityMatrix::pure(signal.psi0());
    AdaptiveAlice::new(move |round: usize, past: &[AliceRoundView]| {
        if revealed_pass_fraction(past) >= f_star {
            let c = target.bit(round);
            AliceMove::Classical {
                sent: sent.clone(),
                declare_on_b: [c, 1 ^ c],
                target: c,
            }
        } else {
            AliceMove::HonestSignal
        }
    })
}

/// A cheating Alice that plays one fixed joint-state strategy every round.
pub struct FixedJointAlice {
    strategy: SingleRoundAliceStrategy,
}

impl FixedJointAlice {
    pub fn new(strategy: SingleRoundAliceStrategy) -> Self {
        Self { strategy }
    }
}

impl AliceStrategy for FixedJointAlice {
    fn replaces_channel(&self) -> bool {
        true
    }

    fn propose(&self, _round: usize, _past: &[AliceRoundView]) -> AliceMove {
        AliceMove::Joint(self.strategy.clone())
    }
}

/// Plays honestly until a chosen round, then walks away.
pub struct AbandoningAlice {
    pub at_round: usize,
}

impl AliceStrategy for AbandoningAlice {
    fn propose(&self, round: usize, _past: &[AliceRoundView]) -> AliceMove {
        if round == self.at_round {
            AliceMove::Abandon
        } else {
            AliceMove::HonestSignal
        }
    }
}

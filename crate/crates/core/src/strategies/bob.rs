//! Bob-side strategies.

use crate::protocol::BitString;
use crate::quantum::linalg::{self, CMatrix};
use crate::quantum::{MeasurementOperatorSet, SignalPair};

use super::{BobArrival, BobStrategy};

/// Protocol-following Bob: uniform bit, honest test.
pub struct HonestBob;

impl BobStrategy for HonestBob {
    fn arrival(&self, _round: usize) -> BobArrival {
        BobArrival::Honest
    }
}

/// Optimal distinguishing attack: measure each arriving signal in the
/// eigenbasis of `|psi_0><psi_0| - |psi_1><psi_1|`, guess Alice's bit from
/// the outcome, and announce the bit that steers the round toward the
/// target string. Succeeds per round with probability `1/2 + sin(theta)/2`.
pub struct HelstromBob {
    target: BitString,
    povm: MeasurementOperatorSet,
}

impl HelstromBob {
    pub fn new(signal: &SignalPair, target: BitString) -> Self {
        let difference = signal.psi0().projector() - signal.psi1().projector();
        let (_, vectors) = linalg::hermitian_eigen(&difference);
        // Eigenvalues come out ascending: column 1 is the +sin(theta)
        // branch, which overlaps psi_0 most, so outcome index = guessed bit.
        let plus = vectors.column(1).into_owned();
        let minus = vectors.column(0).into_owned();
        let guess_zero: CMatrix = &plus * plus.adjoint();
        let guess_one: CMatrix = &minus * minus.adjoint();
        let povm = MeasurementOperatorSet::new(vec![guess_zero, guess_one])
            .expect("eigenbasis projectors are complete");
        Self { target, povm }
    }
}

impl BobStrategy for HelstromBob {
    fn replaces_channel(&self) -> bool {
        true
    }

    fn arrival(&self, round: usize) -> BobArrival {
        let c = self.target.bit(round);
        BobArrival::Measure {
            povm: self.povm.clone(),
            b_for_outcome: vec![c, 1 ^ c],
        }
    }
}

/// Plays honestly until a chosen round, then walks away.
pub struct AbandoningBob {
    pub at_round: usize,
}

impl BobStrategy for AbandoningBob {
    fn arrival(&self, round: usize) -> BobArrival {
        if round == self.at_round {
            BobArrival::Abandon
        } else {
            BobArrival::Honest
        }
    }
}

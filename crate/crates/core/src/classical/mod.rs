//! Classical bit-string generation protocols as extensive-form game trees,
//! with exact backward-induction cheating analysis.
//!
//! A protocol is a tree (or a compactly represented DAG of game states)
//! whose internal nodes name the moving party and whose leaves carry the
//! n-bit output string. Honest parties move according to the tree's
//! distributions; a cheater optimizes. The module computes the average
//! bias, the per-string maximum probability, the level-wise `F_j` product
//! sequence behind the min-entropy impossibility argument, and the minimal
//! Shannon entropy a cheater can force.

mod analysis;
mod strikeout;
mod tree;

pub use strikeout::{build_strikeout, StrikeOutGame};
pub use tree::{
    build_trivial, random_labeled_tree, random_uniform_output_tree, ExplicitTree, TreeBuilder,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("string length {0} must be even for the trivial protocol")]
    OddLength(usize),
    #[error("n = {n} exceeds the limit {limit} for {what}")]
    TooLarge {
        n: usize,
        limit: usize,
        what: &'static str,
    },
    #[error("exhaustive enumeration would visit {profiles:.3e} strategy profiles (limit {limit})")]
    ExhaustiveTooBig { profiles: f64, limit: u64 },
    #[error("bias enumeration needs n <= 4 or an output-symmetric tree (n = {0})")]
    BiasEnumerationTooLarge(usize),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
}

/// The two protocol parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

/// A game node as seen by the analysis engines.
pub(crate) enum GameNode<S> {
    Leaf {
        /// Big-endian index of the output string.
        output: usize,
    },
    Internal {
        mover: Party,
        /// Honest move distribution and successor states, in a fixed order.
        moves: Vec<(f64, S)>,
    },
}

/// Uniform interface over explicit trees and compact game-state DAGs.
pub(crate) trait GameForm {
    type State: Copy + Eq + Ord + std::hash::Hash + std::fmt::Debug;

    fn root(&self) -> Self::State;
    fn expand(&self, s: Self::State) -> GameNode<Self::State>;
    fn n_bits(&self) -> usize;
    /// All states, children strictly before parents.
    fn states_bottom_up(&self) -> Vec<Self::State>;
    /// Whether the honest structure is invariant under relabeling output
    /// strings, making every bias target equivalent to the all-zeros one.
    fn output_symmetric(&self) -> bool;
    /// Initial cheater decisions for the local-search optimizer.
    fn greedy_init(&self, cheater: Party) -> std::collections::BTreeMap<Self::State, usize>;
    fn state_label(&self, s: Self::State) -> String;
    fn choice_label(&self, s: Self::State, choice: usize) -> String;
}

/// How to minimize the honest party's output entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    /// Enumerate every deterministic cheater strategy (gated by profile
    /// count).
    Exhaustive,
    /// Rank-preference start plus single-decision local search.
    GreedyLocal,
    /// Exhaustive when affordable, greedy otherwise.
    Auto,
}

/// One row of an exported cheater decision table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyDecision {
    pub state: String,
    pub choice: String,
}

/// Result of an entropy minimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyMinimization {
    /// Minimal Shannon entropy found, in bits.
    pub entropy: f64,
    /// `"exhaustive"` or `"greedy_local"`.
    pub method: String,
    /// Local-search improvement steps taken (zero for exhaustive).
    pub iterations: u64,
    /// The minimizing strategy restricted to states it actually reaches.
    pub strategy: Vec<StrategyDecision>,
}

/// Full cheating analysis of one protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheatReport {
    pub n: usize,
    /// Average bias a cheating Alice forces on Bob's output.
    pub eps_a: f64,
    /// Average bias a cheating Bob forces on Alice's output.
    pub eps_b: f64,
    /// Min-entropy of Bob's output under cheating Alice, in bits.
    pub hinf_a: f64,
    pub hinf_b: f64,
    /// Minimal Shannon entropy of Bob's output under cheating Alice.
    pub h_a: f64,
    pub h_b: f64,
    pub entropy_method: String,
    pub alice_entropy_strategy: Vec<StrategyDecision>,
    pub bob_entropy_strategy: Vec<StrategyDecision>,
    /// Convention notes (move order, tie-breaking).
    pub notes: Vec<String>,
}

/// A classical protocol in analyzable form.
pub enum ProtocolTree {
    Explicit(ExplicitTree),
    StrikeOut(StrikeOutGame),
}

macro_rules! dispatch {
    ($self:expr, $g:ident => $body:expr) => {
        match $self {
            ProtocolTree::Explicit($g) => $body,
            ProtocolTree::StrikeOut($g) => $body,
        }
    };
}

impl ProtocolTree {
    pub fn n_bits(&self) -> usize {
        dispatch!(self, g => g.n_bits())
    }

    /// Root value of the backward induction for the match fraction against
    /// target `c`: cheater nodes maximize, honest nodes average, leaves
    /// score the fraction of agreeing bits.
    pub fn max_match_bias(&self, cheater: Party, c: usize) -> f64 {
        dispatch!(self, g => analysis::match_value(g, cheater, c))
    }

    /// `eps` for the given cheater: the best match fraction over all
    /// targets, minus one half.
    pub fn average_bias(&self, cheater: Party) -> Result<f64, ClassicalError> {
        dispatch!(self, g => analysis::average_bias(g, cheater))
    }

    /// Maximum probability the cheater can give to the exact output `c`.
    pub fn max_string_prob(&self, cheater: Party, c: usize) -> f64 {
        dispatch!(self, g => analysis::string_prob(g, cheater, c))
    }

    /// Min-entropy (bits) of the honest party's output under the cheater.
    pub fn min_entropy_bits(&self, cheater: Party) -> Result<f64, ClassicalError> {
        dispatch!(self, g => analysis::min_entropy_bits(g, cheater))
    }

    /// The level products `F_j = sum_U w(U) Z^A_c(U) Z^B_c(U)` from the
    /// classical impossibility argument; nonincreasing in `j`.
    pub fn fj_sequence(&self, c: usize) -> Vec<f64> {
        dispatch!(self, g => analysis::fj_sequence(g, c))
    }

    /// Output distribution under two honest parties.
    pub fn honest_distribution(&self) -> Vec<f64> {
        dispatch!(self, g => analysis::honest_distribution(g))
    }

    /// Minimal Shannon entropy of the honest party's output over
    /// deterministic cheater strategies.
    pub fn min_shannon_entropy(
        &self,
        cheater: Party,
        method: EntropyMethod,
    ) -> Result<EntropyMinimization, ClassicalError> {
        dispatch!(self, g => analysis::min_shannon_entropy(g, cheater, method))
    }

    /// Number of deterministic cheater strategy profiles the exhaustive
    /// enumerator would visit.
    pub fn profile_count(&self, cheater: Party) -> f64 {
        dispatch!(self, g => analysis::count_profiles(g, cheater))
    }

    fn convention_notes(&self) -> Vec<String> {
        match self {
            ProtocolTree::Explicit(_) => vec![],
            ProtocolTree::StrikeOut(_) => vec![
                "strike-out move order: Alice strikes first, strict alternation".to_string(),
                "greedy tie-breaking: lexicographic string order".to_string(),
            ],
        }
    }

    /// Assembles the full cheating analysis.
    pub fn analyze(&self, method: EntropyMethod) -> Result<CheatReport, ClassicalError> {
        let h_a = self.min_shannon_entropy(Party::Alice, method)?;
        let h_b = self.min_shannon_entropy(Party::Bob, method)?;
        Ok(CheatReport {
            n: self.n_bits(),
            eps_a: self.average_bias(Party::Alice)?,
            eps_b: self.average_bias(Party::Bob)?,
            hinf_a: self.min_entropy_bits(Party::Alice)?,
            hinf_b: self.min_entropy_bits(Party::Bob)?,
            h_a: h_a.entropy,
            h_b: h_b.entropy,
            entropy_method: h_a.method.clone(),
            alice_entropy_strategy: h_a.strategy,
            bob_entropy_strategy: h_b.strategy,
            notes: self.convention_notes(),
        })
    }
}

/// Shannon entropy of a distribution, in bits.
pub fn shannon_entropy(dist: &[f64]) -> f64 {
    dist.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

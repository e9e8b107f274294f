//! Simulation and security analysis of two-party bit-string generation.
//!
//! Two mistrustful parties want to agree on a string of random bits such
//! that neither can bias it much. This crate implements:
//!
//! * [`quantum`] — dense complex linear algebra for low-dimensional quantum
//!   mechanics: states, density matrices, measurements, channels, and the
//!   pair of non-orthogonal signal states the quantum protocol transmits.
//! * [`protocol`] — executable state machines for the two quantum protocol
//!   variants, producing per-round transcripts and outcomes.
//! * [`strategies`] — honest and adversarial behaviours for both parties,
//!   plus closed-form analysis of single-round cheating.
//! * [`bounds`] — the analytic security bounds: bias and entropy caps for
//!   both cheaters, correctness tails, and the quantum-vs-classical
//!   threshold search.
//! * [`classical`] — classical protocols as extensive-form game trees with
//!   exact backward-induction cheating analysis.
//! * [`harness`] — deterministic Monte Carlo execution at scale with
//!   empirical estimators and martingale tail checks.

pub mod bounds;
pub mod classical;
pub mod harness;
pub mod protocol;
pub mod quantum;
pub mod seeding;
pub mod strategies;

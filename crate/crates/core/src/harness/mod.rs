//! Deterministic Monte Carlo execution and empirical estimators.
//!
//! Trials are embarrassingly parallel; each draws its seed from the master
//! seed by counter splitting and the per-trial summaries are aggregated in
//! trial order, so results are bit-identical regardless of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::bounds::{cal_f, BoundsError};
use crate::protocol::{
    never_abort_output, run_protocol, BitString, ProtocolError, ProtocolParams, Variant,
};
use crate::quantum::{QuantumError, SignalPair};
use crate::seeding::{self, stream};
use crate::strategies::{
    threshold_policy, AliceRoundView, AliceStrategy, AlwaysAgreeAlice, BobStrategy, FixedJointAlice,
    HelstromBob, HonestAlice, HonestBob, MidpointAlice, RoundContext,
    random_single_round_strategy, AbandoningAlice,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("target string '{0}' does not parse as {1} bits")]
    BadTarget(String, usize),
    #[error("martingale checks require the revealing protocol variant")]
    NeedsRevealingVariant,
    #[error("strategy does not expose analytic per-round expectations")]
    NoAnalyticExpectations,
    #[error("chi-square needs at least {needed} samples for {bits} bits, got {got}")]
    Undersampled {
        needed: usize,
        got: usize,
        bits: usize,
    },
    #[error("chi-square supports at most 8 bits, got {0}")]
    TooManyCells(usize),
    #[error("batch needs at least one trial")]
    EmptyBatch,
}

/// Target string selector for cheating strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Zeros,
    Ones,
    /// Explicit bits, e.g. `"0110"`; must match the string length.
    Bits(String),
}

impl TargetSpec {
    pub fn materialize(&self, n: usize) -> Result<BitString, HarnessError> {
        match self {
            TargetSpec::Zeros => Ok(BitString::zeros(n)),
            TargetSpec::Ones => Ok(BitString::ones(n)),
            TargetSpec::Bits(text) => {
                let parsed: BitString = text
                    .parse()
                    .map_err(|_| HarnessError::BadTarget(text.clone(), n))?;
                if parsed.len() != n {
                    return Err(HarnessError::BadTarget(text.clone(), n));
                }
                Ok(parsed)
            }
        }
    }
}

/// Strategy identifier plus parameters for Alice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AliceSpec {
    Honest,
    AlwaysAgree { target: TargetSpec },
    Midpoint { target: TargetSpec },
    /// Cheat while the running revealed pass fraction stays at or above the
    /// protocol threshold, play honestly otherwise.
    Threshold { target: TargetSpec },
    /// A fixed random joint-state strategy played every round.
    RandomJoint { strategy_seed: u64 },
    Abandoning { at_round: usize },
}

impl AliceSpec {
    pub fn is_honest(&self) -> bool {
        matches!(self, AliceSpec::Honest)
    }

    pub fn build(
        &self,
        signal: &SignalPair,
        params: &ProtocolParams,
    ) -> Result<Box<dyn AliceStrategy>, HarnessError> {
        Ok(match self {
            AliceSpec::Honest => Box::new(HonestAlice),
            AliceSpec::AlwaysAgree { target } => Box::new(AlwaysAgreeAlice::new(
                signal,
                target.materialize(params.n)?,
            )),
            AliceSpec::Midpoint { target } => {
                Box::new(MidpointAlice::new(signal, target.materialize(params.n)?))
            }
            AliceSpec::Threshold { target } => Box::new(threshold_policy(
                signal,
                target.materialize(params.n)?,
                params.f_star,
            )),
            AliceSpec::RandomJoint { strategy_seed } => Box::new(FixedJointAlice::new(
                random_single_round_strategy(*strategy_seed),
            )),
            AliceSpec::Abandoning { at_round } => Box::new(AbandoningAlice {
                at_round: *at_round,
            }),
        })
    }

    /// The per-round target string the strategy steers toward, if any.
    pub fn target(&self, n: usize) -> Result<Option<BitString>, HarnessError> {
        Ok(match self {
            AliceSpec::AlwaysAgree { target }
            | AliceSpec::Midpoint { target }
            | AliceSpec::Threshold { target } => Some(target.materialize(n)?),
            AliceSpec::RandomJoint { strategy_seed } => {
                let bit = random_single_round_strategy(*strategy_seed).target();
                Some(if bit == 0 {
                    BitString::zeros(n)
                } else {
                    BitString::ones(n)
                })
            }
            AliceSpec::Honest | AliceSpec::Abandoning { .. } => None,
        })
    }
}

/// Strategy identifier plus parameters for Bob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BobSpec {
    Honest,
    Helstrom { target: TargetSpec },
}

impl BobSpec {
    pub fn is_honest(&self) -> bool {
        matches!(self, BobSpec::Honest)
    }

    pub fn build(
        &self,
        signal: &SignalPair,
        params: &ProtocolParams,
    ) -> Result<Box<dyn BobStrategy>, HarnessError> {
        Ok(match self {
            BobSpec::Honest => Box::new(HonestBob),
            BobSpec::Helstrom { target } => Box::new(HelstromBob::new(
                signal,
                target.materialize(params.n)?,
            )),
        })
    }

    pub fn target(&self, n: usize) -> Result<Option<BitString>, HarnessError> {
        Ok(match self {
            BobSpec::Helstrom { target } => Some(target.materialize(n)?),
            BobSpec::Honest => None,
        })
    }
}

/// A reproducible batch of independent protocol runs.
#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub params: ProtocolParams,
    pub alice: AliceSpec,
    pub bob: BobSpec,
    pub trials: u64,
    pub master_seed: u64,
}

impl TrialBatch {
    /// The target the batch measures bias against: the cheater's, or
    /// all-zeros for honest runs.
    pub fn bias_target(&self) -> Result<BitString, HarnessError> {
        if let Some(t) = self.alice.target(self.params.n)? {
            return Ok(t);
        }
        if let Some(t) = self.bob.target(self.params.n)? {
            return Ok(t);
        }
        Ok(BitString::zeros(self.params.n))
    }

    /// Which output carries the honest party's string.
    fn honest_output_is_x(&self) -> bool {
        self.alice.is_honest()
    }
}

/// Cap on the string length for the plug-in entropy estimator; its bias is
/// of order `2^n / trials`, which is only controlled for small `n`.
pub const ENTROPY_BITS_LIMIT: usize = 12;

/// Aggregate estimators from one batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub trials: u64,
    /// Target string the bias was measured against.
    pub target: String,
    /// Mean over trials of the per-trial match fraction, minus one half.
    /// Aborted honest outputs count as zero matches.
    pub mean_bias: f64,
    pub bias_std_error: f64,
    pub abort_rate: f64,
    /// Mean test pass fraction per round.
    pub mean_f: f64,
    /// Plug-in Shannon entropy (bits) of the honest party's output under
    /// the never-abort convention; omitted beyond [`ENTROPY_BITS_LIMIT`].
    pub plug_in_entropy: Option<f64>,
    pub entropy_omitted_reason: Option<String>,
}

struct TrialSummary {
    matches: u32,
    aborted: bool,
    f_sum: u32,
    out_index: Option<u32>,
}

/// Runs the batch and aggregates. Deterministic given the master seed.
pub fn monte_carlo(batch: &TrialBatch) -> Result<EmpiricalStats, HarnessError> {
    if batch.trials == 0 {
        return Err(HarnessError::EmptyBatch);
    }
    let signal = batch.params.signal();
    let alice = batch.alice.build(&signal, &batch.params)?;
    let bob = batch.bob.build(&signal, &batch.params)?;
    let target = batch.bias_target()?;
    let n = batch.params.n;
    let want_entropy = n <= ENTROPY_BITS_LIMIT;
    let use_x = batch.honest_output_is_x();

    let summaries: Result<Vec<TrialSummary>, ProtocolError> = (0..batch.trials)
        .into_par_iter()
        .map(|t| {
            let seed = seeding::derive(batch.master_seed, stream::TRIAL, t);
            let (outcome, transcript) =
                run_protocol(&batch.params, alice.as_ref(), bob.as_ref(), seed)?;
            let honest_out = if use_x { &outcome.x } else { &outcome.y };
            let out_index = if want_entropy {
                let (x, y) = never_abort_output(&outcome, seed);
                let s = if use_x { x } else { y };
                Some(s.index().expect("entropy gate keeps n <= 12") as u32)
            } else {
                None
            };
            Ok(TrialSummary {
                matches: honest_out.as_ref().map_or(0, |s| s.matches(&target)) as u32,
                aborted: honest_out.is_none(),
                f_sum: transcript.sum_f() as u32,
                out_index,
            })
        })
        .collect();
    let summaries = summaries?;

    // Sequential aggregation in trial order keeps results independent of
    // the thread count.
    let trials_f = batch.trials as f64;
    let fractions: Vec<f64> = summaries
        .iter()
        .map(|s| s.matches as f64 / n as f64)
        .collect();
    let mean_fraction = fractions.iter().sum::<f64>() / trials_f;
    let variance = if batch.trials > 1 {
        fractions
            .iter()
            .map(|x| (x - mean_fraction).powi(2))
            .sum::<f64>()
            / (trials_f - 1.0)
    } else {
        0.0
    };
    let abort_rate = summaries.iter().filter(|s| s.aborted).count() as f64 / trials_f;
    let mean_f = summaries.iter().map(|s| f64::from(s.f_sum)).sum::<f64>() / (trials_f * n as f64);

    let (plug_in_entropy, entropy_omitted_reason) = if want_entropy {
        let mut counts = vec![0u64; 1 << n];
        for s in &summaries {
            counts[s.out_index.expect("populated when wanted") as usize] += 1;
        }
        (Some(plug_in_entropy(&counts)), None)
    } else {
        (
            None,
            Some(format!(
                "plug-in entropy omitted: n = {n} exceeds {ENTROPY_BITS_LIMIT}"
            )),
        )
    };

    Ok(EmpiricalStats {
        trials: batch.trials,
        target: target.to_string(),
        mean_bias: mean_fraction - 0.5,
        bias_std_error: (variance / trials_f).sqrt(),
        abort_rate,
        mean_f,
        plug_in_entropy,
        entropy_omitted_reason,
    })
}

/// Plug-in Shannon entropy of a histogram, in bits (no bias correction).
pub fn plug_in_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total_f = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total_f;
            -p * p.log2()
        })
        .sum()
}

/// Exceedance rates of the two martingale tail events.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleStats {
    pub l: f64,
    /// The analytic tail bound `exp(-l^2/2)`.
    pub bound: f64,
    /// Fraction of trials with `(1/n) sum (f_i - E(f_i|past)) >= l/sqrt(n)`.
    pub f_exceedance: f64,
    /// Fraction of trials with `(1/n) sum (q_i - F(E(f_i|past))) >= l/sqrt(n)`.
    pub q_exceedance: f64,
    pub trials: u64,
}

/// Estimates how often the per-run averages exceed their martingale slack.
/// Requires the revealing protocol variant and a strategy with analytic
/// per-round expectations.
pub fn martingale_tail_check(batch: &TrialBatch, l: f64) -> Result<MartingaleStats, HarnessError> {
    if batch.params.variant != Variant::Protocol2 {
        return Err(HarnessError::NeedsRevealingVariant);
    }
    if batch.trials == 0 {
        return Err(HarnessError::EmptyBatch);
    }
    let signal = batch.params.signal();
    let alice = batch.alice.build(&signal, &batch.params)?;
    let bob = batch.bob.build(&signal, &batch.params)?;
    let target = batch.bias_target()?;
    let n = batch.params.n;
    let theta = batch.params.theta;
    let channel_replaced = alice.replaces_channel()
        || bob.replaces_channel()
        || batch.params.channel.is_identity();
    let ctx = RoundContext {
        signal: &signal,
        channel: if channel_replaced {
            None
        } else {
            Some(&batch.params.channel)
        },
    };
    // Reject strategies without analytic expectations up front.
    if alice.expectations(0, &[], &ctx)?.is_none() {
        return Err(HarnessError::NoAnalyticExpectations);
    }

    let slack = l / (n as f64).sqrt();
    let results: Result<Vec<(bool, bool)>, HarnessError> = (0..batch.trials)
        .into_par_iter()
        .map(|t| {
            let seed = seeding::derive(batch.master_seed, stream::TRIAL, t);
            let (_, transcript) =
                run_protocol(&batch.params, alice.as_ref(), bob.as_ref(), seed)?;
            let mut views: Vec<AliceRoundView> = Vec::with_capacity(n);
            let mut f_excess = 0.0;
            let mut q_excess = 0.0;
            for (i, r) in transcript.rounds.iter().enumerate() {
                let exp = alice
                    .expectations(i, &views, &ctx)?
                    .ok_or(HarnessError::NoAnalyticExpectations)?;
                let e_f = exp.e_f.clamp(0.0, 1.0);
                let q = f64::from(r.a ^ r.b == target.bit(i));
                f_excess += f64::from(r.f) - e_f;
                q_excess += q - cal_f(e_f, theta)?;
                views.push(AliceRoundView {
                    a: r.a,
                    b: r.b,
                    revealed_outcome: r.revealed_outcome,
                });
            }
            Ok((
                f_excess / n as f64 >= slack,
                q_excess / n as f64 >= slack,
            ))
        })
        .collect();
    let results = results?;
    let trials_f = batch.trials as f64;
    Ok(MartingaleStats {
        l,
        bound: crate::bounds::hoeffding_tail(l),
        f_exceedance: results.iter().filter(|r| r.0).count() as f64 / trials_f,
        q_exceedance: results.iter().filter(|r| r.1).count() as f64 / trials_f,
        trials: batch.trials,
    })
}

/// Chi-square goodness-of-fit result against the uniform distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    /// Critical value at the 0.001 significance level.
    pub critical: f64,
    pub pass: bool,
}

/// Pearson chi-square test of `n_bits`-strings against uniform, at the
/// 0.001 significance level. Requires `n_bits <= 8` and at least
/// `50 * 2^n_bits` samples.
pub fn chi_square_uniformity(
    samples: &[usize],
    n_bits: usize,
) -> Result<ChiSquareResult, HarnessError> {
    if n_bits > 8 {
        return Err(HarnessError::TooManyCells(n_bits));
    }
    let cells = 1usize << n_bits;
    let needed = 50 * cells;
    if samples.len() < needed {
        return Err(HarnessError::Undersampled {
            needed,
            got: samples.len(),
            bits: n_bits,
        });
    }
    let mut counts = vec![0u64; cells];
    for &s in samples {
        counts[s] += 1;
    }
    let expected = samples.len() as f64 / cells as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = (cells - 1) as u64;
    let critical = ChiSquared::new(dof as f64)
        .expect("dof >= 1")
        .inverse_cdf(0.999);
    Ok(ChiSquareResult {
        statistic,
        dof,
        critical,
        pass: statistic <= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::QuantumChannel;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn honest_batch(n: usize, trials: u64, variant: Variant) -> TrialBatch {
        TrialBatch {
            params: ProtocolParams::new(n, 1.0, 1.0, variant, QuantumChannel::identity(2))
                .unwrap(),
            alice: AliceSpec::Honest,
            bob: BobSpec::Honest,
            trials,
            master_seed: 7,
        }
    }

    #[test]
    fn honest_noiseless_statistics() {
        let stats = monte_carlo(&honest_batch(4, 20_000, Variant::Protocol1)).unwrap();
        assert_eq!(stats.abort_rate, 0.0);
        assert_abs_diff_eq!(stats.mean_f, 1.0, epsilon = 0.0);
        assert!(stats.mean_bias.abs() <= 3.0 * stats.bias_std_error + 1e-9);
        let h = stats.plug_in_entropy.unwrap();
        // Uniform on 16 cells; the estimator bias is ~ 15/(2 T ln 2).
        assert!(h <= 4.0 && 4.0 - h < 5e-3, "entropy {h}");
    }

    #[test]
    fn entropy_omitted_for_long_strings() {
        let stats = monte_carlo(&honest_batch(13, 50, Variant::Protocol1)).unwrap();
        assert!(stats.plug_in_entropy.is_none());
        assert!(stats.entropy_omitted_reason.unwrap().contains("13"));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let batch = honest_batch(8, 2_000, Variant::Protocol2);
        let a = serde_json::to_string(&monte_carlo(&batch).unwrap()).unwrap();
        let b = serde_json::to_string(&monte_carlo(&batch).unwrap()).unwrap();
        assert_eq!(a, b);
        let mut other = batch;
        other.master_seed = 8;
        let c = serde_json::to_string(&monte_carlo(&other).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn martingale_requires_revealing_variant() {
        let batch = honest_batch(10, 10, Variant::Protocol1);
        assert!(matches!(
            martingale_tail_check(&batch, 1.0),
            Err(HarnessError::NeedsRevealingVariant)
        ));
    }

    #[test]
    fn martingale_honest_noiseless_never_exceeds() {
        let stats = martingale_tail_check(&honest_batch(20, 500, Variant::Protocol2), 1.0).unwrap();
        assert_eq!(stats.f_exceedance, 0.0);
        // Honest rounds have F(1) = 1/2 and q averages 1/2, so the q side
        // stays within slack essentially always at this n.
        assert!(stats.q_exceedance <= stats.bound + 0.05);
    }

    #[test]
    fn abandoning_strategy_has_no_expectations() {
        let mut batch = honest_batch(10, 10, Variant::Protocol2);
        batch.alice = AliceSpec::Abandoning { at_round: 0 };
        assert!(matches!(
            martingale_tail_check(&batch, 1.0),
            Err(HarnessError::NoAnalyticExpectations)
        ));
    }

    #[test]
    fn chi_square_accepts_uniform_and_rejects_constant() {
        let mut rng = seeding::rng_for(3, stream::TRIAL, 0);
        let uniform: Vec<usize> = (0..20_000).map(|_| rng.gen_range(0..16)).collect();
        assert!(chi_square_uniformity(&uniform, 4).unwrap().pass);
        let constant = vec![5usize; 20_000];
        assert!(!chi_square_uniformity(&constant, 4).unwrap().pass);
        assert!(matches!(
            chi_square_uniformity(&uniform[..100], 4),
            Err(HarnessError::Undersampled { .. })
        ));
        assert!(matches!(
            chi_square_uniformity(&uniform, 9),
            Err(HarnessError::TooManyCells(9))
        ));
    }

    #[test]
    fn never_abort_replacements_are_uniform() {
        // 10^5 aborted runs produce replacement strings passing chi-square.
        let samples: Vec<usize> = (0..100_000u64)
            .map(|t| {
                let outcome = crate::protocol::ProtocolOutcome {
                    n: 4,
                    x: None,
                    y: None,
                };
                let (_, y) = never_abort_output(&outcome, seeding::derive(11, stream::TRIAL, t));
                y.index().unwrap()
            })
            .collect();
        assert!(chi_square_uniformity(&samples, 4).unwrap().pass);
    }
}

//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use qbsg_core::bounds::{
    self, quantum_vs_classical_threshold, SecurityReport, ThresholdOutcome,
};
use qbsg_core::classical::{build_strikeout, build_trivial, CheatReport, EntropyMethod};
use qbsg_core::harness::{
    chi_square_uniformity, martingale_tail_check, monte_carlo, ChiSquareResult, EmpiricalStats,
    MartingaleStats, TrialBatch,
};
use qbsg_core::protocol::run_protocol;
use qbsg_core::seeding;

use crate::config::{SimulateConfig, SCHEMA_VERSION};

/// One verified comparison in self-test mode.
#[derive(Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub observed: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    schema_version: u32,
    config: &'a SimulateConfig,
    stats: &'a EmpiricalStats,
    /// Analytic bounds at the batch parameters, side by side with the
    /// empirical estimates.
    security_bounds: &'a SecurityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    martingale: Option<&'a MartingaleStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_uniformity: Option<&'a ChiSquareResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<&'a Vec<CheckLine>>,
}

fn write_report(path: &Path, json: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(json)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub struct SimulateOptions {
    pub config_path: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out_dir: PathBuf,
    pub transcripts: Option<PathBuf>,
    pub check: bool,
}

/// Runs a configured batch and writes the combined report. Returns the
/// failed checks in self-test mode.
pub fn cmd_simulate(opts: &SimulateOptions) -> Result<Vec<String>> {
    let mut config = SimulateConfig::load(&opts.config_path)?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(trials) = opts.trials {
        config.trials = trials;
    }
    let batch = config.to_batch(None, None)?;
    ensure_out_dir(&opts.out_dir)?;

    let stats = monte_carlo(&batch)?;
    let security_bounds = bounds::theorem_noisy_report(
        batch.params.n as u64,
        batch.params.theta,
        batch.params.f_star,
        config.protocol.channel_fidelity,
    )?;
    let martingale = match config.martingale_l {
        Some(l) => Some(martingale_tail_check(&batch, l)?),
        None => None,
    };
    let output_uniformity = uniformity_of_outputs(&batch)?;

    let checks = if opts.check {
        Some(run_checks(&batch, &config, &stats, &security_bounds, martingale.as_ref()))
    } else {
        None
    };

    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        config: &config,
        stats: &stats,
        security_bounds: &security_bounds,
        martingale: martingale.as_ref(),
        output_uniformity: output_uniformity.as_ref(),
        checks: checks.as_ref(),
    };
    write_report(&opts.out_dir.join("simulate_report.json"), &report)?;

    if let Some(path) = &opts.transcripts {
        stream_transcripts(&batch, path)?;
    }

    let failures = checks
        .unwrap_or_default()
        .into_iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: observed {} exceeds limit {}", c.name, c.observed, c.limit))
        .collect();
    Ok(failures)
}

/// Chi-square uniformity of the honest outputs for short strings, when the
/// sample is large enough.
fn uniformity_of_outputs(batch: &TrialBatch) -> Result<Option<ChiSquareResult>> {
    let n = batch.params.n;
    if n > 8 || batch.trials < (50u64 << n) {
        return Ok(None);
    }
    let signal = batch.params.signal();
    let alice = batch.alice.build(&signal, &batch.params)?;
    let bob = batch.bob.build(&signal, &batch.params)?;
    let use_x = batch.alice.is_honest();
    let mut samples = Vec::with_capacity(batch.trials as usize);
    for t in 0..batch.trials {
        let seed = seeding::derive(batch.master_seed, seeding::stream::TRIAL, t);
        let (outcome, _) = run_protocol(&batch.params, alice.as_ref(), bob.as_ref(), seed)?;
        let out = if use_x { outcome.x } else { outcome.y };
        // Conditioned on not aborting.
        if let Some(s) = out {
            samples.push(s.index().expect("n <= 8 fits"));
        }
    }
    if samples.len() < (50usize << n) {
        return Ok(None);
    }
    Ok(Some(chi_square_uniformity(&samples, n)?))
}

fn run_checks(
    batch: &TrialBatch,
    config: &SimulateConfig,
    stats: &EmpiricalStats,
    security: &SecurityReport,
    martingale: Option<&MartingaleStats>,
) -> Vec<CheckLine> {
    let trials = batch.trials as f64;
    let mut checks = Vec::new();
    let both_honest = batch.alice.is_honest() && batch.bob.is_honest();
    if both_honest {
        if !security.delta_n.vacuous {
            let delta = security.delta_n.value;
            let sigma = (delta * (1.0 - delta) / trials).sqrt();
            checks.push(CheckLine {
                name: "abort_rate_le_correctness_delta".into(),
                observed: stats.abort_rate,
                limit: delta + 3.0 * sigma,
                pass: stats.abort_rate <= delta + 3.0 * sigma,
            });
        }
        checks.push(CheckLine {
            name: "bias_consistent_with_fair_coins".into(),
            observed: stats.mean_bias.abs(),
            limit: 3.0 * stats.bias_std_error + 1e-9,
            pass: stats.mean_bias.abs() <= 3.0 * stats.bias_std_error + 1e-9,
        });
    } else {
        let bound = if batch.alice.is_honest() {
            security.eps_b_bound.value
        } else {
            security.eps_a_bound.value
        };
        let limit = bound + 3.0 * stats.bias_std_error;
        checks.push(CheckLine {
            name: "empirical_bias_le_analytic_bound".into(),
            observed: stats.mean_bias,
            limit,
            pass: stats.mean_bias <= limit,
        });
    }
    if let Some(m) = martingale {
        let sigma = (m.bound * (1.0 - m.bound) / trials).sqrt();
        for (name, rate) in [
            ("martingale_f_exceedance", m.f_exceedance),
            ("martingale_q_exceedance", m.q_exceedance),
        ] {
            checks.push(CheckLine {
                name: name.into(),
                observed: rate,
                limit: m.bound + 3.0 * sigma,
                pass: rate <= m.bound + 3.0 * sigma,
            });
        }
    }
    let _ = config;
    checks
}

/// Re-runs the batch sequentially, streaming each trial's transcript in the
/// line format, separated by `# trial <index>` headers.
fn stream_transcripts(batch: &TrialBatch, path: &Path) -> Result<()> {
    let signal = batch.params.signal();
    let alice = batch.alice.build(&signal, &batch.params)?;
    let bob = batch.bob.build(&signal, &batch.params)?;
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    for t in 0..batch.trials {
        let seed = seeding::derive(batch.master_seed, seeding::stream::TRIAL, t);
        let (_, transcript) = run_protocol(&batch.params, alice.as_ref(), bob.as_ref(), seed)?;
        writeln!(w, "# trial {t} pass {}", u8::from(transcript.pass))?;
        transcript.write_lines(&mut w)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

pub enum RegimeArg {
    Noiseless,
    Noisy,
}

pub struct BoundsOptions {
    pub n: Vec<u64>,
    pub theta: Option<f64>,
    pub sin2_theta: Option<f64>,
    pub f_star: f64,
    pub l: Option<f64>,
    pub regime: RegimeArg,
    pub channel_fidelity: f64,
    pub out_dir: PathBuf,
}

fn resolve_theta(theta: Option<f64>, sin2_theta: Option<f64>) -> Result<f64> {
    match (theta, sin2_theta) {
        (Some(t), None) => Ok(t),
        (None, Some(s2)) if (0.0..=1.0).contains(&s2) => Ok(s2.sqrt().asin()),
        (None, Some(s2)) => bail!("sin2-theta = {s2} outside [0, 1]"),
        (None, None) => bail!("one of --theta and --sin2-theta is required"),
        _ => bail!("specify only one of --theta and --sin2-theta"),
    }
}

fn bounds_report_for(opts: &BoundsOptions, n: u64) -> Result<SecurityReport> {
    match opts.regime {
        RegimeArg::Noiseless => Ok(bounds::theorem_noiseless_report(n)?),
        RegimeArg::Noisy => {
            let theta = resolve_theta(opts.theta, opts.sin2_theta)?;
            Ok(bounds::noisy_report_with_l(
                n,
                theta,
                opts.f_star,
                opts.channel_fidelity,
                opts.l.unwrap_or_else(|| bounds::default_l(n)),
            )?)
        }
    }
}

/// Evaluates the analytic bounds: a JSON report for one `n`, a CSV sweep for
/// several.
pub fn cmd_bounds(opts: &BoundsOptions) -> Result<()> {
    if opts.n.is_empty() {
        bail!("at least one --n value is required");
    }
    ensure_out_dir(&opts.out_dir)?;
    if opts.n.len() == 1 {
        let report = bounds_report_for(opts, opts.n[0])?;
        return write_report(&opts.out_dir.join("bounds_report.json"), &report);
    }
    let mut csv = String::from(
        "n,regime,f_star,l,sin2_theta_bias,sin2_theta_entropy,channel_fidelity,\
         eps_a,eps_a_vacuous,eps_b,eps_b_vacuous,h_a,h_a_vacuous,h_b,h_b_vacuous,\
         delta_n,delta_n_vacuous\n",
    );
    for &n in &opts.n {
        let r = bounds_report_for(opts, n)?;
        let regime = match r.params.regime {
            bounds::Regime::Noiseless => "noiseless",
            bounds::Regime::Noisy => "noisy",
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.params.n,
            regime,
            r.params.f_star,
            r.params.l,
            r.params.sin2_theta_bias,
            r.params.sin2_theta_entropy,
            r.params.channel_fidelity.map_or(String::new(), |v| v.to_string()),
            r.eps_a_bound.value,
            r.eps_a_bound.vacuous,
            r.eps_b_bound.value,
            r.eps_b_bound.vacuous,
            r.h_a_bound.value,
            r.h_a_bound.vacuous,
            r.h_b_bound.value,
            r.h_b_bound.vacuous,
            r.delta_n.value,
            r.delta_n.vacuous,
        ));
    }
    let path = opts.out_dir.join("bounds_sweep.csv");
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub enum ClassicalProtocolArg {
    Trivial,
    Strikeout,
}

pub struct ClassicalOptions {
    pub protocol: ClassicalProtocolArg,
    pub n: usize,
    pub method: EntropyMethod,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct ClassicalReportFile<'a> {
    schema_version: u32,
    protocol: &'a str,
    method_requested: &'a str,
    report: &'a CheatReport,
}

/// Builds and fully analyzes a classical protocol.
pub fn cmd_classical(opts: &ClassicalOptions) -> Result<()> {
    let (tree, name) = match opts.protocol {
        ClassicalProtocolArg::Trivial => (build_trivial(opts.n)?, "trivial"),
        ClassicalProtocolArg::Strikeout => (build_strikeout(opts.n)?, "strikeout"),
    };
    ensure_out_dir(&opts.out_dir)?;
    let report = tree.analyze(opts.method)?;
    let method_requested = match opts.method {
        EntropyMethod::Exhaustive => "exhaustive",
        EntropyMethod::GreedyLocal => "greedy_local",
        EntropyMethod::Auto => "auto",
    };
    let file = ClassicalReportFile {
        schema_version: SCHEMA_VERSION,
        protocol: name,
        method_requested,
        report: &report,
    };
    write_report(&opts.out_dir.join("classical_report.json"), &file)?;

    for (who, table) in [
        ("alice", &report.alice_entropy_strategy),
        ("bob", &report.bob_entropy_strategy),
    ] {
        let mut csv = String::from("state,choice\n");
        for row in table {
            csv.push_str(&format!("\"{}\",\"{}\"\n", row.state, row.choice));
        }
        let path = opts.out_dir.join(format!("classical_strategy_{who}.csv"));
        std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub struct ThresholdOptions {
    pub n: Vec<u64>,
    pub theta: Option<f64>,
    pub sin2_theta: Option<f64>,
    pub l: Option<f64>,
    pub out_dir: PathBuf,
}

/// Finds, per `n`, the smallest test threshold at which the quantum bias
/// bounds beat the classical floor of one half.
pub fn cmd_threshold(opts: &ThresholdOptions) -> Result<()> {
    if opts.n.is_empty() {
        bail!("at least one --n value is required");
    }
    let theta = resolve_theta(opts.theta, opts.sin2_theta)?;
    ensure_out_dir(&opts.out_dir)?;
    let mut csv = String::from("n,sin2_theta,l,status,f_star,eps_sum_at_f_star\n");
    for &n in &opts.n {
        let l = opts.l.unwrap_or_else(|| bounds::default_l(n));
        let outcome = quantum_vs_classical_threshold(theta, n, l)?;
        let sin2 = theta.sin().powi(2);
        let row = match outcome {
            ThresholdOutcome::Attainable { f_star } => {
                let sum = bounds::bias_bound_sum(n, theta, f_star, l)?;
                println!("n = {n}: minimal f* = {f_star:.6} (eps_A + eps_B = {sum:.6})");
                format!("{n},{sin2},{l},attainable,{f_star},{sum}\n")
            }
            ThresholdOutcome::Unattainable => {
                println!("n = {n}: UNATTAINABLE (even f* = 1 stays at or above the classical floor)");
                format!("{n},{sin2},{l},unattainable,,\n")
            }
        };
        csv.push_str(&row);
    }
    let path = opts.out_dir.join("threshold.csv");
    std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

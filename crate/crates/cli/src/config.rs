//! Simulation configuration file schema.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use qbsg_core::harness::{AliceSpec, BobSpec, TrialBatch};
use qbsg_core::protocol::{ProtocolParams, Variant};
use qbsg_core::quantum::{depolarizing_from_fidelity, QuantumChannel};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk configuration for `qbsg simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schema_version: u32,
    pub protocol: ProtocolConfig,
    pub alice: AliceSpec,
    pub bob: BobSpec,
    pub trials: u64,
    pub seed: u64,
    /// When set, also run the martingale tail check at this slack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale_l: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub n: usize,
    /// Signal angle in radians; exactly one of `theta` and `sin2_theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sin2_theta: Option<f64>,
    pub f_star: f64,
    /// Depolarizing channel fidelity; 1.0 means a noiseless channel.
    pub channel_fidelity: f64,
}

impl ProtocolConfig {
    pub fn theta(&self) -> Result<f64> {
        match (self.theta, self.sin2_theta) {
            (Some(t), None) => Ok(t),
            (None, Some(s2)) => {
                if !(0.0..=1.0).contains(&s2) {
                    bail!("sin2_theta = {s2} outside [0, 1]");
                }
                Ok(s2.sqrt().asin())
            }
            _ => bail!("specify exactly one of `theta` and `sin2_theta`"),
        }
    }

    pub fn channel(&self) -> Result<QuantumChannel> {
        if self.channel_fidelity == 1.0 {
            Ok(QuantumChannel::identity(2))
        } else {
            depolarizing_from_fidelity(self.channel_fidelity)
                .map_err(|e| anyhow!("channel_fidelity invalid: {e}"))
        }
    }
}

impl SimulateConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: SimulateConfig =
            serde_json::from_str(&text).with_context(|| "config does not match the schema")?;
        if config.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            );
        }
        if config.trials == 0 {
            bail!("trials must be positive");
        }
        Ok(config)
    }

    /// Builds the runnable batch, applying optional overrides.
    pub fn to_batch(&self, seed: Option<u64>, trials: Option<u64>) -> Result<TrialBatch> {
        let theta = self.protocol.theta()?;
        let params = ProtocolParams::new(
            self.protocol.n,
            theta,
            self.protocol.f_star,
            self.protocol.variant,
            self.protocol.channel()?,
        )
        .map_err(|e| anyhow!("invalid protocol parameters: {e}"))?;
        Ok(TrialBatch {
            params,
            alice: self.alice.clone(),
            bob: self.bob.clone(),
            trials: trials.unwrap_or(self.trials),
            master_seed: seed.unwrap_or(self.seed),
        })
    }
}

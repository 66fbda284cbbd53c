//! BPSK over AWGN and channel LLRs.
//!
//! Bits map to symbols as `0 -> -1`, `1 -> +1`, and the channel LLR is
//! `ln p(y|1)/p(y|0) = 2y/sigma^2`, so positive LLRs favor bit 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{domain, substream, PolarGaussian};
use crate::{Error, Result};

/// Noise variance (per real dimension) and seed of an AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    noise_variance: f64,
    seed: u64,
}

impl ChannelConfig {
    pub fn new(noise_variance: f64, seed: u64) -> Result<Self> {
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::Domain(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        Ok(Self {
            noise_variance,
            seed,
        })
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Channel log-likelihood ratios, positive favoring bit 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for LlrVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Maps bits to antipodal symbols `2x - 1`.
pub fn bpsk_modulate(bits: &[u8]) -> Result<Vec<f64>> {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(-1.0),
            1 => Ok(1.0),
            _ => Err(Error::Domain(format!("bit {i} has non-binary value {b}"))),
        })
        .collect()
}

/// Adds i.i.d. Gaussian noise drawn from the stream `(cfg.seed, index)`.
pub fn awgn_transmit_indexed(symbols: &[f64], cfg: &ChannelConfig, index: u64) -> Vec<f64> {
    awgn_with(
        symbols,
        cfg.noise_variance,
        substream(cfg.seed, domain::CHANNEL, index),
    )
}

/// Adds i.i.d. Gaussian noise drawn from `rng`.
pub fn awgn_with<R: Rng>(symbols: &[f64], noise_variance: f64, rng: R) -> Vec<f64> {
    let sigma = noise_variance.sqrt();
    let mut gauss = PolarGaussian::new(rng);
    symbols
        .iter()
        .map(|&s| s + sigma * gauss.sample())
        .collect()
}

/// Adds i.i.d. Gaussian noise of variance `cfg.noise_variance`; stream index 0.
pub fn awgn_transmit(symbols: &[f64], cfg: &ChannelConfig) -> Vec<f64> {
    awgn_transmit_indexed(symbols, cfg, 0)
}

/// `2 y / sigma^2` for every received sample.
pub fn channel_llr(received: &[f64], noise_variance: f64) -> Result<LlrVector> {
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    let scale = 2.0 / noise_variance;
    Ok(LlrVector(received.iter().map(|&y| scale * y).collect()))
}

/// Noise variance for an Eb/N0 in dB at the given code rate (unit symbol energy).
pub fn snr_to_sigma2(eb_n0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(eb_n0_db / 10.0))
}

/// Description of the SNR convention, recorded in output headers.
pub const SNR_CONVENTION: &str = "Eb/N0 dB, sigma2 = 1/(2 R 10^(snr/10)), unit-energy BPSK";

//! BPSK modulation over the binary-input AWGN channel.
//!
//! Randomness is organised as independent counter-addressed streams: every
//! `(master_seed, trial_index, lane)` triple names its own ChaCha stream, so a
//! trial draws the same numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How an SNR in dB is mapped to a noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// Energy per information bit over N0.
    #[default]
    EbN0,
    /// Energy per channel symbol over N0.
    EsN0,
}

impl SnrConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrConvention::EbN0 => "ebn0",
            SnrConvention::EsN0 => "esn0",
        }
    }
}

impl std::fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebn0" => Ok(SnrConvention::EbN0),
            "esn0" => Ok(SnrConvention::EsN0),
            other => Err(Error::InvalidParameter(format!(
                "unknown SNR convention '{other}'"
            ))),
        }
    }
}

/// An operating point: SNR in dB, code rate and the convention tying them together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSpec {
    pub snr_db: f64,
    pub rate: f64,
    pub convention: SnrConvention,
}

impl SnrSpec {
    pub fn new(snr_db: f64, rate: f64, convention: SnrConvention) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rate {rate} not in (0, 1]"
            )));
        }
        if !snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "snr {snr_db} dB is not finite"
            )));
        }
        Ok(SnrSpec {
            snr_db,
            rate,
            convention,
        })
    }

    pub fn ebn0(snr_db: f64, rate: f64) -> Result<Self> {
        Self::new(snr_db, rate, SnrConvention::EbN0)
    }

    /// Noise variance per real dimension for unit-energy BPSK.
    pub fn sigma2(&self) -> f64 {
        snr_to_sigma2(self)
    }
}

/// Noise variance for a given operating point.
pub fn snr_to_sigma2(spec: &SnrSpec) -> f64 {
    let lin = 10f64.powf(spec.snr_db / 10.0);
    match spec.convention {
        SnrConvention::EbN0 => 1.0 / (2.0 * spec.rate * lin),
        SnrConvention::EsN0 => 1.0 / (2.0 * lin),
    }
}

/// Cutoff rate of the underlying BI-AWGN channel in bits.
pub fn channel_cutoff_rate(sigma2: f64) -> f64 {
    let z = (-1.0 / (2.0 * sigma2)).exp();
    (2.0 / (1.0 + z)).log2()
}

/// Maps bit 0 to +1 and bit 1 to -1.
pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter()
        .map(|&b| if b == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Adds i.i.d. zero-mean Gaussian noise of variance `sigma2` drawn from `rng`.
///
/// `sigma2 == 0` is accepted and returns the input unchanged.
pub fn transmit<R: rand::Rng + ?Sized>(symbols: &[f64], sigma2: f64, rng: &mut R) -> Vec<f64> {
    let mut out = symbols.to_vec();
    add_noise(&mut out, sigma2, rng);
    out
}

pub(crate) fn add_noise<R: rand::Rng + ?Sized>(buf: &mut [f64], sigma2: f64, rng: &mut R) {
    assert!(sigma2 >= 0.0, "noise variance must be nonnegative");
    let sigma = sigma2.sqrt();
    for s in buf.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *s += sigma * n;
    }
}

/// Channel LLRs `ln P(y|0)/P(y|1) = 2y/sigma2` in nats.
pub fn channel_llr(y: &[f64], sigma2: f64) -> Vec<f64> {
    let scale = 2.0 / sigma2;
    y.iter().map(|&v| scale * v).collect()
}

/// Independent random lanes within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Data = 0,
    Noise = 1,
}

/// Deterministic generator for one `(trial, lane)` cell of an experiment.
pub fn trial_rng(master_seed: u64, trial_index: u64, lane: Lane) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut state = master_seed ^ (lane as u64).wrapping_mul(0xA076_1D64_78BD_642F);
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial_index);
    rng
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

//! Polarization-adjusted convolutional (PAC) codes under Fano sequential decoding.
//!
//! The crate covers the full chain used to study the computation of PAC
//! sequential decoders:
//!
//! * [`construction`]: Gaussian-approximation bit-channel tables (capacity,
//!   LLR mean, Bhattacharyya parameter, cutoff rate, Gallager `E0(rho)`).
//! * [`rate_profile`]: Reed-Muller rate profiles and partial rates.
//! * [`encoder`]: profile insertion, convolutional precoding and the polar transform.
//! * [`channel`]: BPSK over AWGN with reproducible per-trial noise streams.
//! * [`demapper`]: successive-cancellation LLRs with forward/backward moves.
//! * [`metric`]: the biased branch metric and bias schedules.
//! * [`fano`]: the Fano sequential decoder with visit accounting.
//! * [`bounds`]: computable wrong-path and Pareto computation bounds.
//! * [`harness`]: Monte-Carlo experiments (FER/ANV, CCDF, sweeps, traces).

// Negated comparisons below deliberately reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod construction;
pub mod demapper;
pub mod encoder;
mod error;
pub mod fano;
pub mod harness;
pub mod metric;
pub mod rate_profile;

pub use channel::{SnrConvention, SnrSpec};
pub use construction::{BitChannelTable, ChannelParams};
pub use error::{Error, Result};
pub use fano::{DecodeRecord, FanoConfig};
pub use metric::{BiasRule, BiasSchedule};
pub use rate_profile::{CodeSpec, PartialRateProfile};

/// Natural logarithm of 2.
pub(crate) const LN_2: f64 = std::f64::consts::LN_2;

//! Biased branch metric and bias schedules.
//!
//! LLRs arrive in nats from the demapper; metrics and biases are in bits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::BitChannelTable;
use crate::demapper::{genie_llrs, LLR_CAP};
use crate::harness::frame::{make_frame, NoiseModel};
use crate::rate_profile::CodeSpec;
use crate::{Error, Result, LN_2};

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Branch metric `gamma(u) = 1 - log2(1 + e^{-(1-2u) llr}) - b` in bits.
///
/// `llr = ln(P(.|u=0)/P(.|u=1))`; the LLR is saturated at the demapper cap.
#[inline]
pub fn branch_metric(llr: f64, u_bit: u8, bias: f64) -> f64 {
    let l = llr.clamp(-LLR_CAP, LLR_CAP);
    let signed = if u_bit == 0 { -l } else { l };
    1.0 - softplus(signed) / LN_2 - bias
}

/// Bias design rules. The schedule is `alpha` times the rule's base values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BiasRule {
    /// Constant `info` on information bits and `frozen` on frozen bits.
    Fixed { info: f64, frozen: f64 },
    /// `I(W_N^(i))` on every bit.
    CapacityScaled,
    /// `E0(1, W_N^(i))` on every bit.
    CutoffScaled,
    /// `E0(1, W_N^(i))` on information bits, zero on frozen bits.
    CutoffInfoOnly,
    /// `E0(1, W_N^(i))` on frozen bits, zero on information bits.
    CutoffFrozenOnly,
    /// `I(W_N^(i))` on information bits, a constant on frozen bits.
    CapacityInfoFixedFrozen { frozen: f64 },
}

impl fmt::Display for BiasRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasRule::Fixed { info, frozen } => write!(f, "fixed:{info}:{frozen}"),
            BiasRule::CapacityScaled => f.write_str("capacity"),
            BiasRule::CutoffScaled => f.write_str("cutoff"),
            BiasRule::CutoffInfoOnly => f.write_str("cutoff-info"),
            BiasRule::CutoffFrozenOnly => f.write_str("cutoff-frozen"),
            BiasRule::CapacityInfoFixedFrozen { frozen } => write!(f, "capacity-info:{frozen}"),
        }
    }
}

impl FromStr for BiasRule {
    type Err = Error;

    /// Accepts the [`Display`](fmt::Display) forms, e.g. `fixed:1.35:0` or `cutoff`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums: Vec<f64> = parts
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParameter(format!("bad bias rule parameters in '{s}'")))?;
        let rule = match (name.as_str(), nums.as_slice()) {
            ("fixed", [info]) => BiasRule::Fixed {
                info: *info,
                frozen: 0.0,
            },
            ("fixed", [info, frozen]) => BiasRule::Fixed {
                info: *info,
                frozen: *frozen,
            },
            ("capacity", []) => BiasRule::CapacityScaled,
            ("cutoff", []) => BiasRule::CutoffScaled,
            ("cutoff-info", []) => BiasRule::CutoffInfoOnly,
            ("cutoff-frozen", []) => BiasRule::CutoffFrozenOnly,
            ("capacity-info", [frozen]) => BiasRule::CapacityInfoFixedFrozen { frozen: *frozen },
            _ => return Err(Error::InvalidParameter(format!("unknown bias rule '{s}'"))),
        };
        Ok(rule)
    }
}

/// Per-index metric bias `b_i` (bits) and its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSchedule {
    pub b: Vec<f64>,
    pub rule: BiasRule,
    pub alpha: f64,
}

impl BiasSchedule {
    pub fn zeros(n_code: usize) -> Self {
        BiasSchedule {
            b: vec![0.0; n_code],
            rule: BiasRule::Fixed {
                info: 0.0,
                frozen: 0.0,
            },
            alpha: 1.0,
        }
    }
}

pub fn build_bias(
    rule: BiasRule,
    table: &BitChannelTable,
    spec: &CodeSpec,
    alpha: f64,
) -> Result<BiasSchedule> {
    if table.n_code != spec.n_code {
        return Err(Error::LengthMismatch {
            expected: spec.n_code,
            actual: table.n_code,
        });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} is not finite"
        )));
    }
    let mask = spec.info_mask();
    let base = |j: usize| -> f64 {
        let info = mask[j];
        match rule {
            BiasRule::Fixed {
                info: bi,
                frozen: bf,
            } => {
                if info {
                    bi
                } else {
                    bf
                }
            }
            BiasRule::CapacityScaled => table.capacity[j],
            BiasRule::CutoffScaled => table.cutoff[j],
            BiasRule::CutoffInfoOnly => {
                if info {
                    table.cutoff[j]
                } else {
                    0.0
                }
            }
            BiasRule::CutoffFrozenOnly => {
                if info {
                    0.0
                } else {
                    table.cutoff[j]
                }
            }
            BiasRule::CapacityInfoFixedFrozen { frozen } => {
                if info {
                    table.capacity[j]
                } else {
                    frozen
                }
            }
        }
    };
    let b: Vec<f64> = (0..spec.n_code).map(|j| alpha * base(j)).collect();
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("bias values must be finite".into()));
    }
    Ok(BiasSchedule { b, rule, alpha })
}

/// Empirical genie-aided branch-metric statistics for one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub index: usize,
    pub is_info: bool,
    pub bias: f64,
    pub mean_correct: f64,
    pub se_correct: f64,
    pub mean_wrong: f64,
    pub se_wrong: f64,
}

#[derive(Clone)]
struct Moments {
    sum_c: Vec<f64>,
    sq_c: Vec<f64>,
    sum_w: Vec<f64>,
    sq_w: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            sum_c: vec![0.0; n],
            sq_c: vec![0.0; n],
            sum_w: vec![0.0; n],
            sq_w: vec![0.0; n],
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for j in 0..self.sum_c.len() {
            self.sum_c[j] += other.sum_c[j];
            self.sq_c[j] += other.sq_c[j];
            self.sum_w[j] += other.sum_w[j];
            self.sq_w[j] += other.sq_w[j];
        }
        self
    }
}

const DRIFT_CHUNK: u64 = 1024;

/// Genie-aided branch metrics: at every index the decoder is handed the true
/// prefix, and the metric of the true bit and of its complement are averaged
/// over `trials` transmissions.
///
/// Accumulation runs over fixed trial chunks merged in chunk order, so the
/// result does not depend on the thread schedule.
pub fn genie_drift(
    schedule: &BiasSchedule,
    spec: &CodeSpec,
    noise: NoiseModel,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<DriftPoint>> {
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "genie drift needs at least one trial".into(),
        ));
    }
    let n = spec.n_code;
    if schedule.b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: schedule.b.len(),
        });
    }
    let chunks = trials.div_ceil(DRIFT_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Moments> {
            let mut m = Moments::new(n);
            for trial in c * DRIFT_CHUNK..((c + 1) * DRIFT_CHUNK).min(trials) {
                let frame = make_frame(spec, noise, master_seed, trial)?;
                let z = genie_llrs(&frame.llrs, &frame.u)?;
                for j in 0..n {
                    let gc = branch_metric(z[j], frame.u[j], schedule.b[j]);
                    let gw = branch_metric(z[j], 1 - frame.u[j], schedule.b[j]);
                    m.sum_c[j] += gc;
                    m.sq_c[j] += gc * gc;
                    m.sum_w[j] += gw;
                    m.sq_w[j] += gw * gw;
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = partials.iter().fold(Moments::new(n), |acc, p| acc.merge(p));
    let mask = spec.info_mask();
    let t = trials as f64;
    let stats = |sum: f64, sq: f64| {
        let mean = sum / t;
        let var = if trials > 1 {
            ((sq - t * mean * mean) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (var / t).sqrt())
    };
    Ok((0..n)
        .map(|j| {
            let (mean_correct, se_correct) = stats(total.sum_c[j], total.sq_c[j]);
            let (mean_wrong, se_wrong) = stats(total.sum_w[j], total.sq_w[j]);
            DriftPoint {
                index: j + 1,
                is_info: mask[j],
                bias: schedule.b[j],
                mean_correct,
                se_correct,
                mean_wrong,
                se_wrong,
            }
        })
        .collect())
}

//! Fano sequential decoding over the irregular PAC code tree.
//!
//! The tree branches only at information positions; at a frozen position the
//! single child carries `v_i = 0`. Thresholds are integer multiples of `delta`
//! (kept as an integer index). A visit is one forward move onto a node; the
//! root is not counted, and re-entering a node under a lower threshold counts
//! again.
//!
//! When the search would back up through a chain of single-child (frozen)
//! nodes only to lower the threshold and walk the same chain forward again,
//! the threshold is lowered in place instead. The search order and decisions
//! are identical; the forced re-walk is simply not counted as new visits.

use serde::{Deserialize, Serialize};

use crate::demapper::{CheckRule, DemapperState, LLR_CAP};
use crate::encoder::conv_output;
use crate::metric::{branch_metric, BiasSchedule};
use crate::rate_profile::CodeSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoConfig {
    /// Threshold spacing in bits.
    pub delta: f64,
    /// Maximum number of node visits; `None` searches without limit.
    pub mnv: Option<u64>,
    pub bias: BiasSchedule,
    /// Record `(depth, Gamma)` along the decoded path.
    #[serde(default)]
    pub trace: bool,
    #[serde(skip)]
    pub check_rule: CheckRule,
}

impl FanoConfig {
    pub fn new(delta: f64, mnv: Option<u64>, bias: BiasSchedule) -> Self {
        FanoConfig {
            delta,
            mnv,
            bias,
            trace: false,
            check_rule: CheckRule::Exact,
        }
    }
}

/// Outcome of one decoding session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub v_hat: Vec<u8>,
    pub u_hat: Vec<u8>,
    /// Filled in by callers that know the transmitted word.
    pub success: Option<bool>,
    pub visits_total: u64,
    /// Visits to nodes at depth `i`, stored at `i - 1`.
    pub visits_by_depth: Vec<u64>,
    /// `visits_total / N`.
    pub anv: f64,
    pub hit_mnv: bool,
    /// Partial path metric of the decoded word.
    pub final_metric: f64,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Hook called on every counted forward move.
pub trait VisitObserver {
    /// `path` holds the carrier bits `v_1..v_depth` of the node just entered.
    fn on_visit(&mut self, path: &[u8], gamma: f64, threshold: f64);
}

impl VisitObserver for () {
    #[inline]
    fn on_visit(&mut self, _path: &[u8], _gamma: f64, _threshold: f64) {}
}

pub fn decode(channel_llrs: &[f64], spec: &CodeSpec, config: &FanoConfig) -> Result<DecodeRecord> {
    decode_observed(channel_llrs, spec, config, &mut ())
}

struct Child {
    gamma: f64,
    v: u8,
    u: u8,
}

pub fn decode_observed<O: VisitObserver + ?Sized>(
    channel_llrs: &[f64],
    spec: &CodeSpec,
    config: &FanoConfig,
    observer: &mut O,
) -> Result<DecodeRecord> {
    let n = spec.n_code;
    if channel_llrs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: channel_llrs.len(),
        });
    }
    if config.bias.b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: config.bias.b.len(),
        });
    }
    let delta = config.delta;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "threshold spacing {delta} must be positive and finite"
        )));
    }
    let mask = spec.info_mask();
    let poly = &spec.conn_poly;
    let bias = &config.bias.b;
    let mut state = DemapperState::with_options(channel_llrs, config.check_rule, LLR_CAP)?;

    let mut v = vec![0u8; n];
    let mut gamma = vec![0.0f64; n + 1];
    let mut rank_taken = vec![0u8; n];
    let mut visits_by_depth = vec![0u64; n];
    let mut visits: u64 = 0;
    let mut k: i64 = 0;
    let mut depth = 0usize;
    let mut rank = 0u8;
    let mut hit_mnv = false;

    // Children of the node at `depth`, best first (ties go to v = 0), with
    // their path metrics.
    let child = |state: &mut DemapperState,
                 v: &[u8],
                 parent: f64,
                 depth: usize,
                 rank: u8|
     -> Result<Child> {
        let z = state.demap()?;
        let s = conv_output_with_zero(v, depth, poly);
        let b = bias[depth];
        if !mask[depth] {
            return Ok(Child {
                gamma: parent + branch_metric(z, s, b),
                v: 0,
                u: s,
            });
        }
        let g0 = parent + branch_metric(z, s, b);
        let g1 = parent + branch_metric(z, s ^ 1, b);
        let best_is_one = g1 > g0;
        let take_one = best_is_one == (rank == 0);
        Ok(if take_one {
            Child {
                gamma: g1,
                v: 1,
                u: s ^ 1,
            }
        } else {
            Child {
                gamma: g0,
                v: 0,
                u: s,
            }
        })
    };

    while depth < n {
        if config.mnv.is_some_and(|m| visits >= m) {
            hit_mnv = true;
            break;
        }
        let threshold = k as f64 * delta;
        let c = child(&mut state, &v, gamma[depth], depth, rank)?;
        if c.gamma >= threshold {
            v[depth] = c.v;
            state.advance(c.u)?;
            rank_taken[depth] = rank;
            gamma[depth + 1] = c.gamma;
            depth += 1;
            visits += 1;
            visits_by_depth[depth - 1] += 1;
            observer.on_visit(&v[..depth], c.gamma, threshold);
            if gamma[depth - 1] < threshold + delta {
                k = k.max(largest_multiple_below(c.gamma, delta));
            }
            rank = 0;
            continue;
        }
        if forced_rewalk(&gamma, &mask, depth, threshold) {
            k -= 1;
            rank = 0;
            continue;
        }
        loop {
            if depth == 0 || gamma[depth - 1] < threshold {
                k -= 1;
                rank = 0;
                break;
            }
            depth -= 1;
            state.retreat()?;
            if mask[depth] && rank_taken[depth] == 0 {
                rank = 1;
                break;
            }
        }
    }

    if hit_mnv {
        while depth < n {
            let c = child(&mut state, &v, gamma[depth], depth, 0)?;
            v[depth] = c.v;
            state.advance(c.u)?;
            gamma[depth + 1] = c.gamma;
            depth += 1;
        }
    }

    let u_hat = state.decided_bits().to_vec();
    Ok(DecodeRecord {
        v_hat: v,
        u_hat,
        success: None,
        visits_total: visits,
        visits_by_depth,
        anv: visits as f64 / n as f64,
        hit_mnv,
        final_metric: gamma[n],
        trace: config
            .trace
            .then(|| gamma.iter().copied().enumerate().collect()),
    })
}

// u_depth for v_depth = 0, given v_0..v_{depth-1}.
#[inline]
fn conv_output_with_zero(v: &[u8], depth: usize, poly: &[u8]) -> u8 {
    // v[depth] may hold a stale value from an abandoned branch; c_0 is skipped.
    let mut acc = 0u8;
    for (j, &c) in poly.iter().enumerate().skip(1).take(depth) {
        acc ^= c & v[depth - j];
    }
    debug_assert!(
        depth == 0 || {
            let mut tmp = v[..=depth].to_vec();
            tmp[depth] = 0;
            conv_output(&tmp, depth, poly) == acc
        }
    );
    acc
}

/// True when backing up from `depth` would only traverse single-child nodes
/// before the threshold has to be lowered anyway.
fn forced_rewalk(gamma: &[f64], mask: &[bool], depth: usize, threshold: f64) -> bool {
    let mut j = depth;
    loop {
        if j == 0 || gamma[j - 1] < threshold {
            return true;
        }
        if mask[j - 1] {
            return false;
        }
        j -= 1;
    }
}

/// Largest integer `k` with `k * delta <= gamma`.
fn largest_multiple_below(gamma: f64, delta: f64) -> i64 {
    let mut k = (gamma / delta).floor() as i64;
    if ((k + 1) as f64) * delta <= gamma {
        k += 1;
    }
    if (k as f64) * delta > gamma {
        k -= 1;
    }
    k
}

/// Upper bound on how many times a node with metric `gamma_tilde` can be
/// entered, given the minimum metric `gamma_min` along the correct path.
///
/// Thresholds at successive entries drop by at least `delta` and never go
/// below `T_min > gamma_min - delta`, giving
/// `theta <= ceil((gamma_tilde - gamma_min) / delta + 1)`.
pub fn revisit_bound(gamma_tilde: f64, gamma_min: f64, delta: f64) -> u64 {
    let x = (gamma_tilde - gamma_min) / delta + 1.0;
    if x <= 0.0 {
        0
    } else {
        x.ceil() as u64
    }
}

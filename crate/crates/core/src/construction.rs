//! Gaussian-approximation construction of the polarized BI-AWGN bit channels.
//!
//! Two independent recursions run down the depth-`log2 N` polarization tree:
//! the J-function recursion on mutual information, and LLR-mean evolution via
//! the `phi` function, which feeds the Bhattacharyya parameters and cutoff rates.
//! Leaves are in natural order `u_1..u_N` (no bit reversal), so table index `i`
//! is the decoding depth of bit `u_{i+1}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{SnrConvention, SnrSpec};
use crate::error::check_power_of_two;
use crate::{Error, Result, LN_2};

const J_H1: f64 = 0.3073;
const J_H2: f64 = 0.8935;
const J_H3: f64 = 1.1064;

const QUAD_REL_TOL: f64 = 1e-12;
const QUAD_MAX_LEVELS: u32 = 16;
const PHI_INV_TOL: f64 = 1e-10;
const E0_TOL: f64 = 1e-8;

/// Noise description of the BI-AWGN channel at the root of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub sigma2: f64,
    /// Mean of the channel LLR, `2 / sigma2` nats.
    pub llr_mean: f64,
}

impl ChannelParams {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance {sigma2} must be positive"
            )));
        }
        Ok(ChannelParams {
            sigma2,
            llr_mean: 2.0 / sigma2,
        })
    }

    pub fn from_snr(snr: &SnrSpec) -> Result<Self> {
        Self::new(snr.sigma2())
    }

    /// Standard deviation of the channel LLR, `2 / sigma`.
    pub fn llr_std(&self) -> f64 {
        2.0 / self.sigma2.sqrt()
    }
}

// `-log2(1 - x)` for x in [0, 1], accurate for small x.
fn neg_log2_one_minus(x: f64) -> f64 {
    -(-x).ln_1p() / LN_2
}

/// Closed-form approximation of the J function (mutual information of a
/// consistent Gaussian LLR with standard deviation `t`).
pub fn j_fun(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "J argument {t} must be nonnegative"
        )));
    }
    let a = J_H1 * t.powf(2.0 * J_H2);
    // 1 - 2^-a
    let q = -(-a * LN_2).exp_m1();
    Ok(q.powf(J_H3))
}

/// `1 - J(t)`, keeping precision where `J(t)` rounds to 1.
pub fn j_fun_complement(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "J argument {t} must be nonnegative"
        )));
    }
    let a = J_H1 * t.powf(2.0 * J_H2);
    let p = (-a * LN_2).exp();
    Ok(-(J_H3 * (-p).ln_1p()).exp_m1())
}

/// Inverse of [`j_fun`]; `I = 1` maps to infinity.
pub fn j_inv(i: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&i) {
        return Err(Error::InvalidParameter(format!(
            "J^-1 argument {i} not in [0, 1]"
        )));
    }
    let x = i.powf(1.0 / J_H3);
    let a = neg_log2_one_minus(x);
    Ok((a / J_H1).powf(1.0 / (2.0 * J_H2)))
}

/// Inverse of [`j_fun_complement`]: returns `t` with `1 - J(t) = c`.
pub fn j_inv_complement(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!(
            "J^-1 complement argument {c} not in [0, 1]"
        )));
    }
    // x = (1 - c)^(1/H3); 1 - x computed without cancellation.
    let one_minus_x = -((-c).ln_1p() / J_H3).exp_m1();
    let a = -one_minus_x.ln() / LN_2;
    Ok((a / J_H1).powf(1.0 / (2.0 * J_H2)))
}

/// Check-node (worse channel) update of the capacity recursion.
pub fn capacity_check(i: f64) -> f64 {
    let t = j_inv((1.0 - i).clamp(0.0, 1.0)).expect("clamped");
    1.0 - j_fun(std::f64::consts::SQRT_2 * t).expect("nonnegative")
}

/// Variable-node (better channel) update of the capacity recursion.
pub fn capacity_variable(i: f64) -> f64 {
    let t = j_inv(i.clamp(0.0, 1.0)).expect("clamped");
    j_fun(std::f64::consts::SQRT_2 * t).expect("nonnegative")
}

fn polarize<F, G>(root: f64, n_code: usize, check: F, variable: G) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut level = vec![root];
    while level.len() < n_code {
        level = level
            .iter()
            .flat_map(|&v| [check(v), variable(v)])
            .collect();
    }
    level
}

/// Bit-channel capacities `I(W_N^(i))` in bits, natural order.
///
/// The root is `J(2/sigma)`, the LLR standard deviation of the channel.
pub fn capacity_recursion(channel: &ChannelParams, n_code: usize) -> Result<Vec<f64>> {
    check_power_of_two(n_code)?;
    let root = j_fun(channel.llr_std())?;
    Ok(polarize(root, n_code, capacity_check, capacity_variable))
}

/// Adaptive composite trapezoid rule: the step is halved until two successive
/// estimates agree to `rel_tol`.
fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let mut n = 64usize;
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..n).map(|k| f(a + k as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..QUAD_MAX_LEVELS {
        let mids: f64 = (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        change = (next - estimate).abs();
        estimate = next;
        if change <= rel_tol * next.abs() || next == 0.0 {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature(change / estimate.abs()))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `phi(t) = 1 - E[tanh(z/2)]` for `z ~ N(t, 2t)`; `phi(t) = 1` for `t <= 0`.
pub fn phi(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let s = (2.0 * t).sqrt();
    // 1 - tanh(z/2) = 2 / (1 + e^z); integrate over the standardized variable.
    let integrand = |x: f64| {
        let z = t + s * x;
        (-0.5 * x * x - softplus(z) + LN_2 - LN_SQRT_2PI).exp()
    };
    // The lower tail reaches the z < 0 region that dominates for large t.
    trapezoid(integrand, -12.0 - s, 12.0, QUAD_REL_TOL).expect("phi quadrature converges")
}

/// Inverse of [`phi`] by bisection.
pub fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return f64::INFINITY;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while phi(hi) > y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return f64::INFINITY;
        }
    }
    while hi - lo > PHI_INV_TOL {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Check-node update of the LLR mean: `phi^-1(1 - (1 - phi(m))^2)`.
pub fn mean_check(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let p = phi(m);
    if p < 1e-290 {
        // phi(t) ~ exp(-t/4) in the tail: doubling phi shifts t by 4 ln 2.
        return (m - 4.0 * LN_2).max(0.0);
    }
    phi_inv(p * (2.0 - p))
}

/// Bit-channel LLR means `m_N^(i)` in nats, natural order.
pub fn mean_evolution(channel: &ChannelParams, n_code: usize) -> Result<Vec<f64>> {
    check_power_of_two(n_code)?;
    Ok(polarize(channel.llr_mean, n_code, mean_check, |m| 2.0 * m))
}

/// Bhattacharyya parameters `exp(-m/4)` and cutoff rates `log2(2/(1+Z))`.
pub fn z_and_cutoff(means: &[f64]) -> (Vec<f64>, Vec<f64>) {
    means
        .iter()
        .map(|&m| {
            let z = (-m.max(0.0) / 4.0).exp();
            (z, cutoff_from_z(z))
        })
        .unzip()
}

pub(crate) fn cutoff_from_z(z: f64) -> f64 {
    1.0 - (1.0 + z).log2()
}

/// Gallager `E0(rho)` in bits of a symmetric Gaussian-LLR bit channel with
/// LLR mean `mean`, under uniform inputs.
///
/// Evaluated as `-log2 E[(1/2 (1 + e^{-L/(1+rho)}))^{1+rho}]`, `L ~ N(mean, 2 mean)`.
pub fn e0_rho(mean: f64, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !(mean >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "E0 needs mean >= 0 and rho >= 0 (got {mean}, {rho})"
        )));
    }
    if rho == 0.0 || mean == 0.0 {
        return Ok(0.0);
    }
    let s = (2.0 * mean).sqrt();
    let p = 1.0 + rho;
    let integrand = |x: f64| {
        let l = mean + s * x;
        (-0.5 * x * x - LN_SQRT_2PI + p * (softplus(-l / p) - LN_2)).exp()
    };
    let expectation = trapezoid(integrand, -12.0 - s, 12.0, E0_TOL)?;
    Ok((-expectation.ln() / LN_2).max(0.0))
}

/// Per-index construction outputs for one channel and block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitChannelTable {
    pub n_code: usize,
    pub capacity: Vec<f64>,
    pub mean: Vec<f64>,
    pub bhattacharyya: Vec<f64>,
    pub cutoff: Vec<f64>,
    pub design_snr_db: f64,
    pub snr_convention: SnrConvention,
    pub rate: f64,
}

impl BitChannelTable {
    pub fn build(snr: &SnrSpec, n_code: usize) -> Result<Self> {
        let channel = ChannelParams::from_snr(snr)?;
        let capacity = capacity_recursion(&channel, n_code)?;
        let mean = mean_evolution(&channel, n_code)?;
        let (bhattacharyya, cutoff) = z_and_cutoff(&mean);
        Ok(BitChannelTable {
            n_code,
            capacity,
            mean,
            bhattacharyya,
            cutoff,
            design_snr_db: snr.snr_db,
            snr_convention: snr.convention,
            rate: snr.rate,
        })
    }

    pub fn snr(&self) -> SnrSpec {
        SnrSpec {
            snr_db: self.design_snr_db,
            rate: self.rate,
            convention: self.snr_convention,
        }
    }

    /// `E0(rho)` for every bit channel (the cutoff column when `rho == 1`).
    pub fn e0_column(&self, rho: f64) -> Result<Vec<f64>> {
        if rho == 1.0 {
            return Ok(self.cutoff.clone());
        }
        self.mean.iter().map(|&m| e0_rho(m, rho)).collect()
    }

    /// Serializes the table in the cache-file format.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!(
            "{},{},{},{}\n",
            self.n_code, self.design_snr_db, self.snr_convention, self.rate
        );
        for i in 0..self.n_code {
            writeln!(
                out,
                "{},{:.11e},{:.11e},{:.11e},{:.11e}",
                i + 1,
                self.capacity[i],
                self.mean[i],
                self.bhattacharyya[i],
                self.cutoff[i]
            )
            .expect("write to String");
        }
        out
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Cache(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.len() != 4 {
            return Err(bad("header must be N,snr_db,convention,rate"));
        }
        let n_code: usize = fields[0].trim().parse().map_err(|_| bad("bad N"))?;
        let design_snr_db: f64 = fields[1].trim().parse().map_err(|_| bad("bad snr_db"))?;
        let snr_convention: SnrConvention = fields[2]
            .trim()
            .parse()
            .map_err(|_| bad("bad convention"))?;
        let rate: f64 = fields[3].trim().parse().map_err(|_| bad("bad rate"))?;
        let mut table = BitChannelTable {
            n_code,
            capacity: Vec::with_capacity(n_code),
            mean: Vec::with_capacity(n_code),
            bhattacharyya: Vec::with_capacity(n_code),
            cutoff: Vec::with_capacity(n_code),
            design_snr_db,
            snr_convention,
            rate,
        };
        for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(bad("row must have 5 columns"));
            }
            let index: usize = cols[0].trim().parse().map_err(|_| bad("bad index"))?;
            if index != row + 1 {
                return Err(bad("rows out of order"));
            }
            let val = |k: usize| cols[k].trim().parse::<f64>().map_err(|_| bad("bad value"));
            table.capacity.push(val(1)?);
            table.mean.push(val(2)?);
            table.bhattacharyya.push(val(3)?);
            table.cutoff.push(val(4)?);
        }
        if table.capacity.len() != n_code {
            return Err(bad("row count does not match N"));
        }
        Ok(table)
    }

    fn cache_file_name(snr: &SnrSpec, n_code: usize) -> String {
        format!(
            "bitchannels_N{}_{}dB_{}_R{}.csv",
            n_code, snr.snr_db, snr.convention, snr.rate
        )
    }

    /// Loads the table from `dir` or builds and stores it.
    ///
    /// The returned values are always the ones parsed back from the cache text, so
    /// a first (building) run and later (loading) runs see identical numbers.
    pub fn cached(dir: &Path, snr: &SnrSpec, n_code: usize) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(snr, n_code));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(table) = Self::from_cache_str(&text) {
                if table.n_code == n_code && table.snr() == *snr {
                    return Ok(table);
                }
            }
        }
        let text = Self::build(snr, n_code)?.to_cache_string();
        fs::create_dir_all(dir)?;
        fs::write(&path, &text)?;
        Self::from_cache_str(&text)
    }

    /// Builds the table, rounded exactly as a cache round-trip would round it.
    pub fn build_normalized(snr: &SnrSpec, n_code: usize) -> Result<Self> {
        Self::from_cache_str(&Self::build(snr, n_code)?.to_cache_string())
    }
}

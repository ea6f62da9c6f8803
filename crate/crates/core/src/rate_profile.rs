//! Reed-Muller rate profiles and partial-rate bookkeeping.
//!
//! Indices are 1-based throughout, matching `u_1..u_N`.

use serde::{Deserialize, Serialize};

use crate::error::check_power_of_two;
use crate::{Error, Result};

/// Connection polynomial used by default, given in octal.
pub const DEFAULT_CONN_POLY_OCTAL: &str = "3211";

/// Code parameters defining the irregular PAC code tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub n_code: usize,
    pub k_info: usize,
    /// Sorted 1-based information indices.
    pub info_set: Vec<usize>,
    /// Convolution taps `c_0..c_m`, `c_0 = 1`.
    pub conn_poly: Vec<u8>,
}

impl CodeSpec {
    pub fn new(n_code: usize, info_set: Vec<usize>, conn_poly: Vec<u8>) -> Result<Self> {
        check_power_of_two(n_code)?;
        let mut sorted = info_set;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCode("duplicate information index".into()));
        }
        if sorted.iter().any(|&i| i == 0 || i > n_code) {
            return Err(Error::InvalidCode(format!(
                "information index outside 1..={n_code}"
            )));
        }
        if conn_poly.first() != Some(&1) {
            return Err(Error::InvalidCode(
                "connection polynomial must start with c0 = 1".into(),
            ));
        }
        if conn_poly.iter().any(|&c| c > 1) {
            return Err(Error::InvalidCode(
                "connection polynomial must be binary".into(),
            ));
        }
        Ok(CodeSpec {
            n_code,
            k_info: sorted.len(),
            info_set: sorted,
            conn_poly,
        })
    }

    /// RM-profiled code with the default connection polynomial.
    pub fn reed_muller(n_code: usize, k_info: usize, tie_break: Option<&[f64]>) -> Result<Self> {
        let info = rm_profile(n_code, k_info, tie_break)?;
        Self::new(n_code, info, conn_poly_from_octal(DEFAULT_CONN_POLY_OCTAL)?)
    }

    pub fn rate(&self) -> f64 {
        self.k_info as f64 / self.n_code as f64
    }

    /// `mask[j]` is true when 0-based position `j` carries data.
    pub fn info_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_code];
        for &i in &self.info_set {
            mask[i - 1] = true;
        }
        mask
    }
}

/// Parses an octal connection polynomial (most significant digit is `c_0`).
///
/// Leading zero bits of the first digit are dropped, so "3211" gives
/// `1101 0001 001`.
pub fn conn_poly_from_octal(octal: &str) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(octal.len() * 3);
    for ch in octal.trim().chars() {
        let d = ch
            .to_digit(8)
            .ok_or_else(|| Error::InvalidParameter(format!("'{ch}' is not an octal digit")))?;
        bits.extend([(d >> 2) & 1, (d >> 1) & 1, d & 1].map(|b| b as u8));
    }
    let first_one = bits
        .iter()
        .position(|&b| b == 1)
        .ok_or_else(|| Error::InvalidParameter("connection polynomial is zero".into()))?;
    Ok(bits.split_off(first_one))
}

/// Row weight exponent of 1-based index `i`: `popcount(i - 1)`.
pub fn rm_weight(i: usize) -> u32 {
    (i - 1).count_ones()
}

/// Picks the `k_info` indices of largest row weight `2^popcount(i-1)`.
///
/// Ties inside the cut weight class go to the larger `tie_break` value (the
/// bit-channel LLR mean at the design SNR), then to the larger index.
pub fn rm_profile(n_code: usize, k_info: usize, tie_break: Option<&[f64]>) -> Result<Vec<usize>> {
    check_power_of_two(n_code)?;
    if k_info > n_code {
        return Err(Error::MessageLength {
            k: k_info,
            n: n_code,
        });
    }
    if let Some(tb) = tie_break {
        if tb.len() != n_code {
            return Err(Error::LengthMismatch {
                expected: n_code,
                actual: tb.len(),
            });
        }
    }
    let score = |i: usize| tie_break.map_or(0.0, |tb| tb[i - 1]);
    let mut order: Vec<usize> = (1..=n_code).collect();
    order.sort_by(|&a, &b| {
        rm_weight(b)
            .cmp(&rm_weight(a))
            .then_with(|| score(b).total_cmp(&score(a)))
            .then_with(|| b.cmp(&a))
    });
    let mut set: Vec<usize> = order.into_iter().take(k_info).collect();
    set.sort_unstable();
    Ok(set)
}

/// Prefix counts `lambda_i` and partial rates `R_i = lambda_i / i`, for `i = 1..=N`
/// stored at 0-based position `i - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialRateProfile {
    pub lambda: Vec<usize>,
    pub rate: Vec<f64>,
}

pub fn partial_rates(info_set: &[usize], n_code: usize) -> PartialRateProfile {
    let mut mask = vec![false; n_code];
    for &i in info_set {
        mask[i - 1] = true;
    }
    let lambda: Vec<usize> = mask
        .iter()
        .scan(0usize, |acc, &m| {
            *acc += usize::from(m);
            Some(*acc)
        })
        .collect();
    let rate = lambda
        .iter()
        .enumerate()
        .map(|(j, &l)| l as f64 / (j + 1) as f64)
        .collect();
    PartialRateProfile { lambda, rate }
}

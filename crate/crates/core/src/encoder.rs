//! PAC encoding chain: `d -> v` (rate profile), `v -> u` (convolution), `u -> x` (polar transform).

use crate::error::check_power_of_two;
use crate::rate_profile::CodeSpec;
use crate::{Error, Result};

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().find(|&&b| b > 1) {
        Some(&b) => Err(Error::InvalidBit(b)),
        None => Ok(()),
    }
}

/// Places `data` on the information positions; frozen positions are zero.
pub fn insert_profile(data: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    if data.len() != spec.k_info {
        return Err(Error::LengthMismatch {
            expected: spec.k_info,
            actual: data.len(),
        });
    }
    check_bits(data)?;
    let mut v = vec![0u8; spec.n_code];
    for (&i, &d) in spec.info_set.iter().zip(data) {
        v[i - 1] = d;
    }
    Ok(v)
}

/// Reads the data bits back off the information positions.
pub fn extract_data(v: &[u8], spec: &CodeSpec) -> Vec<u8> {
    spec.info_set.iter().map(|&i| v[i - 1]).collect()
}

/// Output bit `u_i` given the carrier prefix `v_0..=v_i`.
#[inline]
pub(crate) fn conv_output(v: &[u8], i: usize, conn_poly: &[u8]) -> u8 {
    let mut acc = 0u8;
    for (j, &c) in conn_poly.iter().enumerate().take(i + 1) {
        acc ^= c & v[i - j];
    }
    acc
}

/// Rate-1 convolution `u = v T` with the upper-triangular Toeplitz matrix whose
/// first row is `(c_0, .., c_m, 0, ..)`: `u_i = XOR_j c_j v_{i-j}`.
pub fn conv_encode(v: &[u8], conn_poly: &[u8]) -> Vec<u8> {
    (0..v.len()).map(|i| conv_output(v, i, conn_poly)).collect()
}

/// In-place `x = u F^{(x)n}` with `F = [[1,0],[1,1]]`.
pub fn polar_transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, &b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= b;
            }
        }
        half *= 2;
    }
}

/// Polar transform; an involution over GF(2).
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    check_power_of_two(u.len())?;
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x);
    Ok(x)
}

/// Full chain from data bits to the codeword.
pub fn encode(data: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    let v = insert_profile(data, spec)?;
    let mut x = conv_encode(&v, &spec.conn_poly);
    polar_transform_in_place(&mut x);
    Ok(x)
}

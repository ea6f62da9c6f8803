//! Successive-cancellation demapper supporting forward and backward moves.
//!
//! LLRs for every node of the SC tree are kept in an `(log2 N + 1) x N` array:
//! a node at level `s` covering bits `[a, a + 2^s)` lives at `llr[s][a..a + 2^s]`.
//! Its values depend only on the channel and on the decided prefix `u[..a]`.
//! The decided-bit vector is authoritative; a node is marked stale as soon as
//! the prefix it depends on is retracted, and stale nodes are recomputed on the
//! next [`DemapperState::demap`]. Recomputation is a pure function of
//! `(channel, prefix)`, so outputs do not depend on the walk that led there.

use crate::encoder::polar_transform_in_place;
use crate::error::check_power_of_two;
use crate::{Error, Result};

/// Saturation level for all LLRs, in nats.
pub const LLR_CAP: f64 = 200.0;

/// Check-node rule used by the demapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckRule {
    /// Exact box-plus.
    #[default]
    Exact,
    /// Min-sum approximation; for speed experiments only.
    MinSum,
}

/// Exact check-node update `2 atanh(tanh(a/2) tanh(b/2))`.
#[inline]
pub fn f_llr(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    (sign * m + corr).clamp(-m, m)
}

#[inline]
pub fn f_llr_min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Bit-node update `b + (1 - 2u) a`.
#[inline]
pub fn g_llr(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// Per-trial demapper state.
#[derive(Debug, Clone)]
pub struct DemapperState {
    n: usize,
    levels: usize,
    /// `(levels + 1) * n` LLRs; the top level holds the channel LLRs.
    llr: Vec<f64>,
    /// `valid[s * n + a]` for a node at level `s < levels` starting at `a`.
    valid: Vec<bool>,
    decided: Vec<u8>,
    scratch: Vec<u8>,
    rule: CheckRule,
    cap: f64,
}

impl DemapperState {
    pub fn new(channel_llrs: &[f64]) -> Result<Self> {
        Self::with_options(channel_llrs, CheckRule::Exact, LLR_CAP)
    }

    pub fn with_options(channel_llrs: &[f64], rule: CheckRule, cap: f64) -> Result<Self> {
        let n = channel_llrs.len();
        check_power_of_two(n)?;
        if !(cap > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "LLR cap {cap} must be positive"
            )));
        }
        let levels = n.trailing_zeros() as usize;
        let mut llr = vec![0.0; (levels + 1) * n];
        for (dst, &l) in llr[levels * n..].iter_mut().zip(channel_llrs) {
            *dst = if l.is_nan() { 0.0 } else { l.clamp(-cap, cap) };
        }
        Ok(DemapperState {
            n,
            levels,
            llr,
            valid: vec![false; levels * n],
            decided: Vec::with_capacity(n),
            scratch: vec![0; n / 2 + 1],
            rule,
            cap,
        })
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    /// Number of decided bits; the next [`demap`](Self::demap) is for bit `depth()`.
    pub fn depth(&self) -> usize {
        self.decided.len()
    }

    pub fn decided_bits(&self) -> &[u8] {
        &self.decided
    }

    /// SC LLR of the next undecided bit, given the decided prefix.
    pub fn demap(&mut self) -> Result<f64> {
        let d = self.decided.len();
        let n = self.n;
        if d >= n {
            return Err(Error::DepthOutOfBounds { depth: d, n });
        }
        // Validity is closed under ancestors, so scan up to the first valid node.
        let mut top = 0;
        while top < self.levels && !self.valid[top * n + (d & !((1 << top) - 1))] {
            top += 1;
        }
        for s in (0..top).rev() {
            let h = 1usize << s;
            let a = d & !(h - 1);
            let p = d & !(2 * h - 1);
            let (below, above) = self.llr.split_at_mut((s + 1) * n);
            let parent = &above[p..p + 2 * h];
            let child = &mut below[s * n + a..s * n + a + h];
            if a == p {
                match self.rule {
                    CheckRule::Exact => {
                        for j in 0..h {
                            child[j] = f_llr(parent[j], parent[h + j]);
                        }
                    }
                    CheckRule::MinSum => {
                        for j in 0..h {
                            child[j] = f_llr_min_sum(parent[j], parent[h + j]);
                        }
                    }
                }
            } else {
                let ps = &mut self.scratch[..h];
                ps.copy_from_slice(&self.decided[p..p + h]);
                polar_transform_in_place(ps);
                let cap = self.cap;
                for j in 0..h {
                    child[j] = g_llr(parent[j], parent[h + j], ps[j]).clamp(-cap, cap);
                }
            }
            self.valid[s * n + a] = true;
        }
        Ok(self.llr[d])
    }

    /// Appends a decided bit.
    pub fn advance(&mut self, u_bit: u8) -> Result<()> {
        if self.decided.len() >= self.n {
            return Err(Error::DepthOutOfBounds {
                depth: self.decided.len(),
                n: self.n,
            });
        }
        if u_bit > 1 {
            return Err(Error::InvalidBit(u_bit));
        }
        self.decided.push(u_bit);
        Ok(())
    }

    /// Removes the last decided bit and returns it.
    pub fn retreat(&mut self) -> Result<u8> {
        let depth = self.decided.len();
        let bit = self.decided.pop().ok_or(Error::DepthOutOfBounds {
            depth: 0,
            n: self.n,
        })?;
        if depth < self.n {
            // Nodes starting at the old depth depended on the retracted bit.
            for s in 0..self.levels {
                if depth & ((1 << s) - 1) == 0 {
                    self.valid[s * self.n + depth] = false;
                }
            }
        }
        Ok(bit)
    }

    /// Rewinds to the root while keeping the channel LLRs.
    pub fn reset(&mut self) {
        self.decided.clear();
        self.valid.iter_mut().for_each(|v| *v = false);
    }
}

/// Bit-channel LLRs along the correct path: `z_i` given the true prefix `u[..i]`.
pub fn genie_llrs(channel_llrs: &[f64], u: &[u8]) -> Result<Vec<f64>> {
    if u.len() != channel_llrs.len() {
        return Err(Error::LengthMismatch {
            expected: channel_llrs.len(),
            actual: u.len(),
        });
    }
    let mut state = DemapperState::new(channel_llrs)?;
    let mut out = Vec::with_capacity(u.len());
    for &bit in u {
        out.push(state.demap()?);
        state.advance(bit)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_values() {
        assert!((f_llr(1.0, 1.0) - 2.0 * (0.5f64.tanh().powi(2)).atanh()).abs() < 1e-14);
        assert!((f_llr(1.0, 1.0) - 0.4338).abs() < 1e-4);
        assert_eq!(f_llr(2.3, 0.0), 0.0);
        assert!((f_llr(LLR_CAP, -3.7) + 3.7).abs() < 1e-12);
        assert!((f_llr(-LLR_CAP, -3.7) - 3.7).abs() < 1e-12);
        for &(a, b) in &[(0.3, -5.0), (-7.0, -2.0), (40.0, 41.0), (1e-3, 5.0)] {
            let f = f_llr(a, b);
            assert!(f.abs() <= a.abs().min(b.abs()));
            assert_eq!(f.signum(), (a * b).signum());
        }
        assert_eq!(f_llr_min_sum(-2.0, 3.0), -2.0);
    }

    #[test]
    fn g_values() {
        assert_eq!(g_llr(2.0, 3.0, 0), 5.0);
        assert_eq!(g_llr(2.5, 2.5, 1), 0.0);
        assert_eq!(g_llr(2.0, 3.0, 1), 1.0);
    }

    #[test]
    fn small_blocks() {
        let mut s = DemapperState::new(&[1.7]).unwrap();
        assert_eq!(s.demap().unwrap(), 1.7);
        s.advance(0).unwrap();
        assert!(s.demap().is_err());
        assert!(s.advance(0).is_err());

        let mut s = DemapperState::new(&[1.2, -0.4]).unwrap();
        assert_eq!(s.demap().unwrap(), f_llr(1.2, -0.4));
        s.advance(1).unwrap();
        assert_eq!(s.demap().unwrap(), g_llr(1.2, -0.4, 1));
    }

    #[test]
    fn advance_then_retreat_restores_output() {
        let llrs = [0.3, -1.2, 2.2, 0.1, -0.7, 1.9, 0.4, -2.5];
        let mut s = DemapperState::new(&llrs).unwrap();
        s.advance(1).unwrap();
        s.advance(0).unwrap();
        let before = s.demap().unwrap();
        s.advance(1).unwrap();
        s.demap().unwrap();
        assert_eq!(s.retreat().unwrap(), 1);
        assert_eq!(s.demap().unwrap().to_bits(), before.to_bits());
        s.reset();
        assert!(s.retreat().is_err());
        assert!(s.advance(2).is_err());
    }

    #[test]
    fn noiseless_correct_decisions_have_correct_signs() {
        use crate::encoder::polar_transform;
        let u = [0u8, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1];
        let x = polar_transform(&u).unwrap();
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| if b == 0 { 30.0 } else { -30.0 })
            .collect();
        let z = genie_llrs(&llrs, &u).unwrap();
        // The first bit-channel (all check nodes) carries the least reliability.
        for (i, (&zi, &ui)) in z.iter().zip(&u).enumerate() {
            assert_eq!(zi < 0.0, ui == 1, "bit {i}");
        }
        assert!(z[15].abs() > z[0].abs());
    }
}

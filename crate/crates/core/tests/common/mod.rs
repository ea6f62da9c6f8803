//! Independent reference implementations shared by the integration tests.
//! Everything here is written from the definitions, without the library's
//! recursions, caches or numerical shortcuts.
#![allow(dead_code)]

use std::collections::HashMap;

use pac_core::fano::VisitObserver;
use pac_core::rate_profile::CodeSpec;

pub fn boxplus(a: f64, b: f64) -> f64 {
    let s = a.signum() * b.signum();
    s * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

pub fn polar(u: &[u8]) -> Vec<u8> {
    if u.len() == 1 {
        return u.to_vec();
    }
    let h = u.len() / 2;
    let a: Vec<u8> = (0..h).map(|j| u[j] ^ u[j + h]).collect();
    let mut x = polar(&a);
    x.extend(polar(&u[h..]));
    x
}

/// LLR of `u_i` given `u_0..u_{i-1}`, by direct recursion.
pub fn sc_llr(l: &[f64], u: &[u8], i: usize) -> f64 {
    if l.len() == 1 {
        return l[0];
    }
    let h = l.len() / 2;
    if i < h {
        let lf: Vec<f64> = (0..h).map(|j| boxplus(l[j], l[j + h])).collect();
        sc_llr(&lf, u, i)
    } else {
        let s = polar(&u[..h]);
        let lg: Vec<f64> = (0..h)
            .map(|j| l[j + h] + if s[j] == 0 { l[j] } else { -l[j] })
            .collect();
        sc_llr(&lg, &u[h..], i - h)
    }
}

pub fn metric(llr: f64, u: u8, b: f64) -> f64 {
    let x = if u == 0 { llr } else { -llr };
    1.0 - (-x).exp().ln_1p() / std::f64::consts::LN_2 - b
}

pub fn conv(v: &[u8], poly: &[u8]) -> Vec<u8> {
    (0..v.len())
        .map(|i| (0..poly.len().min(i + 1)).fold(0, |acc, j| acc ^ (poly[j] & v[i - j])))
        .collect()
}

/// The code tree of one received block, with metrics recomputed from scratch.
pub struct Tree<'a> {
    pub llrs: &'a [f64],
    pub spec: &'a CodeSpec,
    pub bias: &'a [f64],
}

impl Tree<'_> {
    pub fn gamma(&self, path: &[u8]) -> f64 {
        let u = conv(path, &self.spec.conn_poly);
        (0..path.len())
            .map(|i| metric(sc_llr(self.llrs, &u, i), u[i], self.bias[i]))
            .sum()
    }

    /// Children of `path`, best first, ties to 0.
    pub fn children(&self, path: &[u8]) -> Vec<(Vec<u8>, f64)> {
        let d = path.len();
        let mut out = Vec::new();
        let bits: &[u8] = if self.spec.info_set.contains(&(d + 1)) {
            &[0, 1]
        } else {
            &[0]
        };
        for &b in bits {
            let mut p = path.to_vec();
            p.push(b);
            let g = self.gamma(&p);
            out.push((p, g));
        }
        if out.len() == 2 && out[1].1 > out[0].1 {
            out.swap(0, 1);
        }
        out
    }
}

/// Counts entries per node and remembers each node's metric.
#[derive(Default)]
pub struct NodeCounter {
    pub entries: HashMap<Vec<u8>, (u64, f64)>,
}

impl VisitObserver for NodeCounter {
    fn on_visit(&mut self, path: &[u8], gamma: f64, _threshold: f64) {
        let e = self.entries.entry(path.to_vec()).or_insert((0, gamma));
        e.0 += 1;
    }
}

/// `ln sum_{u_{i+1..}} P(y | u_i = 0, ..) / sum P(y | u_i = 1, ..)` given the prefix.
pub fn brute_force_llr(llrs: &[f64], prefix: &[u8]) -> f64 {
    let n = llrs.len();
    let i = prefix.len();
    let free = n - i - 1;
    let mut sums = [Vec::new(), Vec::new()];
    for bit in 0..2u8 {
        for tail in 0..(1usize << free) {
            let mut u = prefix.to_vec();
            u.push(bit);
            u.extend((0..free).map(|j| ((tail >> j) & 1) as u8));
            let x = polar(&u);
            let log_lik: f64 = x
                .iter()
                .zip(llrs)
                .map(|(&b, &l)| if b == 0 { l / 2.0 } else { -l / 2.0 })
                .sum();
            sums[bit as usize].push(log_lik);
        }
    }
    let lse = |v: &[f64]| {
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    };
    lse(&sums[0]) - lse(&sums[1])
}

/// `F^{(x)n}` with `F = [[1,0],[1,1]]`, built by Kronecker products.
pub fn kernel_power(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for r in 0..m {
            for c in 0..m {
                next[r][c] = g[r][c];
                next[r + m][c] = g[r][c];
                next[r + m][c + m] = g[r][c];
            }
        }
        g = next;
    }
    g
}

pub fn vec_mat(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    (0..g[0].len())
        .map(|c| u.iter().zip(g).fold(0, |acc, (&b, row)| acc ^ (b & row[c])))
        .collect()
}

/// Capacity of a consistent Gaussian LLR with standard deviation `t`, by a
/// plain trapezoid over the standardized variable on [-40, 40].
pub fn j_quadrature(t: f64) -> f64 {
    let steps = 80_000;
    let h = 80.0 / steps as f64;
    let mu = t * t / 2.0;
    let mut acc = 0.0;
    for k in 0..=steps {
        let u = -40.0 + k as f64 * h;
        let l = mu + t * u;
        let loss = if l > 0.0 {
            (-l).exp().ln_1p()
        } else {
            -l + l.exp().ln_1p()
        } / std::f64::consts::LN_2;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        acc += w * (-0.5 * u * u).exp() * loss;
    }
    1.0 - acc * h / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E0(1)` of a consistent Gaussian LLR with mean `m`.
pub fn e0_one_closed_form(m: f64) -> f64 {
    (2.0 / (1.0 + (-m / 4.0).exp())).log2()
}

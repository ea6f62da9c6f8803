//! Computable bounds on the wrong-path probability and on the computation
//! of the Fano decoder.
//!
//! All bounds take a Chernoff parameter `r` in (0, 1) and use the bit-channel
//! exponents `E0((1 - r) / r, W_i)` from the construction table. At `r = 1/2`
//! these are the cutoff rates.

use serde::{Deserialize, Serialize};

use crate::construction::BitChannelTable;
use crate::metric::BiasSchedule;
use crate::rate_profile::PartialRateProfile;
use crate::{Error, Result};

/// Slack used when comparing a bias against its admissible ceiling.
const ADMISSIBLE_TOL: f64 = 1e-12;

/// Parameters shared by the bounds for one code/channel/bias configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub r: f64,
    /// Gallager argument `(1 - r) / r`.
    pub rho: f64,
    pub bias: BiasSchedule,
    pub rates: PartialRateProfile,
    pub epsilon: f64,
    /// `None` for a code with no information bits.
    pub beta: Option<f64>,
}

impl BoundParams {
    pub fn new(
        r: f64,
        bias: BiasSchedule,
        table: &BitChannelTable,
        rates: PartialRateProfile,
    ) -> Result<Self> {
        let epsilon = epsilon_margin(r, &bias, table, &rates)?.epsilon;
        let beta = beta_select(&rates).ok();
        Ok(BoundParams {
            r,
            rho: rho_of(r)?,
            bias,
            rates,
            epsilon,
            beta,
        })
    }

    /// Threshold spacing that minimizes the Pareto bound, `beta / r`.
    pub fn delta_optimal(&self) -> Option<f64> {
        self.beta.map(|b| b / self.r)
    }
}

/// Result of [`epsilon_margin`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMargin {
    pub epsilon: f64,
    /// Prefix length `l` (1-based) attaining the minimum.
    pub argmin: usize,
    /// `epsilon > 0`.
    pub valid: bool,
}

fn rho_of(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Chernoff parameter r = {r} must lie in (0, 1)"
        )));
    }
    Ok((1.0 - r) / r)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// `r * sum_{i<=l} (E0_i + b_i)` for every `l`, 0-based.
fn exponent_prefix(r: f64, bias: &BiasSchedule, table: &BitChannelTable) -> Result<Vec<f64>> {
    check_len(table.n_code, bias.b.len())?;
    let e0 = table.e0_column(rho_of(r)?)?;
    let mut acc = 0.0;
    Ok(e0
        .iter()
        .zip(&bias.b)
        .map(|(e, b)| {
            acc += e + b;
            r * acc
        })
        .collect())
}

/// Smallest slack `r * sum (E0_i + b_i) - sum R_i` over all prefixes.
///
/// A negative value means the rate condition fails; it is returned as-is
/// with `valid = false`.
pub fn epsilon_margin(
    r: f64,
    bias: &BiasSchedule,
    table: &BitChannelTable,
    rates: &PartialRateProfile,
) -> Result<EpsilonMargin> {
    let prefix = exponent_prefix(r, bias, table)?;
    check_len(prefix.len(), rates.rate.len())?;
    let mut rate_sum = 0.0;
    let mut best = EpsilonMargin {
        epsilon: f64::INFINITY,
        argmin: 1,
        valid: false,
    };
    for (j, (&p, &rj)) in prefix.iter().zip(&rates.rate).enumerate() {
        rate_sum += rj;
        let slack = p - rate_sum;
        if slack < best.epsilon {
            best.epsilon = slack;
            best.argmin = j + 1;
        }
    }
    best.valid = best.epsilon > 0.0;
    Ok(best)
}

/// Unclipped wrong-path bound at depth `l`; see [`wrong_path_bound`].
pub fn wrong_path_bound_raw(
    l: usize,
    alpha: f64,
    r: f64,
    bias: &BiasSchedule,
    table: &BitChannelTable,
) -> Result<f64> {
    let prefix = exponent_prefix(r, bias, table)?;
    if l == 0 || l > prefix.len() {
        return Err(Error::DepthOutOfBounds {
            depth: l,
            n: prefix.len(),
        });
    }
    Ok((l + 1) as f64 * (-r * alpha - prefix[l - 1]).exp2())
}

/// Bound on the probability that an incorrect path diverging at the root
/// reaches depth `l` with metric at least `alpha` above the correct path's
/// minimum: `(l + 1) 2^{-r alpha} 2^{-r sum_{i<=l} (E0_i + b_i)}`, clipped to 1.
pub fn wrong_path_bound(
    l: usize,
    alpha: f64,
    r: f64,
    bias: &BiasSchedule,
    table: &BitChannelTable,
) -> Result<f64> {
    Ok(wrong_path_bound_raw(l, alpha, r, bias, table)?.clamp(0.0, 1.0))
}

/// Bound on the expected number of visits to depth-1 nodes, `4 / (1 - 2^{-eps})^2`.
pub fn expected_c1_bound(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::BoundCondition(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let d = -(-epsilon * crate::LN_2).exp_m1();
    Ok(4.0 / (d * d))
}

/// Largest Pareto shape `beta` with `beta * l * R_l <= sum_{i<=l} R_i` for all
/// `l` with `R_l > 0`.
pub fn beta_select(rates: &PartialRateProfile) -> Result<f64> {
    let mut sum = 0.0;
    let mut beta = f64::INFINITY;
    for (j, &rl) in rates.rate.iter().enumerate() {
        sum += rl;
        if rl > 0.0 {
            beta = beta.min(sum / ((j + 1) as f64 * rl));
        }
    }
    if beta.is_infinite() {
        return Err(Error::BoundCondition(
            "no information bits, beta is undefined".into(),
        ));
    }
    Ok(beta)
}

/// Unclipped Pareto bound; see [`pareto_ccdf_bound`].
pub fn pareto_ccdf_bound_raw(l: f64, beta: f64, epsilon: f64) -> Result<f64> {
    if !(l >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "L = {l} must be at least 1"
        )));
    }
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::BoundCondition(format!(
            "beta = {beta} must exceed 1"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::BoundCondition(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let d = -(-epsilon / beta * crate::LN_2).exp_m1();
    Ok((4.0 / (l * d * d)).powf(beta))
}

/// Pareto bound on `P(C > L)`: `min(1, (4 / (L (1 - 2^{-eps/beta})^2))^beta)`.
pub fn pareto_ccdf_bound(l: f64, beta: f64, epsilon: f64) -> Result<f64> {
    Ok(pareto_ccdf_bound_raw(l, beta, epsilon)?.min(1.0))
}

/// Probability that a random walk with Chernoff exponent `r0` in (-1, 0) ever
/// crosses the barrier `mu <= 0`: `2^{-r0 mu}`, clipped to [0, 1].
///
/// The schedule and table fix the walk; they are checked for consistency only.
pub fn wald_barrier_bound(
    mu: f64,
    r0: f64,
    bias: &BiasSchedule,
    table: &BitChannelTable,
) -> Result<f64> {
    if !(r0 > -1.0 && r0 < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "r0 = {r0} must lie in (-1, 0)"
        )));
    }
    check_len(table.n_code, bias.b.len())?;
    if mu.is_nan() {
        return Err(Error::InvalidParameter("barrier is NaN".into()));
    }
    Ok((-r0 * mu).exp2().clamp(0.0, 1.0))
}

/// 1-based indices whose bias exceeds `E0(delta, W_i) / delta`.
pub fn inadmissible_indices(
    delta: f64,
    bias: &BiasSchedule,
    table: &BitChannelTable,
) -> Result<Vec<usize>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} must lie in (0, 1]"
        )));
    }
    check_len(table.n_code, bias.b.len())?;
    let e0 = table.e0_column(delta)?;
    Ok(bias
        .b
        .iter()
        .zip(&e0)
        .enumerate()
        .filter(|(_, (&b, &e))| b > e / delta + ADMISSIBLE_TOL)
        .map(|(j, _)| j + 1)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SnrSpec;
    use crate::metric::{build_bias, BiasRule};
    use crate::rate_profile::{partial_rates, CodeSpec};

    fn setup(k: usize) -> (CodeSpec, BitChannelTable) {
        let spec = CodeSpec::reed_muller(32, k, None).unwrap();
        let table = BitChannelTable::build(&SnrSpec::ebn0(2.5, 0.5).unwrap(), 32).unwrap();
        (spec, table)
    }

    #[test]
    fn c1_bound_values() {
        assert!((expected_c1_bound(1.0).unwrap() - 16.0).abs() < 1e-12);
        assert!((expected_c1_bound(60.0).unwrap() - 4.0).abs() < 1e-9);
        assert!(expected_c1_bound(1e-6).unwrap() > 1e12);
        assert!(expected_c1_bound(0.0).is_err());
        assert!(expected_c1_bound(-1.0).is_err());
    }

    #[test]
    fn beta_cases() {
        let rm = partial_rates(&[4, 6, 7, 8], 8);
        // l = 4 gives 0.25 / (4 * 0.25).
        assert!((beta_select(&rm).unwrap() - 0.25).abs() < 1e-15);
        let last = partial_rates(&[8], 8);
        assert!((beta_select(&last).unwrap() - 0.125).abs() < 1e-15);
        assert!(beta_select(&partial_rates(&[], 8)).is_err());
        let full = partial_rates(&(1..=8).collect::<Vec<_>>(), 8);
        assert!(beta_select(&full).unwrap() <= 1.0);
    }

    #[test]
    fn pareto_cases() {
        let d = 1.0 - 2f64.powf(-0.5);
        let want = (4.0 / (100.0 * d * d)).powi(2);
        assert!((pareto_ccdf_bound(100.0, 2.0, 1.0).unwrap() - want).abs() < 1e-12);
        assert!(pareto_ccdf_bound(1e300, 2.0, 1.0).unwrap() < 1e-100);
        assert!(pareto_ccdf_bound(10.0, 1.0, 1.0).is_err());
        assert!(pareto_ccdf_bound(0.5, 2.0, 1.0).is_err());
        assert!(pareto_ccdf_bound(10.0, 2.0, 0.0).is_err());
        assert_eq!(pareto_ccdf_bound(1.0, 2.0, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn wald_cases() {
        let (_, table) = setup(16);
        let b = BiasSchedule::zeros(32);
        assert_eq!(wald_barrier_bound(0.0, -0.5, &b, &table).unwrap(), 1.0);
        assert!((wald_barrier_bound(-10.0, -0.5, &b, &table).unwrap() - 0.03125).abs() < 1e-15);
        assert!(
            wald_barrier_bound(-20.0, -0.5, &b, &table).unwrap()
                < wald_barrier_bound(-10.0, -0.5, &b, &table).unwrap()
        );
        assert!(wald_barrier_bound(-1.0, 0.5, &b, &table).is_err());
    }

    #[test]
    fn epsilon_without_info_bits_is_positive() {
        let (_, table) = setup(16);
        let spec = CodeSpec::new(32, vec![], vec![1]).unwrap();
        let bias = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.0).unwrap();
        let m = epsilon_margin(0.5, &bias, &table, &partial_rates(&[], 32)).unwrap();
        assert!(m.valid && m.epsilon > 0.0);
    }

    #[test]
    fn cutoff_bias_is_admissible_at_half() {
        let (spec, table) = setup(16);
        let bias = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.0).unwrap();
        assert!(inadmissible_indices(1.0, &bias, &table).unwrap().is_empty());
        let over = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.01).unwrap();
        let flagged = inadmissible_indices(1.0, &over, &table).unwrap();
        assert!(!flagged.is_empty());
        assert!(flagged.iter().all(|&i| table.cutoff[i - 1] > 0.0));
    }

    #[test]
    fn wrong_path_bound_shape() {
        let (spec, table) = setup(16);
        let bias = build_bias(BiasRule::CutoffScaled, &table, &spec, 1.0).unwrap();
        let raw = wrong_path_bound_raw(20, 0.0, 0.5, &bias, &table).unwrap();
        let sum: f64 = table.cutoff[..20].iter().sum();
        assert!((raw - 21.0 * (-sum).exp2()).abs() <= 1e-12 * raw);
        let mut prev = f64::INFINITY;
        for a in [0.0, 1.0, 2.0, 5.0] {
            let v = wrong_path_bound(20, a, 0.5, &bias, &table).unwrap();
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        let zero = BiasSchedule::zeros(32);
        let tiny = BitChannelTable {
            cutoff: vec![0.0; 32],
            ..table.clone()
        };
        assert_eq!(wrong_path_bound(3, 0.0, 0.5, &zero, &tiny).unwrap(), 1.0);
        assert_eq!(
            wrong_path_bound_raw(3, 0.0, 0.5, &zero, &tiny).unwrap(),
            4.0
        );
        assert!(wrong_path_bound(0, 0.0, 0.5, &bias, &table).is_err());
    }
}

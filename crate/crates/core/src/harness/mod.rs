//! Monte-Carlo experiment drivers.
//!
//! Every trial is a pure function of `(master_seed, trial_index)` (see
//! [`frame::make_frame`]). Trials run in parallel in fixed-size chunks and are
//! folded into the aggregates in trial order, so results do not depend on the
//! thread count. With a target error count the run stops right after the
//! trial that reaches it.

pub mod ccdf;
pub mod frame;
pub mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{beta_select, epsilon_margin, expected_c1_bound, pareto_ccdf_bound};
use crate::channel::{channel_cutoff_rate, SnrConvention, SnrSpec};
use crate::construction::BitChannelTable;
use crate::fano::{decode, decode_observed, FanoConfig, VisitObserver};
use crate::metric::{build_bias, genie_drift, BiasRule, DriftPoint};
use crate::rate_profile::{partial_rates, CodeSpec};
use crate::{Error, Result};

pub use ccdf::CcdfHistogram;
pub use frame::{make_frame, Frame, NoiseModel};

const CHUNK: u64 = 32;

/// Chernoff parameter used for the bound overlays.
pub const BOUND_R: f64 = 0.5;

/// One experiment: a code, an SNR list and a decoder configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: CodeSpec,
    pub snr_list: Vec<f64>,
    pub snr_convention: SnrConvention,
    /// SNR for the construction table; `None` uses each simulated SNR.
    pub design_snr_db: Option<f64>,
    pub bias_rule: BiasRule,
    pub alpha: f64,
    pub delta: f64,
    /// `None` searches without a visit limit.
    pub mnv: Option<u64>,
    pub trials: u64,
    /// Stop after this many frame errors; `None` always runs `trials`.
    pub target_errors: Option<u64>,
    pub master_seed: u64,
    /// Replace the channel by saturated noiseless LLRs.
    pub noiseless: bool,
    /// Also collect the CCDF of `C_n`, the computation charged to bit `n`.
    pub per_depth: Option<usize>,
    pub outputs: OutputPaths,
}

/// Where CLI runs write their artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            dir: PathBuf::from("out"),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            spec: CodeSpec::reed_muller(128, 64, None).expect("(128,64) is a valid RM profile"),
            snr_list: vec![2.5],
            snr_convention: SnrConvention::EbN0,
            design_snr_db: None,
            bias_rule: BiasRule::CapacityScaled,
            alpha: 1.0,
            delta: 2.0,
            mnv: None,
            trials: 10_000,
            target_errors: Some(100),
            master_seed: 1,
            noiseless: false,
            per_depth: None,
            outputs: OutputPaths::default(),
        }
    }
}

/// Everything needed to simulate one SNR point.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub snr: SnrSpec,
    pub sigma2: f64,
    pub table: BitChannelTable,
    pub fano: FanoConfig,
    pub noise: NoiseModel,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.snr_list.is_empty() {
            return Err(Error::InvalidParameter("the SNR list is empty".into()));
        }
        if let Some(n) = self.per_depth {
            if n == 0 || n > self.spec.n_code {
                return Err(Error::DepthOutOfBounds {
                    depth: n,
                    n: self.spec.n_code,
                });
            }
        }
        if self.target_errors == Some(0) {
            return Err(Error::InvalidParameter(
                "target error count must be positive".into(),
            ));
        }
        CodeSpec::new(
            self.spec.n_code,
            self.spec.info_set.clone(),
            self.spec.conn_poly.clone(),
        )?;
        Ok(())
    }

    fn code_rate(&self) -> f64 {
        // A rate-0 code still needs a positive rate for the Eb/N0 conversion.
        if self.spec.k_info == 0 {
            1.0 / self.spec.n_code as f64
        } else {
            self.spec.rate()
        }
    }

    pub fn operating_point(&self, snr_db: f64) -> Result<OperatingPoint> {
        let rate = self.code_rate();
        let snr = SnrSpec::new(snr_db, rate, self.snr_convention)?;
        let design = SnrSpec::new(
            self.design_snr_db.unwrap_or(snr_db),
            rate,
            self.snr_convention,
        )?;
        let table = BitChannelTable::build(&design, self.spec.n_code)?;
        let bias = build_bias(self.bias_rule, &table, &self.spec, self.alpha)?;
        let mut fano = FanoConfig::new(self.delta, self.mnv, bias);
        fano.trace = false;
        let sigma2 = snr.sigma2();
        let noise = if self.noiseless {
            NoiseModel::Noiseless
        } else {
            NoiseModel::Awgn { sigma2 }
        };
        Ok(OperatingPoint {
            snr,
            sigma2,
            table,
            fano,
            noise,
        })
    }
}

/// Result of one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub error: bool,
    pub visits: u64,
    pub hit_mnv: bool,
    /// `C_n` for the configured depth.
    pub depth_count: Option<u64>,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Counts visits charged to bit `n`: the correct node at depth `n` plus every
/// node whose path first leaves the transmitted path at bit `n`.
pub struct DepthCounter<'a> {
    truth: &'a [u8],
    n: usize,
    pub count: u64,
}

impl<'a> DepthCounter<'a> {
    pub fn new(truth: &'a [u8], n: usize) -> Self {
        DepthCounter { truth, n, count: 0 }
    }
}

impl VisitObserver for DepthCounter<'_> {
    fn on_visit(&mut self, path: &[u8], _gamma: f64, _threshold: f64) {
        let n = self.n;
        if path.len() < n || path[..n - 1] != self.truth[..n - 1] {
            return;
        }
        let on_path = path[n - 1] == self.truth[n - 1];
        if (path.len() == n && on_path) || !on_path {
            self.count += 1;
        }
    }
}

pub fn run_trial(
    spec: &CodeSpec,
    point: &OperatingPoint,
    master_seed: u64,
    trial: u64,
    per_depth: Option<usize>,
) -> Result<TrialOutcome> {
    let frame = make_frame(spec, point.noise, master_seed, trial)?;
    let (rec, depth_count) = match per_depth {
        Some(n) => {
            let mut counter = DepthCounter::new(&frame.v, n);
            let rec = decode_observed(&frame.llrs, spec, &point.fano, &mut counter)?;
            (rec, Some(counter.count))
        }
        None => (decode(&frame.llrs, spec, &point.fano)?, None),
    };
    Ok(TrialOutcome {
        error: rec.v_hat != frame.v,
        visits: rec.visits_total,
        hit_mnv: rec.hit_mnv,
        depth_count,
        trace: rec.trace,
    })
}

/// Runs trials `0..trials` in parallel and feeds the outcomes to `sink` in
/// trial order. Stops after the trial that brings the error count to
/// `target_errors`.
pub fn for_each_trial<F, S>(
    trials: u64,
    target_errors: Option<u64>,
    run: F,
    mut sink: S,
) -> Result<()>
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
    S: FnMut(u64, TrialOutcome),
{
    let batch = CHUNK * 4 * rayon::current_num_threads().max(1) as u64;
    let mut errors = 0u64;
    let mut start = 0u64;
    while start < trials {
        let end = (start + batch).min(trials);
        let chunks: Vec<Vec<TrialOutcome>> = (start..end)
            .step_by(CHUNK as usize)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|c| {
                (c..(c + CHUNK).min(end))
                    .map(&run)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (trial, outcome) in (start..).zip(chunks.into_iter().flatten()) {
            let err = outcome.error;
            sink(trial, outcome);
            errors += u64::from(err);
            if target_errors.is_some_and(|t| errors >= t) {
                return Ok(());
            }
        }
        start = end;
    }
    Ok(())
}

/// Per-SNR aggregates of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub snr_db: f64,
    pub convention: SnrConvention,
    pub rule: BiasRule,
    pub alpha: f64,
    pub delta: f64,
    pub mnv: Option<u64>,
    pub n_code: usize,
    pub rate: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub visits_sum: u64,
    pub visits_sq_sum: u128,
    /// Mean visits per bit over all frames.
    pub anv: f64,
    pub anv_se: f64,
    pub correct_frames: u64,
    pub correct_visits_sum: u64,
    pub correct_visits_sq_sum: u128,
    /// Mean visits per bit over correctly decoded frames.
    pub anv_correct: f64,
    pub anv_correct_se: f64,
    pub mnv_hits: u64,
    pub r0: f64,
    pub r_over_r0: f64,
    /// Visits per bit over correctly decoded frames.
    pub histogram: CcdfHistogram,
    pub depth: Option<usize>,
    /// `C_n` over correctly decoded frames.
    pub depth_histogram: Option<CcdfHistogram>,
    pub depth_sum: u64,
}

fn mean_se(sum: u64, sq: u128, n: u64, scale: f64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let t = n as f64;
    let mean = sum as f64 / t;
    let var = if n > 1 {
        ((sq as f64 - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean / scale, (var / t).sqrt() / scale)
}

impl AggregateStats {
    fn new(config: &ExperimentConfig, point: &OperatingPoint) -> Self {
        let n = config.spec.n_code;
        let r0 = channel_cutoff_rate(point.sigma2);
        AggregateStats {
            snr_db: point.snr.snr_db,
            convention: point.snr.convention,
            rule: config.bias_rule,
            alpha: config.alpha,
            delta: config.delta,
            mnv: config.mnv,
            n_code: n,
            rate: config.spec.rate(),
            frames: 0,
            frame_errors: 0,
            fer: 0.0,
            visits_sum: 0,
            visits_sq_sum: 0,
            anv: 0.0,
            anv_se: 0.0,
            correct_frames: 0,
            correct_visits_sum: 0,
            correct_visits_sq_sum: 0,
            anv_correct: 0.0,
            anv_correct_se: 0.0,
            mnv_hits: 0,
            r0,
            r_over_r0: config.spec.rate() / r0,
            histogram: CcdfHistogram::new(n as u64),
            depth: config.per_depth,
            depth_histogram: config.per_depth.map(|_| CcdfHistogram::new(1)),
            depth_sum: 0,
        }
    }

    fn record(&mut self, o: &TrialOutcome) {
        self.frames += 1;
        self.visits_sum += o.visits;
        self.visits_sq_sum += u128::from(o.visits) * u128::from(o.visits);
        self.mnv_hits += u64::from(o.hit_mnv);
        if o.error {
            self.frame_errors += 1;
        } else {
            self.correct_frames += 1;
            self.correct_visits_sum += o.visits;
            self.correct_visits_sq_sum += u128::from(o.visits) * u128::from(o.visits);
            self.histogram.add(o.visits);
            if let (Some(h), Some(c)) = (self.depth_histogram.as_mut(), o.depth_count) {
                h.add(c);
                self.depth_sum += c;
            }
        }
    }

    fn finish(&mut self) {
        let n = self.n_code as f64;
        self.fer = self.frame_errors as f64 / self.frames as f64;
        (self.anv, self.anv_se) = mean_se(self.visits_sum, self.visits_sq_sum, self.frames, n);
        (self.anv_correct, self.anv_correct_se) = mean_se(
            self.correct_visits_sum,
            self.correct_visits_sq_sum,
            self.correct_frames,
            n,
        );
    }

    /// Empirical mean of `C_n` over correctly decoded frames.
    pub fn depth_mean(&self) -> Option<f64> {
        self.depth_histogram
            .as_ref()
            .map(|_| self.depth_sum as f64 / self.correct_frames as f64)
    }
}

/// Simulates one SNR point with the configured stopping rule.
pub fn run_point(config: &ExperimentConfig, snr_db: f64) -> Result<AggregateStats> {
    config.validate()?;
    let point = config.operating_point(snr_db)?;
    let mut stats = AggregateStats::new(config, &point);
    for_each_trial(
        config.trials,
        config.target_errors,
        |t| {
            run_trial(
                &config.spec,
                &point,
                config.master_seed,
                t,
                config.per_depth,
            )
        },
        |_, o| stats.record(&o),
    )?;
    stats.finish();
    Ok(stats)
}

/// FER and ANV for every SNR of the configuration.
pub fn run_fer(config: &ExperimentConfig) -> Result<Vec<AggregateStats>> {
    config
        .snr_list
        .iter()
        .map(|&s| run_point(config, s))
        .collect()
}

/// Bound quantities for one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub epsilon: f64,
    pub beta: Option<f64>,
    pub delta_optimal: Option<f64>,
    pub e_c1_bound: Option<f64>,
    pub ccdf_bound: Vec<(f64, f64)>,
}

/// Evaluates the computation bounds at `r = 1/2` for the configured bias.
pub fn bounds_report(
    config: &ExperimentConfig,
    snr_db: f64,
    l_grid: &[f64],
) -> Result<BoundsReport> {
    let point = config.operating_point(snr_db)?;
    let rates = partial_rates(&config.spec.info_set, config.spec.n_code);
    let epsilon = epsilon_margin(BOUND_R, &point.fano.bias, &point.table, &rates)?.epsilon;
    let beta = beta_select(&rates).ok();
    let e_c1_bound = expected_c1_bound(epsilon).ok();
    let ccdf_bound = match beta {
        Some(b) if b > 1.0 && epsilon > 0.0 => l_grid
            .iter()
            .map(|&l| pareto_ccdf_bound(l, b, epsilon).map(|p| (l, p)))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    Ok(BoundsReport {
        epsilon,
        beta,
        delta_optimal: beta.map(|b| b / BOUND_R),
        e_c1_bound,
        ccdf_bound,
    })
}

/// Empirical CCDF with its reference overlays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfRow {
    pub snr_db: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub ccdf_empirical: f64,
    pub ccdf_bound: Option<f64>,
    #[serde(rename = "ccdf_Linv")]
    pub ccdf_linv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfReport {
    pub stats: AggregateStats,
    pub bounds: BoundsReport,
    /// Visits per bit of correctly decoded frames.
    pub rows: Vec<CcdfRow>,
    /// `C_n` of correctly decoded frames, when requested.
    pub depth_rows: Option<Vec<CcdfRow>>,
}

fn ccdf_rows(snr_db: f64, hist: &CcdfHistogram, bounds: &BoundsReport) -> Vec<CcdfRow> {
    hist.ccdf()
        .into_iter()
        .map(|(l, p)| {
            let bound = match (bounds.beta, bounds.ccdf_bound.is_empty()) {
                (Some(b), false) => pareto_ccdf_bound(l, b, bounds.epsilon).ok(),
                _ => None,
            };
            CcdfRow {
                snr_db,
                l,
                ccdf_empirical: p,
                ccdf_bound: bound,
                ccdf_linv: 1.0 / l,
            }
        })
        .collect()
}

/// Distribution of computation over correctly decoded frames, per SNR.
pub fn run_ccdf(config: &ExperimentConfig) -> Result<Vec<CcdfReport>> {
    config
        .snr_list
        .iter()
        .map(|&snr| {
            let stats = run_point(config, snr)?;
            let grid: Vec<f64> = stats.histogram.ccdf().iter().map(|&(l, _)| l).collect();
            let bounds = bounds_report(config, snr, &grid)?;
            let rows = ccdf_rows(snr, &stats.histogram, &bounds);
            let depth_rows = stats
                .depth_histogram
                .as_ref()
                .map(|h| ccdf_rows(snr, h, &bounds));
            Ok(CcdfReport {
                stats,
                bounds,
                rows,
                depth_rows,
            })
        })
        .collect()
}

/// Parameter varied by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Alpha,
    Delta,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Alpha => "alpha",
            SweepVariable::Delta => "delta",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepVariable::Alpha),
            "delta" => Ok(SweepVariable::Delta),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep variable {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub variable: SweepVariable,
    pub value: f64,
    pub stats: AggregateStats,
}

/// FER/ANV at each grid value, at the first SNR of the configuration. All
/// points share the master seed, so they see the same frames.
pub fn run_sweep(
    config: &ExperimentConfig,
    variable: SweepVariable,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    config.validate()?;
    let snr = config.snr_list[0];
    grid.iter()
        .map(|&value| {
            let mut c = config.clone();
            match variable {
                SweepVariable::Alpha => c.alpha = value,
                SweepVariable::Delta => c.delta = value,
            }
            Ok(SweepPoint {
                variable,
                value,
                stats: run_point(&c, snr)?,
            })
        })
        .collect()
}

/// Average computation against `R / R0` over the SNR list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Point {
    pub snr_db: f64,
    pub sigma2: f64,
    pub r0: f64,
    pub r_over_r0: f64,
    /// Mean visits per bit over correctly decoded frames.
    pub anv: f64,
    pub anv_se: f64,
    pub frames: u64,
}

pub fn run_r_over_r0(config: &ExperimentConfig) -> Result<Vec<R0Point>> {
    config
        .snr_list
        .iter()
        .map(|&snr| {
            let stats = run_point(config, snr)?;
            let sigma2 = config.operating_point(snr)?.sigma2;
            Ok(R0Point {
                snr_db: snr,
                sigma2,
                r0: stats.r0,
                r_over_r0: stats.r_over_r0,
                anv: stats.anv_correct,
                anv_se: stats.anv_correct_se,
                frames: stats.frames,
            })
        })
        .collect()
}

/// Partial path metrics `(depth, Gamma)` along the decoded path of the first
/// `n_samples` frames at the first SNR.
pub fn run_trace(config: &ExperimentConfig, n_samples: u64) -> Result<Vec<Vec<(usize, f64)>>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter(
            "trace needs at least one sample".into(),
        ));
    }
    config.validate()?;
    let mut point = config.operating_point(config.snr_list[0])?;
    point.fano.trace = true;
    let mut traces = Vec::with_capacity(n_samples as usize);
    for_each_trial(
        n_samples,
        None,
        |t| run_trial(&config.spec, &point, config.master_seed, t, None),
        |_, o| traces.push(o.trace.unwrap_or_default()),
    )?;
    Ok(traces)
}

/// Genie-aided branch-metric statistics at the first SNR.
pub fn run_drift(config: &ExperimentConfig, trials: u64) -> Result<Vec<DriftPoint>> {
    config.validate()?;
    let point = config.operating_point(config.snr_list[0])?;
    genie_drift(
        &point.fano.bias,
        &config.spec,
        point.noise,
        trials,
        config.master_seed,
    )
}

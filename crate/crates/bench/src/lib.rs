//! Fixtures shared by the criterion benchmarks in `benches/`.

use pac_core::harness::{make_frame, ExperimentConfig, Frame, OperatingPoint};
use pac_core::CodeSpec;

/// The default (128,64) operating point at `snr_db` with `count` noisy frames.
pub fn fixture(snr_db: f64, count: u64) -> (CodeSpec, OperatingPoint, Vec<Frame>) {
    let config = ExperimentConfig {
        snr_list: vec![snr_db],
        ..ExperimentConfig::default()
    };
    let point = config
        .operating_point(snr_db)
        .expect("default configuration is valid");
    let frames = (0..count)
        .map(|t| {
            make_frame(&config.spec, point.noise, config.master_seed, t).expect("frame generation")
        })
        .collect();
    (config.spec, point, frames)
}

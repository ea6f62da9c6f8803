//! `pac`: command-line driver for PAC code experiments.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pac_core::fano::{decode, FanoConfig};
use pac_core::harness::{self, output, ExperimentConfig, SweepVariable};
use pac_core::metric::build_bias;
use pac_core::rate_profile::{conn_poly_from_octal, partial_rates, rm_weight, CodeSpec};
use pac_core::{encoder, BiasRule, BitChannelTable, SnrConvention, SnrSpec};

#[derive(Parser)]
#[command(
    name = "pac",
    version,
    about = "PAC codes with Fano sequential decoding"
)]
struct Cli {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    exp: ExperimentArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// Comma-separated SNR values in dB.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    /// `ebn0` or `esn0`.
    #[arg(long, global = true)]
    snr_convention: Option<SnrConvention>,
    #[arg(long = "N", global = true)]
    n_code: Option<usize>,
    #[arg(long = "K", global = true)]
    k_info: Option<usize>,
    /// Precoder connection polynomial in octal.
    #[arg(long, global = true)]
    conn_poly: Option<String>,
    /// SNR for the construction table (defaults to each simulated SNR).
    #[arg(long, global = true, allow_hyphen_values = true)]
    design_snr: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Maximum node visits, or `inf`.
    #[arg(long, global = true)]
    mnv: Option<String>,
    /// `capacity`, `cutoff`, `cutoff-info`, `cutoff-frozen`, `capacity-info:<bF>` or `fixed:<bI>:<bF>`.
    #[arg(long, global = true)]
    bias_rule: Option<BiasRule>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Stop after this many frame errors, or `none`.
    #[arg(long, global = true)]
    target_errors: Option<String>,
    /// Replace the channel by saturated noiseless LLRs.
    #[arg(long, global = true)]
    noiseless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Frame error rate and average number of visits per SNR.
    Fer,
    /// Distribution of computation over correctly decoded frames.
    Ccdf {
        /// Also tabulate the computation charged to bit n.
        #[arg(long)]
        per_depth: Option<usize>,
    },
    /// FER/ANV across a grid of alpha or delta values.
    Sweep {
        #[arg(long)]
        variable: SweepVariable,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Average computation against R/R0.
    R0,
    /// Partial path metrics along decoded paths.
    Trace {
        #[arg(long, default_value_t = 10)]
        samples: u64,
    },
    /// Computation bounds as JSON.
    Bounds {
        /// Values of L for the Pareto bound.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 10.0, 100.0, 1000.0])]
        l_grid: Vec<f64>,
    },
    /// Genie-aided branch-metric statistics.
    Drift {
        #[arg(long, default_value_t = 10_000)]
        genie_trials: u64,
    },
    /// Rate profile and construction table.
    Profile,
    /// Encode a message given as a 0/1 string.
    Encode {
        #[arg(long)]
        data: String,
    },
    /// Decode one block of channel LLRs.
    Decode {
        /// Comma-separated LLRs.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "llr_file"
        )]
        llrs: Option<Vec<f64>>,
        /// File with whitespace- or comma-separated LLRs.
        #[arg(long)]
        llr_file: Option<PathBuf>,
        /// Record the partial path metric trajectory.
        #[arg(long)]
        trace: bool,
    },
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => bail!("expected only 0 and 1, found {c:?}"),
        })
        .collect()
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::from_json_file(p)
            .with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    let a = &cli.exp;
    if a.n_code.is_some() || a.k_info.is_some() || a.conn_poly.is_some() {
        let n = a.n_code.unwrap_or(c.spec.n_code);
        let k = a.k_info.unwrap_or(if n == c.spec.n_code {
            c.spec.k_info
        } else {
            n / 2
        });
        let poly = match &a.conn_poly {
            Some(o) => conn_poly_from_octal(o)?,
            None => c.spec.conn_poly.clone(),
        };
        let info = if n == c.spec.n_code && k == c.spec.k_info {
            c.spec.info_set.clone()
        } else {
            pac_core::rate_profile::rm_profile(n, k, None)?
        };
        c.spec = CodeSpec::new(n, info, poly)?;
    }
    if let Some(v) = &a.snr_db {
        c.snr_list = v.clone();
    }
    if let Some(v) = a.snr_convention {
        c.snr_convention = v;
    }
    if let Some(v) = a.design_snr {
        c.design_snr_db = Some(v);
    }
    if let Some(v) = a.delta {
        c.delta = v;
    }
    if let Some(v) = &a.mnv {
        c.mnv = match v.as_str() {
            "inf" | "none" => None,
            s => Some(s.parse().with_context(|| format!("bad --mnv {s:?}"))?),
        };
    }
    if let Some(v) = a.bias_rule {
        c.bias_rule = v;
    }
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = a.trials {
        c.trials = v;
    }
    if let Some(v) = &a.target_errors {
        c.target_errors = match v.as_str() {
            "none" | "inf" => None,
            s => Some(
                s.parse()
                    .with_context(|| format!("bad --target-errors {s:?}"))?,
            ),
        };
    }
    if a.noiseless {
        c.noiseless = true;
    }
    if let Some(v) = cli.seed {
        c.master_seed = v;
    }
    if let Some(v) = &cli.out_dir {
        c.outputs.dir = v.clone();
    }
    c.validate()?;
    Ok(c)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_csv(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut fs::File) -> pac_core::Result<()>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    body(&mut f)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

#[derive(Serialize)]
struct ProfileReport<'a> {
    n_code: usize,
    k_info: usize,
    conn_poly: &'a [u8],
    info_set: &'a [usize],
    rows: Vec<ProfileRow>,
}

#[derive(Serialize)]
struct ProfileRow {
    index: usize,
    is_info: bool,
    weight: u32,
    partial_rate: f64,
    capacity: f64,
    mean: f64,
    bhattacharyya: f64,
    cutoff: f64,
}

#[derive(Serialize)]
struct EncodeReport {
    v: String,
    u: String,
    x: String,
}

fn read_llrs(llrs: &Option<Vec<f64>>, file: &Option<PathBuf>) -> Result<Vec<f64>> {
    if let Some(v) = llrs {
        return Ok(v.clone());
    }
    let Some(p) = file else {
        bail!("pass --llrs or --llr-file")
    };
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad LLR {s:?}")))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    let config = build_config(&cli)?;
    let dir = config.outputs.dir.clone();
    match &cli.command {
        Command::Fer => {
            let stats = harness::run_fer(&config)?;
            write_csv(&dir, "fer.csv", |f| output::write_fer(f, &stats))?;
            for s in &stats {
                println!(
                    "snr {:.2} dB: frames {} errors {} fer {:.3e} anv {:.4} mnv_hits {}",
                    s.snr_db, s.frames, s.frame_errors, s.fer, s.anv, s.mnv_hits
                );
            }
        }
        Command::Ccdf { per_depth } => {
            let mut c = config.clone();
            c.per_depth = per_depth.or(c.per_depth);
            let reports = harness::run_ccdf(&c)?;
            let rows: Vec<_> = reports
                .iter()
                .flat_map(|r| r.rows.iter().cloned())
                .collect();
            write_csv(&dir, "ccdf.csv", |f| output::write_ccdf(f, &rows))?;
            if c.per_depth.is_some() {
                let rows: Vec<_> = reports
                    .iter()
                    .flat_map(|r| r.depth_rows.iter().flatten().cloned())
                    .collect();
                write_csv(&dir, "ccdf_depth.csv", |f| output::write_ccdf(f, &rows))?;
            }
            for r in &reports {
                println!(
                    "snr {:.2} dB: correct frames {} P(C>10) {:.3e} epsilon {:.4} beta {:?}",
                    r.stats.snr_db,
                    r.stats.correct_frames,
                    r.stats.histogram.ccdf_at(10.0),
                    r.bounds.epsilon,
                    r.bounds.beta
                );
            }
        }
        Command::Sweep { variable, grid } => {
            let points = harness::run_sweep(&config, *variable, grid)?;
            write_csv(&dir, "sweep.csv", |f| output::write_sweep(f, &points))?;
            for p in &points {
                println!(
                    "{} {}: fer {:.3e} anv {:.4}",
                    variable.as_str(),
                    p.value,
                    p.stats.fer,
                    p.stats.anv
                );
            }
        }
        Command::R0 => {
            let points = harness::run_r_over_r0(&config)?;
            write_csv(&dir, "r0.csv", |f| output::write_r0(f, &points))?;
            for p in &points {
                println!(
                    "snr {:.2} dB: R/R0 {:.4} anv {:.4}",
                    p.snr_db, p.r_over_r0, p.anv
                );
            }
        }
        Command::Trace { samples } => {
            let traces = harness::run_trace(&config, *samples)?;
            write_csv(&dir, "trace.csv", |f| output::write_trace(f, &traces))?;
        }
        Command::Bounds { l_grid } => {
            let report = harness::bounds_report(&config, config.snr_list[0], l_grid)?;
            print_json(&report)?;
        }
        Command::Drift { genie_trials } => {
            let points = harness::run_drift(&config, *genie_trials)?;
            write_csv(&dir, "drift.csv", |f| output::write_drift(f, &points))?;
        }
        Command::Profile => {
            let spec = &config.spec;
            let snr = SnrSpec::new(
                config.design_snr_db.unwrap_or(config.snr_list[0]),
                spec.rate().max(1.0 / spec.n_code as f64),
                config.snr_convention,
            )?;
            let table = BitChannelTable::build(&snr, spec.n_code)?;
            let rates = partial_rates(&spec.info_set, spec.n_code);
            let mask = spec.info_mask();
            let rows = (0..spec.n_code)
                .map(|j| ProfileRow {
                    index: j + 1,
                    is_info: mask[j],
                    weight: rm_weight(j + 1),
                    partial_rate: rates.rate[j],
                    capacity: table.capacity[j],
                    mean: table.mean[j],
                    bhattacharyya: table.bhattacharyya[j],
                    cutoff: table.cutoff[j],
                })
                .collect();
            print_json(&ProfileReport {
                n_code: spec.n_code,
                k_info: spec.k_info,
                conn_poly: &spec.conn_poly,
                info_set: &spec.info_set,
                rows,
            })?;
        }
        Command::Encode { data } => {
            let data = parse_bits(data)?;
            let spec = &config.spec;
            let v = encoder::insert_profile(&data, spec)?;
            let u = encoder::conv_encode(&v, &spec.conn_poly);
            let x = encoder::polar_transform(&u)?;
            print_json(&EncodeReport {
                v: bits_to_string(&v),
                u: bits_to_string(&u),
                x: bits_to_string(&x),
            })?;
        }
        Command::Decode {
            llrs,
            llr_file,
            trace,
        } => {
            let llrs = read_llrs(llrs, llr_file)?;
            let spec = &config.spec;
            let snr = config.operating_point(config.snr_list[0])?;
            let bias = build_bias(config.bias_rule, &snr.table, spec, config.alpha)?;
            let mut fano = FanoConfig::new(config.delta, config.mnv, bias);
            fano.trace = *trace;
            let rec = decode(&llrs, spec, &fano)?;
            #[derive(Serialize)]
            struct Out<'a> {
                data: String,
                #[serde(flatten)]
                record: &'a pac_core::DecodeRecord,
            }
            let data = bits_to_string(&encoder::extract_data(&rec.v_hat, spec));
            print_json(&Out { data, record: &rec })?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

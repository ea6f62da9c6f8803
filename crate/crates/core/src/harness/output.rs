//! CSV and JSON writers with fixed column layouts.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{AggregateStats, CcdfRow, R0Point, SweepPoint};
use crate::metric::DriftPoint;
use crate::Result;

#[derive(Serialize)]
struct FerRow<'a> {
    snr_db: f64,
    convention: &'a str,
    rule: String,
    alpha: f64,
    delta: f64,
    mnv: String,
    frames: u64,
    errors: u64,
    fer: f64,
    anv: f64,
    mnv_hits: u64,
}

#[derive(Serialize)]
struct SweepRow {
    variable: &'static str,
    value: f64,
    fer: f64,
    anv: f64,
}

#[derive(Serialize)]
struct TraceRow {
    sample: usize,
    depth: usize,
    gamma: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `snr_db,convention,rule,alpha,delta,mnv,frames,errors,fer,anv,mnv_hits`.
/// An unlimited search writes `inf` for `mnv`.
pub fn write_fer<W: Write>(out: W, stats: &[AggregateStats]) -> Result<()> {
    write_rows(
        out,
        stats.iter().map(|s| FerRow {
            snr_db: s.snr_db,
            convention: s.convention.as_str(),
            rule: s.rule.to_string(),
            alpha: s.alpha,
            delta: s.delta,
            mnv: s.mnv.map_or_else(|| "inf".to_string(), |m| m.to_string()),
            frames: s.frames,
            errors: s.frame_errors,
            fer: s.fer,
            anv: s.anv,
            mnv_hits: s.mnv_hits,
        }),
    )
}

/// Columns `snr_db,L,ccdf_empirical,ccdf_bound,ccdf_Linv`; the bound is empty
/// where it does not apply.
pub fn write_ccdf<W: Write>(out: W, rows: &[CcdfRow]) -> Result<()> {
    write_rows(out, rows)
}

/// Columns `variable,value,fer,anv`.
pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    write_rows(
        out,
        points.iter().map(|p| SweepRow {
            variable: p.variable.as_str(),
            value: p.value,
            fer: p.stats.fer,
            anv: p.stats.anv,
        }),
    )
}

/// Columns `sample,depth,gamma`.
pub fn write_trace<W: Write>(out: W, traces: &[Vec<(usize, f64)>]) -> Result<()> {
    write_rows(
        out,
        traces.iter().enumerate().flat_map(|(s, t)| {
            t.iter().map(move |&(depth, gamma)| TraceRow {
                sample: s,
                depth,
                gamma,
            })
        }),
    )
}

/// Columns `index,is_info,bias,mean_correct,se_correct,mean_wrong,se_wrong`.
pub fn write_drift<W: Write>(out: W, points: &[DriftPoint]) -> Result<()> {
    write_rows(out, points)
}

/// Columns `snr_db,sigma2,r0,r_over_r0,anv,anv_se,frames`.
pub fn write_r0<W: Write>(out: W, points: &[R0Point]) -> Result<()> {
    write_rows(out, points)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Creates `path` (and its parent directory) and hands a buffered writer to `body`.
pub fn to_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    body(&mut f)?;
    f.flush()?;
    Ok(())
}

//! CSV output: `snr_db,detector,ser,num_vectors,ms_per_symbol`.

use std::io::Write;
use std::path::Path;

use super::SerRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "snr_db,detector,ser,num_vectors,ms_per_symbol";

/// Scientific notation with at least 8 significant digits that parses back to
/// the same `f64`.
pub fn format_float(v: f64) -> String {
    let shortest = format!("{v:e}");
    let mantissa_digits = shortest
        .split('e')
        .next()
        .unwrap_or("")
        .chars()
        .filter(|c| c.is_ascii_digit())
        .count();
    if mantissa_digits >= 8 {
        shortest
    } else {
        format!("{v:.7e}")
    }
}

fn sorted(records: &[SerRecord]) -> Vec<&SerRecord> {
    let mut rows: Vec<&SerRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.detector
            .cmp(&b.detector)
            .then(a.snr_db.total_cmp(&b.snr_db))
    });
    rows
}

/// Writes the header and one row per record, sorted by (detector, snr_db).
pub fn write_csv<W: Write>(records: &[SerRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in sorted(records) {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_float(r.snr_db),
            r.detector,
            format_float(r.ser),
            r.num_vectors,
            format_float(r.ms_per_symbol)
        )?;
    }
    Ok(())
}

pub fn emit_csv(records: &[SerRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<SerRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Config(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Config(format!("malformed CSV row `{l}`")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{s}`: {e}")))
            };
            Ok(SerRecord {
                snr_db: num(f[0])?,
                detector: f[1].to_string(),
                ser: num(f[2])?,
                num_vectors: f[3]
                    .parse()
                    .map_err(|e| Error::Config(format!("bad count `{}`: {e}", f[3])))?,
                ms_per_symbol: num(f[4])?,
            })
        })
        .collect()
}

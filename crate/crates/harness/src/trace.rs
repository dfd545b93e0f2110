//! Trace CSV: `#`-prefixed `key: value` header lines, a column header row,
//! then one row per iteration. Floats carry 17 significant digits so a read
//! reproduces every stored value bit for bit.

use std::io::{BufRead, Write};

use ipc_core::IterationRecord;

use crate::error::{HarnessError, Result};

pub const COLUMNS: [&str; 8] = [
    "k",
    "f",
    "grad_norm",
    "h_k",
    "alpha_k",
    "r_k",
    "ls_evals",
    "dist_sq",
];

/// A parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: Vec<(String, String)>,
    pub records: Vec<IterationRecord>,
}

impl TraceFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_meta(w: &mut dyn Write, meta: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn write_trace(
    w: &mut dyn Write,
    meta: &[(String, String)],
    records: &[IterationRecord],
) -> Result<()> {
    write_meta(w, meta).map_err(|e| HarnessError::io("trace", e))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(COLUMNS)?;
    for r in records {
        csv.write_record([
            r.k.to_string(),
            fmt_f64(r.f),
            fmt_f64(r.grad_norm),
            fmt_opt(r.h_k),
            fmt_opt(r.alpha_k),
            fmt_opt(r.r_k),
            r.ls_evals.to_string(),
            fmt_opt(r.dist_sq),
        ])?;
    }
    csv.flush().map_err(|e| HarnessError::io("trace", e))?;
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    line: usize,
) -> Result<Option<T>> {
    let raw = rec.get(i).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| {
        HarnessError::Config(format!(
            "trace row {line}: bad {} value '{raw}'",
            COLUMNS[i]
        ))
    })
}

fn required<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    field(rec, i, line)?
        .ok_or_else(|| HarnessError::Config(format!("trace row {line}: missing {}", COLUMNS[i])))
}

pub fn read_trace(r: impl BufRead) -> Result<TraceFile> {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in r.lines() {
        let line = line.map_err(|e| HarnessError::io("trace", e))?;
        match line.strip_prefix('#') {
            Some(rest) => {
                if let Some((k, v)) = rest.split_once(':') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut csv = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(HarnessError::Config(format!(
            "unexpected trace columns {header:?}"
        )));
    }
    let mut records = Vec::new();
    for (i, row) in csv.records().enumerate() {
        let row = row?;
        let line = i + 1;
        records.push(IterationRecord {
            k: required(&row, 0, line)?,
            f: required(&row, 1, line)?,
            grad_norm: required(&row, 2, line)?,
            h_k: field(&row, 3, line)?,
            alpha_k: field(&row, 4, line)?,
            r_k: field(&row, 5, line)?,
            ls_evals: required(&row, 6, line)?,
            dist_sq: field(&row, 7, line)?,
            eta_fallback: false,
        });
    }
    Ok(TraceFile { meta, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, f: f64) -> IterationRecord {
        IterationRecord {
            k,
            f,
            grad_norm: 0.1 + f,
            h_k: Some(1.0 / 3.0),
            alpha_k: None,
            r_k: Some(std::f64::consts::PI * 1e-300),
            ls_evals: 2,
            dist_sq: Some(f64::MIN_POSITIVE),
            eta_fallback: false,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let recs: Vec<_> = (0..20)
            .map(|k| record(k, (k as f64).sqrt() * 1e7 + 0.1))
            .collect();
        let meta = vec![("generator".to_string(), "quadratic".to_string())];
        let mut buf = Vec::new();
        write_trace(&mut buf, &meta, &recs).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.meta, meta);
        assert_eq!(back.records.len(), recs.len());
        for (a, b) in recs.iter().zip(&back.records) {
            assert_eq!(a.f.to_bits(), b.f.to_bits());
            assert_eq!(a.r_k.unwrap().to_bits(), b.r_k.unwrap().to_bits());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn header_row_and_empty_cells() {
        let mut rec = record(0, 1.0);
        rec.h_k = None;
        rec.dist_sq = None;
        let mut buf = Vec::new();
        write_trace(&mut buf, &[], &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,f,grad_norm,h_k,alpha_k,r_k,ls_evals,dist_sq"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!((row[3], row[4], row[7]), ("", "", ""));
    }

    #[test]
    fn rejects_wrong_columns() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
    }
}

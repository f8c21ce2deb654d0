//! Optimizer trace as CSV.
//!
//! Columns: `k,F,E,E_kin,E_met,fiedler,lambda2,lambda3,multiplicity,
//! active_edges,tau,best`. Missing eigenvalues are left empty; `best` is 1
//! on the row of the best iterate.

use std::io::{BufRead, Write};

use super::fmt_f64;
use crate::error::{NetError, Result};
use crate::optimizer::TraceRecord;

pub const HEADER: &str = "k,F,E,E_kin,E_met,fiedler,lambda2,lambda3,multiplicity,active_edges,tau,best";

pub fn write_trace<W: Write>(out: &mut W, trace: &[TraceRecord], best_k: u64) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt_f64(r.f),
            fmt_f64(r.e),
            fmt_f64(r.e_kin),
            fmt_f64(r.e_met),
            fmt_f64(r.fiedler),
            opt(r.lambda2),
            opt(r.lambda3),
            r.multiplicity,
            r.active_edges,
            fmt_f64(r.tau),
            u8::from(r.k == best_k)
        )?;
    }
    Ok(())
}

/// Parses a trace written by [`write_trace`]; returns the records and the
/// `k` of the row flagged best.
pub fn read_trace<R: BufRead>(input: R) -> Result<(Vec<TraceRecord>, Option<u64>)> {
    let bad = |line: usize, what: &str| NetError::Parse(format!("trace line {line}: {what}"));
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "empty file"))?
        .map_err(|e| bad(1, &e.to_string()))?;
    if header.trim() != HEADER {
        return Err(bad(1, "unexpected header"));
    }
    let mut records = Vec::new();
    let mut best = None;
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line.map_err(|e| bad(n, &e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad(n, "expected 12 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, s));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad(n, s));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let rec = TraceRecord {
            k: int(f[0])?,
            f: num(f[1])?,
            e: num(f[2])?,
            e_kin: num(f[3])?,
            e_met: num(f[4])?,
            fiedler: num(f[5])?,
            lambda2: opt(f[6])?,
            lambda3: opt(f[7])?,
            multiplicity: int(f[8])? as usize,
            active_edges: int(f[9])? as usize,
            tau: num(f[10])?,
        };
        if f[11] == "1" {
            best = Some(rec.k);
        }
        records.push(rec);
    }
    Ok((records, best))
}

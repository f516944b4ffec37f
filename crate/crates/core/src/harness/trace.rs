//! Per-iteration metrics and their CSV form.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub const TRACE_HEADER: &str =
    "t,mean_tan_theta,tan_theta_sbar,s_consensus_err,w_consensus_err,tracking_residual,sigma_min_sbar";

/// Metrics of iteration `t`. `+∞` marks a degenerate `tan θ`; NaN marks a run without an oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub mean_tan_theta: f64,
    pub tan_theta_sbar: f64,
    pub s_consensus_err: f64,
    pub w_consensus_err: f64,
    pub tracking_residual: f64,
    pub sigma_min_sbar: f64,
}

impl TraceRecord {
    fn values(&self) -> [f64; 6] {
        [
            self.mean_tan_theta,
            self.tan_theta_sbar,
            self.s_consensus_err,
            self.w_consensus_err,
            self.tracking_residual,
            self.sigma_min_sbar,
        ]
    }

    /// Field-wise equality that also treats two NaNs as equal.
    pub fn same_bits(&self, other: &TraceRecord) -> bool {
        self.t == other.t
            && self
                .values()
                .iter()
                .zip(other.values())
                .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// 17 significant digits; infinities as `inf`/`-inf`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

pub fn write_trace<W: Write>(trace: &[TraceRecord], mut out: W) -> Result<(), TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        let fields: Vec<String> = r.values().iter().map(|&v| format_real(v)).collect();
        writeln!(out, "{},{}", r.t, fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_csv(trace: &[TraceRecord], path: &Path) -> Result<(), TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    write_trace(trace, BufWriter::new(File::create(path)?))
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != TRACE_HEADER {
        return Err(TraceError::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let err = |message: String| TraceError::Parse { line: lineno, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", fields.len())));
        }
        let t = fields[0].parse().map_err(|_| err(format!("bad iteration index {:?}", fields[0])))?;
        let mut v = [0.0; 6];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = parse_real(f).ok_or_else(|| err(format!("bad number {f:?}")))?;
        }
        out.push(TraceRecord {
            t,
            mean_tan_theta: v[0],
            tan_theta_sbar: v[1],
            s_consensus_err: v[2],
            w_consensus_err: v[3],
            tracking_residual: v[4],
            sigma_min_sbar: v[5],
        });
    }
    Ok(out)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>, TraceError> {
    read_trace(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: usize) -> TraceRecord {
        TraceRecord {
            t,
            mean_tan_theta: f64::INFINITY,
            tan_theta_sbar: 0.1 + 0.2,
            s_consensus_err: 1e-300,
            w_consensus_err: 0.0,
            tracking_residual: 5e-324,
            sigma_min_sbar: std::f64::consts::PI,
        }
    }

    #[test]
    fn one_record_is_two_lines() {
        let mut buf = Vec::new();
        write_trace(&[sample(0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], TRACE_HEADER);
        assert!(lines[1].starts_with("0,inf,3.0000000000000004e-1,"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let trace = vec![sample(0), sample(1)];
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(matches!(write_trace(&[], Vec::new()), Err(TraceError::Empty)));
    }

    #[test]
    fn bad_rows_rejected() {
        let text = format!("{TRACE_HEADER}\n0,1,2\n");
        assert!(matches!(read_trace(text.as_bytes()), Err(TraceError::Parse { line: 2, .. })));
        assert!(read_trace("t,x\n".as_bytes()).is_err());
    }

    #[test]
    fn nan_compares_by_same_bits() {
        let mut r = sample(3);
        r.mean_tan_theta = f64::NAN;
        let mut buf = Vec::new();
        write_trace(&[r], &mut buf).unwrap();
        assert!(read_trace(buf.as_slice()).unwrap()[0].same_bits(&r));
    }
}

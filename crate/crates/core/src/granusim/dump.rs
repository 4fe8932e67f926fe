//! Plain-text trace dumps (`trace-v1`).
//!
//! ```text
//! # trace-v1 <kind> <sample_rate>
//! theta_deg,value            (signal traces)
//! m0,m1,...,m69              (marker fields: displacement magnitudes)
//! ```

use std::io::{BufRead, Write};

use super::{MarkerField, SignalTrace};
use crate::{Error, Result};

const MAGIC: &str = "# trace-v1";

pub fn write_signal_trace<W: Write>(out: &mut W, kind: &str, trace: &SignalTrace) -> Result<()> {
    writeln!(out, "{MAGIC} {kind} {}", trace.sample_rate)?;
    for (a, v) in trace.angles.iter().zip(&trace.values) {
        writeln!(out, "{a},{v}")?;
    }
    Ok(())
}

pub fn write_marker_field<W: Write>(out: &mut W, kind: &str, field: &MarkerField) -> Result<()> {
    writeln!(out, "{MAGIC} {kind} {}", field.sample_rate)?;
    for frame in field.frames() {
        let line: Vec<String> = frame.iter().map(|d| d[0].hypot(d[1]).to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(String, f64)> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::format(1, "missing trace-v1 header"))?;
    let mut parts = rest.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| Error::format(1, "missing trace kind"))?;
    let rate = parts
        .next()
        .and_then(|r| r.parse::<f64>().ok())
        .ok_or_else(|| Error::format(1, "missing or bad sample rate"))?;
    Ok((kind.to_string(), rate))
}

/// Reads a signal trace dump, returning its kind and contents.
pub fn read_signal_trace<R: BufRead>(input: R) -> Result<(String, SignalTrace)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(1, "empty trace"))??;
    let (kind, rate) = parse_header(&header)?;
    let mut angles = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let (a, v) = line
            .split_once(',')
            .ok_or_else(|| Error::format(lineno, "expected theta_deg,value"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::format(lineno, e.to_string()))
        };
        angles.push(parse(a)?);
        values.push(parse(v)?);
    }
    let trace =
        SignalTrace::new(angles, values, rate).map_err(|e| Error::format(0, e.to_string()))?;
    Ok((kind, trace))
}

/// Reads a marker-field dump as per-frame magnitude rows.
pub fn read_marker_magnitudes<R: BufRead>(input: R) -> Result<(String, f64, Vec<Vec<f64>>)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(1, "empty trace"))??;
    let (kind, rate) = parse_header(&header)?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::format(i + 2, e.to_string()))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((kind, rate, rows))
}

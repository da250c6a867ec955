//! Parsers for the published orienteering benchmark layouts.
//!
//! Two families are understood:
//!
//! * Solomon-derived files, either the classic VRPTW table (`CUST NO.`
//!   header, demand used as reward) or the numeric TOPTW layout whose vertex
//!   rows read `i x y d S f a list O C`.
//! * Cordeau `pr` files: a header `type m n t` carrying the customer count,
//!   one or more `D Q` rows (route duration limit, capacity), then exactly
//!   `n + 1` rows `i x y d q f a list O C` with the depot first.
//!
//! In both cases the depot is the first vertex row and the horizon is the
//! depot closing time.

use std::path::Path;

use super::{RawInstance, Vertex};
use crate::error::ParseError;

/// Benchmark file layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Solomon,
    Cordeau,
}

impl Layout {
    /// Guess from a file name: `pr*` files are Cordeau, everything else
    /// Solomon.
    pub fn guess(path: &Path) -> Layout {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        if stem.starts_with("pr") {
            Layout::Cordeau
        } else {
            Layout::Solomon
        }
    }
}

/// Parses `text` with the preferred layout, falling back to the other one.
/// The error of the preferred layout is returned when both fail.
pub fn parse_benchmark(text: &str, preferred: Layout) -> Result<RawInstance, ParseError> {
    type Parser = fn(&str) -> Result<RawInstance, ParseError>;
    let (first, second): (Parser, Parser) = match preferred {
        Layout::Solomon => (parse_solomon, parse_cordeau),
        Layout::Cordeau => (parse_cordeau, parse_solomon),
    };
    match first(text) {
        Ok(raw) => Ok(raw),
        Err(e) => second(text).map_err(|_| e),
    }
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty())
}

fn number(tok: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ParseError::malformed(line, format!("`{tok}` is not a number ({what})")))?;
    if !v.is_finite() {
        return Err(ParseError::malformed(line, format!("{what} is not finite")));
    }
    Ok(v)
}

fn index(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    let v = number(tok, line, what)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(ParseError::malformed(
            line,
            format!("{what} `{tok}` is not a non-negative integer"),
        ));
    }
    Ok(v as usize)
}

#[allow(clippy::too_many_arguments)]
fn vertex(
    line: usize,
    id: &str,
    x: &str,
    y: &str,
    service: &str,
    reward: &str,
    open: &str,
    close: &str,
) -> Result<Vertex, ParseError> {
    let v = Vertex {
        id: index(id, line, "vertex id")?,
        x: number(x, line, "x coordinate")?,
        y: number(y, line, "y coordinate")?,
        service: number(service, line, "service duration")?,
        reward: number(reward, line, "reward")?,
        open: number(open, line, "opening time")?,
        close: number(close, line, "closing time")?,
    };
    if v.service < 0.0 || v.reward < 0.0 || v.open < 0.0 || v.close < 0.0 {
        return Err(ParseError::malformed(
            line,
            "negative time, duration or reward",
        ));
    }
    if v.open > v.close {
        return Err(ParseError::InvertedWindow {
            line,
            id: v.id,
            open: v.open,
            close: v.close,
        });
    }
    Ok(v)
}

fn finish(vertices: Vec<Vertex>, horizon: Option<f64>) -> Result<RawInstance, ParseError> {
    let mut vertices = vertices;
    let depot = vertices
        .first_mut()
        .ok_or_else(|| ParseError::Truncated("no vertex rows".into()))?;
    if let Some(limit) = horizon.filter(|&h| h > 0.0 && h < depot.close) {
        depot.close = limit;
    }
    let horizon = depot.close;
    let raw = RawInstance { vertices, horizon };
    raw.validate()?;
    Ok(raw)
}

/// Parses a Solomon-derived benchmark file.
pub fn parse_solomon(text: &str) -> Result<RawInstance, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    if text.to_ascii_uppercase().contains("CUST") {
        parse_solomon_table(text)
    } else {
        parse_solomon_numeric(text)
    }
}

/// Classic VRPTW table: `CUST NO. XCOORD. YCOORD. DEMAND READY DUE SERVICE`.
fn parse_solomon_table(text: &str) -> Result<RawInstance, ParseError> {
    let mut lines = content_lines(text);
    // skip everything up to and including the column header
    lines
        .by_ref()
        .find(|(_, toks)| {
            toks.iter()
                .any(|t| t.to_ascii_uppercase().starts_with("XCOORD"))
        })
        .ok_or_else(|| ParseError::Truncated("missing customer column header".into()))?;
    let mut vertices = Vec::new();
    for (line, toks) in lines {
        if toks.len() != 7 {
            return Err(ParseError::malformed(
                line,
                format!("expected 7 fields, found {}", toks.len()),
            ));
        }
        vertices.push(vertex(
            line, toks[0], toks[1], toks[2], toks[6], toks[3], toks[4], toks[5],
        )?);
    }
    finish(vertices, None)
}

/// Numeric TOPTW layout with short header rows followed by vertex rows.
fn parse_solomon_numeric(text: &str) -> Result<RawInstance, ParseError> {
    let mut vertices = Vec::new();
    let mut seen_rows = false;
    for (line, toks) in content_lines(text) {
        if toks.len() < 9 {
            if seen_rows {
                return Err(ParseError::Truncated(format!(
                    "line {line}: vertex row has {} fields, expected at least 9",
                    toks.len()
                )));
            }
            // header rows (`k v N t`, `D Q`)
            for t in &toks {
                number(t, line, "header field")?;
            }
            continue;
        }
        seen_rows = true;
        let n = toks.len();
        vertices.push(vertex(
            line,
            toks[0],
            toks[1],
            toks[2],
            toks[3],
            toks[4],
            toks[n - 2],
            toks[n - 1],
        )?);
    }
    finish(vertices, None)
}

/// Parses a Cordeau `pr` benchmark file.
pub fn parse_cordeau(text: &str) -> Result<RawInstance, ParseError> {
    let mut lines = content_lines(text).peekable();
    let (hline, header) = lines.next().ok_or(ParseError::Empty)?;
    if header.len() != 4 {
        return Err(ParseError::malformed(
            hline,
            format!(
                "header must read `type m n t`, found {} fields",
                header.len()
            ),
        ));
    }
    for t in &header {
        index(t, hline, "header field")?;
    }
    let declared = index(header[2], hline, "customer count")?;

    let mut duration_limit = None;
    while let Some((line, toks)) = lines.peek() {
        if toks.len() != 2 {
            break;
        }
        let d = number(toks[0], *line, "route duration limit")?;
        number(toks[1], *line, "capacity")?;
        duration_limit.get_or_insert(d);
        lines.next();
    }

    let mut vertices = Vec::with_capacity(declared + 1);
    let mut last_line = hline;
    for (line, toks) in lines {
        last_line = line;
        if toks.len() < 9 {
            return Err(ParseError::Truncated(format!(
                "line {line}: vertex row has {} fields, expected at least 9",
                toks.len()
            )));
        }
        let combos = index(toks[6], line, "combination count")?;
        let expected = 9 + combos;
        if toks.len() != expected {
            let err = format!(
                "line {line}: vertex row has {} fields, expected {expected}",
                toks.len()
            );
            return Err(if toks.len() < expected {
                ParseError::Truncated(err)
            } else {
                ParseError::malformed(line, err)
            });
        }
        vertices.push(vertex(
            line,
            toks[0],
            toks[1],
            toks[2],
            toks[3],
            toks[4],
            toks[expected - 2],
            toks[expected - 1],
        )?);
    }
    if vertices.is_empty() {
        return Err(ParseError::Truncated(format!(
            "no vertex rows after line {last_line}"
        )));
    }
    let found = vertices.len() - 1;
    if found != declared {
        return Err(ParseError::CountMismatch { declared, found });
    }
    finish(vertices, duration_limit)
}

//! Normalized COPTW text format.
//!
//! ```text
//! COPTW 1
//! N P TMAX V
//! id x y duration reward open close requirement   (N rows, depot first)
//! ```
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! reading a written instance reproduces it exactly.

use std::fmt::Write as _;

use super::{validate_vertices, Instance, Vertex};
use crate::error::ParseError;

const MAGIC: &str = "COPTW";
const VERSION: &str = "1";
const COLUMNS: [&str; 8] = [
    "id",
    "x",
    "y",
    "duration",
    "reward",
    "open",
    "close",
    "requirement",
];

pub fn write_coptw(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(
        out,
        "{} {} {} {}",
        instance.vertices.len(),
        instance.team_size,
        instance.horizon,
        instance.velocity
    );
    for (k, v) in instance.vertices.iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            k, v.x, v.y, v.service, v.reward, v.open, v.close, instance.requirements[k]
        );
    }
    out
}

fn float(tok: &str, line: usize, column: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError::malformed(line, format!("bad {column} `{tok}`")))
}

fn integer(tok: &str, line: usize, column: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| ParseError::malformed(line, format!("bad {column} `{tok}`")))
}

pub fn read_coptw(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty());

    let (_, magic) = lines.next().ok_or(ParseError::Empty)?;
    if magic != [MAGIC, VERSION] {
        return Err(ParseError::Version(magic.join(" ")));
    }
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::Truncated("missing `N P TMAX V` header".into()))?;
    if header.len() != 4 {
        return Err(ParseError::malformed(
            hline,
            format!(
                "header must read `N P TMAX V`, found {} fields",
                header.len()
            ),
        ));
    }
    let n = integer(header[0], hline, "N")?;
    let team_size = integer(header[1], hline, "P")?;
    let horizon = float(header[2], hline, "TMAX")?;
    let velocity = float(header[3], hline, "V")?;
    if n == 0 {
        return Err(ParseError::malformed(hline, "instance needs a depot row"));
    }

    let mut vertices = Vec::with_capacity(n);
    let mut requirements = Vec::with_capacity(n);
    for (line, toks) in lines.by_ref().take(n) {
        if toks.len() < COLUMNS.len() {
            return Err(ParseError::MissingColumn {
                line,
                column: COLUMNS[toks.len()],
            });
        }
        if toks.len() > COLUMNS.len() {
            return Err(ParseError::malformed(
                line,
                format!("expected {} fields, found {}", COLUMNS.len(), toks.len()),
            ));
        }
        let id = integer(toks[0], line, "id")?;
        if id != vertices.len() {
            return Err(ParseError::malformed(
                line,
                format!("expected id {}, found {id}", vertices.len()),
            ));
        }
        let v = Vertex {
            id,
            x: float(toks[1], line, "x")?,
            y: float(toks[2], line, "y")?,
            service: float(toks[3], line, "duration")?,
            reward: float(toks[4], line, "reward")?,
            open: float(toks[5], line, "open")?,
            close: float(toks[6], line, "close")?,
        };
        if v.open > v.close {
            return Err(ParseError::InvertedWindow {
                line,
                id,
                open: v.open,
                close: v.close,
            });
        }
        vertices.push(v);
        requirements.push(integer(toks[7], line, "requirement")?);
    }
    if vertices.len() != n {
        return Err(ParseError::Truncated(format!(
            "header declares {n} vertices, found {}",
            vertices.len()
        )));
    }
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::malformed(
            line,
            "trailing data after vertex rows",
        ));
    }
    validate_vertices(&vertices, horizon)?;
    let instance = Instance {
        vertices,
        requirements,
        team_size,
        velocity,
        horizon,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "\
COPTW 1
3 2 100 1
0 0 0 0 0 0 100 0
1 3 4 5 20 10 50 2
2 -1.5 2.25 0 7.5 0 80 1
";

    #[test]
    fn golden_file() {
        let inst = read_coptw(GOLDEN).unwrap();
        assert_eq!(inst.vertices.len(), 3);
        assert_eq!(inst.team_size, 2);
        assert_eq!(inst.horizon, 100.0);
        assert_eq!(inst.velocity, 1.0);
        assert_eq!(inst.requirements, vec![0, 2, 1]);
        let v1 = &inst.vertices[1];
        assert_eq!(
            (v1.x, v1.y, v1.service, v1.reward, v1.open, v1.close),
            (3.0, 4.0, 5.0, 20.0, 10.0, 50.0)
        );
        let v2 = &inst.vertices[2];
        assert_eq!((v2.x, v2.y, v2.reward), (-1.5, 2.25, 7.5));
        assert_eq!(write_coptw(&inst), GOLDEN);
    }

    #[test]
    fn missing_requirement_column() {
        let text = GOLDEN.replace("1 3 4 5 20 10 50 2", "1 3 4 5 20 10 50");
        assert_eq!(
            read_coptw(&text),
            Err(ParseError::MissingColumn {
                line: 4,
                column: "requirement"
            })
        );
    }

    #[test]
    fn version_mismatch() {
        let text = GOLDEN.replace("COPTW 1", "COPTW 2");
        assert!(matches!(read_coptw(&text), Err(ParseError::Version(_))));
    }

    #[test]
    fn row_count_errors() {
        let short = GOLDEN.replace("3 2 100 1", "4 2 100 1");
        assert!(matches!(read_coptw(&short), Err(ParseError::Truncated(_))));
        let long = GOLDEN.replace("3 2 100 1", "2 2 100 1");
        assert!(read_coptw(&long).is_err());
    }

    #[test]
    fn horizon_must_match_depot() {
        let text = GOLDEN.replace("3 2 100 1", "3 2 90 1");
        assert!(matches!(read_coptw(&text), Err(ParseError::Invalid(_))));
    }
}

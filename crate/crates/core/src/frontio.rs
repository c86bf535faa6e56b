//! Plain-text, CSV and JSON encodings of objective-vector fronts.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontFormat {
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for FrontFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parse(format!("unknown front format `{other}`"))),
        }
    }
}

impl FrontFormat {
    /// Guesses the format from a file extension, defaulting to text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::Csv,
            Some("json") => Self::Json,
            _ => Self::Text,
        }
    }
}

// `{:?}` on f64 prints the shortest representation that round-trips exactly.
fn push_row(out: &mut String, row: &[f64], sep: &str) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            out.push_str(sep);
        }
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

/// Encodes a front. `objectives` sets the CSV header width when the front is empty.
pub fn encode(front: &[Vec<f64>], objectives: usize, format: FrontFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        FrontFormat::Text => {
            for row in front {
                push_row(&mut out, row, " ");
            }
        }
        FrontFormat::Csv => {
            let m = front.first().map_or(objectives, Vec::len);
            let header: Vec<String> = (1..=m).map(|k| format!("f{k}")).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in front {
                push_row(&mut out, row, ",");
            }
        }
        FrontFormat::Json => {
            out = serde_json::to_string(front)?;
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn decode(text: &str, format: FrontFormat) -> Result<Vec<Vec<f64>>> {
    let parse_line = |line: &str, sep: &dyn Fn(char) -> bool, lineno: usize| {
        line.split(sep)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {lineno}: `{t}`: {e}"))
                })
            })
            .collect::<Result<Vec<f64>>>()
    };
    let rows = match format {
        FrontFormat::Text => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| parse_line(l, &char::is_whitespace, i + 1))
            .collect::<Result<Vec<_>>>()?,
        FrontFormat::Csv => text
            .lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_line(l, &|c| c == ',', i + 1))
            .collect::<Result<Vec<_>>>()?,
        FrontFormat::Json => serde_json::from_str(text)?,
    };
    if let Some(first) = rows.first() {
        if let Some(bad) = rows.iter().position(|r| r.len() != first.len()) {
            return Err(Error::Parse(format!(
                "row {} has {} values, expected {}",
                bad + 1,
                rows[bad].len(),
                first.len()
            )));
        }
    }
    Ok(rows)
}

pub fn write_front(
    path: &Path,
    front: &[Vec<f64>],
    objectives: usize,
    format: FrontFormat,
) -> Result<()> {
    std::fs::write(path, encode(front, objectives, format)?)?;
    Ok(())
}

pub fn read_front(path: &Path, format: FrontFormat) -> Result<Vec<Vec<f64>>> {
    decode(&std::fs::read_to_string(path)?, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_csv_is_header_only() {
        let s = encode(&[], 3, FrontFormat::Csv).unwrap();
        assert_eq!(s, "f1,f2,f3\n");
        assert!(decode(&s, FrontFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn text_skips_comments_and_blank_lines() {
        let rows = decode("# header\n0 1\n\n1\t0\n", FrontFormat::Text).unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(decode("0 1\n1\n", FrontFormat::Text).is_err());
    }

    proptest! {
        #[test]
        fn every_format_round_trips(
            front in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 2), 0..20),
            fmt in prop_oneof![Just(FrontFormat::Text), Just(FrontFormat::Csv), Just(FrontFormat::Json)],
        ) {
            let s = encode(&front, 2, fmt).unwrap();
            prop_assert_eq!(decode(&s, fmt).unwrap(), front);
        }
    }
}

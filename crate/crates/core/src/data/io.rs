//! CSV and libsvm readers.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Labels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Libsvm,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "libsvm" | "svmlight" => Ok(Self::Libsvm),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

/// Which CSV column carries the class label. libsvm ignores this: the label
/// is always the first token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSpec {
    First,
    #[default]
    Last,
    Column(usize),
}

impl FromStr for LabelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Self::First),
            "last" => Ok(Self::Last),
            other => other
                .parse::<usize>()
                .map(Self::Column)
                .map_err(|_| Error::InvalidParameter(format!("bad label column `{other}`"))),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat, label: LabelSpec) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    match format {
        DataFormat::Csv => parse_csv(&text, label),
        DataFormat::Libsvm => parse_libsvm(&text),
    }
}

fn parse_label(token: &str, line: usize) -> Result<i64> {
    let value: f64 = token.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("label `{}` is not numeric", token.trim()),
    })?;
    if !value.is_finite() || value.fract() != 0.0 {
        return Err(Error::Parse {
            line,
            message: format!("label `{}` is not an integer class id", token.trim()),
        });
    }
    Ok(value as i64)
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not a number", token.trim()),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse {
            line,
            message: "non-finite value".to_string(),
        })
    }
}

/// Parses comma-separated samples, one per row. A first row that does not
/// parse as numbers is taken as the header.
pub fn parse_csv(text: &str, label: LabelSpec) -> Result<Dataset> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let mut header: Option<Vec<String>> = None;
    if let Some(&(_, first)) = rows.peek() {
        if first.split(',').any(|t| t.trim().parse::<f64>().is_err()) {
            header = Some(first.split(',').map(|t| t.trim().to_string()).collect());
            rows.next();
        }
    }

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_col = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();

    for (line, row) in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: fields.len(),
            });
        }
        let lc = *label_col.get_or_insert_with(|| match label {
            LabelSpec::First => 0,
            LabelSpec::Last => expected - 1,
            LabelSpec::Column(c) => c,
        });
        if lc >= expected {
            return Err(Error::InvalidParameter(format!(
                "label column {lc} out of range for {expected} columns"
            )));
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); expected - 1];
        }
        let mut slot = 0;
        for (c, field) in fields.iter().enumerate() {
            if c == lc {
                raw_labels.push(parse_label(field, line)?);
            } else {
                columns[slot].push(parse_value(field, line)?);
                slot += 1;
            }
        }
    }

    let labels = Labels::from_raw(&raw_labels)?;
    let names = match (header, label_col) {
        (Some(mut h), Some(lc)) => {
            h.remove(lc);
            Some(h)
        }
        _ => None,
    };
    Dataset::new(columns, labels, names)
}

/// Parses `label idx:val ...` rows with 1-based feature indices. Absent
/// entries are zero.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut raw_labels = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;

    for (i, row) in text.lines().enumerate() {
        let line = i + 1;
        let row = row.split('#').next().unwrap_or("").trim();
        if row.is_empty() {
            continue;
        }
        let mut tokens = row.split_whitespace();
        let label = tokens.next().ok_or(Error::Parse {
            line,
            message: "missing label".to_string(),
        })?;
        raw_labels.push(parse_label(label, line)?);
        let mut sample = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `index:value`, found `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad feature index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    message: "feature indices are 1-based".to_string(),
                });
            }
            d = d.max(idx);
            sample.push((idx - 1, parse_value(val, line)?));
        }
        entries.push(sample);
    }

    let n = entries.len();
    let mut columns = vec![vec![0.0; n]; d];
    for (s, sample) in entries.into_iter().enumerate() {
        for (j, v) in sample {
            columns[j][s] = v;
        }
    }
    let labels = Labels::from_raw(&raw_labels)?;
    Dataset::new(columns, labels, None)
}

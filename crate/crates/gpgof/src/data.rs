//! Reading count data from disk.
//!
//! * `raw`: nonnegative integers separated by whitespace (typically one per
//!   line). Lines starting with `#` are comments.
//! * `freq`: CSV records `value,count` without a header; `count >= 1`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use gpgof_core::CountSample;
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Raw,
    Freq,
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Raw => "raw",
            DataFormat::Freq => "freq",
        })
    }
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(DataFormat::Raw),
            "freq" => Ok(DataFormat::Freq),
            other => Err(format!(
                "unknown data format `{other}` (expected raw or freq)"
            )),
        }
    }
}

pub fn read_sample(path: &Path, format: DataFormat) -> Result<CountSample> {
    let text = fs::read_to_string(path).map_err(|source| GofError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = match format {
        DataFormat::Raw => parse_raw(&text),
        DataFormat::Freq => parse_freq(&text),
    };
    parsed.map_err(|message| GofError::Data {
        path: path.to_path_buf(),
        message,
    })
}

fn parse_count(token: &str, line: usize, what: &str) -> std::result::Result<u64, String> {
    let token = token.trim();
    if token.starts_with('-') && token[1..].parse::<u64>().is_ok() {
        return Err(format!("line {line}: negative {what} `{token}`"));
    }
    token
        .parse::<u64>()
        .map_err(|_| format!("line {line}: `{token}` is not a nonnegative integer {what}"))
}

pub fn parse_raw(text: &str) -> std::result::Result<CountSample, String> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for token in line.split_whitespace() {
            values.push(parse_count(token, i + 1, "value")?);
        }
    }
    CountSample::from_values(&values).map_err(|e| e.to_string())
}

pub fn parse_freq(text: &str) -> std::result::Result<CountSample, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(format!(
                "line {line}: expected `value,count`, found {} fields",
                record.len()
            ));
        }
        let value = parse_count(&record[0], line, "value")?;
        let count = parse_count(&record[1], line, "count")?;
        if count == 0 {
            return Err(format!("line {line}: count must be at least 1"));
        }
        pairs.push((value, count));
    }
    CountSample::from_frequencies(pairs).map_err(|e| e.to_string())
}

//! Touchstone v1 one-port (`.s1p`) reader and writer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::device::Spectrum;
use crate::error::{Error, Result};
use crate::io::table::format_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    /// Real, imaginary.
    RI,
    /// Linear magnitude, angle in degrees.
    MA,
    /// 20·log10 magnitude, angle in degrees.
    DB,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::RI => "RI",
            DataFormat::MA => "MA",
            DataFormat::DB => "DB",
        }
    }

    fn to_pair(self, v: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RI => (v.re, v.im),
            DataFormat::MA => (v.norm(), v.arg().to_degrees()),
            DataFormat::DB => (20.0 * v.norm().log10(), v.arg().to_degrees()),
        }
    }

    fn from_pair(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::RI => Complex64::new(a, b),
            DataFormat::MA => Complex64::from_polar(a, b.to_radians()),
            DataFormat::DB => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }
}

impl std::str::FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(DataFormat::RI),
            "MA" => Ok(DataFormat::MA),
            "DB" => Ok(DataFormat::DB),
            _ => Err(Error::invalid(
                "format",
                format!("`{s}` is not RI, MA or DB"),
            )),
        }
    }
}

/// One-port S-parameter data. Frequencies are stored in Hz whatever the file
/// unit; `unit` is the unit used when writing.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneRecord {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    /// Ω
    pub reference_resistance: f64,
    /// Comment text without the leading `!`.
    pub comments: Vec<String>,
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl TouchstoneRecord {
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        TouchstoneRecord {
            unit: FrequencyUnit::Hz,
            format: DataFormat::RI,
            reference_resistance: 50.0,
            comments: Vec::new(),
            frequencies: spectrum.frequencies(),
            values: spectrum.values.clone(),
        }
    }

    /// Fails unless the frequencies form a uniform grid.
    pub fn to_spectrum(&self) -> Result<Spectrum> {
        Spectrum::from_samples(&self.frequencies, self.values.clone())
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Options {
    unit: FrequencyUnit,
    format: DataFormat,
    resistance: f64,
}

fn parse_options(line_no: usize, text: &str) -> Result<Options> {
    let mut opts = Options {
        unit: FrequencyUnit::GHz,
        format: DataFormat::MA,
        resistance: 50.0,
    };
    let mut tokens = text.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = FrequencyUnit::Hz,
            "KHZ" => opts.unit = FrequencyUnit::KHz,
            "MHZ" => opts.unit = FrequencyUnit::MHz,
            "GHZ" => opts.unit = FrequencyUnit::GHz,
            "S" => {}
            "Y" | "Z" | "G" | "H" => {
                return Err(parse_error(
                    line_no,
                    format!("parameter `{tok}` not supported, only S"),
                ))
            }
            "RI" => opts.format = DataFormat::RI,
            "MA" => opts.format = DataFormat::MA,
            "DB" => opts.format = DataFormat::DB,
            "R" => {
                let r = tokens
                    .next()
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|r| *r > 0.0)
                    .ok_or_else(|| parse_error(line_no, "`R` needs a positive resistance"))?;
                opts.resistance = r;
            }
            _ => return Err(parse_error(line_no, format!("unknown option `{tok}`"))),
        }
    }
    Ok(opts)
}

/// Parses a Touchstone v1 one-port file. Keywords are case-insensitive,
/// comments (`!`) are collected, only the first option line counts.
pub fn read_s1p(text: &str) -> Result<TouchstoneRecord> {
    let mut options: Option<Options> = None;
    let mut comments = Vec::new();
    let mut frequencies: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let (content, comment) = match raw.find('!') {
            Some(p) => (&raw[..p], Some(raw[p + 1..].trim())),
            None => (raw, None),
        };
        if let Some(c) = comment {
            comments.push(c.to_string());
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('#') {
            if options.is_none() {
                options = Some(parse_options(line_no, rest)?);
            }
            continue;
        }
        let opts = options
            .as_ref()
            .ok_or_else(|| parse_error(line_no, "data before the `#` option line"))?;
        let nums = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_error(line_no, format!("`{t}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() != 3 {
            return Err(parse_error(
                line_no,
                format!("expected 3 columns, found {}", nums.len()),
            ));
        }
        let f = nums[0] * opts.unit.multiplier();
        if let Some(&prev) = frequencies.last() {
            if !(f > prev) {
                return Err(parse_error(line_no, "frequencies must strictly increase"));
            }
        }
        frequencies.push(f);
        values.push(opts.format.from_pair(nums[1], nums[2]));
    }
    let opts = options.ok_or_else(|| parse_error(0, "missing `#` option line"))?;
    Ok(TouchstoneRecord {
        unit: opts.unit,
        format: opts.format,
        reference_resistance: opts.resistance,
        comments,
        frequencies,
        values,
    })
}

/// Writes `record` in `format`: comments, the option line, then one row per
/// point in the record's frequency unit.
pub fn write_s1p(record: &TouchstoneRecord, format: DataFormat) -> String {
    let mut out = String::new();
    for c in &record.comments {
        let _ = writeln!(out, "! {c}");
    }
    let _ = writeln!(
        out,
        "# {} S {} R {}",
        record.unit.keyword(),
        format.keyword(),
        format_number(record.reference_resistance)
    );
    let scale = record.unit.multiplier();
    for (f, v) in record.frequencies.iter().zip(&record.values) {
        let (a, b) = format.to_pair(*v);
        let _ = writeln!(
            out,
            "{} {} {}",
            format_number(f / scale),
            format_number(a),
            format_number(b)
        );
    }
    out
}

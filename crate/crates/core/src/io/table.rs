//! Numeric CSV tables with a mandatory header row.
//!
//! Lines starting with `#` before the header carry provenance (seed, SNR)
//! and are skipped on read.

use num_complex::Complex64;

use crate::calib::{CompensatedPoint, SweepRow};
use crate::device::Spectrum;
use crate::error::{Error, Result};

/// Shortest round-trip decimal, switching to exponent notation for
/// `0 < |x| < 1e-3` and `|x| ≥ 1e15`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-3..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comments.push(comment.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Indices of `names`; the error lists every missing column.
    pub fn require(&self, names: &[&str]) -> Result<Vec<usize>> {
        let missing: Vec<&str> = names
            .iter()
            .filter(|n| self.column(n).is_none())
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(Error::invalid(
                "columns",
                format!("missing column(s): {}", missing.join(", ")),
            ));
        }
        Ok(names.iter().map(|n| self.column(n).unwrap()).collect())
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.require(&[name])?[0];
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format_number(*x)))
                .expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(body).expect("utf-8 csv"));
        out
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut comments = Vec::new();
        let mut body_start = 0;
        let mut skipped = 0;
        for line in text.split_inclusive('\n') {
            match line.trim_start().strip_prefix('#') {
                Some(c) => {
                    comments.push(c.trim().to_string());
                    body_start += line.len();
                    skipped += 1;
                }
                None => break,
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text[body_start..].as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse {
            line: skipped + 1,
            message: e.to_string(),
        })?;
        let columns: Vec<String> = header.iter().map(str::to_string).collect();
        if columns.iter().all(|c| c.is_empty()) {
            return Err(Error::Parse {
                line: skipped + 1,
                message: "missing header row".into(),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: skipped + e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = skipped + record.position().map_or(0, |p| p.line() as usize);
            let row = record
                .iter()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("`{t}` is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table {
            comments,
            columns,
            rows,
        })
    }
}

pub const SWEEP_COLUMNS: [&str; 4] = ["temperature_c", "field_mt", "peak_id", "f_zero_hz"];
pub const COMPENSATED_COLUMNS: [&str; 4] = [
    "temperature_c",
    "field_mt",
    "shift_ppm",
    "shift_ppm_compensated",
];
pub const SPECTRUM_COLUMNS: [&str; 3] = ["frequency_hz", "re", "im"];

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            r.temperature_c,
            r.field_mt,
            r.peak_id as f64,
            r.f_zero_hz,
        ]);
    }
    t
}

pub fn sweep_rows(table: &Table) -> Result<Vec<SweepRow>> {
    let idx = table.require(&SWEEP_COLUMNS)?;
    table
        .rows
        .iter()
        .map(|r| {
            let id = r[idx[2]];
            if !(id >= 0.0 && id.fract() == 0.0 && id <= u32::MAX as f64) {
                return Err(Error::invalid(
                    "peak_id",
                    format!("`{id}` is not a peak id"),
                ));
            }
            Ok(SweepRow {
                temperature_c: r[idx[0]],
                field_mt: r[idx[1]],
                peak_id: id as u32,
                f_zero_hz: r[idx[3]],
            })
        })
        .collect()
}

pub fn compensated_table(points: &[CompensatedPoint]) -> Table {
    let mut t = Table::new(COMPENSATED_COLUMNS);
    for p in points {
        t.push(vec![
            p.temperature_c,
            p.field_mt,
            p.shift_ppm,
            p.shift_ppm_compensated,
        ]);
    }
    t
}

pub fn spectrum_table(spectrum: &Spectrum) -> Table {
    let mut t = Table::new(SPECTRUM_COLUMNS);
    for (i, v) in spectrum.values.iter().enumerate() {
        t.push(vec![spectrum.frequency(i), v.re, v.im]);
    }
    t
}

pub fn spectrum_from_table(table: &Table) -> Result<Spectrum> {
    let idx = table.require(&SPECTRUM_COLUMNS)?;
    let f: Vec<f64> = table.rows.iter().map(|r| r[idx[0]]).collect();
    let v = table
        .rows
        .iter()
        .map(|r| Complex64::new(r[idx[1]], r[idx[2]]))
        .collect();
    Spectrum::from_samples(&f, v)
}

//! Deterministic SVG charts from the CSV tables written by the other
//! subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use msaw_core::io::format_number;
use msaw_core::io::table::Table;
use msaw_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    SpectrumDb,
    TimeEnvelopeDb,
    ShiftVsTemperature,
    ShiftVsField,
    CompensatedOverlay,
    DispersionCurve,
}

impl PlotKind {
    /// Columns the input table must have.
    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::SpectrumDb => &["frequency_hz", "re", "im"],
            PlotKind::TimeEnvelopeDb => &["time_s", "level_db"],
            PlotKind::ShiftVsTemperature | PlotKind::ShiftVsField => {
                &["temperature_c", "field_mt", "peak_id", "f_zero_hz"]
            }
            PlotKind::CompensatedOverlay => &["temperature_c", "field_mt"],
            PlotKind::DispersionCurve => &["mode_index", "phase_velocity_mps"],
        }
    }

    fn labels(self) -> (&'static str, &'static str, &'static str) {
        match self {
            PlotKind::SpectrumDb => ("S11 magnitude", "Frequency (MHz)", "|S11| (dB)"),
            PlotKind::TimeEnvelopeDb => ("Time response", "Time (µs)", "Level (dB)"),
            PlotKind::ShiftVsTemperature => {
                ("Shift versus temperature", "Temperature (°C)", "Δf/f (ppm)")
            }
            PlotKind::ShiftVsField => ("Shift versus field", "Field (mT)", "Δf/f (ppm)"),
            PlotKind::CompensatedOverlay => {
                ("Compensated shift", "Field (mT)", "Δf/f compensated (ppm)")
            }
            PlotKind::DispersionCurve => ("Dispersion", "", "Phase velocity (m/s)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotOptions {
    pub title: Option<String>,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Restricts sweep plots to one peak.
    pub peak: Option<u32>,
    /// Value column of `compensated_overlay`; default `shift_ppm_compensated`.
    pub column: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Splits a table into the series drawn for `kind`, with the x-axis label.
pub fn build_series(
    kind: PlotKind,
    table: &Table,
    options: &PlotOptions,
) -> Result<(Vec<Series>, String)> {
    let mut required: Vec<&str> = kind.required_columns().to_vec();
    let value_column = options
        .column
        .clone()
        .unwrap_or_else(|| "shift_ppm_compensated".to_string());
    if kind == PlotKind::CompensatedOverlay {
        required.push(&value_column);
    }
    let idx = table.require(&required)?;
    let (_, x_label, _) = kind.labels();
    let mut x_label = x_label.to_string();
    let series = match kind {
        PlotKind::SpectrumDb => vec![Series {
            label: "S11".into(),
            points: table
                .rows
                .iter()
                .map(|r| {
                    let mag = r[idx[1]].hypot(r[idx[2]]);
                    (r[idx[0]] * 1e-6, 20.0 * mag.log10())
                })
                .collect(),
        }],
        PlotKind::TimeEnvelopeDb => vec![Series {
            label: "envelope".into(),
            points: table
                .rows
                .iter()
                .map(|r| (r[idx[0]] * 1e6, r[idx[1]]))
                .collect(),
        }],
        PlotKind::ShiftVsTemperature | PlotKind::ShiftVsField => {
            sweep_series(kind, table, &idx, options.peak)?
        }
        PlotKind::CompensatedOverlay => {
            let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
            for r in &table.rows {
                let (t, h, y) = (r[idx[0]], r[idx[1]], r[idx[2]]);
                match groups.iter_mut().find(|(gt, _)| *gt == t) {
                    Some((_, pts)) => pts.push((h, y)),
                    None => groups.push((t, vec![(h, y)])),
                }
            }
            groups
                .into_iter()
                .map(|(t, points)| Series {
                    label: format!("{} °C", format_number(t)),
                    points,
                })
                .collect()
        }
        PlotKind::DispersionCurve => {
            let control = table
                .columns
                .iter()
                .position(|c| {
                    !["mode_index", "phase_velocity_mps", "residual"].contains(&c.as_str())
                })
                .ok_or_else(|| Error::InvalidParameter {
                    name: "columns".into(),
                    reason: "missing column(s): control variable".into(),
                })?;
            x_label = table.columns[control].clone();
            let mut modes: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
            for r in &table.rows {
                modes
                    .entry(r[idx[0]] as i64)
                    .or_default()
                    .push((r[control], r[idx[1]]));
            }
            modes
                .into_iter()
                .map(|(m, points)| Series {
                    label: format!("mode {m}"),
                    points,
                })
                .collect()
        }
    };
    Ok((series, x_label))
}

/// Shifts in ppm relative to each peak's first row in the table, one series
/// per peak (per temperature too when plotting against field).
fn sweep_series(
    kind: PlotKind,
    table: &Table,
    idx: &[usize],
    peak: Option<u32>,
) -> Result<Vec<Series>> {
    let mut reference: BTreeMap<u32, f64> = BTreeMap::new();
    let mut groups: Vec<((u32, u64), String, Vec<(f64, f64)>)> = Vec::new();
    for r in &table.rows {
        let (t, h, id, f) = (r[idx[0]], r[idx[1]], r[idx[2]] as u32, r[idx[3]]);
        if peak.is_some_and(|p| p != id) {
            continue;
        }
        let f0 = *reference.entry(id).or_insert(f);
        let shift = msaw_core::calib::relative_shift(f, f0)?;
        let (key, label, point) = match kind {
            PlotKind::ShiftVsTemperature => ((id, 0), format!("peak {id}"), (t, shift)),
            _ => (
                (id, t.to_bits()),
                format!("peak {id}, {} °C", format_number(t)),
                (h, shift),
            ),
        };
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, _, pts)) => pts.push(point),
            None => groups.push((key, label, vec![point])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(_, label, points)| Series { label, points })
        .collect())
}

/// The table rendered as a standalone SVG.
pub fn emit_plot(kind: PlotKind, table: &Table, options: &PlotOptions) -> Result<String> {
    let (series, x_label) = build_series(kind, table, options)?;
    let (title, _, y_label) = kind.labels();
    let chart = Chart {
        title: options.title.clone().unwrap_or_else(|| title.to_string()),
        x_label: options.x_label.clone().unwrap_or(x_label),
        y_label: options
            .y_label
            .clone()
            .unwrap_or_else(|| y_label.to_string()),
        x_range: options.x_range,
        y_range: options.y_range,
    };
    Ok(render(&chart, &series))
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
/// Series with more points than this are drawn without markers.
const MARKER_LIMIT: usize = 200;
/// Polyline vertices closer than this to the simplified line are dropped, px.
const SIMPLIFY_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// Axis covering `values` (or exactly `fixed`), extended to whole ticks.
pub fn axis(values: impl Iterator<Item = f64>, fixed: Option<(f64, f64)>) -> Axis {
    if let Some((lo, hi)) = fixed {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let (lo, hi) = if lo == hi {
            (lo - 1.0, hi + 1.0)
        } else {
            (lo, hi)
        };
        return Axis {
            lo,
            hi,
            step: nice_step(hi - lo),
        };
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return Axis {
            lo: 0.0,
            hi: 1.0,
            step: 0.2,
        };
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        lo -= pad;
        hi += pad;
    }
    let step = nice_step(hi - lo);
    Axis {
        lo: (lo / step).floor() * step,
        hi: (hi / step).ceil() * step,
        step,
    }
}

impl Axis {
    pub fn ticks(&self) -> Vec<f64> {
        let first = (self.lo / self.step - 1e-9).ceil() as i64;
        let last = (self.hi / self.step + 1e-9).floor() as i64;
        (first..=last).map(|i| i as f64 * self.step).collect()
    }

    fn label(&self, v: f64) -> String {
        let decimals = (-self.step.log10().floor()).max(0.0) as usize;
        let s = format!("{v:.decimals$}");
        if s.trim_start_matches('-')
            .chars()
            .all(|c| c == '0' || c == '.')
        {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn perpendicular(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    ((p.0 - a.0) * dy - (p.1 - a.1) * dx).abs() / len
}

/// Ramer–Douglas–Peucker simplification.
pub fn simplify(points: &[(f64, f64)], tolerance: f64) -> Vec<(f64, f64)> {
    if points.len() < 3 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0, points.len() - 1)];
    while let Some((a, b)) = stack.pop() {
        let mut worst = (0.0, 0);
        for i in a + 1..b {
            let d = perpendicular(points[i], points[a], points[b]);
            if d > worst.0 {
                worst = (d, i);
            }
        }
        if worst.0 > tolerance {
            keep[worst.1] = true;
            stack.push((a, worst.1));
            stack.push((worst.1, b));
        }
    }
    points
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(p, _)| *p)
        .collect()
}

pub fn render(chart: &Chart, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let xa = axis(all().map(|p| p.0), chart.x_range);
    let ya = axis(all().map(|p| p.1), chart.y_range);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - xa.lo) / (xa.hi - xa.lo) * pw;
    let sy = |y: f64| TOP + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&chart.title)
    );

    let _ = writeln!(
        out,
        r##"<g class="grid" stroke="#e0e0e0" stroke-width="1">"##
    );
    for t in xa.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}"/>"#,
            sx(t),
            TOP + ph
        );
    }
    for t in ya.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}"/>"#,
            sy(t),
            LEFT + pw
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1" fill="none">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/>"#
    );
    for t in xa.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
            sx(t),
            TOP + ph,
            TOP + ph + 5.0
        );
    }
    for t in ya.ticks() {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{LEFT}" y2="{1:.2}"/>"#,
            LEFT - 5.0,
            sy(t)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="tick-labels">"#);
    for t in xa.ticks() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            TOP + ph + 19.0,
            xa.label(t)
        );
    }
    for t in ya.ticks() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            sy(t) + 4.0,
            ya.label(t)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(&chart.y_label)
    );

    let _ = writeln!(out, r#"<g class="data" clip-path="url(#plot-area)">"#);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let px: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (sx(x), sy(y)))
            .collect();
        let line = simplify(&px, SIMPLIFY_TOLERANCE);
        if line.len() > 1 {
            let coords: Vec<String> = line.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        if px.len() <= MARKER_LIMIT {
            for (x, y) in &px {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    if !series.is_empty() {
        let _ = writeln!(out, r#"<g class="legend">"#);
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = TOP + 10.0 + 18.0 * i as f64;
            let x = LEFT + pw + 14.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                x + 22.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                x + 28.0,
                y + 4.0,
                escape(&s.label)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

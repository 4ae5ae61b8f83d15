//! Reader-side processing of an S₁₁ record.
//!
//! Spectrum → time domain (zero-padded inverse DFT) → echo detection → time
//! gating → back to the frequency grid → phase unwrapping → frequency of zero
//! unwrapped phase.
//!
//! Time-domain convention: with `N` spectrum samples zero-padded to
//! `M = pad·N`, sample `m` sits at `t = m/(M·Δf)` and
//!
//! ```text
//! x[m] = (1/N) Σ_n S[n] · exp(+i2π·n·m/M)
//! ```
//!
//! so a unit-magnitude pure delay `exp(−i2πfτ)` peaks with magnitude 1 at
//! `t ≈ τ`. The record is periodic with period `1/Δf`.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use crate::device::{FrequencyGrid, Spectrum};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], direction: FftDirection) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    fft.process(buf);
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeResponse {
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Grid of the spectrum this record was computed from.
    pub source: FrequencyGrid,
}

impl TimeResponse {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + self.dt * i as f64
    }

    /// Record length `M·dt`, equal to `1/Δf`.
    pub fn duration(&self) -> f64 {
        self.dt * self.len() as f64
    }

    pub fn level_db(&self, i: usize) -> f64 {
        20.0 * self.values[i].norm().log10()
    }

    pub fn scaled(&self, factor: f64) -> TimeResponse {
        TimeResponse {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Index of the sample nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        let i = ((t - self.t_start) / self.dt).round();
        (i.max(0.0) as usize).min(self.len().saturating_sub(1))
    }

    /// Largest envelope magnitude within `[t0, t1]`.
    pub fn max_in(&self, t0: f64, t1: f64) -> f64 {
        let lo = ((t0 - self.t_start) / self.dt).ceil().max(0.0) as usize;
        let hi = (((t1 - self.t_start) / self.dt).floor().max(-1.0) + 1.0) as usize;
        let hi = hi.min(self.len());
        self.values
            .get(lo..hi.max(lo))
            .unwrap_or(&[])
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

pub fn to_time_domain(spectrum: &Spectrum, zero_pad_factor: usize) -> Result<TimeResponse> {
    if zero_pad_factor < 1 {
        return Err(Error::invalid("zero_pad_factor", "must be >= 1"));
    }
    let n = spectrum.len();
    if n < 2 {
        return Err(Error::invalid("spectrum", "need >= 2 samples"));
    }
    let m = n * zero_pad_factor;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(&spectrum.values);
    fft_in_place(&mut buf, FftDirection::Inverse);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(TimeResponse {
        t_start: 0.0,
        dt: 1.0 / (m as f64 * spectrum.step()),
        values: buf,
        source: spectrum.grid(),
    })
}

/// Forward transform of a (possibly gated) time record back onto the grid
/// it was computed from. Inverse of [`to_time_domain`].
pub fn to_frequency_domain(tr: &TimeResponse) -> Result<Spectrum> {
    let n = tr.source.n_points;
    let m = tr.len();
    if m < n {
        return Err(Error::invalid(
            "time response",
            "shorter than its source grid",
        ));
    }
    let mut buf = tr.values.clone();
    fft_in_place(&mut buf, FftDirection::Forward);
    let scale = n as f64 / m as f64;
    buf.truncate(n);
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Spectrum::new(tr.source, buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Peak time refined by parabolic interpolation of the envelope, s.
    pub time: f64,
    pub index: usize,
    pub level_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    /// Descending level.
    pub peaks: Vec<Peak>,
    /// False when fewer than the requested number of peaks were found.
    pub complete: bool,
}

impl PeakList {
    /// Peaks sorted by time.
    pub fn by_time(&self) -> Vec<Peak> {
        let mut p = self.peaks.clone();
        p.sort_by(|a, b| a.time.total_cmp(&b.time));
        p
    }
}

fn refine_peak(tr: &TimeResponse, i: usize) -> f64 {
    if i == 0 || i + 1 >= tr.len() {
        return tr.time(i);
    }
    let (a, b, c) = (
        tr.values[i - 1].norm(),
        tr.values[i].norm(),
        tr.values[i + 1].norm(),
    );
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return tr.time(i);
    }
    let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    tr.time(i) + delta * tr.dt
}

/// Maxima further than this below the strongest one are not echoes.
pub const PEAK_FLOOR_DB: f64 = -40.0;

/// Strongest local maxima of the envelope, greedily suppressing any maximum
/// within `min_separation` of a stronger (or equal and earlier) one, and any
/// below [`PEAK_FLOOR_DB`] relative to the strongest.
pub fn detect_peaks(tr: &TimeResponse, count: usize, min_separation: f64) -> Result<PeakList> {
    if count == 0 {
        return Err(Error::invalid("count", "must be >= 1"));
    }
    if !(min_separation >= 0.0) {
        return Err(Error::invalid("min_separation", "must be >= 0"));
    }
    let mag: Vec<f64> = tr.values.iter().map(|v| v.norm()).collect();
    let n = mag.len();
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i == 0 { 0.0 } else { mag[i - 1] };
            let right = if i + 1 == n { 0.0 } else { mag[i + 1] };
            mag[i] > 0.0 && mag[i] > left && mag[i] >= right
        })
        .collect();
    candidates.sort_by(|&a, &b| mag[b].total_cmp(&mag[a]).then(a.cmp(&b)));
    if let Some(&top) = candidates.first() {
        let floor = mag[top] * 10f64.powf(PEAK_FLOOR_DB / 20.0);
        candidates.retain(|&i| mag[i] >= floor);
    }

    let mut accepted: Vec<Peak> = Vec::new();
    for i in candidates {
        if accepted.len() == count {
            break;
        }
        let t = tr.time(i);
        if accepted
            .iter()
            .any(|p| (tr.time(p.index) - t).abs() < min_separation)
        {
            continue;
        }
        accepted.push(Peak {
            time: refine_peak(tr, i),
            index: i,
            level_db: 20.0 * mag[i].log10(),
        });
    }
    Ok(PeakList {
        complete: accepted.len() == count,
        peaks: accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WindowKind {
    Rectangular,
    /// Tukey window; `taper` is the total tapered fraction of the width.
    CosineTapered {
        taper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// s
    pub center: f64,
    /// s
    pub width: f64,
    pub window: WindowKind,
}

impl Gate {
    pub fn cosine(center: f64, width: f64, taper: f64) -> Self {
        Gate {
            center,
            width,
            window: WindowKind::CosineTapered { taper },
        }
    }

    pub fn weight(&self, t: f64) -> f64 {
        let u = (t - self.center).abs() / (0.5 * self.width);
        if u > 1.0 {
            return 0.0;
        }
        match self.window {
            WindowKind::Rectangular => 1.0,
            WindowKind::CosineTapered { taper } => {
                let flat = 1.0 - taper;
                if u <= flat {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (u - flat) / taper).cos())
                }
            }
        }
    }

    fn validate(&self, tr: &TimeResponse) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite() && self.center.is_finite()) {
            return Err(Error::invalid("gate.width", "must be finite and > 0"));
        }
        if let WindowKind::CosineTapered { taper } = self.window {
            if !(taper > 0.0 && taper <= 1.0) {
                return Err(Error::invalid("gate.taper", "must be in (0, 1]"));
            }
        }
        let (lo, hi) = (
            self.center - 0.5 * self.width,
            self.center + 0.5 * self.width,
        );
        let end = tr.t_start + tr.duration();
        let slack = 1e-9 * tr.duration();
        if lo < tr.t_start - slack || hi > end + slack {
            return Err(Error::GateOutsideRecord(format!(
                "[{lo:.6e}, {hi:.6e}] s not within [{:.6e}, {end:.6e}] s",
                tr.t_start
            )));
        }
        Ok(())
    }
}

pub fn apply_gate(tr: &TimeResponse, gate: &Gate) -> Result<TimeResponse> {
    gate.validate(tr)?;
    let values = tr
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * gate.weight(tr.time(i)))
        .collect();
    Ok(TimeResponse {
        values,
        ..tr.clone()
    })
}

/// Gates the time record of `spectrum` and returns to the original grid.
pub fn gate_and_return(
    spectrum: &Spectrum,
    gate: &Gate,
    zero_pad_factor: usize,
) -> Result<Spectrum> {
    let tr = to_time_domain(spectrum, zero_pad_factor)?;
    to_frequency_domain(&apply_gate(&tr, gate)?)
}

/// Removes 2π jumps: each successive difference is shifted by the multiple
/// of 2π that maps it into (−π, π].
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let Some(&first) = phases.first() else {
        return out;
    };
    out.push(first);
    let mut acc = first;
    for w in phases.windows(2) {
        let d = w[1] - w[0];
        let mut k = -(d / TAU).round();
        if d + TAU * k <= -PI {
            k += 1.0;
        } else if d + TAU * k > PI {
            k -= 1.0;
        }
        acc += d + TAU * k;
        out.push(acc);
    }
    out
}

/// Unwrapped phase over the analysis band `start..start + phase.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedPhase {
    pub start: usize,
    pub phase: Vec<f64>,
}

/// Index range `[first, last]` of samples within `[lo, hi]` whose magnitude
/// is at least `threshold_db` relative to the strongest sample there.
fn analysis_band(
    spectrum: &Spectrum,
    lo: usize,
    hi: usize,
    threshold_db: f64,
) -> Option<(usize, usize)> {
    let mags: Vec<f64> = spectrum.values[lo..=hi].iter().map(|v| v.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let floor = max * 10f64.powf(threshold_db / 20.0);
    let first = mags.iter().position(|&m| m >= floor)?;
    let last = mags.iter().rposition(|&m| m >= floor)?;
    Some((lo + first, lo + last))
}

pub fn unwrap_phase(spectrum: &Spectrum, threshold_db: f64) -> Result<UnwrappedPhase> {
    unwrap_phase_in(spectrum, 0, spectrum.len() - 1, threshold_db)
}

fn unwrap_phase_in(
    spectrum: &Spectrum,
    lo: usize,
    hi: usize,
    threshold_db: f64,
) -> Result<UnwrappedPhase> {
    let (first, last) = analysis_band(spectrum, lo, hi, threshold_db)
        .ok_or(Error::ZeroMagnitude(spectrum.frequency(lo)))?;
    let band = &spectrum.values[first..=last];
    if let Some(i) = band.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroMagnitude(spectrum.frequency(first + i)));
    }
    let wrapped: Vec<f64> = band.iter().map(|v| v.arg()).collect();
    Ok(UnwrappedPhase {
        start: first,
        phase: unwrap(&wrapped),
    })
}

/// Weighted least-squares line `φ ≈ phase + slope·(f − frequency)` through
/// the unwrapped phase of a single-echo spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PhaseLine {
    /// Weighted mean frequency, Hz.
    frequency: f64,
    /// rad
    phase: f64,
    /// rad/Hz
    slope: f64,
}

/// Fits the contiguous run of samples around the amplitude maximum that
/// stays within `threshold_db` of it, weighting by `|S|²`.
fn phase_line(spectrum: &Spectrum, threshold_db: f64) -> Result<PhaseLine> {
    let mags: Vec<f64> = spectrum.values.iter().map(|v| v.norm()).collect();
    let (i_max, &max) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InsufficientData("empty spectrum".into()))?;
    if max == 0.0 {
        return Err(Error::ZeroMagnitude(spectrum.frequency(i_max)));
    }
    let floor = max * 10f64.powf(threshold_db / 20.0);
    let mut lo = i_max;
    while lo > 0 && mags[lo - 1] >= floor {
        lo -= 1;
    }
    let mut hi = i_max;
    while hi + 1 < mags.len() && mags[hi + 1] >= floor {
        hi += 1;
    }
    if hi == lo {
        return Err(Error::InsufficientData(
            "phase fit needs two samples".into(),
        ));
    }
    let wrapped: Vec<f64> = spectrum.values[lo..=hi].iter().map(|v| v.arg()).collect();
    let phase = unwrap(&wrapped);
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (k, p) in phase.iter().enumerate() {
        let w = mags[lo + k].powi(2);
        sw += w;
        sx += w * k as f64;
        sy += w * p;
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (k, p) in phase.iter().enumerate() {
        let w = mags[lo + k].powi(2);
        sxx += w * (k as f64 - mx).powi(2);
        sxy += w * (k as f64 - mx) * (p - my);
    }
    Ok(PhaseLine {
        frequency: spectrum.f_start + (lo as f64 + mx) * spectrum.step(),
        phase: my,
        slope: sxy / sxx / spectrum.step(),
    })
}

const GROUP_DELAY_THRESHOLD_DB: f64 = -10.0;

/// Group delay `−(1/2π)·dφ/df` of a single-echo spectrum, from a
/// least-squares line through the unwrapped phase weighted by `|S|²`. Only
/// the contiguous run of samples around the amplitude maximum that stays
/// within `threshold_db` of it is used.
pub fn group_delay(spectrum: &Spectrum, threshold_db: f64) -> Result<f64> {
    Ok(-phase_line(spectrum, threshold_db)?.slope / TAU)
}

/// Zero of the weighted phase line (see [`group_delay`]) nearest `near`,
/// where `near` is a zero-phase frequency of the same spectrum. Averages the
/// phase noise of the whole band instead of two samples.
pub fn line_fit_zero_phase(spectrum: &Spectrum, near: f64, threshold_db: f64) -> Result<f64> {
    let line = phase_line(spectrum, threshold_db)?;
    if line.slope == 0.0 || !line.slope.is_finite() {
        return Err(Error::InsufficientData("flat phase".into()));
    }
    let at_near = line.phase + line.slope * (near - line.frequency);
    let n = (at_near / TAU).round();
    Ok(line.frequency + (TAU * n - line.phase) / line.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedFrequency {
    /// Hz
    pub f_zero: f64,
    /// rad/Hz
    pub phase_slope: f64,
    pub peak_id: u32,
}

/// Frequency at which the unwrapped phase of a gated spectrum crosses zero.
///
/// The phase is first offset by `2π·round(φ(f_max)/2π)` where `f_max` is the
/// amplitude maximum in the search band, so the crossing sits near the
/// carrier. Among several crossings the one nearest `f_max` wins (ties go to
/// the lower frequency). Crossings are located by linear interpolation.
pub fn track_zero_phase(
    spectrum: &Spectrum,
    search_band: Option<(f64, f64)>,
    threshold_db: f64,
) -> Result<TrackedFrequency> {
    track_zero_phase_inner(spectrum, search_band, threshold_db, None)
}

/// As [`track_zero_phase`], with `anchor` in place of the amplitude maximum
/// for both the offset reduction and the choice among crossings. A reader
/// following one crossing across records anchors on its predicted position.
pub fn track_zero_phase_near(
    spectrum: &Spectrum,
    search_band: Option<(f64, f64)>,
    threshold_db: f64,
    anchor: f64,
) -> Result<TrackedFrequency> {
    track_zero_phase_inner(spectrum, search_band, threshold_db, Some(anchor))
}

fn track_zero_phase_inner(
    spectrum: &Spectrum,
    search_band: Option<(f64, f64)>,
    threshold_db: f64,
    anchor: Option<f64>,
) -> Result<TrackedFrequency> {
    let n = spectrum.len();
    let df = spectrum.step();
    let (f_lo, f_hi) = search_band.unwrap_or((spectrum.f_start, spectrum.f_stop));
    let lo = (((f_lo - spectrum.f_start) / df).ceil().max(0.0) as usize).min(n - 1);
    let hi = (((f_hi - spectrum.f_start) / df).floor().max(0.0) as usize).min(n - 1);
    let no_crossing = Error::NoZeroCrossing {
        low: f_lo,
        high: f_hi,
    };
    if lo >= hi {
        return Err(no_crossing);
    }
    let unwrapped = unwrap_phase_in(spectrum, lo, hi, threshold_db)?;
    let start = unwrapped.start;
    let i_max = (lo..=hi)
        .max_by(|&a, &b| {
            spectrum.values[a]
                .norm()
                .total_cmp(&spectrum.values[b].norm())
                .then(b.cmp(&a))
        })
        .expect("non-empty band");
    let (i_ref, f_max) = match anchor {
        Some(f) => {
            let last = start + unwrapped.phase.len() - 1;
            let i = ((f - spectrum.f_start) / df)
                .round()
                .clamp(start as f64, last as f64);
            (i as usize, f)
        }
        None => (i_max, spectrum.frequency(i_max)),
    };
    let offset = TAU * (unwrapped.phase[i_ref - start] / TAU).round();
    let phase: Vec<f64> = unwrapped.phase.iter().map(|p| p - offset).collect();

    let mut best: Option<(f64, f64)> = None;
    let mut consider = |f: f64, slope: f64| {
        let better = match best {
            None => true,
            Some((fb, _)) => {
                let (d, db) = ((f - f_max).abs(), (fb - f_max).abs());
                d < db || (d == db && f < fb)
            }
        };
        if better {
            best = Some((f, slope));
        }
    };
    for (j, w) in phase.windows(2).enumerate() {
        let i = start + j;
        let slope = (w[1] - w[0]) / df;
        if w[0] == 0.0 {
            consider(spectrum.frequency(i), slope);
        } else if (w[0] < 0.0) != (w[1] < 0.0) && w[1] != 0.0 {
            let frac = w[0] / (w[0] - w[1]);
            consider(spectrum.frequency(i) + frac * df, slope);
        }
    }
    if let Some(&last) = phase.last() {
        if last == 0.0 {
            let i = start + phase.len() - 1;
            let slope = if phase.len() > 1 {
                (last - phase[phase.len() - 2]) / df
            } else {
                0.0
            };
            consider(spectrum.frequency(i), slope);
        }
    }
    best.map(|(f_zero, phase_slope)| TrackedFrequency {
        f_zero,
        phase_slope,
        peak_id: 0,
    })
    .ok_or(no_crossing)
}

/// How a gated echo's zero-phase frequency is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum ZeroPhaseMethod {
    /// Linear interpolation between the two samples bracketing the crossing.
    Interpolate,
    /// Zero of a weighted line through the phase within `threshold_db` of
    /// the band maximum, taken next to the interpolated crossing.
    LineFit { threshold_db: f64 },
}

/// How gate widths are chosen when gates are derived from detected peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateWidth {
    /// Fixed width in s.
    Fixed(f64),
    /// Fraction of the distance to the nearest other detected peak.
    SpacingFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub zero_pad_factor: usize,
    pub peak_count: usize,
    /// s
    pub min_separation: f64,
    pub gate_width: GateWidth,
    pub taper: f64,
    /// Analysis-band level threshold relative to the band maximum, dB.
    pub band_threshold_db: f64,
    pub zero_phase: ZeroPhaseMethod,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            zero_pad_factor: 4,
            peak_count: 4,
            min_separation: 60e-9,
            gate_width: GateWidth::SpacingFraction(0.5),
            taper: 0.25,
            band_threshold_db: -40.0,
            zero_phase: ZeroPhaseMethod::LineFit {
                threshold_db: -20.0,
            },
        }
    }
}

impl PipelineSettings {
    pub fn validate(&self) -> Result<()> {
        if self.zero_pad_factor < 1 {
            return Err(Error::invalid("pipeline.zero_pad_factor", "must be >= 1"));
        }
        if self.peak_count < 1 {
            return Err(Error::invalid("pipeline.peak_count", "must be >= 1"));
        }
        if !(self.min_separation >= 0.0) {
            return Err(Error::invalid("pipeline.min_separation", "must be >= 0"));
        }
        match self.gate_width {
            GateWidth::Fixed(w) if !(w > 0.0) => {
                return Err(Error::invalid("pipeline.gate_width", "must be > 0"))
            }
            GateWidth::SpacingFraction(f) if !(f > 0.0 && f <= 2.0) => {
                return Err(Error::invalid(
                    "pipeline.gate_width",
                    "fraction must be in (0, 2]",
                ))
            }
            _ => {}
        }
        if !(self.taper > 0.0 && self.taper <= 1.0) {
            return Err(Error::invalid("pipeline.taper", "must be in (0, 1]"));
        }
        if !(self.band_threshold_db < 0.0) {
            return Err(Error::invalid("pipeline.band_threshold_db", "must be < 0"));
        }
        if let ZeroPhaseMethod::LineFit { threshold_db } = self.zero_phase {
            if !(threshold_db < 0.0) {
                return Err(Error::invalid(
                    "pipeline.zero_phase.threshold_db",
                    "must be < 0",
                ));
            }
        }
        Ok(())
    }
}

/// A gate attached to a detected echo. Peak ids count from 1 in time order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakGate {
    pub peak_id: u32,
    pub gate: Gate,
    pub level_db: f64,
    /// Echo delay on the reference record, s.
    pub reference_delay: f64,
    /// Zero-phase frequency on the reference record, Hz.
    pub reference_f_zero: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPeak {
    pub peak_id: u32,
    pub gate_center: f64,
    pub f_zero: f64,
    pub level_db: f64,
}

fn zero_phase(gated: &Spectrum, settings: &PipelineSettings, anchor: Option<f64>) -> Result<f64> {
    let tracked = match anchor {
        Some(a) => track_zero_phase_near(gated, None, settings.band_threshold_db, a)?,
        None => track_zero_phase(gated, None, settings.band_threshold_db)?,
    };
    match settings.zero_phase {
        ZeroPhaseMethod::Interpolate => Ok(tracked.f_zero),
        ZeroPhaseMethod::LineFit { threshold_db } => {
            line_fit_zero_phase(gated, tracked.f_zero, threshold_db)
        }
    }
}

/// Gates fixed on a reference record and reused for every later record, as a
/// reader tracking a sensor across a sweep would.
#[derive(Debug, Clone, PartialEq)]
pub struct Interrogator {
    pub settings: PipelineSettings,
    pub gates: Vec<PeakGate>,
    /// False when fewer echoes than requested were found on the reference.
    pub complete: bool,
}

impl Interrogator {
    pub fn from_reference(reference: &Spectrum, settings: PipelineSettings) -> Result<Self> {
        settings.validate()?;
        let tr = to_time_domain(reference, settings.zero_pad_factor)?;
        let found = detect_peaks(&tr, settings.peak_count, settings.min_separation)?;
        let peaks = found.by_time();
        let gates = peaks
            .iter()
            .enumerate()
            .map(|(i, p)| -> Result<PeakGate> {
                let width = match settings.gate_width {
                    GateWidth::Fixed(w) => w,
                    GateWidth::SpacingFraction(frac) => {
                        let nearest = peaks
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, q)| (q.time - p.time).abs())
                            .fold(f64::INFINITY, f64::min);
                        let nearest = if nearest.is_finite() {
                            nearest
                        } else {
                            2.0 * settings.min_separation.max(tr.dt)
                        };
                        frac * nearest
                    }
                };
                // keep the gate inside the record
                let max_width = 2.0 * p.time.min(tr.duration() - p.time);
                let gate = Gate::cosine(p.time, width.min(max_width), settings.taper);
                let gated = to_frequency_domain(&apply_gate(&tr, &gate)?)?;
                Ok(PeakGate {
                    peak_id: i as u32 + 1,
                    gate,
                    level_db: p.level_db,
                    reference_delay: group_delay(&gated, GROUP_DELAY_THRESHOLD_DB)?,
                    reference_f_zero: zero_phase(&gated, &settings, None)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Interrogator {
            settings,
            gates,
            complete: found.complete,
        })
    }

    pub fn gate(&self, peak_id: u32) -> Option<&PeakGate> {
        self.gates.iter().find(|g| g.peak_id == peak_id)
    }

    /// Zero-phase frequency of each requested peak (all peaks when `ids` is
    /// empty) in `spectrum`. Each gate follows the crossing found on the
    /// reference record: the search is anchored at the reference crossing
    /// scaled by the change of the echo delay.
    pub fn track(&self, spectrum: &Spectrum, ids: &[u32]) -> Result<Vec<TrackedPeak>> {
        let tr = to_time_domain(spectrum, self.settings.zero_pad_factor)?;
        self.gates
            .iter()
            .filter(|g| ids.is_empty() || ids.contains(&g.peak_id))
            .map(|g| {
                let gated = to_frequency_domain(&apply_gate(&tr, &g.gate)?)?;
                let delay = group_delay(&gated, GROUP_DELAY_THRESHOLD_DB)?;
                let anchor = g.reference_f_zero * g.reference_delay / delay;
                let f_zero = zero_phase(&gated, &self.settings, Some(anchor))?;
                let i = tr.index_of(g.gate.center);
                Ok(TrackedPeak {
                    peak_id: g.peak_id,
                    gate_center: g.gate.center,
                    f_zero,
                    level_db: tr.level_db(i),
                })
            })
            .collect()
    }
}

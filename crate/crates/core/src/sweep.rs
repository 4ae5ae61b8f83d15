//! Environment sweeps: synthesize one record per point and track the echoes
//! with gates fixed on the first record.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::SweepRow;
use crate::device::{synthesize_s11, Device, EnvironmentState, FrequencyGrid, NoiseSpec};
use crate::error::{Error, Result};
use crate::pipeline::{Interrogator, PipelineSettings};

/// Parses `start:stop:step`. The stop value is included when it lies on the
/// step lattice (within 1e-9 of a step).
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = |reason: &str| Error::invalid("range", format!("`{text}`: {reason}"));
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
        .collect::<Result<Vec<f64>>>()?;
    match nums.as_slice() {
        [single] => Ok(vec![*single]),
        [start, stop, step] => range(*start, *stop, *step)
            .map_err(|_| bad("expected start:stop:step with step moving toward stop")),
        _ => Err(bad("expected start:stop:step")),
    }
}

/// Inclusive arithmetic range, see [`parse_range`].
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
        return Err(Error::invalid(
            "range",
            "values must be finite, step nonzero",
        ));
    }
    let span = (stop - start) / step;
    if span < -1e-9 {
        return Err(Error::invalid("range", "step points away from stop"));
    }
    let n = (span + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// One environment point. `setpoint` is the temperature label reported in
/// output rows; `temperature` is what the device actually sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub setpoint: f64,
    pub temperature: f64,
    pub field: f64,
}

impl SweepPoint {
    pub fn new(temperature: f64, field: f64) -> Self {
        SweepPoint {
            setpoint: temperature,
            temperature,
            field,
        }
    }
}

/// Field sweep at one setpoint whose actual temperature drifts linearly by
/// `drift` °C from the first to the last point.
pub fn field_sweep_points(setpoint: f64, fields: &[f64], drift: f64) -> Vec<SweepPoint> {
    let last = fields.len().saturating_sub(1).max(1) as f64;
    fields
        .iter()
        .enumerate()
        .map(|(i, &field)| SweepPoint {
            setpoint,
            temperature: setpoint + drift * i as f64 / last,
            field,
        })
        .collect()
}

pub fn temperature_sweep_points(temperatures: &[f64], field: f64) -> Vec<SweepPoint> {
    temperatures
        .iter()
        .map(|&t| SweepPoint::new(t, field))
        .collect()
}

/// Drift of magnitude `magnitude` toward `ambient` for a chuck held at
/// `setpoint`; zero at ambient.
pub fn chuck_drift(setpoint: f64, ambient: f64, magnitude: f64) -> f64 {
    if setpoint > ambient {
        -magnitude
    } else if setpoint < ambient {
        magnitude
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub device: Device,
    pub grid: FrequencyGrid,
    pub pipeline: PipelineSettings,
    pub noise: Option<NoiseSpec>,
    pub reference_temperature: f64,
    /// Peak ids to report; empty reports every detected peak.
    pub peaks: Vec<u32>,
}

impl SweepConfig {
    fn environment(&self, p: &SweepPoint) -> EnvironmentState {
        EnvironmentState {
            temperature: p.temperature,
            field: p.field,
            reference_temperature: self.reference_temperature,
        }
    }

    /// Point `i` uses noise seed `seed + i`.
    fn noise_for(&self, i: usize) -> Option<NoiseSpec> {
        self.noise.map(|n| NoiseSpec {
            snr_db: n.snr_db,
            seed: n.seed.wrapping_add(i as u64),
        })
    }
}

/// Synthesizes and tracks every point, in parallel. Rows come out in point
/// order, peaks ascending within a point.
pub fn run_sweep(config: &SweepConfig, points: &[SweepPoint]) -> Result<Vec<SweepRow>> {
    let first = points
        .first()
        .ok_or_else(|| Error::InsufficientData("empty sweep".into()))?;
    let reference = synthesize_s11(
        &config.device,
        &config.environment(first),
        &config.grid,
        config.noise_for(0),
    )?;
    let interrogator = Interrogator::from_reference(&reference, config.pipeline)?;
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let spectrum = synthesize_s11(
                &config.device,
                &config.environment(p),
                &config.grid,
                config.noise_for(i),
            )?;
            let tracked = interrogator.track(&spectrum, &config.peaks)?;
            Ok(tracked
                .into_iter()
                .map(|t| SweepRow {
                    temperature_c: p.setpoint,
                    field_mt: p.field,
                    peak_id: t.peak_id,
                    f_zero_hz: t.f_zero,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

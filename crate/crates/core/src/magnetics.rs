//! Phenomenological ΔE-effect response of the CoFeB-coated path.
//!
//! Inside the linear window the fractional velocity change follows a single
//! slope; outside it the response saturates at the values reached at the
//! window edges. The model is memoryless (no hysteresis).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MagnetoelasticModel {
    /// ppm/mT
    pub slope: f64,
    /// mT
    pub h_low: f64,
    /// mT
    pub h_high: f64,
    /// Half-width of the quadratic corner blend, mT. Zero is a hard clamp.
    pub smoothing: f64,
    /// Field at which the shift is zero, mT.
    pub h_ref: f64,
}

impl Default for MagnetoelasticModel {
    fn default() -> Self {
        MagnetoelasticModel {
            slope: -781.0,
            h_low: -0.19,
            h_high: 0.69,
            smoothing: 0.0,
            h_ref: -4.0,
        }
    }
}

impl MagnetoelasticModel {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.slope,
            self.h_low,
            self.h_high,
            self.smoothing,
            self.h_ref,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid(
                "magnetoelastic",
                "all parameters must be finite",
            ));
        }
        if self.h_low >= self.h_high {
            return Err(Error::invalid(
                "magnetoelastic.h_low",
                "must be below h_high",
            ));
        }
        if self.smoothing < 0.0 || 2.0 * self.smoothing > self.h_high - self.h_low {
            return Err(Error::invalid(
                "magnetoelastic.smoothing",
                "must be in [0, (h_high - h_low)/2]",
            ));
        }
        Ok(())
    }

    /// Smoothed `min(max(h, h_low), h_high)`.
    fn clamp(&self, h: f64) -> f64 {
        let (a, b, w) = (self.h_low, self.h_high, self.smoothing);
        if w == 0.0 {
            return h.clamp(a, b);
        }
        if h <= a - w {
            a
        } else if h < a + w {
            a + (h - a + w).powi(2) / (4.0 * w)
        } else if h <= b - w {
            h
        } else if h < b + w {
            b - (b + w - h).powi(2) / (4.0 * w)
        } else {
            b
        }
    }

    /// Fractional velocity change in ppm at field `h` (mT), relative to `h_ref`.
    pub fn fractional_shift(&self, h: f64) -> f64 {
        self.slope * (self.clamp(h) - self.clamp(self.h_ref))
    }

    pub fn field_sweep(&self, fields: &[f64]) -> Vec<f64> {
        fields.iter().map(|&h| self.fractional_shift(h)).collect()
    }
}

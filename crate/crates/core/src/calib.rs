//! Sensitivity fitting and differential temperature compensation.
//!
//! Both acoustic paths see the same temperature, and their TCFs are nearly
//! equal, so the temperature part of the coated-path shift can be removed by
//! subtracting the bare-path shift scaled by `TCF₂/TCF₁`:
//!
//! ```text
//! compensated = (Δf/f₀)₂ − (TCF₂/TCF₁)·(Δf/f₀)₁
//! ```

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};

/// One tracked zero-phase frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Temperature setpoint, °C.
    pub temperature_c: f64,
    pub field_mt: f64,
    pub peak_id: u32,
    pub f_zero_hz: f64,
}

/// `(f_i − f_i0)/f_i0` in ppm.
pub fn relative_shift(f_i: f64, f_i0: f64) -> Result<f64> {
    if !(f_i0 > 0.0) {
        return Err(Error::invalid("f_i0", "reference frequency must be > 0"));
    }
    Ok((f_i - f_i0) / f_i0 * 1e6)
}

/// Ordinary least-squares line with fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_rms: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::invalid("fit", "x and y lengths differ"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "control variable is constant".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        residual_rms: (ss_res / nf).sqrt(),
        n,
    })
}

fn rows_of(rows: &[SweepRow], peak_id: u32) -> Vec<SweepRow> {
    rows.iter()
        .filter(|r| r.peak_id == peak_id)
        .copied()
        .collect()
}

/// TCF in ppm/°C of one peak from rows at a single field. Shifts are taken
/// relative to the first row.
pub fn fit_tcf(rows: &[SweepRow]) -> Result<LineFit> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InsufficientData("empty temperature sweep".into()))?;
    if rows.iter().any(|r| r.peak_id != first.peak_id) {
        return Err(Error::invalid("rows", "mixed peak ids in a TCF fit"));
    }
    if rows.iter().any(|r| r.field_mt != first.field_mt) {
        return Err(Error::invalid("rows", "TCF fit needs a fixed field"));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.temperature_c).collect();
    let y = rows
        .iter()
        .map(|r| relative_shift(r.f_zero_hz, first.f_zero_hz))
        .collect::<Result<Vec<_>>>()?;
    linear_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticFit {
    /// ppm/mT
    pub slope: f64,
    /// Hz/µT at `f_reference`.
    pub hz_per_ut: f64,
    pub f_reference: f64,
    pub fit: LineFit,
}

/// `ppm/mT × f` expressed in Hz/µT.
pub fn hz_per_microtesla(slope_ppm_per_mt: f64, f_reference: f64) -> f64 {
    slope_ppm_per_mt * 1e-9 * f_reference
}

/// Magnetic slope in ppm/mT of one peak from rows at a single temperature,
/// restricted to `window` (inclusive). Shifts are relative to the first row.
/// The Hz/µT figure uses `f_reference`, or the first row's frequency.
pub fn fit_magnetic_sensitivity(
    rows: &[SweepRow],
    window: (f64, f64),
    f_reference: Option<f64>,
) -> Result<MagneticFit> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InsufficientData("empty field sweep".into()))?;
    if rows.iter().any(|r| r.peak_id != first.peak_id) {
        return Err(Error::invalid("rows", "mixed peak ids in a magnetic fit"));
    }
    if rows.iter().any(|r| r.temperature_c != first.temperature_c) {
        return Err(Error::invalid(
            "rows",
            "magnetic fit needs a fixed temperature",
        ));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::invalid(
            "window",
            "lower bound must be below upper bound",
        ));
    }
    let inside: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.field_mt >= lo && r.field_mt <= hi)
        .collect();
    if inside.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples inside window [{lo}, {hi}] mT",
            inside.len()
        )));
    }
    let x: Vec<f64> = inside.iter().map(|r| r.field_mt).collect();
    let y = inside
        .iter()
        .map(|r| relative_shift(r.f_zero_hz, first.f_zero_hz))
        .collect::<Result<Vec<_>>>()?;
    let fit = linear_fit(&x, &y)?;
    let f_reference = f_reference.unwrap_or(first.f_zero_hz);
    Ok(MagneticFit {
        slope: fit.slope,
        hz_per_ut: hz_per_microtesla(fit.slope, f_reference),
        f_reference,
        fit,
    })
}

/// `shift2 − (tcf2/tcf1)·shift1`, all in ppm.
pub fn compensate(shift2: f64, shift1: f64, tcf1: f64, tcf2: f64) -> Result<f64> {
    if tcf1 == 0.0 {
        return Err(Error::ZeroTcfReference);
    }
    Ok(shift2 - (tcf2 / tcf1) * shift1)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub r_squared: f64,
    pub residual_rms: f64,
    pub n: usize,
}

impl From<LineFit> for FitDiagnostics {
    fn from(f: LineFit) -> Self {
        FitDiagnostics {
            r_squared: f.r_squared,
            residual_rms: f.residual_rms,
            n: f.n,
        }
    }
}

/// Fitted sensitivities. Absent entries were not determinable from the data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityModel {
    /// ppm/°C
    pub tcf1: Option<f64>,
    /// ppm/°C
    pub tcf2: Option<f64>,
    /// ppm/mT
    pub magnetic_slope: Option<f64>,
    /// Hz/µT at the magnetic sweep's reference frequency.
    pub magnetic_hz_per_ut: Option<f64>,
    /// mT
    pub window: (f64, f64),
    pub tcf1_fit: Option<FitDiagnostics>,
    pub tcf2_fit: Option<FitDiagnostics>,
    pub magnetic_fit: Option<FitDiagnostics>,
}

impl SensitivityModel {
    /// Takes every value present in `other`.
    pub fn merge(self, other: SensitivityModel) -> SensitivityModel {
        SensitivityModel {
            tcf1: other.tcf1.or(self.tcf1),
            tcf2: other.tcf2.or(self.tcf2),
            magnetic_slope: other.magnetic_slope.or(self.magnetic_slope),
            magnetic_hz_per_ut: other.magnetic_hz_per_ut.or(self.magnetic_hz_per_ut),
            window: if other.magnetic_slope.is_some() {
                other.window
            } else {
                self.window
            },
            tcf1_fit: other.tcf1_fit.or(self.tcf1_fit),
            tcf2_fit: other.tcf2_fit.or(self.tcf2_fit),
            magnetic_fit: other.magnetic_fit.or(self.magnetic_fit),
        }
    }
}

fn group_by<K: Copy + PartialEq>(
    rows: &[SweepRow],
    key: impl Fn(&SweepRow) -> K,
) -> Vec<Vec<SweepRow>> {
    let mut groups: Vec<(K, Vec<SweepRow>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(gk, _)| *gk == k) {
            Some((_, g)) => g.push(*r),
            None => groups.push((k, vec![*r])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Fits whatever the record supports: TCFs of peaks 1 and 2 from the field
/// group with the most distinct temperatures, and the magnetic slope of
/// `magnetic_peak` from the first temperature group with ≥ 2 in-window
/// samples.
pub fn calibrate(
    rows: &[SweepRow],
    window: (f64, f64),
    magnetic_peak: u32,
) -> Result<SensitivityModel> {
    let mut model = SensitivityModel {
        window,
        ..Default::default()
    };
    for peak in [1u32, 2] {
        let own = rows_of(rows, peak);
        let best = group_by(&own, |r| r.field_mt.to_bits())
            .into_iter()
            .max_by_key(|g| distinct(g.iter().map(|r| r.temperature_c)));
        if let Some(group) = best.filter(|g| distinct(g.iter().map(|r| r.temperature_c)) >= 2) {
            let fit = fit_tcf(&group)?;
            if peak == 1 {
                model.tcf1 = Some(fit.slope);
                model.tcf1_fit = Some(fit.into());
            } else {
                model.tcf2 = Some(fit.slope);
                model.tcf2_fit = Some(fit.into());
            }
        }
    }
    let own = rows_of(rows, magnetic_peak);
    for group in group_by(&own, |r| r.temperature_c.to_bits()) {
        let in_window = group
            .iter()
            .filter(|r| r.field_mt >= window.0 && r.field_mt <= window.1)
            .count();
        if in_window >= 2 {
            let fit = fit_magnetic_sensitivity(&group, window, None)?;
            model.magnetic_slope = Some(fit.slope);
            model.magnetic_hz_per_ut = Some(fit.hz_per_ut);
            model.magnetic_fit = Some(fit.fit.into());
            break;
        }
    }
    if model.tcf1.is_none() && model.tcf2.is_none() && model.magnetic_slope.is_none() {
        return Err(Error::InsufficientData(
            "record supports neither a temperature nor a field fit".into(),
        ));
    }
    Ok(model)
}

/// Which row supplies `f_i0` for the shifts of a multi-temperature record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceRule {
    /// The first row of the whole record, shared by all temperatures, so
    /// temperature offsets between sweeps remain visible.
    #[default]
    FirstRow,
    /// The first row of each temperature's own sweep.
    FirstRowPerTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensatedPoint {
    pub temperature_c: f64,
    pub field_mt: f64,
    /// Raw peak-2 shift, ppm.
    pub shift_ppm: f64,
    pub shift_ppm_compensated: f64,
}

/// Applies [`compensate`] pointwise. Peak-1 and peak-2 rows are paired by
/// `(temperature_c, field_mt)`. Output is sorted by temperature, then field.
pub fn compensate_sweep(
    rows: &[SweepRow],
    tcf1: f64,
    tcf2: f64,
    rule: ReferenceRule,
) -> Result<Vec<CompensatedPoint>> {
    if tcf1 == 0.0 {
        return Err(Error::ZeroTcfReference);
    }
    let key = |r: &SweepRow| (r.temperature_c.to_bits(), r.field_mt.to_bits());
    let mut peak1: HashMap<(u64, u64), (usize, f64)> = HashMap::new();
    for (i, r) in rows.iter().enumerate().filter(|(_, r)| r.peak_id == 1) {
        peak1.insert(key(r), (i, r.f_zero_hz));
    }
    let mut paired_peak1 = vec![false; rows.len()];
    let mut missing = Vec::new();
    let mut pairs = Vec::new();
    for (i, r) in rows.iter().enumerate().filter(|(_, r)| r.peak_id == 2) {
        match peak1.get(&key(r)) {
            Some(&(j, f1)) => {
                paired_peak1[j] = true;
                pairs.push((*r, f1));
            }
            None => missing.push(i),
        }
    }
    for (j, _) in peak1.values() {
        if !paired_peak1[*j] {
            missing.push(*j);
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        return Err(Error::Unpairable(missing));
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no peak-2 rows".into()));
    }

    let mut refs: HashMap<u64, (f64, f64)> = HashMap::new();
    let global = (pairs[0].0.f_zero_hz, pairs[0].1);
    for (r, f1) in &pairs {
        refs.entry(r.temperature_c.to_bits())
            .or_insert((r.f_zero_hz, *f1));
    }
    let mut out = pairs
        .iter()
        .map(|(r, f1)| {
            let (f2_ref, f1_ref) = match rule {
                ReferenceRule::FirstRow => global,
                ReferenceRule::FirstRowPerTemperature => refs[&r.temperature_c.to_bits()],
            };
            let s2 = relative_shift(r.f_zero_hz, f2_ref)?;
            let s1 = relative_shift(*f1, f1_ref)?;
            Ok(CompensatedPoint {
                temperature_c: r.temperature_c,
                field_mt: r.field_mt,
                shift_ppm: s2,
                shift_ppm_compensated: compensate(s2, s1, tcf1, tcf2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        a.temperature_c
            .total_cmp(&b.temperature_c)
            .then(a.field_mt.total_cmp(&b.field_mt))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(t: f64, h: f64, peak: u32, f: f64) -> SweepRow {
        SweepRow {
            temperature_c: t,
            field_mt: h,
            peak_id: peak,
            f_zero_hz: f,
        }
    }

    #[test]
    fn relative_shift_examples() {
        assert_eq!(relative_shift(410e6, 410e6).unwrap(), 0.0);
        let s = relative_shift(410e6 - 27.7e3, 410e6).unwrap();
        assert!((s + 67.56).abs() < 0.01, "{s}");
        assert_eq!(relative_shift(820e6, 410e6).unwrap(), 1e6);
        assert!(relative_shift(1.0, 0.0).is_err());
    }

    #[test]
    fn tcf_from_exact_line() {
        let rows: Vec<SweepRow> = (0..6)
            .map(|i| {
                let t = 25.0 + 5.0 * i as f64;
                row(t, -4.0, 1, 410e6 * (1.0 - 67.7e-6 * (t - 25.0)))
            })
            .collect();
        let fit = fit_tcf(&rows).unwrap();
        assert!((fit.slope + 67.7).abs() < 1e-6 * 67.7);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let bare: Vec<SweepRow> = (0..6)
            .map(|i| {
                let t = 25.0 + 5.0 * i as f64;
                row(t, 0.0, 1, 3.9e8 * (1.0 - 84e-6 * (t - 25.0)))
            })
            .collect();
        assert!((fit_tcf(&bare).unwrap().slope + 84.0).abs() < 1e-6 * 84.0);
    }

    #[test]
    fn tcf_two_points_and_constant_temperature() {
        let rows = [
            row(20.0, 0.0, 1, 400e6),
            row(30.0, 0.0, 1, 400e6 * (1.0 - 500e-6)),
        ];
        let fit = fit_tcf(&rows).unwrap();
        assert!((fit.slope + 50.0).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-9);
        let constant = [row(20.0, 0.0, 1, 400e6), row(20.0, 0.0, 1, 401e6)];
        assert!(matches!(
            fit_tcf(&constant),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn magnetic_fit_window_and_plateau() {
        let f0 = 410e6;
        let model = crate::magnetics::MagnetoelasticModel::default();
        let rows: Vec<SweepRow> = (0..=80)
            .map(|i| {
                let h = -4.0 + 0.1 * i as f64;
                row(21.0, h, 2, f0 * (1.0 + model.fractional_shift(h) * 1e-6))
            })
            .collect();
        let fit = fit_magnetic_sensitivity(&rows, (-0.19, 0.69), None).unwrap();
        assert!((fit.slope + 781.0).abs() < 1e-6 * 781.0, "{}", fit.slope);

        let plateau: Vec<SweepRow> = rows
            .iter()
            .filter(|r| r.field_mt < -0.19)
            .copied()
            .collect();
        let fit = fit_magnetic_sensitivity(&plateau, (-4.0, -0.5), None).unwrap();
        assert_eq!(fit.slope, 0.0);

        assert!(matches!(
            fit_magnetic_sensitivity(&rows, (5.0, 6.0), None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn hz_per_microtesla_report() {
        let v = hz_per_microtesla(-781.0, 372.6e6);
        assert!((v.abs() - 291.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn compensate_examples() {
        assert_eq!(compensate(-300.0, 0.0, -67.7, -66.2).unwrap(), -300.0);
        let c = compensate(-1200.0, -677.0, -67.7, -66.2).unwrap();
        // -1200 - 0.977843 * (-677) = -538.0
        assert!((c + 538.0).abs() < 0.05, "{c}");
        assert_eq!(compensate(-677.0, -677.0, -66.2, -66.2).unwrap(), 0.0);
        assert!(matches!(
            compensate(1.0, 1.0, 0.0, -66.2),
            Err(Error::ZeroTcfReference)
        ));
    }

    #[test]
    fn compensate_sweep_single_temperature() {
        let rows = vec![
            row(21.0, -4.0, 1, 418e6),
            row(21.0, -4.0, 2, 410e6),
            row(21.0, 0.0, 1, 418e6),
            row(21.0, 0.0, 2, 410e6 * (1.0 - 148e-6)),
        ];
        let out = compensate_sweep(&rows, -67.7, -66.2, ReferenceRule::FirstRow).unwrap();
        assert_eq!(out.len(), 2);
        for p in &out {
            assert!((p.shift_ppm - p.shift_ppm_compensated).abs() < 1e-9);
        }
        assert!((out[1].shift_ppm + 148.0).abs() < 1e-6);
    }

    #[test]
    fn compensate_sweep_reports_unpaired() {
        let rows = vec![
            row(21.0, -4.0, 1, 418e6),
            row(21.0, -4.0, 2, 410e6),
            row(21.0, 0.0, 2, 410e6),
            row(27.0, 0.0, 1, 418e6),
        ];
        match compensate_sweep(&rows, -67.7, -66.2, ReferenceRule::FirstRow) {
            Err(Error::Unpairable(idx)) => assert_eq!(idx, vec![2, 3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_rules_differ_by_temperature_offset() {
        let f = |t: f64, tcf: f64, f0: f64| f0 * (1.0 + tcf * 1e-6 * (t - 21.0));
        let mut rows = Vec::new();
        for t in [11.0, 31.0] {
            for h in [-4.0, 0.0] {
                rows.push(row(t, h, 1, f(t, -67.7, 418e6)));
                rows.push(row(t, h, 2, f(t, -66.2, 410e6)));
            }
        }
        let common = compensate_sweep(&rows, -67.7, -66.2, ReferenceRule::FirstRow).unwrap();
        let own =
            compensate_sweep(&rows, -67.7, -66.2, ReferenceRule::FirstRowPerTemperature).unwrap();
        // raw shifts keep the 20 °C offset only with the shared reference
        assert!((common[2].shift_ppm - common[0].shift_ppm).abs() > 1000.0);
        assert!((own[2].shift_ppm - own[0].shift_ppm).abs() < 1e-9);
        for p in common.iter().chain(&own) {
            assert!(p.shift_ppm_compensated.abs() < 0.2, "{p:?}");
        }
    }

    #[test]
    fn calibrate_detects_available_fits() {
        let mut rows = Vec::new();
        for i in 0..6 {
            let t = 25.0 + 5.0 * i as f64;
            rows.push(row(t, -4.0, 1, 418e6 * (1.0 - 67.7e-6 * (t - 25.0))));
            rows.push(row(t, -4.0, 2, 410e6 * (1.0 - 66.2e-6 * (t - 25.0))));
        }
        let model = calibrate(&rows, (-0.19, 0.69), 2).unwrap();
        assert!((model.tcf1.unwrap() + 67.7).abs() < 1e-6);
        assert!((model.tcf2.unwrap() + 66.2).abs() < 1e-6);
        assert!(model.magnetic_slope.is_none());
        let merged = SensitivityModel {
            magnetic_slope: Some(-781.0),
            ..Default::default()
        }
        .merge(model);
        assert_eq!(merged.magnetic_slope, Some(-781.0));
        assert_eq!(merged.tcf1, model.tcf1);
    }

    proptest! {
        #[test]
        fn compensate_is_linear_and_cancels(
            a in -5000.0f64..5000.0, b in -5000.0f64..5000.0,
            c in -5000.0f64..5000.0, d in -5000.0f64..5000.0,
            tcf1 in -100.0f64..-10.0, tcf2 in -100.0f64..-10.0,
        ) {
            let sum = compensate(a + c, b + d, tcf1, tcf2).unwrap();
            let parts = compensate(a, b, tcf1, tcf2).unwrap() + compensate(c, d, tcf1, tcf2).unwrap();
            prop_assert!((sum - parts).abs() < 1e-9);
            let x = a;
            let zero = compensate(x, x * tcf1 / tcf2, tcf1, tcf2).unwrap();
            prop_assert!(zero.abs() < 1e-9);
        }
    }
}

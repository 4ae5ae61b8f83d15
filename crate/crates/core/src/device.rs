//! Connected-IDT reflective delay line and S₁₁ synthesis.
//!
//! The device response is a sum of band-limited echoes. Each echo travels a
//! list of path segments, either over the bare ZnO/LiNbO₃ path or over the
//! CoFeB-coated path, and its delay follows the environment through the
//! path velocities.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::magnetics::MagnetoelasticModel;

/// Fundamental Love velocity of the bare path (ZnO/LiNbO₃) at λ = 9.2 µm for
/// the calibrated stack.
pub const DEFAULT_BARE_VELOCITY: f64 = 3845.171325264;
/// Same for the coated path (CoFeB/ZnO/LiNbO₃).
pub const DEFAULT_COATED_VELOCITY: f64 = 3772.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Bare,
    Coated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Length in wavelengths.
    pub length: f64,
    pub kind: PathKind,
}

impl Segment {
    pub fn bare(length: f64) -> Self {
        Segment {
            length,
            kind: PathKind::Bare,
        }
    }

    pub fn coated(length: f64) -> Self {
        Segment {
            length,
            kind: PathKind::Coated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoSpec {
    pub id: u32,
    pub segments: Vec<Segment>,
    pub amplitude_db: f64,
    #[serde(default = "default_polarity")]
    pub polarity: i8,
}

fn default_polarity() -> i8 {
    1
}

impl EchoSpec {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::invalid(
                format!("echoes[{}].segments", self.id),
                "empty",
            ));
        }
        if self
            .segments
            .iter()
            .any(|s| !(s.length.is_finite() && s.length >= 0.0))
        {
            return Err(Error::invalid(
                format!("echoes[{}].segments", self.id),
                "lengths must be finite and >= 0",
            ));
        }
        if self.polarity != 1 && self.polarity != -1 {
            return Err(Error::invalid(
                format!("echoes[{}].polarity", self.id),
                "must be ±1",
            ));
        }
        if !self.amplitude_db.is_finite() {
            return Err(Error::invalid(
                format!("echoes[{}].amplitude_db", self.id),
                "not finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceGeometry {
    /// m
    pub wavelength: f64,
    pub idt_pairs: u32,
    pub metallization_ratio: f64,
    /// Bare gap, wavelengths.
    pub path1_length: f64,
    /// CoFeB-coated gap, wavelengths.
    pub path2_length: f64,
    pub reflector_count: u32,
}

impl Default for DeviceGeometry {
    fn default() -> Self {
        DeviceGeometry {
            wavelength: 9.2e-6,
            idt_pairs: 11,
            metallization_ratio: 0.5,
            path1_length: 120.0,
            path2_length: 180.0,
            reflector_count: 200,
        }
    }
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be > 0"));
        }
        if self.idt_pairs == 0 {
            return Err(Error::invalid("idt_pairs", "must be >= 1"));
        }
        if !(self.metallization_ratio > 0.0 && self.metallization_ratio < 1.0) {
            return Err(Error::invalid("metallization_ratio", "must be in (0, 1)"));
        }
        if !(self.path1_length > 0.0 && self.path2_length > 0.0) {
            return Err(Error::invalid("path_length", "path lengths must be > 0"));
        }
        Ok(())
    }

    /// The four echoes of the connected-IDT layout: 1 = bare gap one way,
    /// 2 = coated gap one way, 3 = bare gap round trip, 4 = bare + coated.
    /// Peaks 3 and 4 levels are not tabulated and default to −30/−28 dB.
    pub fn default_echoes(&self) -> Vec<EchoSpec> {
        let (p1, p2) = (self.path1_length, self.path2_length);
        vec![
            EchoSpec {
                id: 1,
                segments: vec![Segment::bare(p1)],
                amplitude_db: -18.0,
                polarity: 1,
            },
            EchoSpec {
                id: 2,
                segments: vec![Segment::coated(p2)],
                amplitude_db: -24.0,
                polarity: 1,
            },
            EchoSpec {
                id: 3,
                segments: vec![Segment::bare(p1), Segment::bare(p1)],
                amplitude_db: -30.0,
                polarity: 1,
            },
            EchoSpec {
                id: 4,
                segments: vec![Segment::bare(p1), Segment::coated(p2)],
                amplitude_db: -28.0,
                polarity: 1,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentState {
    /// °C
    pub temperature: f64,
    /// Easy-axis field, mT.
    pub field: f64,
    /// °C
    pub reference_temperature: f64,
}

impl Default for EnvironmentState {
    fn default() -> Self {
        EnvironmentState {
            temperature: 25.0,
            field: -4.0,
            reference_temperature: 25.0,
        }
    }
}

impl EnvironmentState {
    pub fn new(temperature: f64, field: f64) -> Self {
        EnvironmentState {
            temperature,
            field,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.temperature, self.field, self.reference_temperature]
            .iter()
            .all(|x| x.is_finite())
        {
            Ok(())
        } else {
            Err(Error::invalid("environment", "values must be finite"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorPhysics {
    /// Bare-path velocity at the reference temperature, m/s.
    pub v1_nominal: f64,
    /// Coated-path velocity at the reference temperature and `h_ref`, m/s.
    pub v2_nominal: f64,
    /// ppm/°C
    pub tcf1: f64,
    /// ppm/°C
    pub tcf2: f64,
    pub magnetoelastic: MagnetoelasticModel,
}

impl Default for SensorPhysics {
    fn default() -> Self {
        SensorPhysics {
            v1_nominal: DEFAULT_BARE_VELOCITY,
            v2_nominal: DEFAULT_COATED_VELOCITY,
            tcf1: -67.7,
            tcf2: -66.2,
            magnetoelastic: MagnetoelasticModel::default(),
        }
    }
}

impl SensorPhysics {
    pub fn validate(&self) -> Result<()> {
        if !(self.v1_nominal > 0.0 && self.v1_nominal.is_finite()) {
            return Err(Error::invalid("v1_nominal", "must be > 0"));
        }
        if !(self.v2_nominal > 0.0 && self.v2_nominal.is_finite()) {
            return Err(Error::invalid("v2_nominal", "must be > 0"));
        }
        if !(self.tcf1.is_finite() && self.tcf2.is_finite()) {
            return Err(Error::invalid("tcf", "must be finite"));
        }
        self.magnetoelastic.validate()
    }
}

/// A complete sensor: geometry, echo list and propagation physics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub geometry: DeviceGeometry,
    pub echoes: Vec<EchoSpec>,
    pub physics: SensorPhysics,
}

impl Default for Device {
    fn default() -> Self {
        let geometry = DeviceGeometry::default();
        Device {
            echoes: geometry.default_echoes(),
            geometry,
            physics: SensorPhysics::default(),
        }
    }
}

impl Device {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.physics.validate()?;
        for echo in &self.echoes {
            echo.validate()?;
        }
        Ok(())
    }

    pub fn echo(&self, id: u32) -> Option<&EchoSpec> {
        self.echoes.iter().find(|e| e.id == id)
    }

    /// Delays of all echoes, in the order of `self.echoes`.
    pub fn delays(&self, env: &EnvironmentState) -> Vec<f64> {
        self.echoes
            .iter()
            .map(|e| echo_delay(&self.geometry, &self.physics, e, env))
            .collect()
    }
}

/// Uniform frequency grid, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyGrid {
    pub f_start: f64,
    pub f_stop: f64,
    pub n_points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            f_start: 370e6,
            f_stop: 450e6,
            n_points: 4001,
        }
    }
}

impl FrequencyGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::invalid("grid.n_points", "must be >= 2"));
        }
        if !(self.f_start.is_finite() && self.f_stop.is_finite() && self.f_start < self.f_stop) {
            return Err(Error::invalid("grid.f_start", "must be below f_stop"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.f_stop - self.f_start) / (self.n_points - 1) as f64
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.f_start + self.step() * i as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.frequency(i))
    }
}

/// Complex S₁₁ on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub f_start: f64,
    pub f_stop: f64,
    pub values: Vec<Complex64>,
    /// Set when an echo's IDT main lobe extends past the grid edges.
    pub grid_warning: bool,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n_points {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.n_points, values.len()),
            ));
        }
        Ok(Spectrum {
            f_start: grid.f_start,
            f_stop: grid.f_stop,
            values,
            grid_warning: false,
        })
    }

    /// Builds a spectrum from explicit sample frequencies, which must be
    /// uniformly spaced to within 1e-6 of the mean step.
    pub fn from_samples(frequencies: &[f64], values: Vec<Complex64>) -> Result<Self> {
        let n = frequencies.len();
        if n < 2 || values.len() != n {
            return Err(Error::invalid(
                "spectrum",
                "need >= 2 frequency/value pairs",
            ));
        }
        let step = frequencies[1] - frequencies[0];
        for (i, w) in frequencies.windows(2).enumerate().skip(1) {
            if ((w[1] - w[0]) - step).abs() > 1e-6 * step.abs() {
                return Err(Error::NonUniformGrid(i + 1));
            }
        }
        Spectrum::new(
            FrequencyGrid {
                f_start: frequencies[0],
                f_stop: frequencies[n - 1],
                n_points: n,
            },
            values,
        )
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            f_start: self.f_start,
            f_stop: self.f_stop,
            n_points: self.values.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.grid().step()
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.grid().frequency(i)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Elementwise sum with a spectrum on the same grid.
    pub fn add(&self, other: &Spectrum) -> Result<Spectrum> {
        if self.grid() != other.grid() {
            return Err(Error::invalid("spectrum", "grids differ"));
        }
        Ok(Spectrum {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            grid_warning: self.grid_warning || other.grid_warning,
            ..self.clone()
        })
    }
}

/// Additive complex white Gaussian noise. The SNR is the ratio of the
/// strongest time-domain echo peak to the rms time-domain noise floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            snr_db: 40.0,
            seed: 0,
        }
    }
}

/// `f_r = v/λ`
pub fn nominal_frequency(velocity: f64, wavelength: f64) -> Result<f64> {
    if !(velocity > 0.0 && velocity.is_finite()) {
        return Err(Error::invalid("velocity", "must be > 0"));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::invalid("wavelength", "must be > 0"));
    }
    Ok(velocity / wavelength)
}

pub fn path_velocity(physics: &SensorPhysics, kind: PathKind, env: &EnvironmentState) -> f64 {
    let dt = env.temperature - env.reference_temperature;
    match kind {
        PathKind::Bare => physics.v1_nominal * (1.0 + physics.tcf1 * dt * 1e-6),
        PathKind::Coated => {
            let magnetic = physics.magnetoelastic.fractional_shift(env.field);
            physics.v2_nominal * (1.0 + physics.tcf2 * dt * 1e-6 + magnetic * 1e-6)
        }
    }
}

/// Group delay of an echo, s.
pub fn echo_delay(
    geometry: &DeviceGeometry,
    physics: &SensorPhysics,
    echo: &EchoSpec,
    env: &EnvironmentState,
) -> f64 {
    echo.segments
        .iter()
        .map(|s| s.length * geometry.wavelength / path_velocity(physics, s.kind, env))
        .sum()
}

/// Centre frequency of an echo: total path length over delay, divided by λ.
pub fn echo_center_frequency(
    geometry: &DeviceGeometry,
    physics: &SensorPhysics,
    echo: &EchoSpec,
    env: &EnvironmentState,
) -> f64 {
    let tau = echo_delay(geometry, physics, echo, env);
    if tau > 0.0 {
        echo.total_length() / tau
    } else {
        // zero-length echo: the centre follows the first segment's path
        path_velocity(physics, echo.segments[0].kind, env) / geometry.wavelength
    }
}

/// `[sin(Nπx)/(Nπx)]²` with `x = (f − f_c)/f_c`.
pub fn idt_band_shape(geometry: &DeviceGeometry, f: f64, f_center: f64) -> f64 {
    let arg = geometry.idt_pairs as f64 * PI * (f - f_center) / f_center;
    if arg.abs() < 1e-8 {
        return 1.0;
    }
    let s = arg.sin() / arg;
    s * s
}

/// Mean of the IDT band shape over `grid` for an echo centred at
/// `f_center`: the time-domain peak of a 0 dB echo after [`crate::pipeline::to_time_domain`].
pub fn band_gain(geometry: &DeviceGeometry, grid: &FrequencyGrid, f_center: f64) -> f64 {
    grid.frequencies()
        .map(|f| idt_band_shape(geometry, f, f_center))
        .sum::<f64>()
        / grid.n_points as f64
}

fn echo_spectrum(
    device: &Device,
    echo: &EchoSpec,
    env: &EnvironmentState,
    grid: &FrequencyGrid,
    out: &mut [Complex64],
) {
    let tau = echo_delay(&device.geometry, &device.physics, echo, env);
    let fc = echo_center_frequency(&device.geometry, &device.physics, echo, env);
    let amp = 10f64.powf(echo.amplitude_db / 20.0) * echo.polarity as f64;
    for (i, slot) in out.iter_mut().enumerate() {
        let f = grid.frequency(i);
        let a = amp * idt_band_shape(&device.geometry, f, fc);
        // reduce the phase argument mod 1 cycle before scaling by 2π
        let cycles = (f * tau).fract();
        *slot += Complex64::from_polar(a, -2.0 * PI * cycles);
    }
}

/// Synthesized S₁₁ of `device` in environment `env`.
pub fn synthesize_s11(
    device: &Device,
    env: &EnvironmentState,
    grid: &FrequencyGrid,
    noise: Option<NoiseSpec>,
) -> Result<Spectrum> {
    device.validate()?;
    env.validate()?;
    grid.validate()?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.n_points];
    let mut grid_warning = false;
    let n = device.geometry.idt_pairs as f64;
    for echo in &device.echoes {
        echo_spectrum(device, echo, env, grid, &mut values);
        let fc = echo_center_frequency(&device.geometry, &device.physics, echo, env);
        if fc * (1.0 - 1.0 / n) < grid.f_start || fc * (1.0 + 1.0 / n) > grid.f_stop {
            grid_warning = true;
        }
    }
    let mut spectrum = Spectrum::new(*grid, values)?;
    spectrum.grid_warning = grid_warning;
    if let Some(noise) = noise {
        add_noise(&mut spectrum, noise)?;
    }
    Ok(spectrum)
}

fn add_noise(spectrum: &mut Spectrum, noise: NoiseSpec) -> Result<()> {
    if !noise.snr_db.is_finite() {
        return Err(Error::invalid("snr_db", "must be finite"));
    }
    let peak = crate::pipeline::to_time_domain(spectrum, 4)?
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let n = spectrum.len() as f64;
    let sigma = peak * n.sqrt() * 10f64.powf(-noise.snr_db / 20.0);
    let normal = Normal::new(0.0, sigma / 2f64.sqrt())
        .map_err(|e| Error::invalid("snr_db", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    for v in spectrum.values.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *v += Complex64::new(re, im);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_frequency_examples() {
        assert!((nominal_frequency(3772.0, 9.2e-6).unwrap() - 410e6).abs() < 1e-3);
        assert_eq!(nominal_frequency(2.5, 2.5).unwrap(), 1.0);
        assert!((nominal_frequency(2.0 * 3772.0, 9.2e-6).unwrap() - 820e6).abs() < 1e-3);
        assert!(nominal_frequency(0.0, 1.0).is_err());
        assert!(nominal_frequency(1.0, -1.0).is_err());
    }

    #[test]
    fn path_velocity_examples() {
        let p = SensorPhysics::default();
        let env = EnvironmentState::new(25.0, 3.0);
        assert_eq!(path_velocity(&p, PathKind::Bare, &env), p.v1_nominal);

        let env = EnvironmentState::new(50.0, 0.0);
        let v = path_velocity(&p, PathKind::Bare, &env);
        assert!((v / p.v1_nominal - (1.0 - 1692.5e-6)).abs() < 1e-15);

        let env = EnvironmentState::new(25.0, 0.69);
        let v = path_velocity(&p, PathKind::Coated, &env);
        assert!((v / p.v2_nominal - (1.0 - 687.28e-6)).abs() < 1e-12);
    }

    #[test]
    fn echo_delay_examples() {
        let geometry = DeviceGeometry::default();
        let physics = SensorPhysics {
            v1_nominal: 3772.0,
            ..Default::default()
        };
        let echoes = geometry.default_echoes();
        let env = EnvironmentState::default();
        let t1 = echo_delay(&geometry, &physics, &echoes[0], &env);
        // 120 * 9.2e-6 / 3772 = 292.68 ns
        assert!((t1 - 292.6829e-9).abs() < 1e-13);

        for env in [
            EnvironmentState::new(7.0, -4.0),
            EnvironmentState::new(37.0, 0.3),
            EnvironmentState::new(50.0, 4.0),
        ] {
            let d: Vec<f64> = echoes
                .iter()
                .map(|e| echo_delay(&geometry, &physics, e, &env))
                .collect();
            assert!((d[2] - 2.0 * d[0]).abs() < 1e-20);
            assert!((d[3] - (d[0] + d[1])).abs() < 1e-20);
        }
    }

    #[test]
    fn band_shape_examples() {
        let g = DeviceGeometry::default();
        assert_eq!(idt_band_shape(&g, 410e6, 410e6), 1.0);
        let null = idt_band_shape(&g, 410e6 * (1.0 + 1.0 / 11.0), 410e6);
        assert!(null < 1e-25);
        // x = 0.5/N → (sin(π/2)/(π/2))² = 4/π²
        let half = idt_band_shape(&g, 410e6 * (1.0 + 0.5 / 11.0), 410e6);
        assert!((half - 4.0 / (PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn zero_delay_echo_is_band_shape() {
        let geometry = DeviceGeometry::default();
        let device = Device {
            echoes: vec![EchoSpec {
                id: 1,
                segments: vec![Segment::bare(0.0)],
                amplitude_db: 0.0,
                polarity: 1,
            }],
            geometry: geometry.clone(),
            physics: SensorPhysics::default(),
        };
        let grid = FrequencyGrid::default();
        let env = EnvironmentState::default();
        let s = synthesize_s11(&device, &env, &grid, None).unwrap();
        let fc = device.physics.v1_nominal / geometry.wavelength;
        for (i, v) in s.values.iter().enumerate() {
            let a = idt_band_shape(&geometry, grid.frequency(i), fc);
            assert!((v.re - a).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn temperature_raises_delay() {
        let device = Device::default();
        let e1 = &device.echoes[0];
        let t_ref = echo_delay(
            &device.geometry,
            &device.physics,
            e1,
            &EnvironmentState::default(),
        );
        let t_hot = echo_delay(
            &device.geometry,
            &device.physics,
            e1,
            &EnvironmentState::new(35.0, -4.0),
        );
        let expected = 1.0 / (1.0 - 677e-6);
        assert!((t_hot / t_ref - expected).abs() < 1e-15);
        // first order: +677 ppm
        assert!(((t_hot / t_ref - 1.0) * 1e6 - 677.0).abs() < 0.5);
    }

    #[test]
    fn synthesis_is_linear_in_echoes() {
        let device = Device::default();
        let env = EnvironmentState::new(30.0, 0.2);
        let grid = FrequencyGrid {
            n_points: 501,
            ..Default::default()
        };
        let full = synthesize_s11(&device, &env, &grid, None).unwrap();
        let mut sum = Spectrum::new(grid, vec![Complex64::new(0.0, 0.0); grid.n_points]).unwrap();
        for echo in &device.echoes {
            let single = Device {
                echoes: vec![echo.clone()],
                ..device.clone()
            };
            sum = sum
                .add(&synthesize_s11(&single, &env, &grid, None).unwrap())
                .unwrap();
        }
        for (a, b) in full.values.iter().zip(&sum.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let device = Device::default();
        let env = EnvironmentState::default();
        let grid = FrequencyGrid::default();
        let noise = NoiseSpec {
            snr_db: 40.0,
            seed: 7,
        };
        let a = synthesize_s11(&device, &env, &grid, Some(noise)).unwrap();
        let b = synthesize_s11(&device, &env, &grid, Some(noise)).unwrap();
        assert_eq!(a, b);
        let c = synthesize_s11(&device, &env, &grid, Some(NoiseSpec { seed: 8, ..noise })).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn narrow_grid_sets_warning() {
        let device = Device::default();
        let env = EnvironmentState::default();
        let narrow = FrequencyGrid {
            f_start: 400e6,
            f_stop: 420e6,
            n_points: 201,
        };
        assert!(
            synthesize_s11(&device, &env, &narrow, None)
                .unwrap()
                .grid_warning
        );
        let wide = FrequencyGrid {
            f_start: 330e6,
            f_stop: 490e6,
            n_points: 801,
        };
        assert!(
            !synthesize_s11(&device, &env, &wide, None)
                .unwrap()
                .grid_warning
        );
    }

    #[test]
    fn non_uniform_samples_rejected() {
        let f = [1.0, 2.0, 3.5];
        let v = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            Spectrum::from_samples(&f, v),
            Err(Error::NonUniformGrid(2))
        ));
    }
}

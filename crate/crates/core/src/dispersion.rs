//! Love-wave dispersion of a layered stack.
//!
//! The shear-horizontal displacement in each layer is carried from the free
//! surface down to the substrate with a 2×2 transfer matrix acting on the
//! state `(u, τ/k)`. The guided-mode condition is that the state reaching the
//! substrate matches a wave decaying into the half-space:
//!
//! ```text
//! D(v) = (τ_b/k + μs·βs·u_b) / μs,   βs = sqrt(1 − v²/vs²)
//! ```
//!
//! Layers slower than the trial velocity oscillate (`cos`/`sin`), layers
//! faster than it are evanescent (`cosh`/`sinh`); both branches are real and
//! the determinant is continuous in `v`, so every sign change of `D` brackets
//! a genuine mode. Modes are found by a uniform sign scan followed by
//! bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{cobalt_iron_boron, lithium_niobate, zinc_oxide, LayerStack};

/// Effective ZnO shear stiffness (Pa), ρ = 5680 kg/m³ gives ≈ 2731 m/s.
pub const ZNO_EFFECTIVE_SHEAR_STIFFNESS: f64 = 42.3729e9;

/// Effective LiNbO₃ shear stiffness (Pa) fitted so that the CoFeB/ZnO stack
/// at λ = 9.2 µm guides a Love mode at 3772 m/s (410 MHz). Regenerate with
/// `cargo run -p msaw-core --example calibrate_stack`.
pub const CALIBRATED_SUBSTRATE_SHEAR_STIFFNESS: f64 = 75_618_987_472.5;

/// IDT period of the sensor, m.
pub const DEFAULT_WAVELENGTH: f64 = 9.2e-6;

/// Target phase velocity of the calibration, 410 MHz × 9.2 µm.
pub const CALIBRATION_TARGET_VELOCITY: f64 = 3772.0;

/// How the wavenumber is tied to the trial velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Fixed frequency in Hz, `k = 2πf/v`.
    Frequency(f64),
    /// Fixed wavelength in m, `k = 2π/λ`.
    Wavelength(f64),
}

impl Drive {
    fn wavenumber(&self, v: f64) -> f64 {
        match *self {
            Drive::Frequency(f) => 2.0 * std::f64::consts::PI * f / v,
            Drive::Wavelength(lambda) => 2.0 * std::f64::consts::PI / lambda,
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, x) = match *self {
            Drive::Frequency(f) => ("frequency", f),
            Drive::Wavelength(l) => ("wavelength", l),
        };
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(name, "must be finite and > 0"))
        }
    }
}

/// Returns `(c, s)` with `c = cos(x√q)`, `s = sin(x√q)/√q` for `q > 0`, and the
/// hyperbolic continuation for `q < 0`. Series near `q = 0`.
fn layer_functions(q: f64, x: f64) -> (f64, f64) {
    let z = q * x * x;
    if z.abs() < 1e-6 {
        let c = 1.0 - z / 2.0 + z * z / 24.0;
        let s = x * (1.0 - z / 6.0 + z * z / 120.0);
        (c, s)
    } else if q > 0.0 {
        let b = q.sqrt();
        ((x * b).cos(), (x * b).sin() / b)
    } else {
        let b = (-q).sqrt();
        ((x * b).cosh(), (x * b).sinh() / b)
    }
}

/// Open interval of trial velocities for which the determinant is defined:
/// above the slowest layer (or 0 for a bare substrate) and below the
/// substrate shear velocity.
pub fn admissible_interval(stack: &LayerStack) -> Result<(f64, f64)> {
    let vs = stack.substrate_velocity()?;
    let lower = stack.min_layer_velocity()?.unwrap_or(0.0);
    Ok((lower, vs))
}

fn determinant_unchecked(stack: &LayerStack, k: f64, v: f64) -> Result<f64> {
    let mut u = 1.0;
    let mut t = 0.0;
    for layer in stack.layers.iter().rev() {
        let mu = layer.material.mu()?;
        let q = v * v * layer.material.density / mu - 1.0;
        let (c, s) = layer_functions(q, k * layer.thickness);
        let (u_next, t_next) = (c * u + s / mu * t, -mu * q * s * u + c * t);
        u = u_next;
        t = t_next;
    }
    let mu_s = stack.substrate.mu()?;
    let vs = (mu_s / stack.substrate.density).sqrt();
    let beta_s = (1.0 - (v / vs).powi(2)).sqrt();
    Ok((t + mu_s * beta_s * u) / mu_s)
}

/// Love-wave dispersion determinant at `trial_velocity`.
///
/// For a single layer this is `−cos(kh·β₁)·(tan(kh·β₁)·μ₁β₁ − μs·βs)/μs`.
pub fn determinant(stack: &LayerStack, drive: Drive, trial_velocity: f64) -> Result<f64> {
    drive.validate()?;
    let (lower, upper) = admissible_interval(stack)?;
    if !(trial_velocity > lower && trial_velocity < upper) {
        return Err(Error::EvanescenceViolated {
            velocity: trial_velocity,
            lower,
            upper,
        });
    }
    determinant_unchecked(stack, drive.wavenumber(trial_velocity), trial_velocity)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Number of points of the uniform sign-change scan.
    pub grid_points: usize,
    /// Relative bisection tolerance on the velocity.
    pub rel_tol: f64,
    /// Relative margin kept from the open-interval endpoints.
    pub edge_margin: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid_points: 2000,
            rel_tol: 1e-10,
            edge_margin: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProblem {
    pub stack: LayerStack,
    pub drive: Drive,
    pub v_min: f64,
    pub v_max: f64,
}

impl DispersionProblem {
    /// Problem with search bounds spanning the whole admissible interval,
    /// shrunk by `settings.edge_margin`.
    pub fn new(stack: LayerStack, drive: Drive) -> Result<Self> {
        let eps = SolverSettings::default().edge_margin;
        let (lower, upper) = admissible_interval(&stack)?;
        Ok(DispersionProblem {
            stack,
            drive,
            v_min: lower * (1.0 + eps),
            v_max: upper * (1.0 - eps),
        })
    }

    pub fn with_bounds(mut self, v_min: f64, v_max: f64) -> Self {
        self.v_min = v_min;
        self.v_max = v_max;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub phase_velocity: f64,
    pub mode_index: usize,
    pub residual: f64,
}

fn bisect<F: Fn(f64) -> Result<f64>>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    rel_tol: f64,
) -> Result<f64> {
    // 200 halvings exhaust f64 resolution on any finite bracket
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid.abs() {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Guided modes in ascending phase velocity, at most `max_modes`.
pub fn solve_modes(
    problem: &DispersionProblem,
    max_modes: usize,
    settings: &SolverSettings,
) -> Result<Vec<ModeSolution>> {
    if max_modes == 0 {
        return Err(Error::invalid("max_modes", "must be >= 1"));
    }
    if settings.grid_points < 2 {
        return Err(Error::invalid("grid_points", "must be >= 2"));
    }
    problem.drive.validate()?;
    problem.stack.validate()?;
    if problem.stack.layers.is_empty() {
        return Ok(Vec::new());
    }
    let (lower, upper) = admissible_interval(&problem.stack)?;
    let (v_min, v_max) = (problem.v_min, problem.v_max);
    if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
        return Err(Error::InvalidBracket(format!(
            "v_min {v_min} must be below v_max {v_max}"
        )));
    }
    if v_min <= lower || v_max >= upper {
        return Err(Error::InvalidBracket(format!(
            "[{v_min}, {v_max}] must lie strictly inside ({lower}, {upper})"
        )));
    }

    let stack = &problem.stack;
    let drive = problem.drive;
    let det = |v: f64| determinant_unchecked(stack, drive.wavenumber(v), v);

    let n = settings.grid_points;
    let step = (v_max - v_min) / (n - 1) as f64;
    let mut roots = Vec::new();
    let mut v_prev = v_min;
    let mut d_prev = det(v_prev)?;
    if d_prev == 0.0 {
        roots.push(v_prev);
    }
    for i in 1..n {
        if roots.len() >= max_modes {
            break;
        }
        let v = if i == n - 1 {
            v_max
        } else {
            v_min + step * i as f64
        };
        let d = det(v)?;
        if d == 0.0 {
            roots.push(v);
        } else if d_prev != 0.0 && (d < 0.0) != (d_prev < 0.0) {
            roots.push(bisect(det, v_prev, v, d_prev, settings.rel_tol)?);
        }
        v_prev = v;
        d_prev = d;
    }

    roots
        .into_iter()
        .take(max_modes)
        .enumerate()
        .map(|(mode_index, v)| {
            Ok(ModeSolution {
                phase_velocity: v,
                mode_index,
                residual: det(v)?,
            })
        })
        .collect()
}

/// Phase velocity of the fundamental mode, `None` when no mode is guided.
pub fn fundamental_velocity(stack: &LayerStack, drive: Drive) -> Result<Option<f64>> {
    if !stack.supports_love_mode()? {
        return Ok(None);
    }
    let problem = DispersionProblem::new(stack.clone(), drive)?;
    let modes = solve_modes(&problem, 1, &SolverSettings::default())?;
    Ok(modes.first().map(|m| m.phase_velocity))
}

/// Substrate shear stiffness μs making the fundamental mode of `stack` (whose
/// own substrate μ is ignored) propagate at `target_velocity` for
/// wavelength `wavelength`.
pub fn calibrate_substrate_stiffness(
    stack: &LayerStack,
    wavelength: f64,
    target_velocity: f64,
) -> Result<f64> {
    let rho = stack.substrate.density;
    let v_layer = stack
        .max_layer_velocity()?
        .ok_or_else(|| Error::invalid("layers", "calibration needs at least one layer"))?;
    let velocity_for = |mu_s: f64| -> Result<f64> {
        let mut trial = stack.clone();
        trial.substrate.shear_stiffness = Some(mu_s);
        fundamental_velocity(&trial, Drive::Wavelength(wavelength))?
            .ok_or_else(|| Error::InsufficientData("no guided mode during calibration".into()))
    };
    let mut lo = rho * (target_velocity.max(v_layer) * (1.0 + 1e-6)).powi(2);
    let mut hi = rho * (4.0 * target_velocity).powi(2);
    let f_lo = velocity_for(lo)? - target_velocity;
    let f_hi = velocity_for(hi)? - target_velocity;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::InvalidBracket(format!(
            "target {target_velocity} m/s not reachable by varying the substrate stiffness"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid {
            break;
        }
        if velocity_for(mid)? < target_velocity {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stack of the bare path: ZnO(700 nm) on LiNbO₃ with calibrated effective μ.
pub fn calibrated_bare_path_stack() -> LayerStack {
    let substrate = lithium_niobate().with_shear_stiffness(CALIBRATED_SUBSTRATE_SHEAR_STIFFNESS);
    LayerStack::bare(substrate).with_layer(
        zinc_oxide().with_shear_stiffness(ZNO_EFFECTIVE_SHEAR_STIFFNESS),
        700e-9,
    )
}

/// CoFeB(100 nm)/ZnO(700 nm)/LiNbO₃ with calibrated effective shear
/// stiffnesses (the coated sensing path).
pub fn calibrated_default_stack() -> LayerStack {
    calibrated_bare_path_stack().with_layer(cobalt_iron_boron(), 100e-9)
}

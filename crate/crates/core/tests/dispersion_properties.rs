use msaw_core::dispersion::{
    calibrated_default_stack, fundamental_velocity, solve_modes, DispersionProblem, Drive,
    SolverSettings,
};
use msaw_core::{LayerStack, Material};
use proptest::prelude::*;
use std::f64::consts::PI;

const F: f64 = 410e6;

fn substrate(vs: f64) -> Material {
    Material::isotropic("sub", 4700.0, 4700.0 * vs * vs)
}

fn layer(v: f64, rho: f64) -> Material {
    Material::isotropic("layer", rho, rho * v * v)
}

/// Thickness at which the fundamental single-layer Love mode has phase
/// velocity `v` at frequency `f`:
/// tan(k·h·β₁) = μs·βs / (μ₁·β₁), first branch.
fn closed_form_thickness(v: f64, f: f64, v1: f64, rho1: f64, vs: f64, rhos: f64) -> f64 {
    let (mu1, mus) = (rho1 * v1 * v1, rhos * vs * vs);
    let b1 = (v * v / (v1 * v1) - 1.0).sqrt();
    let bs = (1.0 - v * v / (vs * vs)).sqrt();
    let k = 2.0 * PI * f / v;
    (mus * bs / (mu1 * b1)).atan() / (k * b1)
}

#[test]
fn single_layer_root_matches_closed_form() {
    let (v1, rho1, vs) = (2731.0, 5680.0, 4000.0);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let v = v1 + (vs - v1) * (0.02 + 0.96 * i as f64 / 19.0);
        let h = closed_form_thickness(v, F, v1, rho1, vs, 4700.0);
        let stack = LayerStack::bare(substrate(vs)).with_layer(layer(v1, rho1), h);
        let got = fundamental_velocity(&stack, Drive::Frequency(F))
            .unwrap()
            .unwrap();
        worst = worst.max((got - v).abs() / v);
    }
    assert!(worst < 1e-8, "worst relative error {worst:e}");
}

#[test]
fn single_layer_limits() {
    let (v1, rho1, vs) = (2731.0, 5680.0, 4000.0);
    let at = |h: f64| {
        let stack = LayerStack::bare(substrate(vs)).with_layer(layer(v1, rho1), h);
        fundamental_velocity(&stack, Drive::Frequency(F))
            .unwrap()
            .unwrap()
    };
    let thin = at(1e-9);
    assert!(thin < vs && (vs - thin) / vs < 1e-4, "{thin}");
    let thick = at(200e-6);
    assert!(thick > v1 && (thick - v1) / v1 < 1e-3, "{thick}");
}

#[test]
fn split_layer_equals_single_layer() {
    let (v1, rho1, vs) = (2731.0, 5680.0, 4000.0);
    let one = LayerStack::bare(substrate(vs)).with_layer(layer(v1, rho1), 1.2e-6);
    let two = LayerStack::bare(substrate(vs))
        .with_layer(layer(v1, rho1), 0.5e-6)
        .with_layer(layer(v1, rho1), 0.7e-6);
    let a = fundamental_velocity(&one, Drive::Frequency(F))
        .unwrap()
        .unwrap();
    let b = fundamental_velocity(&two, Drive::Frequency(F))
        .unwrap()
        .unwrap();
    assert!((a - b).abs() / a < 1e-10, "{a} {b}");
}

#[test]
fn roots_bracket_sign_changes() {
    let stack = calibrated_default_stack();
    let problem = DispersionProblem::new(stack.clone(), Drive::Wavelength(9.2e-6)).unwrap();
    let modes = solve_modes(&problem, 4, &SolverSettings::default()).unwrap();
    assert_eq!(modes.len(), 1);
    let v = modes[0].phase_velocity;
    let d =
        |v: f64| msaw_core::dispersion::determinant(&stack, Drive::Wavelength(9.2e-6), v).unwrap();
    assert!(d(v * (1.0 - 1e-6)) * d(v * (1.0 + 1e-6)) < 0.0);
    assert!(modes[0].residual.abs() < 1e-6);
}

fn random_stack() -> impl Strategy<Value = (f64, Vec<(f64, f64, f64)>)> {
    (
        3500.0f64..5000.0,
        prop::collection::vec((0.45f64..0.95, 2000.0f64..9000.0, 0.05f64..1.5), 1..4),
    )
}

fn build(vs: f64, layers: &[(f64, f64, f64)], scale: f64) -> LayerStack {
    layers
        .iter()
        .fold(LayerStack::bare(substrate(vs)), |s, &(frac, rho, h_um)| {
            s.with_layer(layer(frac * vs, rho), h_um * 1e-6 * scale)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn limits_and_thickness_monotonicity((vs, layers) in random_stack()) {
        let drive = Drive::Frequency(F);
        let nominal = build(vs, &layers, 1.0);
        let v = fundamental_velocity(&nominal, drive).unwrap().unwrap();
        let slowest = nominal.min_layer_velocity().unwrap().unwrap();
        prop_assert!(v > slowest && v < vs);

        // thin limit: total k·h = 0.05
        let k = 2.0 * PI * F / vs;
        let scale = 0.05 / (k * nominal.total_thickness());
        let thin = fundamental_velocity(&build(vs, &layers, scale), drive).unwrap().unwrap();
        prop_assert!((vs - thin) / vs < 1e-2, "thin {thin} vs {vs}");
        if scale < 1.0 {
            prop_assert!(thin >= v);
        }

        // thick limit: a slowest layer spanning many wavelengths guides the mode
        let i_slow = (0..layers.len())
            .min_by(|&a, &b| layers[a].0.total_cmp(&layers[b].0))
            .unwrap();
        let mut thick_layers = layers.clone();
        thick_layers[i_slow].2 = 30.0 * layers[i_slow].0 * vs / F * 1e6;
        let thick = fundamental_velocity(&build(vs, &thick_layers, 1.0), drive).unwrap().unwrap();
        prop_assert!(thick > slowest && (thick - slowest) / slowest < 1e-2,
            "thick {thick} slowest {slowest}");

        // thickening any layer slower than the mode does not speed it up
        for i in 0..layers.len() {
            if layers[i].0 * vs >= v {
                continue;
            }
            let mut thicker = layers.clone();
            thicker[i].2 *= 1.5;
            let v2 = fundamental_velocity(&build(vs, &thicker, 1.0), drive).unwrap().unwrap();
            prop_assert!(v2 <= v * (1.0 + 1e-10), "layer {i}: {v} -> {v2}");
        }
    }
}

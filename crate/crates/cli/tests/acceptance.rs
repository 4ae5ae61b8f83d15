//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use msaw_core::calib::{calibrate, compensate_sweep, linear_fit};
use msaw_core::device::{band_gain, echo_center_frequency, synthesize_s11};
use msaw_core::dispersion::{calibrated_default_stack, fundamental_velocity};
use msaw_core::io::touchstone::{read_s1p, write_s1p, DataFormat, FrequencyUnit};
use msaw_core::io::{load_scenario, TouchstoneRecord};
use msaw_core::pipeline::{detect_peaks, to_time_domain, unwrap, Interrogator};
use msaw_core::rfid::{decode, encode};
use msaw_core::sweep::{field_sweep_points, range, run_sweep, temperature_sweep_points};
use msaw_core::{
    Device, Drive, EnvironmentState, FrequencyGrid, LayerStack, Material, NoiseSpec,
    PipelineSettings, ReferenceRule, Scenario, SlotTemplate, Spectrum, SweepPoint, SweepRow,
    TagCode,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sweep(scenario: &Scenario, points: &[SweepPoint], noise: Option<NoiseSpec>) -> Vec<SweepRow> {
    let mut config = scenario.sweep_config();
    config.noise = noise;
    run_sweep(&config, points).unwrap()
}

fn anchor_frequency() -> Verdict {
    let lambda = 9.2e-6;
    let v = fundamental_velocity(&calibrated_default_stack(), Drive::Wavelength(lambda))
        .unwrap()
        .unwrap();
    let f = v / lambda;
    check(
        rel(f, 410e6) <= 0.05,
        format!("v = {v:.2} m/s, f_r = {:.3} MHz (410 ± 5%)", f / 1e6),
    )
}

fn echo_structure() -> Verdict {
    let device = Device::default();
    let env = EnvironmentState::default();
    let grid = FrequencyGrid::default();
    let s = synthesize_s11(&device, &env, &grid, None).unwrap();
    let tr = to_time_domain(&s, 4).unwrap();
    let found = detect_peaks(&tr, 4, PipelineSettings::default().min_separation).unwrap();
    if !found.complete {
        return Err(format!("{} peaks", found.peaks.len()));
    }
    let p = found.by_time();
    // undo the IDT band integration so levels compare with the echo amplitudes
    let level = |k: usize| {
        let fc = echo_center_frequency(&device.geometry, &device.physics, &device.echoes[k], &env);
        p[k].level_db - 20.0 * band_gain(&device.geometry, &grid, fc).log10()
    };
    let (l1, l2) = (level(0), level(1));
    let e3 = (p[2].time - 2.0 * p[0].time).abs() / tr.dt;
    let e4 = (p[3].time - p[0].time - p[1].time).abs() / tr.dt;
    check(
        (l1 + 18.0).abs() <= 0.5 && (l2 + 24.0).abs() <= 0.5 && e3 <= 1.0 && e4 <= 1.0,
        format!(
            "4 peaks; levels {l1:.2} / {l2:.2} dB; τ3 − 2τ1 = {e3:.2} bins, τ4 − τ1 − τ2 = {e4:.2} bins"
        ),
    )
}

fn tcf_round_trip() -> Verdict {
    let scenario = Scenario::default();
    let points = temperature_sweep_points(&range(25.0, 50.0, 5.0).unwrap(), -4.0);
    let clean = calibrate(&sweep(&scenario, &points, None), (-0.19, 0.69), 2).unwrap();
    let (t1, t2) = (clean.tcf1.unwrap(), clean.tcf2.unwrap());
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let noise = NoiseSpec { snr_db: 40.0, seed };
        let m = calibrate(&sweep(&scenario, &points, Some(noise)), (-0.19, 0.69), 2).unwrap();
        worst = worst
            .max(rel(m.tcf1.unwrap(), -67.7))
            .max(rel(m.tcf2.unwrap(), -66.2));
    }
    check(
        rel(t1, -67.7) <= 0.01 && rel(t2, -66.2) <= 0.01 && worst <= 0.03,
        format!(
            "noise-free {t1:.4} / {t2:.4} ppm/°C; SNR 40 dB worst error {:.2}% over 10 seeds",
            worst * 100.0
        ),
    )
}

fn magnetic_round_trip() -> Verdict {
    let scenario = Scenario::default();
    let points = field_sweep_points(21.0, &range(-4.0, 4.0, 0.1).unwrap(), 0.0);
    let rows = sweep(&scenario, &points, None);
    let s2 = calibrate(&rows, (-0.19, 0.69), 2)
        .unwrap()
        .magnetic_slope
        .unwrap();
    let s1 = calibrate(&rows, (-0.19, 0.69), 1)
        .unwrap()
        .magnetic_slope
        .unwrap();
    check(
        rel(s2, -781.0) <= 0.01 && s1.abs() < 5.0,
        format!("peak 2 {s2:.2} ppm/mT (−781 ± 1%), peak 1 {s1:.3} ppm/mT"),
    )
}

fn compensation() -> Verdict {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/compensation.json"),
    )
    .unwrap();
    let scenario = load_scenario(&text, true).unwrap().scenario;
    let fields = range(-4.0, 4.0, 0.1).unwrap();
    // ±0.3 °C over each sweep; the ambient sweep drifts upward too
    let points: Vec<SweepPoint> = [
        (7.0, 0.3),
        (17.0, 0.3),
        (21.0, 0.3),
        (27.0, -0.3),
        (37.0, -0.3),
    ]
    .into_iter()
    .flat_map(|(t, d)| field_sweep_points(t, &fields, d))
    .collect();
    let rows = sweep(&scenario, &points, None);
    let model = calibrate(
        &sweep(
            &scenario,
            &temperature_sweep_points(&range(25.0, 50.0, 5.0).unwrap(), -4.0),
            None,
        ),
        (-0.19, 0.69),
        2,
    )
    .unwrap();
    let (t1, t2) = (model.tcf1.unwrap(), model.tcf2.unwrap());
    let out = compensate_sweep(&rows, t1, t2, ReferenceRule::FirstRow).unwrap();
    let spread = |value: fn(&msaw_core::CompensatedPoint) -> f64| -> (f64, f64) {
        let per_field: Vec<f64> = fields
            .iter()
            .map(|&h| {
                let v: Vec<f64> = out.iter().filter(|p| p.field_mt == h).map(value).collect();
                assert_eq!(v.len(), 5);
                v.iter().cloned().fold(f64::MIN, f64::max)
                    - v.iter().cloned().fold(f64::MAX, f64::min)
            })
            .collect();
        (
            per_field.iter().cloned().fold(f64::MAX, f64::min),
            per_field.iter().cloned().fold(f64::MIN, f64::max),
        )
    };
    let (raw_min, _) = spread(|p| p.shift_ppm);
    let (_, comp_max) = spread(|p| p.shift_ppm_compensated);
    check(
        raw_min > 1000.0 && comp_max < 35.0,
        format!("raw spread ≥ {raw_min:.0} ppm, compensated spread ≤ {comp_max:.3} ppm (TCFs {t1:.3} / {t2:.3})"),
    )
}

/// Minimal-step unwrap by exhaustive search over 2π multiples; ties at
/// exactly ±π resolve to +π.
fn brute_force_unwrap(wrapped: &[f64]) -> Vec<f64> {
    let mut out = vec![wrapped[0]];
    for i in 1..wrapped.len() {
        let d = wrapped[i] - wrapped[i - 1];
        let mut best = (f64::INFINITY, 0.0);
        for k in -6..=6 {
            let step = d + TAU * k as f64;
            if step.abs() < best.0 || (step.abs() == best.0 && step > best.1) {
                best = (step.abs(), step);
            }
        }
        out.push(out[i - 1] + best.1);
    }
    out
}

fn pipeline_fidelity() -> Verdict {
    let grid = FrequencyGrid::default();
    let env = EnvironmentState::default();
    let record = |ppm: f64| -> Spectrum {
        let mut d = Device::default();
        d.physics.v2_nominal *= 1.0 + ppm * 1e-6;
        synthesize_s11(&d, &env, &grid, None).unwrap()
    };
    let reader = Interrogator::from_reference(&record(0.0), PipelineSettings::default()).unwrap();
    let f0 = reader.track(&record(0.0), &[2]).unwrap()[0].f_zero;
    let injected = [-1000.0, -500.0, -100.0, 100.0, 500.0, 1000.0];
    let measured: Vec<f64> = injected
        .iter()
        .map(|&p| (reader.track(&record(p), &[2]).unwrap()[0].f_zero / f0 - 1.0) * 1e6)
        .collect();
    let fit = linear_fit(&injected, &measured).unwrap();
    let worst = injected
        .iter()
        .zip(&measured)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..400);
        let max_step = rng.gen_range(0.1..0.99) * PI;
        let mut phase: f64 = rng.gen_range(-50.0..50.0);
        let wrapped: Vec<f64> = (0..n)
            .map(|_| {
                phase += rng.gen_range(-max_step..max_step);
                phase.sin().atan2(phase.cos())
            })
            .collect();
        if unwrap(&wrapped) != brute_force_unwrap(&wrapped) {
            mismatches += 1;
        }
    }
    check(
        (fit.slope - 1.0).abs() <= 0.002 && worst <= 2.0 && mismatches == 0,
        format!(
            "slope {:.5}, worst point error {worst:.3} ppm; unwrap oracle mismatches {mismatches}/1000",
            fit.slope
        ),
    )
}

fn rfid_round_trip() -> Verdict {
    let template = SlotTemplate::default();
    let grid = FrequencyGrid::default();
    let env = EnvironmentState::default();
    let read = |bits: u64, noise: Option<NoiseSpec>| -> u64 {
        let code = TagCode::from_bits(template, bits).unwrap();
        let device = encode(&code, &Device::default()).unwrap();
        let s = synthesize_s11(&device, &env, &grid, noise).unwrap();
        let tr = to_time_domain(&s, 4).unwrap();
        decode(&tr, &template, -12.0).map(|c| c.bits()).unwrap_or(0)
    };
    let clean_ok = (1..64u64).filter(|&b| read(b, None) == b).count();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let noisy_ok = (0..100u64)
        .filter(|&seed| {
            let bits = rng.gen_range(1..64u64);
            read(bits, Some(NoiseSpec { snr_db: 30.0, seed })) == bits
        })
        .count();
    check(
        clean_ok == 63 && noisy_ok == 100,
        format!("noise-free {clean_ok}/63 exact, SNR 30 dB {noisy_ok}/100 exact"),
    )
}

fn iso(name: &str, v: f64, rho: f64) -> Material {
    Material::isotropic(name, rho, rho * v * v)
}

fn dispersion_properties() -> Verdict {
    const F: f64 = 410e6;
    let (v1, rho1, vs, rhos) = (2731.0, 5680.0, 4000.0, 4700.0);
    let mut closed_worst: f64 = 0.0;
    for i in 0..20 {
        let v = v1 + (vs - v1) * (0.02 + 0.96 * i as f64 / 19.0);
        // tan(k·h·β₁) = μs·βs / (μ₁·β₁), fundamental branch
        let b1 = (v * v / (v1 * v1) - 1.0).sqrt();
        let bs = (1.0 - v * v / (vs * vs)).sqrt();
        let k = TAU * F / v;
        let h = ((rhos * vs * vs * bs) / (rho1 * v1 * v1 * b1)).atan() / (k * b1);
        let stack = LayerStack::bare(iso("sub", vs, rhos)).with_layer(iso("layer", v1, rho1), h);
        let got = fundamental_velocity(&stack, Drive::Frequency(F))
            .unwrap()
            .unwrap();
        closed_worst = closed_worst.max(rel(got, v));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let drive = Drive::Frequency(F);
    let solve = |s: &LayerStack| fundamental_velocity(s, drive).unwrap().unwrap();
    for case in 0..100 {
        let vsub: f64 = rng.gen_range(3500.0..5000.0);
        let layers: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..4))
            .map(|_| {
                (
                    rng.gen_range(0.45..0.95),
                    rng.gen_range(2000.0..9000.0),
                    rng.gen_range(0.05..1.5),
                )
            })
            .collect();
        let build = |ls: &[(f64, f64, f64)], scale: f64| {
            ls.iter().fold(
                LayerStack::bare(iso("sub", vsub, 4700.0)),
                |s, &(frac, rho, h)| s.with_layer(iso("layer", frac * vsub, rho), h * 1e-6 * scale),
            )
        };
        let nominal = build(&layers, 1.0);
        let v = solve(&nominal);
        let slowest = nominal.min_layer_velocity().unwrap().unwrap();
        let scale = 0.05 / (TAU * F / vsub * nominal.total_thickness());
        let thin = solve(&build(&layers, scale));
        let i_slow = (0..layers.len())
            .min_by(|&a, &b| layers[a].0.total_cmp(&layers[b].0))
            .unwrap();
        let mut thick_layers = layers.clone();
        thick_layers[i_slow].2 = 30.0 * layers[i_slow].0 * vsub / F * 1e6;
        let thick = solve(&build(&thick_layers, 1.0));
        let mut ok = v > slowest
            && v < vsub
            && (vsub - thin) / vsub < 1e-2
            && (scale >= 1.0 || thin >= v)
            && thick > slowest
            && (thick - slowest) / slowest < 1e-2;
        for i in 0..layers.len() {
            if layers[i].0 * vsub < v {
                let mut thicker = layers.clone();
                thicker[i].2 *= 1.5;
                ok &= solve(&build(&thicker, 1.0)) <= v * (1.0 + 1e-10);
            }
        }
        if !ok {
            failures.push(case);
        }
    }
    check(
        closed_worst < 1e-8 && failures.is_empty(),
        format!(
            "closed-form worst {closed_worst:.2e} over 20 samples; limits/monotonicity failures {}/100",
            failures.len()
        ),
    )
}

fn random_record(rng: &mut ChaCha8Rng, n: usize) -> TouchstoneRecord {
    let mut f = rng.gen_range(1e6..5e8);
    let mut frequencies = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        f += rng.gen_range(1.0..1e5);
        frequencies.push(f);
        let mag = 10f64.powf(rng.gen_range(-6.0..0.5));
        values.push(Complex64::from_polar(mag, rng.gen_range(-PI..PI)));
    }
    TouchstoneRecord {
        unit: FrequencyUnit::MHz,
        format: DataFormat::RI,
        reference_resistance: 50.0,
        comments: Vec::new(),
        frequencies,
        values,
    }
}

/// Runs every `msaw` line of the figure recipes in one scratch directory.
fn run_recipes() -> Result<usize, String> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let text =
        std::fs::read_to_string(root.join("recipes/figures.txt")).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut count = 0;
    for line in text.lines().filter(|l| l.starts_with("msaw ")) {
        let args: Vec<&str> = line.split_whitespace().skip(1).collect();
        let out = Command::new(env!("CARGO_BIN_EXE_msaw"))
            .args(&args)
            .current_dir(dir.path())
            .env("MSAW_SCENARIO_DIR", root.join("scenarios"))
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "`{line}` exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
        count += 1;
    }
    Ok(count)
}

fn io_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let rec = random_record(&mut rng, 1000);
        for format in [DataFormat::RI, DataFormat::MA, DataFormat::DB] {
            let back = read_s1p(&write_s1p(&rec, format)).unwrap();
            for (a, b) in rec.values.iter().zip(&back.values) {
                worst = worst.max((a - b).norm() / a.norm());
            }
            for (a, b) in rec.frequencies.iter().zip(&back.frequencies) {
                worst = worst.max(rel(*b, *a));
            }
        }
    }
    match run_recipes() {
        Ok(n) => check(
            worst < 1e-9,
            format!("Touchstone worst relative error {worst:.2e} (RI/MA/DB); {n} recipe commands exit 0"),
        ),
        Err(e) => Err(format!("Touchstone worst {worst:.2e}; recipe failed: {e}")),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("resonance anchor", anchor_frequency),
        ("echo structure", echo_structure),
        ("TCF round-trip", tcf_round_trip),
        ("magnetic sensitivity round-trip", magnetic_round_trip),
        ("compensation superposition", compensation),
        ("pipeline fidelity", pipeline_fidelity),
        ("RFID round-trip", rfid_round_trip),
        ("dispersion properties", dispersion_properties),
        ("I/O and figure recipes", io_round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {tag} {name}: {detail} [{:.1}s]",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/9 passed in {:.1}s",
        9 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

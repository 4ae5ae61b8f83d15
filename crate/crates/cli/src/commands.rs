use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use msaw_core::calib::{calibrate, compensate_sweep};
use msaw_core::device::synthesize_s11;
use msaw_core::dispersion::{solve_modes, SolverSettings};
use msaw_core::io::table::{
    compensated_table, spectrum_from_table, spectrum_table, sweep_rows, sweep_table,
};
use msaw_core::io::{load_scenario, read_s1p, write_s1p, Table};
use msaw_core::pipeline::{to_time_domain, GateWidth, Interrogator};
use msaw_core::rfid::{decode, encode};
use msaw_core::sweep::{parse_range, run_sweep};
use msaw_core::{
    DispersionProblem, Drive, NoiseSpec, ReferenceRule, Scenario, SensitivityModel, Spectrum,
    TagCode, TouchstoneRecord,
};

use crate::args::*;
use crate::plot::{emit_plot, PlotOptions};
use crate::{Failure, SCENARIO_DIR_VAR};

type Outcome<T = ()> = Result<T, Failure>;

pub fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => simulate(g, a),
        Command::Interrogate(a) => interrogate(g, a),
        Command::Calibrate(a) => calibrate_cmd(a),
        Command::Compensate(a) => compensate_cmd(a),
        Command::Decode(a) => decode_cmd(g, a),
        Command::Sweep(a) => sweep(g, a),
        Command::Disperse(a) => disperse(g, a),
        Command::Magcurve(a) => magcurve(g, a),
        Command::Plot(a) => plot(a),
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// The path itself when it exists, otherwise the same relative path under
/// `$MSAW_SCENARIO_DIR`.
pub fn resolve_scenario(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(SCENARIO_DIR_VAR) {
        Some(dir) => {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Processing(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Processing(format!("stdout: {e}"))),
    }
}

/// Scenario with the global noise flags applied.
fn scenario(g: &GlobalArgs, path: Option<&Path>) -> Outcome<Scenario> {
    let mut s = match path {
        None => Scenario::default(),
        Some(p) => {
            let resolved = resolve_scenario(p);
            let loaded = load_scenario(&read_text(&resolved)?, g.strict_config)?;
            for w in &loaded.warnings {
                eprintln!("warning: {}: {w}", resolved.display());
            }
            loaded.scenario
        }
    };
    if let Some(snr_db) = g.snr_db {
        if !snr_db.is_finite() {
            return Err(invalid("--snr-db must be finite"));
        }
        s.noise = Some(NoiseSpec {
            snr_db,
            seed: g.seed.unwrap_or(0),
        });
    } else if let (Some(n), Some(seed)) = (s.noise.as_mut(), g.seed) {
        n.seed = seed;
    }
    Ok(s)
}

fn provenance(s: &Scenario) -> Vec<String> {
    match s.noise {
        Some(n) => vec![format!("seed {}", n.seed), format!("snr_db {}", n.snr_db)],
        None => vec!["seed 0".into(), "snr_db none".into()],
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn read_record(path: &Path) -> Outcome<Spectrum> {
    let text = read_text(path)?;
    let spectrum = match extension(path).as_str() {
        "csv" => spectrum_from_table(&Table::parse(&text)?)?,
        "s1p" => read_s1p(&text)?.to_spectrum()?,
        other => {
            return Err(invalid(format!(
                "{}: unknown record type `.{other}`, expected .s1p or .csv",
                path.display()
            )))
        }
    };
    Ok(spectrum)
}

fn parse_pair(text: &str, what: &str) -> Outcome<(f64, f64)> {
    let bad = || invalid(format!("{what} `{text}`: expected lo:hi"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_hex(text: &str) -> Outcome<u64> {
    let digits = text.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|_| invalid(format!("tag `{text}` is not hex")))
}

fn simulate(g: &GlobalArgs, a: &SimulateArgs) -> Outcome {
    let mut s = scenario(g, a.scenario.as_deref())?;
    if let Some(t) = a.temperature {
        s.environment.temperature = t;
    }
    if let Some(h) = a.field {
        s.environment.field = h;
    }
    let mut device = s.device();
    if let Some(tag) = &a.tag {
        let code = TagCode::from_bits(s.rfid, parse_hex(tag)?)?;
        device = encode(&code, &device)?;
    }
    let spectrum = synthesize_s11(&device, &s.environment, &s.grid, s.noise)?;
    if spectrum.grid_warning {
        eprintln!("warning: an echo's IDT main lobe extends past the frequency grid");
    }
    let notes = provenance(&s);

    let text = match a.out.as_deref().map(extension).as_deref() {
        Some("csv") => {
            let mut t = spectrum_table(&spectrum);
            t.comments = notes;
            t.to_csv()
        }
        Some("s1p") | None => {
            let mut record = TouchstoneRecord::from_spectrum(&spectrum);
            record.comments = notes;
            write_s1p(&record, a.format)
        }
        Some(other) => return Err(invalid(format!("--out: unknown extension `.{other}`"))),
    };
    write_output(a.out.as_deref(), &text)?;

    if let Some(path) = &a.time_out {
        let tr = to_time_domain(&spectrum, s.pipeline.zero_pad_factor)?;
        let mut t = Table::new(["time_s", "re", "im", "level_db"]);
        t.comments = provenance(&s);
        for (i, v) in tr.values.iter().enumerate() {
            t.push(vec![tr.time(i), v.re, v.im, tr.level_db(i).max(-300.0)]);
        }
        write_output(Some(path), &t.to_csv())?;
    }
    Ok(())
}

fn interrogate(g: &GlobalArgs, a: &InterrogateArgs) -> Outcome {
    let s = scenario(g, a.scenario.as_deref())?;
    let mut settings = s.pipeline;
    if let Some(n) = a.peaks {
        settings.peak_count = n;
    }
    if let Some(w) = a.gate_width {
        settings.gate_width = GateWidth::Fixed(w);
    }
    if let Some(f) = a.gate_fraction {
        settings.gate_width = GateWidth::SpacingFraction(f);
    }
    if let Some(t) = a.taper {
        settings.taper = t;
    }
    if let Some(z) = a.zero_pad {
        settings.zero_pad_factor = z;
    }
    settings.validate()?;

    let record = match &a.input {
        Some(p) => read_record(p)?,
        None => synthesize_s11(&s.device(), &s.environment, &s.grid, s.noise)?,
    };
    let reference = match &a.reference {
        Some(p) => read_record(p)?,
        None => record.clone(),
    };
    let interrogator = Interrogator::from_reference(&reference, settings)?;
    if !interrogator.complete {
        eprintln!(
            "warning: found {} of {} requested echoes",
            interrogator.gates.len(),
            settings.peak_count
        );
    }
    let tracked = interrogator.track(&record, &[])?;
    let mut t = Table::new(["peak_id", "gate_center_s", "f_zero_hz", "level_db"]);
    for p in tracked {
        t.push(vec![p.peak_id as f64, p.gate_center, p.f_zero, p.level_db]);
    }
    write_output(a.out.as_deref(), &t.to_csv())
}

fn read_sweep(path: &Path) -> Outcome<Vec<msaw_core::SweepRow>> {
    Ok(sweep_rows(&Table::parse(&read_text(path)?)?)?)
}

fn calibrate_cmd(a: &CalibrateArgs) -> Outcome {
    let rows = read_sweep(&a.input)?;
    let window = parse_pair(&a.window, "--window")?;
    let model = calibrate(&rows, window, a.magnetic_peak)?;
    let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    eprintln!(
        "tcf1 {} ppm/°C, tcf2 {} ppm/°C, peak {} slope {} ppm/mT ({} Hz/µT)",
        show(model.tcf1),
        show(model.tcf2),
        a.magnetic_peak,
        show(model.magnetic_slope),
        show(model.magnetic_hz_per_ut),
    );
    let mut json =
        serde_json::to_string_pretty(&model).map_err(|e| Failure::Processing(e.to_string()))?;
    json.push('\n');
    write_output(a.out.as_deref(), &json)
}

fn compensate_cmd(a: &CompensateArgs) -> Outcome {
    let rows = read_sweep(&a.input)?;
    let model: SensitivityModel = match &a.model {
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        None if a.tcf1.is_some() && a.tcf2.is_some() => SensitivityModel::default(),
        None => calibrate(&rows, (-0.19, 0.69), 2)?,
    };
    let tcf1 = a
        .tcf1
        .or(model.tcf1)
        .ok_or_else(|| invalid("tcf1 unavailable: pass --tcf1 or a model with tcf1"))?;
    let tcf2 = a
        .tcf2
        .or(model.tcf2)
        .ok_or_else(|| invalid("tcf2 unavailable: pass --tcf2 or a model with tcf2"))?;
    let rule = match a.reference {
        ReferenceArg::FirstRow => ReferenceRule::FirstRow,
        ReferenceArg::PerTemperature => ReferenceRule::FirstRowPerTemperature,
    };
    let points = compensate_sweep(&rows, tcf1, tcf2, rule)?;
    let t = compensated_table(&points).with_comment(format!("tcf1 {tcf1} tcf2 {tcf2}"));
    write_output(a.out.as_deref(), &t.to_csv())
}

fn decode_cmd(g: &GlobalArgs, a: &DecodeArgs) -> Outcome {
    let s = scenario(g, a.scenario.as_deref())?;
    let mut template = s.rfid;
    if let Some(n) = a.slots {
        template.slot_count = n;
    }
    if let Some(p) = a.pitch {
        template.slot_pitch = p;
    }
    if let Some(t0) = a.t0 {
        template.t0 = t0;
    }
    if let Some(guard) = a.guard {
        template.guard = guard;
    }
    template.validate()?;
    let record = read_record(&a.input)?;
    let tr = to_time_domain(&record, a.zero_pad)?;
    let code = decode(&tr, &template, a.threshold_db)?;
    write_output(None, &format!("{}\n", code.hex()))
}

fn vary_pairs(vary: &[String]) -> Vec<(&str, &str)> {
    vary.chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (c[0].as_str(), c[1].as_str()))
        .collect()
}

fn sweep(g: &GlobalArgs, a: &SweepArgs) -> Outcome {
    let mut s = scenario(g, a.scenario.as_deref())?;
    for (name, range) in vary_pairs(&a.vary) {
        let values = parse_range(range)?;
        match name {
            "temperature" => s.sweep.temperatures = values,
            "field" => s.sweep.fields = values,
            other => {
                return Err(invalid(format!(
                    "--vary: unknown variable `{other}`, expected temperature or field"
                )))
            }
        }
    }
    if let Some(d) = a.drift {
        s.sweep.drift = d;
    }
    if let Some(t) = a.ambient {
        s.sweep.ambient = t;
    }
    if let Some(p) = &a.peaks {
        s.sweep.peaks = p.clone();
    }
    s.sweep.validate()?;
    let rows = run_sweep(&s.sweep_config(), &s.sweep.points())?;
    let mut t = sweep_table(&rows);
    t.comments = provenance(&s);
    write_output(a.out.as_deref(), &t.to_csv())
}

fn disperse(g: &GlobalArgs, a: &DisperseArgs) -> Outcome {
    let s = scenario(g, a.scenario.as_deref())?;
    let pairs = vary_pairs(&a.vary);
    let (name, range) = match pairs.as_slice() {
        [one] => *one,
        _ => return Err(invalid("--vary NAME RANGE is required")),
    };
    let control = DisperseControl::from_str(name, true).map_err(|_| {
        invalid(format!(
            "--vary: unknown variable `{name}`, expected frequency, wavelength or thickness"
        ))
    })?;
    if a.modes == 0 {
        return Err(invalid("--modes must be >= 1"));
    }
    if control == DisperseControl::Thickness && a.layer >= s.stack.layers.len() {
        return Err(invalid(format!(
            "--layer {} outside the {}-layer stack",
            a.layer,
            s.stack.layers.len()
        )));
    }
    let mut settings = SolverSettings::default();
    if let Some(n) = a.grid_points {
        settings.grid_points = n;
    }
    let column = match control {
        DisperseControl::Frequency => "frequency_mhz",
        DisperseControl::Wavelength => "wavelength_um",
        DisperseControl::Thickness => "thickness_nm",
    };
    let mut t = Table::new([column, "mode_index", "phase_velocity_mps", "residual"]);
    for x in parse_range(range)? {
        let mut stack = s.stack.clone();
        let drive = match control {
            DisperseControl::Frequency => Drive::Frequency(x * 1e6),
            DisperseControl::Wavelength => Drive::Wavelength(x * 1e-6),
            DisperseControl::Thickness => {
                stack.layers[a.layer].thickness = x * 1e-9;
                Drive::Wavelength(s.geometry.wavelength)
            }
        };
        let problem = DispersionProblem::new(stack, drive)?;
        for m in solve_modes(&problem, a.modes, &settings)? {
            t.push(vec![x, m.mode_index as f64, m.phase_velocity, m.residual]);
        }
    }
    write_output(a.out.as_deref(), &t.to_csv())
}

fn magcurve(g: &GlobalArgs, a: &MagcurveArgs) -> Outcome {
    let s = scenario(g, a.scenario.as_deref())?;
    let fields = parse_range(&a.fields)?;
    let model = s.physics.magnetoelastic;
    let mut t = Table::new(["field_mt", "shift_ppm"]);
    for (h, ppm) in fields.iter().zip(model.field_sweep(&fields)) {
        t.push(vec![*h, ppm]);
    }
    write_output(a.out.as_deref(), &t.to_csv())
}

fn plot(a: &PlotArgs) -> Outcome {
    let table = Table::parse(&read_text(&a.input)?)?;
    let options = PlotOptions {
        title: a.title.clone(),
        x_label: a.x_label.clone(),
        y_label: a.y_label.clone(),
        x_range: a
            .x_range
            .as_deref()
            .map(|r| parse_pair(r, "--x-range"))
            .transpose()?,
        y_range: a
            .y_range
            .as_deref()
            .map(|r| parse_pair(r, "--y-range"))
            .transpose()?,
        peak: a.peak,
        column: a.column.clone(),
    };
    let svg = emit_plot(a.kind, &table, &options)?;
    write_output(a.out.as_deref(), &svg)
}

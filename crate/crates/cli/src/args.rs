use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msaw_core::io::DataFormat;

use crate::plot::PlotKind;

#[derive(Debug, Parser)]
#[command(
    name = "msaw",
    version,
    about = "Magnetic SAW delay-line sensor simulator and reader chain"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Noise seed; sweep point i uses seed + i [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Adds white noise at this SNR (dB, strongest echo to noise floor)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Reject unknown scenario keys instead of warning
    #[arg(long, global = true)]
    pub strict_config: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize S11 of the scenario's device
    Simulate(SimulateArgs),
    /// Gate each echo and report its zero-phase frequency
    Interrogate(InterrogateArgs),
    /// Fit TCFs and the magnetic slope from a sweep table
    Calibrate(CalibrateArgs),
    /// Temperature-compensate peak 2 with peak 1
    Compensate(CompensateArgs),
    /// Read the tag code of a record
    Decode(DecodeArgs),
    /// Simulate and track an environment sweep
    Sweep(SweepArgs),
    /// Love-mode phase velocity versus frequency, wavelength or thickness
    Disperse(DisperseArgs),
    /// Magnetoelastic shift versus field
    Magcurve(MagcurveArgs),
    /// Render a CSV table as SVG
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; built-in defaults when absent
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output path, .s1p or .csv; Touchstone on stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Touchstone data format: RI, MA or DB
    #[arg(long, default_value = "RI", value_parser = parse_format)]
    pub format: DataFormat,
    /// Also write the time-domain envelope (time_s, re, im, level_db)
    #[arg(long)]
    pub time_out: Option<PathBuf>,
    /// °C, overrides the scenario environment
    #[arg(long, allow_negative_numbers = true)]
    pub temperature: Option<f64>,
    /// mT, overrides the scenario environment
    #[arg(long, allow_negative_numbers = true)]
    pub field: Option<f64>,
    /// Tag code in hex (slot 0 = LSB) encoded with the scenario's slot template
    #[arg(long)]
    pub tag: Option<String>,
}

#[derive(Debug, Args)]
pub struct InterrogateArgs {
    /// Record to analyse, .s1p or .csv; simulated from the scenario when absent
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Scenario for pipeline settings (and the record when --input is absent)
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Record whose peaks fix the gates; the input itself when absent
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Number of echoes to gate
    #[arg(long)]
    pub peaks: Option<usize>,
    /// Fixed gate width, s
    #[arg(long, conflicts_with = "gate_fraction")]
    pub gate_width: Option<f64>,
    /// Gate width as a fraction of the spacing to the nearest echo
    #[arg(long)]
    pub gate_fraction: Option<f64>,
    /// Cosine taper fraction of the gate
    #[arg(long)]
    pub taper: Option<f64>,
    #[arg(long)]
    pub zero_pad: Option<usize>,
    /// CSV output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Sweep table (temperature_c, field_mt, peak_id, f_zero_hz)
    #[arg(long)]
    pub input: PathBuf,
    /// Linear field window lo:hi, mT
    #[arg(long, default_value = "-0.19:0.69", allow_hyphen_values = true)]
    pub window: String,
    /// Peak whose magnetic slope is fitted
    #[arg(long, default_value_t = 2)]
    pub magnetic_peak: u32,
    /// JSON output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ReferenceArg {
    FirstRow,
    PerTemperature,
}

#[derive(Debug, Args)]
pub struct CompensateArgs {
    /// Sweep table with peaks 1 and 2
    #[arg(long)]
    pub input: PathBuf,
    /// Sensitivity model JSON from `calibrate`; fitted from the input when absent
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// ppm/°C, overrides the model
    #[arg(long, allow_negative_numbers = true)]
    pub tcf1: Option<f64>,
    /// ppm/°C, overrides the model
    #[arg(long, allow_negative_numbers = true)]
    pub tcf2: Option<f64>,
    /// Which row supplies the reference frequencies
    #[arg(long, value_enum, default_value_t = ReferenceArg::FirstRow)]
    pub reference: ReferenceArg,
    /// CSV output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Record, .s1p or .csv
    #[arg(long)]
    pub input: PathBuf,
    /// Scenario whose `rfid` section is the slot template
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub slots: Option<usize>,
    /// Slot pitch, s
    #[arg(long)]
    pub pitch: Option<f64>,
    /// Delay of slot 0, s
    #[arg(long)]
    pub t0: Option<f64>,
    /// s
    #[arg(long)]
    pub guard: Option<f64>,
    /// Occupancy threshold relative to the strongest slot, dB
    #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
    pub threshold_db: f64,
    #[arg(long, default_value_t = 4)]
    pub zero_pad: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// `temperature RANGE` or `field RANGE`, RANGE = start:stop:step or a value
    #[arg(long, num_args = 2, value_names = ["NAME", "RANGE"], allow_hyphen_values = true, action = clap::ArgAction::Append)]
    pub vary: Vec<String>,
    /// Chuck drift over each field sweep, °C, directed toward ambient
    #[arg(long)]
    pub drift: Option<f64>,
    /// °C
    #[arg(long, allow_negative_numbers = true)]
    pub ambient: Option<f64>,
    /// Comma-separated peak ids to report
    #[arg(long, value_delimiter = ',')]
    pub peaks: Option<Vec<u32>>,
    /// CSV output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DisperseControl {
    /// MHz
    Frequency,
    /// µm
    Wavelength,
    /// Thickness of one layer, nm, at the scenario wavelength
    Thickness,
}

#[derive(Debug, Args)]
pub struct DisperseArgs {
    /// Scenario whose `stack` is solved
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Control variable and its range
    #[arg(long, num_args = 2, value_names = ["NAME", "RANGE"], allow_hyphen_values = true)]
    pub vary: Vec<String>,
    /// Layer varied by `thickness`, counted from the substrate
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
    /// Modes reported per point
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    /// Sign-scan points
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MagcurveArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Field range, mT
    #[arg(long, default_value = "-4:4:0.1", allow_hyphen_values = true)]
    pub fields: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// CSV table
    #[arg(long)]
    pub input: PathBuf,
    /// SVG output; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub x_label: Option<String>,
    #[arg(long)]
    pub y_label: Option<String>,
    /// lo:hi
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<String>,
    /// lo:hi
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: Option<String>,
    /// Only this peak (sweep plots)
    #[arg(long)]
    pub peak: Option<u32>,
    /// Value column of compensated_overlay
    #[arg(long)]
    pub column: Option<String>,
}

fn parse_format(s: &str) -> Result<DataFormat, String> {
    s.parse::<DataFormat>().map_err(|e| e.to_string())
}

//! JSON scenario documents. Every key is optional; `{}` is the default
//! sensor at 25 °C and −4 mT.

use serde::{Deserialize, Serialize};

use crate::device::{
    Device, DeviceGeometry, EchoSpec, EnvironmentState, FrequencyGrid, NoiseSpec, SensorPhysics,
};
use crate::dispersion::calibrated_default_stack;
use crate::error::{Error, Result};
use crate::materials::LayerStack;
use crate::pipeline::PipelineSettings;
use crate::rfid::SlotTemplate;
use crate::sweep::{chuck_drift, field_sweep_points, SweepConfig, SweepPoint};

/// Environment points of a sweep: every field for every temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    /// Setpoints, °C.
    pub temperatures: Vec<f64>,
    /// mT
    pub fields: Vec<f64>,
    /// Linear chuck drift over one field sweep, °C, directed toward ambient.
    pub drift: f64,
    /// °C
    pub ambient: f64,
    /// Peak ids to report.
    pub peaks: Vec<u32>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            temperatures: vec![25.0],
            fields: vec![-4.0],
            drift: 0.0,
            ambient: 21.0,
            peaks: vec![1, 2],
        }
    }
}

impl SweepSpec {
    pub fn points(&self) -> Vec<SweepPoint> {
        self.temperatures
            .iter()
            .flat_map(|&t| {
                field_sweep_points(t, &self.fields, chuck_drift(t, self.ambient, self.drift))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() || self.fields.is_empty() {
            return Err(Error::invalid(
                "temperatures",
                "sweep needs at least one point",
            ));
        }
        let finite = self
            .temperatures
            .iter()
            .chain(&self.fields)
            .chain([&self.drift, &self.ambient])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("values", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    /// Coated-path layer stack, used by the dispersion solver.
    pub stack: LayerStack,
    pub geometry: DeviceGeometry,
    /// Absent means the four echoes implied by `geometry`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echoes: Option<Vec<EchoSpec>>,
    pub physics: SensorPhysics,
    pub environment: EnvironmentState,
    pub sweep: SweepSpec,
    pub grid: FrequencyGrid,
    /// Absent means noise-free.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    pub pipeline: PipelineSettings,
    pub rfid: SlotTemplate,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            stack: calibrated_default_stack(),
            geometry: DeviceGeometry::default(),
            echoes: None,
            physics: SensorPhysics::default(),
            environment: EnvironmentState::default(),
            sweep: SweepSpec::default(),
            grid: FrequencyGrid::default(),
            noise: None,
            pipeline: PipelineSettings::default(),
            rfid: SlotTemplate::default(),
        }
    }
}

fn in_section(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => Error::Config {
            path: if name.starts_with(&format!("{section}.")) {
                name
            } else {
                format!("{section}.{name}")
            },
            message: reason,
        },
        Error::MaterialIncomplete(m) => Error::Config {
            path: section.to_string(),
            message: format!("material `{m}` has no shear stiffness"),
        },
        other => other,
    }
}

impl Scenario {
    pub fn device(&self) -> Device {
        Device {
            geometry: self.geometry.clone(),
            echoes: self
                .echoes
                .clone()
                .unwrap_or_else(|| self.geometry.default_echoes()),
            physics: self.physics,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            device: self.device(),
            grid: self.grid,
            pipeline: self.pipeline,
            noise: self.noise,
            reference_temperature: self.environment.reference_temperature,
            peaks: self.sweep.peaks.clone(),
        }
    }

    /// Errors are [`Error::Config`] with the offending key path.
    pub fn validate(&self) -> Result<()> {
        self.stack.validate().map_err(|e| in_section("stack", e))?;
        self.geometry
            .validate()
            .map_err(|e| in_section("geometry", e))?;
        for (i, e) in self.echoes.iter().flatten().enumerate() {
            e.validate()
                .map_err(|err| in_section(&format!("echoes[{i}]"), err))?;
        }
        self.physics
            .validate()
            .map_err(|e| in_section("physics", e))?;
        self.environment
            .validate()
            .map_err(|e| in_section("environment", e))?;
        self.sweep.validate().map_err(|e| in_section("sweep", e))?;
        self.grid.validate().map_err(|e| in_section("grid", e))?;
        if let Some(n) = self.noise {
            if !n.snr_db.is_finite() {
                return Err(in_section(
                    "noise",
                    Error::invalid("snr_db", "must be finite"),
                ));
            }
        }
        self.pipeline
            .validate()
            .map_err(|e| in_section("pipeline", e))?;
        self.rfid.validate().map_err(|e| in_section("rfid", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    /// Unknown keys, when loading leniently.
    pub warnings: Vec<String>,
}

/// Parses and validates a scenario. Unknown keys are errors when `strict`,
/// warnings otherwise.
pub fn load_scenario(text: &str, strict: bool) -> Result<LoadedScenario> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = {
        let mut record = |path: serde_ignored::Path| unknown.push(path.to_string());
        let tracked = serde_ignored::Deserializer::new(&mut de, &mut record);
        serde_path_to_error::deserialize(tracked).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?
    };
    de.end().map_err(|e| Error::Config {
        path: ".".into(),
        message: e.to_string(),
    })?;
    if strict {
        if let Some(path) = unknown.first() {
            return Err(Error::Config {
                path: path.clone(),
                message: "unknown key".into(),
            });
        }
    }
    scenario.validate()?;
    Ok(LoadedScenario {
        scenario,
        warnings: unknown
            .into_iter()
            .map(|p| format!("unknown key `{p}` ignored"))
            .collect(),
    })
}

pub fn dump_scenario(scenario: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    text.push('\n');
    text
}

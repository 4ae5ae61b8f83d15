//! Magnetic SAW (MSAW) reflective delay-line sensor: Love-wave dispersion,
//! ΔE-effect response, S₁₁ synthesis of a two-path connected-IDT device,
//! and the reader chain that turns S₁₁ records into temperature-compensated
//! magnetic field readings and RFID codes.

pub mod calib;
pub mod device;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod magnetics;
pub mod materials;
pub mod pipeline;
pub mod rfid;
pub mod sweep;

pub use calib::{CompensatedPoint, ReferenceRule, SensitivityModel, SweepRow};
pub use device::{
    Device, DeviceGeometry, EchoSpec, EnvironmentState, FrequencyGrid, NoiseSpec, PathKind,
    Segment, SensorPhysics, Spectrum,
};
pub use dispersion::{DispersionProblem, Drive, ModeSolution};
pub use error::{Error, Result};
pub use io::{Scenario, TouchstoneRecord};
pub use magnetics::MagnetoelasticModel;
pub use materials::{Layer, LayerStack, Material};
pub use pipeline::{Gate, PipelineSettings, TimeResponse, TrackedFrequency, WindowKind};
pub use rfid::{SlotTemplate, TagCode};
pub use sweep::{SweepConfig, SweepPoint};

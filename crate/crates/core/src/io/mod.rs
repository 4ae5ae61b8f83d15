//! External data formats: Touchstone one-port files, CSV tables and the JSON
//! scenario document.

pub mod scenario;
pub mod table;
pub mod touchstone;

pub use scenario::{dump_scenario, load_scenario, LoadedScenario, Scenario};
pub use table::{format_number, Table};
pub use touchstone::{read_s1p, write_s1p, DataFormat, FrequencyUnit, TouchstoneRecord};

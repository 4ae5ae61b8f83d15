//! Pulse-position identification codes carried by extra echoes.
//!
//! A code is a set of occupied slots on a fixed time template. Slot `k` sits
//! at delay `t0 + k·pitch`; an occupied slot gets one bare-path echo. The
//! sensing echoes 1 and 2 are kept, so a tag still measures temperature and
//! field while identifying itself.

use serde::{Deserialize, Serialize};

use crate::device::{echo_delay, Device, EchoSpec, EnvironmentState, Segment};
use crate::error::{Error, Result};
use crate::pipeline::TimeResponse;

/// Echo ids of the sensing paths, reserved on every tag.
pub const SENSING_ECHOES: [u32; 2] = [1, 2];

/// Echo id of slot 0; slot `k` uses `ID_ECHO_BASE + k`.
pub const ID_ECHO_BASE: u32 = 100;

/// Slot geometry without occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlotTemplate {
    pub slot_count: usize,
    /// s
    pub slot_pitch: f64,
    /// Delay of slot 0, s.
    pub t0: f64,
    /// s
    pub guard: f64,
    /// Level of each ID echo, dB.
    pub amplitude_db: f64,
}

impl Default for SlotTemplate {
    fn default() -> Self {
        SlotTemplate {
            slot_count: 6,
            slot_pitch: 120e-9,
            t0: 600e-9,
            guard: 25e-9,
            amplitude_db: -20.0,
        }
    }
}

impl SlotTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.slot_count == 0 || self.slot_count > 64 {
            return Err(Error::invalid("rfid.slot_count", "must be in 1..=64"));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::invalid("rfid.t0", "must be > 0"));
        }
        if !(self.guard >= 0.0 && self.guard.is_finite()) {
            return Err(Error::invalid("rfid.guard", "must be >= 0"));
        }
        if !(self.slot_pitch.is_finite() && self.slot_pitch > 2.0 * self.guard) {
            return Err(Error::invalid(
                "rfid.slot_pitch",
                "must exceed twice the guard",
            ));
        }
        if !self.amplitude_db.is_finite() {
            return Err(Error::invalid("rfid.amplitude_db", "must be finite"));
        }
        Ok(())
    }

    pub fn slot_delay(&self, k: usize) -> f64 {
        self.t0 + self.slot_pitch * k as f64
    }

    /// Decision window of slot `k`: `±(pitch/2 − guard)` around its delay.
    pub fn window(&self, k: usize) -> (f64, f64) {
        let half = self.slot_pitch / 2.0 - self.guard;
        let c = self.slot_delay(k);
        (c - half, c + half)
    }
}

/// Time extent `2N/f_c` of one echo.
pub fn echo_time_width(device: &Device, f_center: f64) -> f64 {
    2.0 * device.geometry.idt_pairs as f64 / f_center
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagCode {
    #[serde(flatten)]
    pub template: SlotTemplate,
    /// Ascending, unique.
    pub occupied: Vec<usize>,
}

impl TagCode {
    pub fn new(template: SlotTemplate, occupied: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut occupied: Vec<usize> = occupied.into_iter().collect();
        occupied.sort_unstable();
        occupied.dedup();
        let code = TagCode { template, occupied };
        code.validate()?;
        Ok(code)
    }

    /// Slot `k` is occupied iff bit `k` is set.
    pub fn from_bits(template: SlotTemplate, bits: u64) -> Result<Self> {
        TagCode::new(template, (0..64).filter(|k| bits >> k & 1 == 1))
    }

    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.occupied.is_empty() {
            return Err(Error::invalid(
                "rfid.occupied",
                "at least one slot must be occupied",
            ));
        }
        if let Some(&k) = self
            .occupied
            .iter()
            .find(|&&k| k >= self.template.slot_count)
        {
            return Err(Error::invalid(
                "rfid.occupied",
                format!("slot {k} outside 0..{}", self.template.slot_count),
            ));
        }
        Ok(())
    }

    pub fn bits(&self) -> u64 {
        self.occupied.iter().fold(0, |acc, &k| acc | 1 << k)
    }

    /// Occupancy bitmap as lowercase hex, slot 0 in the least significant bit.
    pub fn hex(&self) -> String {
        format!("0x{:x}", self.bits())
    }
}

/// `base` with its sensing echoes plus one echo per occupied slot. ID echoes
/// run on the bare path; lengths come from the nominal bare velocity.
pub fn encode(code: &TagCode, base: &Device) -> Result<Device> {
    code.validate()?;
    base.validate()?;
    let t = &code.template;
    let reference = EnvironmentState {
        temperature: 0.0,
        field: base.physics.magnetoelastic.h_ref,
        reference_temperature: 0.0,
    };
    let f_c = base.physics.v1_nominal / base.geometry.wavelength;
    let width = echo_time_width(base, f_c);
    let mut echoes: Vec<EchoSpec> = base
        .echoes
        .iter()
        .filter(|e| SENSING_ECHOES.contains(&e.id))
        .cloned()
        .collect();
    for sensing in &echoes {
        let tau = echo_delay(&base.geometry, &base.physics, sensing, &reference);
        for &k in &code.occupied {
            if (t.slot_delay(k) - tau).abs() < width + t.guard {
                return Err(Error::SlotCollision(format!(
                    "slot {k} at {:.1} ns overlaps sensing echo {} at {:.1} ns",
                    t.slot_delay(k) * 1e9,
                    sensing.id,
                    tau * 1e9
                )));
            }
        }
    }
    for &k in &code.occupied {
        let length = t.slot_delay(k) * base.physics.v1_nominal / base.geometry.wavelength;
        echoes.push(EchoSpec {
            id: ID_ECHO_BASE + k as u32,
            segments: vec![Segment::bare(length)],
            amplitude_db: t.amplitude_db,
            polarity: 1,
        });
    }
    Ok(Device {
        echoes,
        ..base.clone()
    })
}

/// Occupied slots of `tr`: slot `k` counts when the envelope maximum in its
/// window reaches `threshold_db` relative to the strongest slot.
pub fn decode(tr: &TimeResponse, template: &SlotTemplate, threshold_db: f64) -> Result<TagCode> {
    template.validate()?;
    if !(threshold_db < 0.0) {
        return Err(Error::invalid("threshold_db", "must be < 0"));
    }
    let (_, last) = template.window(template.slot_count - 1);
    if last > tr.time(tr.len() - 1) {
        return Err(Error::invalid(
            "rfid.slot_count",
            "template extends past the time record",
        ));
    }
    let levels: Vec<f64> = (0..template.slot_count)
        .map(|k| {
            let (a, b) = template.window(k);
            tr.max_in(a, b)
        })
        .collect();
    let strongest = levels.iter().cloned().fold(0.0, f64::max);
    if strongest == 0.0 {
        return Err(Error::NoTagDetected);
    }
    let floor = strongest * 10f64.powf(threshold_db / 20.0);
    TagCode::new(
        *template,
        levels
            .iter()
            .enumerate()
            .filter(|(_, &m)| m >= floor)
            .map(|(k, _)| k),
    )
}

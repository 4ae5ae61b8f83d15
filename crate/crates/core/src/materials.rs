//! Material constants and layered-stack descriptions.
//!
//! The builtin catalog carries the tabulated constants of the three materials
//! of the sensor (LiNbO₃ substrate, ZnO guiding layer, CoFeB magnetoelastic
//! film) exactly as tabulated, including entries known to disagree with
//! standard literature values. Those entries are flagged `as_printed`; the
//! effective shear stiffnesses used for dispersion are calibrated separately
//! (see [`crate::dispersion::calibrated_default_stack`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GPA: f64 = 1e9;

/// Elastic stiffness entries in Pa. Any entry may be absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stiffness {
    pub c11: Option<f64>,
    pub c12: Option<f64>,
    pub c13: Option<f64>,
    pub c33: Option<f64>,
    pub c44: Option<f64>,
    pub c66: Option<f64>,
}

/// Piezoelectric stress constants in C/m².
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Piezo {
    pub e15: Option<f64>,
    pub e16: Option<f64>,
    pub e31: Option<f64>,
    pub e33: Option<f64>,
}

/// Relative permittivities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Permittivity {
    pub eps11: Option<f64>,
    pub eps33: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// kg/m³
    pub density: f64,
    /// Effective shear-horizontal stiffness μ in Pa.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear_stiffness: Option<f64>,
    #[serde(default)]
    pub stiffness: Stiffness,
    #[serde(default)]
    pub piezo: Piezo,
    #[serde(default)]
    pub permittivity: Permittivity,
    /// Constants copied verbatim from the source table, not curated.
    #[serde(default)]
    pub as_printed: bool,
}

impl Material {
    /// An isotropic material described only by density and shear stiffness.
    pub fn isotropic(name: impl Into<String>, density: f64, shear_stiffness: f64) -> Self {
        Material {
            name: name.into(),
            density,
            shear_stiffness: Some(shear_stiffness),
            stiffness: Stiffness::default(),
            piezo: Piezo::default(),
            permittivity: Permittivity::default(),
            as_printed: false,
        }
    }

    pub fn with_shear_stiffness(mut self, mu: f64) -> Self {
        self.shear_stiffness = Some(mu);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::invalid(
                format!("{}.density", self.name),
                "must be finite and > 0",
            ));
        }
        if let Some(mu) = self.shear_stiffness {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::invalid(
                    format!("{}.shear_stiffness", self.name),
                    "must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    /// `sqrt(μ/ρ)` in m/s.
    pub fn shear_velocity(&self) -> Result<f64> {
        shear_velocity(self)
    }

    pub(crate) fn mu(&self) -> Result<f64> {
        self.shear_stiffness
            .ok_or_else(|| Error::MaterialIncomplete(self.name.clone()))
    }
}

/// Shear-wave velocity `sqrt(μ/ρ)` of a material.
pub fn shear_velocity(m: &Material) -> Result<f64> {
    let mu = m.mu()?;
    Ok((mu / m.density).sqrt())
}

/// A layer of finite thickness in a [`LayerStack`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: Material,
    /// m
    pub thickness: f64,
}

/// Layers listed from the substrate surface upward, over a half-space
/// substrate. An empty layer list is a bare substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub substrate: Material,
}

impl LayerStack {
    pub fn bare(substrate: Material) -> Self {
        LayerStack {
            layers: Vec::new(),
            substrate,
        }
    }

    pub fn with_layer(mut self, material: Material, thickness: f64) -> Self {
        self.layers.push(Layer {
            material,
            thickness,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.substrate.validate()?;
        self.substrate.mu()?;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.material.validate()?;
            layer.material.mu()?;
            if !(layer.thickness.is_finite() && layer.thickness > 0.0) {
                return Err(Error::invalid(
                    format!("layers[{i}].thickness"),
                    "must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn substrate_velocity(&self) -> Result<f64> {
        shear_velocity(&self.substrate)
    }

    /// Slowest shear velocity among the layers, `None` for a bare substrate.
    pub fn min_layer_velocity(&self) -> Result<Option<f64>> {
        let mut min: Option<f64> = None;
        for layer in &self.layers {
            let v = shear_velocity(&layer.material)?;
            min = Some(min.map_or(v, |m| m.min(v)));
        }
        Ok(min)
    }

    pub fn max_layer_velocity(&self) -> Result<Option<f64>> {
        let mut max: Option<f64> = None;
        for layer in &self.layers {
            let v = shear_velocity(&layer.material)?;
            max = Some(max.map_or(v, |m| m.max(v)));
        }
        Ok(max)
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Whether a guided (Love) solution can exist at all.
    pub fn supports_love_mode(&self) -> Result<bool> {
        let vs = self.substrate_velocity()?;
        Ok(matches!(self.min_layer_velocity()?, Some(v) if v < vs))
    }
}

/// The tabulated constants for the sensor materials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub materials: Vec<Material>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Option<&Material> {
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }
}

pub fn lithium_niobate() -> Material {
    Material {
        name: "LiNbO3".into(),
        density: 4700.0,
        shear_stiffness: None,
        stiffness: Stiffness {
            c11: Some(202.897 * GPA),
            c12: Some(529.177 * GPA),
            c13: Some(749.098 * GPA),
            c33: Some(243.075 * GPA),
            c44: Some(599.034 * GPA),
            c66: Some(748.772 * GPA),
        },
        piezo: Piezo {
            e15: Some(3.69594),
            e16: Some(-2.53384),
            e31: Some(0.193644),
            e33: Some(1.30863),
        },
        permittivity: Permittivity {
            eps11: Some(43.6),
            eps33: Some(29.16),
        },
        as_printed: true,
    }
}

pub fn zinc_oxide() -> Material {
    Material {
        name: "ZnO".into(),
        density: 5680.0,
        shear_stiffness: None,
        stiffness: Stiffness {
            c11: Some(209.14 * GPA),
            c12: Some(121.14 * GPA),
            c13: Some(105.359 * GPA),
            c33: Some(211.194 * GPA),
            c44: Some(423.729 * GPA),
            c66: Some(442.478 * GPA),
        },
        piezo: Piezo {
            e15: Some(-0.48),
            e16: None,
            e31: Some(-0.56),
            e33: Some(1.32),
        },
        permittivity: Permittivity {
            eps11: Some(8.54),
            eps33: Some(10.204),
        },
        as_printed: true,
    }
}

/// CoFeB; shear stiffness defaults to the isotropic reduction (C11 − C12)/2.
pub fn cobalt_iron_boron() -> Material {
    let c11 = 257.0 * GPA;
    let c12 = 162.0 * GPA;
    Material {
        name: "CoFeB".into(),
        density: 8000.0,
        shear_stiffness: Some((c11 - c12) / 2.0),
        stiffness: Stiffness {
            c11: Some(c11),
            c12: Some(c12),
            c13: None,
            c33: Some(105.0 * GPA),
            c44: None,
            c66: None,
        },
        piezo: Piezo::default(),
        permittivity: Permittivity::default(),
        as_printed: true,
    }
}

pub fn builtin_materials() -> Catalog {
    Catalog {
        materials: vec![lithium_niobate(), zinc_oxide(), cobalt_iron_boron()],
    }
}

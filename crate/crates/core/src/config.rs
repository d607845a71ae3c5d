//! Run configuration: a JSON tree with `geometry`, `kinematics`,
//! `viscosity`, optional `solver`, `variants` and `output_dir`.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coupling::SolverConfig;
use crate::error::{Error, Result};
use crate::geometry::{CylinderPlaneGeometry, Kinematics};
use crate::reynolds::{ModelVariant, Problem};
use crate::viscosity::{ViscosityModel, ROELANDS_MU_R, ROELANDS_P_R};

/// Above this pressure-viscosity coefficient (1/Pa) a unit mistake is likely.
pub const ALPHA_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Cylinder radius, m.
    #[serde(rename = "R")]
    pub radius: f64,
    /// Minimum film thickness, m.
    pub h0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsConfig {
    /// Plane speed, m/s.
    #[serde(rename = "U0")]
    pub u0: f64,
    /// Cylinder surface speed, m/s.
    #[serde(rename = "Uh")]
    pub uh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViscosityKind {
    Constant,
    Barus,
    Roelands,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscosityConfig {
    pub kind: ViscosityKind,
    /// Ambient viscosity, Pa s.
    pub mu0: f64,
    /// Pressure-viscosity coefficient, 1/Pa.
    #[serde(default)]
    pub alpha: f64,
    #[serde(rename = "mu_R", default, skip_serializing_if = "Option::is_none")]
    pub mu_r: Option<f64>,
    #[serde(rename = "p_R", default, skip_serializing_if = "Option::is_none")]
    pub p_r: Option<f64>,
}

impl ViscosityConfig {
    pub fn model(&self) -> Result<ViscosityModel> {
        let model = match self.kind {
            ViscosityKind::Constant => ViscosityModel::constant(self.mu0),
            ViscosityKind::Barus => ViscosityModel::barus(self.mu0, self.alpha),
            ViscosityKind::Roelands => ViscosityModel::roelands(
                self.mu0,
                self.alpha,
                self.mu_r.unwrap_or(ROELANDS_MU_R),
                self.p_r.unwrap_or(ROELANDS_P_R),
            ),
        };
        model.map_err(|e| scoped("viscosity", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub kinematics: KinematicsConfig,
    pub viscosity: ViscosityConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "all_variants")]
    pub variants: Vec<ModelVariant>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn all_variants() -> Vec<ModelVariant> {
    ModelVariant::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Side information gathered while loading.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigNotes {
    /// `key = value` for every default that was filled in.
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
}

fn scoped(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            Error::Config(format!("{section}.{name}: {reason}"))
        }
        e => e,
    }
}

const TOP_KEYS: &[&str] = &[
    "geometry",
    "kinematics",
    "viscosity",
    "solver",
    "variants",
    "output_dir",
];
const SECTIONS: &[(&str, &[&str])] = &[
    ("geometry", &["R", "h0"]),
    ("kinematics", &["U0", "Uh"]),
    ("viscosity", &["kind", "mu0", "alpha", "mu_R", "p_R"]),
    (
        "solver",
        &[
            "N_theta",
            "M_y",
            "outer_iterations",
            "pressure_tol",
            "outer_tol",
            "velocity_tol",
            "theta2_tol",
            "slope_tol",
            "max_fixed_point",
            "max_velocity_iter",
            "ellipticity_floor",
            "rhs_velocity_sum",
            "relaxation",
        ],
    ),
];

fn suggestion(key: &str, known: &[&str]) -> String {
    known
        .iter()
        .map(|k| (k, strsim::damerau_levenshtein(key, k)))
        .filter(|(k, d)| *d <= (k.len() / 3).max(1))
        .min_by_key(|(_, d)| *d)
        .map(|(k, _)| format!("; did you mean `{k}`?"))
        .unwrap_or_default()
}

fn check_keys(map: &serde_json::Map<String, Value>, known: &[&str], scope: &str) -> Result<()> {
    for key in map.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown key `{scope}{key}`{}",
                suggestion(key, known)
            )));
        }
    }
    Ok(())
}

fn check_schema(tree: &Value) -> Result<()> {
    let top = tree
        .as_object()
        .ok_or_else(|| Error::Config("top level must be an object".into()))?;
    check_keys(top, TOP_KEYS, "")?;
    for (section, known) in SECTIONS {
        match top.get(*section) {
            Some(Value::Object(map)) => check_keys(map, known, &format!("{section}."))?,
            Some(_) => return Err(Error::Config(format!("`{section}` must be an object"))),
            None => {}
        }
    }
    for required in ["geometry", "kinematics", "viscosity"] {
        if !top.contains_key(required) {
            return Err(Error::Config(format!(
                "missing required section `{required}`"
            )));
        }
    }
    Ok(())
}

fn applied_defaults(tree: &Value, config: &RunConfig) -> Result<Vec<String>> {
    let filled = serde_json::to_value(config)?;
    let mut applied = Vec::new();
    for key in ["variants", "output_dir"] {
        if tree.get(key).is_none() {
            applied.push(format!("{key} = {}", filled[key]));
        }
    }
    let (_, solver_keys) = SECTIONS[3];
    for key in solver_keys {
        if tree.get("solver").and_then(|s| s.get(*key)).is_none() {
            applied.push(format!("solver.{key} = {}", filled["solver"][*key]));
        }
    }
    let visc = &tree["viscosity"];
    if visc.get("alpha").is_none() {
        applied.push("viscosity.alpha = 0.0".into());
    }
    if config.viscosity.kind == ViscosityKind::Roelands {
        if visc.get("mu_R").is_none() {
            applied.push(format!("viscosity.mu_R = {ROELANDS_MU_R:?}"));
        }
        if visc.get("p_R").is_none() {
            applied.push(format!("viscosity.p_R = {ROELANDS_P_R:?}"));
        }
    }
    Ok(applied)
}

impl RunConfig {
    /// Parses and validates a configuration from JSON text.
    pub fn from_json_str(text: &str) -> Result<(Self, ConfigNotes)> {
        let tree: Value = serde_json::from_str(text)?;
        check_schema(&tree)?;
        let config: RunConfig =
            serde_json::from_value(tree.clone()).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        let mut notes = ConfigNotes {
            defaults_applied: applied_defaults(&tree, &config)?,
            warnings: Vec::new(),
        };
        if config.viscosity.alpha > ALPHA_WARNING {
            let w = format!(
                "viscosity.alpha = {:e} 1/Pa exceeds {ALPHA_WARNING:e}; check units",
                config.viscosity.alpha
            );
            warn!("{w}");
            notes.warnings.push(w);
        }
        Ok((config, notes))
    }

    pub fn validate(&self) -> Result<()> {
        self.problem()?;
        self.solver.validate().map_err(|e| scoped("solver", e))?;
        if self.variants.is_empty() {
            return Err(Error::Config(
                "variants: at least one variant required".into(),
            ));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            geometry: CylinderPlaneGeometry::new(self.geometry.radius, self.geometry.h0)
                .map_err(|e| scoped("geometry", e))?,
            kinematics: Kinematics::new(self.kinematics.u0, self.kinematics.uh)
                .map_err(|e| scoped("kinematics", e))?,
            viscosity: self.viscosity.model()?,
        })
    }
}

pub fn load_config_with_notes(path: &Path) -> Result<(RunConfig, ConfigNotes)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json_str(&text)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_config_with_notes(path).map(|(c, _)| c)
}

//! CSV and JSON artifacts.
//!
//! Numbers are written in shortest round-trip scientific notation, so the
//! files are reproducible bit for bit. Fields are reported on the full window
//! `[-pi/2, pi/2]` with the pressure set to zero past `theta2`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigNotes, RunConfig};
use crate::coupling::{OuterSolution, RunSummary, VelocityField};
use crate::error::{Error, Result};
use crate::reynolds::{ModelVariant, PressureSolution, Problem, INLET_ANGLE};
use std::f64::consts::FRAC_PI_2;

pub const PRESSURE_CSV: &str = "pressure.csv";
pub const VISCOSITY_CSV: &str = "viscosity.csv";
pub const VELOCITY_CSV: &str = "velocity.csv";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const REPORT_JSON: &str = "report.json";

fn num(out: &mut String, x: f64) {
    write!(out, "{x:e}").unwrap();
}

/// Writes through a temporary file in the same directory and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Mesh nodes followed by nodes continuing at the same spacing up to `pi/2`.
pub fn full_window_angles(solution: &PressureSolution) -> Vec<f64> {
    let mesh = solution.mesh();
    let mut thetas = mesh.node_coords();
    let step = mesh.spacing();
    let last = solution.theta2();
    if last < FRAC_PI_2 {
        let mut k = 1;
        loop {
            let t = last + k as f64 * step;
            if t >= FRAC_PI_2 - 0.5 * step {
                break;
            }
            thetas.push(t);
            k += 1;
        }
        thetas.push(FRAC_PI_2);
    }
    thetas
}

fn full_window_pressure(solution: &PressureSolution) -> Vec<(f64, f64)> {
    let values = solution.pressure().values();
    full_window_angles(solution)
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, values.get(i).copied().unwrap_or(0.0)))
        .collect()
}

/// `theta_rad,p_Pa,mu_Pas`
pub fn pressure_csv(problem: &Problem, solution: &PressureSolution) -> Result<String> {
    let model = problem.effective_viscosity(solution.variant());
    let mut out = String::from("theta_rad,p_Pa,mu_Pas\n");
    for (t, p) in full_window_pressure(solution) {
        num(&mut out, t);
        out.push(',');
        num(&mut out, p);
        out.push(',');
        num(&mut out, model.mu(p)?);
        out.push('\n');
    }
    Ok(out)
}

/// `theta_rad,mu_Pas,mu_over_mu0`
pub fn viscosity_csv(problem: &Problem, solution: &PressureSolution) -> Result<String> {
    let model = problem.effective_viscosity(solution.variant());
    let mut out = String::from("theta_rad,mu_Pas,mu_over_mu0\n");
    for (t, p) in full_window_pressure(solution) {
        let mu = model.mu(p)?;
        num(&mut out, t);
        out.push(',');
        num(&mut out, mu);
        out.push(',');
        num(&mut out, mu / model.mu0());
        out.push('\n');
    }
    Ok(out)
}

/// `theta_rad,y_m,u_mps`, stations outer, film nodes inner.
pub fn velocity_csv(field: &VelocityField) -> String {
    let mut out = String::from("theta_rad,y_m,u_mps\n");
    for profile in field.profiles() {
        for (y, u) in profile
            .mesh()
            .node_coords()
            .into_iter()
            .zip(profile.values())
        {
            num(&mut out, profile.theta());
            out.push(',');
            num(&mut out, y);
            out.push(',');
            num(&mut out, *u);
            out.push('\n');
        }
    }
    out
}

/// `iteration,l2_diff_Pa,theta2_rad,p_max_Pa`; the first iteration has no
/// difference and leaves that column empty.
pub fn convergence_csv(summary: &RunSummary) -> String {
    let mut out = String::from("iteration,l2_diff_Pa,theta2_rad,p_max_Pa\n");
    for (k, (t, p)) in summary
        .theta2_history
        .iter()
        .zip(&summary.p_max_history)
        .enumerate()
    {
        write!(out, "{},", k + 1).unwrap();
        if k > 0 {
            num(&mut out, summary.diff_history[k - 1]);
        }
        out.push(',');
        num(&mut out, *t);
        out.push(',');
        num(&mut out, *p);
        out.push('\n');
    }
    out
}

/// `theta_rad` on a uniform grid of `elements` over `[-pi/2, pi/2]`, then one
/// pressure column per entry, linearly interpolated and zero past `theta2`.
pub fn comparison_csv(columns: &[(String, &PressureSolution)], elements: usize) -> String {
    let mut out = String::from("theta_rad");
    for (name, _) in columns {
        write!(out, ",p_{name}_Pa").unwrap();
    }
    out.push('\n');
    let step = (FRAC_PI_2 - INLET_ANGLE) / elements as f64;
    for i in 0..=elements {
        let t = if i == elements {
            FRAC_PI_2
        } else {
            INLET_ANGLE + i as f64 * step
        };
        num(&mut out, t);
        for (_, sol) in columns {
            out.push(',');
            num(&mut out, sol.pressure().eval_or_zero(t));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// Contents of `report.json` for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: ModelVariant,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub artifacts: Vec<String>,
    pub config: RunConfig,
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(variant: ModelVariant, config: &RunConfig, notes: &ConfigNotes) -> Self {
        Self {
            variant,
            result: None,
            error: None,
            artifacts: Vec::new(),
            config: config.clone(),
            defaults_applied: notes.defaults_applied.clone(),
            warnings: notes.warnings.clone(),
        }
    }
}

/// Writes the field CSVs of a finished run into `dir` and returns their
/// names. `velocity.csv` is written when a velocity field exists.
pub fn write_fields(
    dir: &Path,
    problem: &Problem,
    solution: &OuterSolution,
) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        write_atomic(&dir.join(name), text.as_bytes())?;
        written.push(name.to_string());
        Ok(())
    };
    put(PRESSURE_CSV, pressure_csv(problem, &solution.pressure)?)?;
    put(VISCOSITY_CSV, viscosity_csv(problem, &solution.pressure)?)?;
    if let Some(field) = &solution.velocity {
        put(VELOCITY_CSV, velocity_csv(field))?;
    }
    put(CONVERGENCE_CSV, convergence_csv(&solution.summary))?;
    Ok(written)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

//! Cross-film velocity at a single angular station.
//!
//! The along-channel velocity `u(y)` on `0 <= y <= h` satisfies
//!
//! ```text
//! mu u'' + alpha^2 mu^2 (dp/dx) (u')^2 = dp/dx,   u(0) = U0,  u(h) = Uh
//! ```
//!
//! in dimensional variables. With `alpha = 0` this is plane Couette-Poiseuille
//! flow. The nonlinear problem is solved by lagging `(u')^2` in the load and
//! solving the resulting linear problem with P1 elements until successive
//! iterates agree.

use log::warn;

use crate::error::{Error, Result};
use crate::fem1d::{self, NodalField, UniformMesh};
use crate::geometry::Kinematics;

/// Local data of one station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station {
    pub theta: f64,
    /// Film thickness, m.
    pub h: f64,
    /// Local viscosity, Pa s.
    pub mu: f64,
    /// Local `(1/mu) dmu/dp`, Pa^-1.
    pub alpha: f64,
    /// Pressure gradient along the film, Pa/m.
    pub dpdx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySettings {
    pub elements: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VelocitySettings {
    fn default() -> Self {
        Self {
            elements: 50,
            tol: 1e-13,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    theta: f64,
    field: NodalField,
}

impl VelocityProfile {
    pub fn new(theta: f64, field: NodalField) -> Result<Self> {
        if field.mesh().left() != 0.0 {
            return Err(Error::FieldMismatch(
                "velocity mesh must start at y = 0".into(),
            ));
        }
        Ok(Self { theta, field })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Film thickness the profile spans.
    pub fn h(&self) -> f64 {
        self.field.mesh().right()
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.field.mesh()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn field(&self) -> &NodalField {
        &self.field
    }

    /// Element-wise `du/dy`.
    pub fn shear_rates(&self) -> Vec<f64> {
        fem1d::gradient(&self.field)
    }
}

fn check_station(station: &Station, elements: usize) -> Result<()> {
    if !(station.h.is_finite() && station.h > 0.0) {
        return Err(Error::invalid(
            "h",
            format!("film thickness must be > 0, got {}", station.h),
        ));
    }
    if !(station.mu.is_finite() && station.mu > 0.0) {
        return Err(Error::invalid(
            "mu",
            format!("viscosity must be > 0, got {}", station.mu),
        ));
    }
    if !station.dpdx.is_finite() || !station.alpha.is_finite() {
        return Err(Error::invalid(
            "dpdx",
            "pressure gradient and alpha must be finite",
        ));
    }
    if elements < 2 {
        return Err(Error::invalid(
            "M_y",
            "need at least 2 elements across the film",
        ));
    }
    Ok(())
}

/// Closed-form isoviscous profile
/// `U0 + (Uh - U0) y/h + y (y - h) dp/dx / (2 mu)` sampled on a uniform mesh.
pub fn couette_poiseuille(
    station: &Station,
    kin: &Kinematics,
    elements: usize,
) -> Result<VelocityProfile> {
    check_station(station, elements)?;
    let mesh = UniformMesh::new(0.0, station.h, elements)?;
    let Station { h, mu, dpdx, .. } = *station;
    let mut values: Vec<f64> = mesh
        .node_coords()
        .into_iter()
        .map(|y| kin.u0 + (kin.uh - kin.u0) * (y / h) + y * (y - h) / (2.0 * mu) * dpdx)
        .collect();
    values[0] = kin.u0;
    values[elements] = kin.uh;
    VelocityProfile::new(station.theta, NodalField::new(mesh, values)?)
}

fn rms(values: &[f64], mesh: &UniformMesh) -> f64 {
    NodalField::new(*mesh, values.to_vec())
        .map(|f| f.l2_norm() / mesh.right().sqrt())
        .unwrap_or(f64::INFINITY)
}

fn lagged_load(station: &Station, shear: &[f64]) -> Vec<f64> {
    let k = station.alpha * station.alpha * station.mu * station.mu;
    shear
        .iter()
        .map(|g| station.dpdx * (1.0 - k * g * g))
        .collect()
}

/// Fixed-point solution of the nonlinear cross-film problem.
///
/// Starts from the Couette-Poiseuille profile and stops when the RMS change
/// between iterates drops below `tol * max(1, rms(u))` (m/s).
pub fn solve_velocity_profile(
    station: &Station,
    kin: &Kinematics,
    settings: &VelocitySettings,
) -> Result<VelocityProfile> {
    let mut current = couette_poiseuille(station, kin, settings.elements)?;
    if station.alpha == 0.0 || station.dpdx == 0.0 {
        return Ok(current);
    }
    let mesh = *current.mesh();
    let coeff = vec![station.mu; settings.elements];
    let mut last_change = f64::INFINITY;
    for iter in 0..settings.max_iter {
        let load = lagged_load(station, &current.shear_rates());
        if load.iter().any(|f| !f.is_finite()) {
            break;
        }
        let Ok(next) = fem1d::solve_with_element_data(&mesh, &coeff, &load, kin.u0, kin.uh) else {
            break;
        };
        let delta: Vec<f64> = next
            .values()
            .iter()
            .zip(current.values())
            .map(|(a, b)| a - b)
            .collect();
        let change = rms(&delta, &mesh);
        let scale = rms(current.values(), &mesh).max(1.0);
        if !change.is_finite() {
            break;
        }
        if iter > 1 && change > last_change {
            warn!(
                "velocity fixed point at theta = {:e}: change grew from {:e} to {:e}",
                station.theta, last_change, change
            );
        }
        current = VelocityProfile::new(station.theta, next)?;
        last_change = change;
        if change < settings.tol * scale {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence {
        what: format!("velocity profile at theta = {:e}", station.theta),
        iterations: settings.max_iter,
        residual: last_change,
    })
}

/// Interior residual of the discrete weak form, expressed as an equivalent
/// nodal velocity (residual force divided by the element stiffness `mu/dy`).
pub fn weak_residual(profile: &VelocityProfile, station: &Station) -> f64 {
    let mesh = profile.mesh();
    let dy = mesh.spacing();
    let load = lagged_load(station, &profile.shear_rates());
    let u = profile.values();
    let mut worst: f64 = 0.0;
    for i in 1..mesh.elements() {
        let stiffness = station.mu / dy * (2.0 * u[i] - u[i - 1] - u[i + 1]);
        let force = 0.5 * dy * (load[i - 1] + load[i]);
        worst = worst.max(((stiffness + force) * dy / station.mu).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backflow {
    pub present: bool,
    /// Largest `y` with `u < 0`, or 0.
    pub y_extent: f64,
}

pub fn detect_backflow(profile: &VelocityProfile) -> Backflow {
    let mesh = profile.mesh();
    let last_negative = profile.values().iter().rposition(|&u| u < 0.0);
    match last_negative {
        Some(i) => Backflow {
            present: true,
            y_extent: mesh.node(i),
        },
        None => Backflow {
            present: false,
            y_extent: 0.0,
        },
    }
}

//! Outer iteration coupling the pressure equation and the cross-film
//! velocity:
//!
//! 1. solve for `(p, theta2)` with the shear integral of the previous
//!    velocity field (none on the first pass, giving the piezoviscous
//!    problem);
//! 2. solve the velocity problem at every pressure node in `[-pi/2, theta2]`,
//!    in parallel;
//! 3. interpolate the new field linearly in `theta` and repeat.

use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem1d::{self, NodalField};
use crate::geometry::{CylinderPlaneGeometry, Kinematics};
use crate::reynolds::{find_theta2, ModelVariant, PressureSolution, Problem};
use crate::velocity::{self, Station, VelocityProfile, VelocitySettings};

/// Discretization and iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Elements on `[-pi/2, theta2]`.
    #[serde(rename = "N_theta")]
    pub n_theta: usize,
    /// Elements across the film.
    #[serde(rename = "M_y")]
    pub m_y: usize,
    pub outer_iterations: usize,
    /// Relative L2 change ending the pressure fixed point.
    pub pressure_tol: f64,
    /// The outer loop stops early once `||p_k - p_{k-1}|| < outer_tol * p_max`;
    /// zero runs all `outer_iterations` passes.
    pub outer_tol: f64,
    pub velocity_tol: f64,
    /// Bisection bracket width on `theta2`, rad.
    pub theta2_tol: f64,
    /// Exit slope accepted as zero, Pa/rad.
    pub slope_tol: f64,
    pub max_fixed_point: usize,
    pub max_velocity_iter: usize,
    pub ellipticity_floor: f64,
    /// Forces `Uh + U0` (true) or `Uh - U0` (false) in the source term for
    /// every variant.
    pub rhs_velocity_sum: Option<bool>,
    /// Under-relaxation of the velocity field between outer iterations.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_theta: 10_000,
            m_y: 50,
            outer_iterations: 9,
            pressure_tol: 1e-12,
            outer_tol: 0.0,
            velocity_tol: 1e-13,
            theta2_tol: 1e-15,
            slope_tol: 1e-6,
            max_fixed_point: 1000,
            max_velocity_iter: 200,
            ellipticity_floor: 0.0,
            rhs_velocity_sum: None,
            relaxation: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("N_theta", self.n_theta, 2),
            ("M_y", self.m_y, 2),
            ("outer_iterations", self.outer_iterations, 1),
            ("max_fixed_point", self.max_fixed_point, 1),
            ("max_velocity_iter", self.max_velocity_iter, 1),
        ];
        for (name, value, min) in counts {
            if value < min {
                return Err(Error::invalid(
                    name,
                    format!("must be >= {min}, got {value}"),
                ));
            }
        }
        let tolerances = [
            ("pressure_tol", self.pressure_tol),
            ("velocity_tol", self.velocity_tol),
            ("theta2_tol", self.theta2_tol),
            ("slope_tol", self.slope_tol),
        ];
        for (name, value) in tolerances {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !(self.outer_tol.is_finite() && self.outer_tol >= 0.0) {
            return Err(Error::invalid(
                "outer_tol",
                format!("must be finite and >= 0, got {}", self.outer_tol),
            ));
        }
        if !self.ellipticity_floor.is_finite() {
            return Err(Error::invalid("ellipticity_floor", "must be finite"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid(
                "relaxation",
                format!("must lie in (0, 1], got {}", self.relaxation),
            ));
        }
        Ok(())
    }

    pub fn velocity_settings(&self) -> VelocitySettings {
        VelocitySettings {
            elements: self.m_y,
            tol: self.velocity_tol,
            max_iter: self.max_velocity_iter,
        }
    }
}

/// Velocity profiles at increasing angular stations, interpolated linearly
/// in `theta` on the normalized film coordinate `y / h`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    stations: Vec<f64>,
    profiles: Vec<VelocityProfile>,
    geometry: CylinderPlaneGeometry,
    kinematics: Kinematics,
    /// `du/d(y/h)` per element, station-major.
    eta_gradients: Vec<f64>,
    /// `int y/h (1 - y/h) d(y/h)` per element.
    eta_weights: Vec<f64>,
}

impl VelocityField {
    pub fn new(
        profiles: Vec<VelocityProfile>,
        geometry: CylinderPlaneGeometry,
        kinematics: Kinematics,
    ) -> Result<Self> {
        if profiles.len() < 2 {
            return Err(Error::FieldMismatch(
                "a velocity field needs at least two stations".into(),
            ));
        }
        let m = profiles[0].mesh().elements();
        if profiles.iter().any(|p| p.mesh().elements() != m) {
            return Err(Error::FieldMismatch(
                "profiles differ in element count".into(),
            ));
        }
        let stations: Vec<f64> = profiles.iter().map(|p| p.theta()).collect();
        if stations.windows(2).any(|w| w[1] <= w[0] || w[1].is_nan()) {
            return Err(Error::FieldMismatch(
                "stations must be strictly increasing".into(),
            ));
        }
        let eta_gradients = profiles
            .iter()
            .flat_map(|p| {
                p.values()
                    .windows(2)
                    .map(|w| (w[1] - w[0]) * m as f64)
                    .collect::<Vec<_>>()
            })
            .collect();
        let eta_weights = (0..m)
            .map(|e| {
                let (a, b) = (e as f64 / m as f64, (e + 1) as f64 / m as f64);
                (b * b - a * a) / 2.0 - (b * b * b - a * a * a) / 3.0
            })
            .collect();
        Ok(Self {
            stations,
            profiles,
            geometry,
            kinematics,
            eta_gradients,
            eta_weights,
        })
    }

    pub fn stations(&self) -> &[f64] {
        &self.stations
    }

    pub fn profiles(&self) -> &[VelocityProfile] {
        &self.profiles
    }

    pub fn elements(&self) -> usize {
        self.eta_weights.len()
    }

    /// Index `i` and weight `t` with `theta = (1 - t) s_i + t s_{i+1}`.
    fn locate(&self, theta: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.stations[0], *self.stations.last().unwrap());
        if !(theta >= lo && theta <= hi) {
            return Err(Error::OutOfRange { theta, lo, hi });
        }
        let i = self
            .stations
            .partition_point(|&s| s <= theta)
            .clamp(1, self.stations.len() - 1)
            - 1;
        let (a, b) = (self.stations[i], self.stations[i + 1]);
        Ok((i, (theta - a) / (b - a)))
    }

    /// The shear integral `int_0^h y (h - y) (du/dy)^2 dy` of the
    /// interpolated profile at `theta`, with film thickness `h`.
    ///
    /// Past the last station the profile continues as plane Couette flow.
    pub fn shear_integral(&self, theta: f64, h: f64) -> Result<f64> {
        if theta > *self.stations.last().unwrap() {
            let du = self.kinematics.uh - self.kinematics.u0;
            return Ok(h * du * du / 6.0);
        }
        let (i, t) = self.locate(theta)?;
        let m = self.elements();
        let ga = &self.eta_gradients[i * m..(i + 1) * m];
        let gb = &self.eta_gradients[(i + 1) * m..(i + 2) * m];
        let sum: f64 = ga
            .iter()
            .zip(gb)
            .zip(&self.eta_weights)
            .map(|((a, b), w)| {
                let g = a + t * (b - a);
                g * g * w
            })
            .sum();
        Ok(h * sum)
    }

    /// Nodal blend of the bracketing profiles on `y/h`, rescaled to
    /// `[0, h(theta)]`.
    pub fn interpolate(&self, theta: f64) -> Result<VelocityProfile> {
        let (i, t) = self.locate(theta)?;
        if t == 0.0 {
            return Ok(self.profiles[i].clone());
        }
        if t == 1.0 {
            return Ok(self.profiles[i + 1].clone());
        }
        let (a, b) = (self.profiles[i].values(), self.profiles[i + 1].values());
        let values = a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect();
        let mesh =
            fem1d::UniformMesh::new(0.0, self.geometry.film_thickness(theta), self.elements())?;
        VelocityProfile::new(theta, NodalField::new(mesh, values)?)
    }
}

pub fn interpolate_velocity(field: &VelocityField, theta: f64) -> Result<VelocityProfile> {
    field.interpolate(theta)
}

/// Nodal `dp/dx`: element gradients converted at their midpoints, averaged
/// at interior nodes and one-sided at the ends.
pub fn nodal_pressure_gradient(
    geometry: &CylinderPlaneGeometry,
    pressure: &NodalField,
) -> Result<Vec<f64>> {
    let mesh = pressure.mesh();
    let per_element = fem1d::gradient(pressure)
        .into_iter()
        .enumerate()
        .map(|(e, g)| Ok(g * geometry.dtheta_dx(mesh.midpoint(e))?))
        .collect::<Result<Vec<f64>>>()?;
    let n = mesh.nodes();
    let mut nodal = Vec::with_capacity(n);
    nodal.push(per_element[0]);
    nodal.extend(per_element.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    nodal.push(per_element[n - 2]);
    Ok(nodal)
}

/// Solves the cross-film problem at every node of the pressure mesh.
///
/// Stations are independent; the map runs on the current rayon pool and the
/// result does not depend on the number of workers.
pub fn compute_velocity_field(
    problem: &Problem,
    pressure: &PressureSolution,
    cfg: &SolverConfig,
    previous: Option<&VelocityField>,
) -> Result<VelocityField> {
    let geom = problem.geometry;
    let model = problem.effective_viscosity(pressure.variant());
    let field = pressure.pressure();
    let mesh = field.mesh();
    let dpdx = nodal_pressure_gradient(&geom, field)?;
    let settings = cfg.velocity_settings();
    let omega = cfg.relaxation;
    let profiles = (0..mesh.nodes())
        .into_par_iter()
        .map(|i| {
            let theta = mesh.node(i);
            let p = field.values()[i];
            let station = Station {
                theta,
                h: geom.film_thickness(theta),
                mu: model.mu(p)?,
                alpha: model.log_derivative(p)?,
                dpdx: dpdx[i],
            };
            let fresh = velocity::solve_velocity_profile(&station, &problem.kinematics, &settings)?;
            match previous {
                Some(prev) if omega < 1.0 && prev.locate(theta).is_ok() => {
                    let old = prev.interpolate(theta)?;
                    let values = fresh
                        .values()
                        .iter()
                        .zip(old.values())
                        .map(|(new, old)| old + omega * (new - old))
                        .collect();
                    VelocityProfile::new(theta, NodalField::new(*fresh.mesh(), values)?)
                }
                _ => Ok(fresh),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    VelocityField::new(profiles, geom, problem.kinematics)
}

/// Per-variant outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: ModelVariant,
    pub theta2_rad: f64,
    #[serde(rename = "p_max_Pa")]
    pub p_max_pa: f64,
    #[serde(rename = "mu_max_Pas")]
    pub mu_max_pas: f64,
    pub min_coefficient: f64,
    /// `||p_k - p_{k-1}||_L2` for k = 2, 3, ...
    pub diff_history: Vec<f64>,
    pub theta2_history: Vec<f64>,
    pub p_max_history: Vec<f64>,
    pub outer_iterations: usize,
    pub wall_time_s: f64,
}

/// State of the outer iteration after `iteration` passes.
#[derive(Debug, Clone)]
pub struct OuterState {
    pub iteration: usize,
    pub pressure: PressureSolution,
    pub velocity: Option<VelocityField>,
    pub diff_history: Vec<f64>,
    pub theta2_history: Vec<f64>,
    pub p_max_history: Vec<f64>,
}

impl OuterState {
    /// Consecutive non-decreasing steps at the end of the history, ignoring
    /// changes below `floor`.
    fn stalled_steps(&self, floor: f64) -> usize {
        self.diff_history
            .windows(2)
            .rev()
            .take_while(|w| w[1] >= w[0] && w[1] > floor)
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct OuterSolution {
    pub summary: RunSummary,
    pub pressure: PressureSolution,
    pub velocity: Option<VelocityField>,
}

fn in_iteration<T>(iteration: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Outer {
        iteration,
        source: Box::new(e),
    })
}

/// Steps a and b of one outer pass.
fn outer_pass(
    problem: &Problem,
    cfg: &SolverConfig,
    velocity: Option<&VelocityField>,
) -> Result<(PressureSolution, VelocityField)> {
    let pressure = find_theta2(problem, ModelVariant::Modified, velocity, cfg)?;
    let field = compute_velocity_field(problem, &pressure, cfg, velocity)?;
    Ok((pressure, field))
}

/// Runs a variant to completion. `Classical` and `Piezo` need a single
/// free-boundary solve; `Modified` iterates until `outer_iterations` passes
/// or until the L2 change drops below `outer_tol * p_max`.
pub fn outer_solve(
    problem: &Problem,
    variant: ModelVariant,
    cfg: &SolverConfig,
) -> Result<OuterSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let state = if variant == ModelVariant::Modified {
        let (pressure, velocity) = in_iteration(1, outer_pass(problem, cfg, None))?;
        let mut state = OuterState {
            iteration: 1,
            theta2_history: vec![pressure.theta2()],
            p_max_history: vec![pressure.p_max()],
            pressure,
            velocity: Some(velocity),
            diff_history: Vec::new(),
        };
        info!(
            "outer 1: theta2 = {:e}, p_max = {:e}",
            state.pressure.theta2(),
            state.pressure.p_max()
        );
        while state.iteration < cfg.outer_iterations {
            let k = state.iteration + 1;
            let (pressure, velocity) =
                in_iteration(k, outer_pass(problem, cfg, state.velocity.as_ref()))?;
            let previous = state.pressure.pressure().resample(*pressure.mesh());
            let diff = in_iteration(k, fem1d::l2_diff(pressure.pressure(), &previous))?;
            info!(
                "outer {k}: theta2 = {:e}, p_max = {:e}, L2 change = {diff:e}",
                pressure.theta2(),
                pressure.p_max()
            );
            state.iteration = k;
            state.diff_history.push(diff);
            state.theta2_history.push(pressure.theta2());
            state.p_max_history.push(pressure.p_max());
            let p_max = pressure.p_max();
            // changes at this level are inner-solve round-off, not divergence
            let floor = 10.0 * cfg.pressure_tol * pressure.pressure().l2_norm();
            state.pressure = pressure;
            state.velocity = Some(velocity);
            let stalled = state.stalled_steps(floor);
            if stalled >= 3 {
                return Err(Error::Divergence { iteration: k });
            }
            if stalled > 0 {
                warn!("outer {k}: L2 change did not decrease");
            }
            if diff < cfg.outer_tol * p_max {
                break;
            }
        }
        state
    } else {
        let pressure = find_theta2(problem, variant, None, cfg)?;
        OuterState {
            iteration: 1,
            theta2_history: vec![pressure.theta2()],
            p_max_history: vec![pressure.p_max()],
            pressure,
            velocity: None,
            diff_history: Vec::new(),
        }
    };

    let p_max = state.pressure.p_max();
    let summary = RunSummary {
        variant,
        theta2_rad: state.pressure.theta2(),
        p_max_pa: p_max,
        mu_max_pas: problem.effective_viscosity(variant).mu(p_max)?,
        min_coefficient: state.pressure.min_coefficient(),
        diff_history: state.diff_history,
        theta2_history: state.theta2_history,
        p_max_history: state.p_max_history,
        outer_iterations: state.iteration,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(OuterSolution {
        summary,
        pressure: state.pressure,
        velocity: state.velocity,
    })
}

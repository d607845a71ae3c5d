//! Pressure equation on the angular coordinate, for three model variants:
//!
//! * `Classical`: constant viscosity `mu0`, coefficient `h^3 / (12 mu0)`;
//! * `Piezo`: the same coefficient with `mu = mu(p)`;
//! * `Modified`: `h^3 / (12 mu) - alpha^2 mu I`, where
//!   `I = int_0^h y (h - y) (du/dy)^2 dy` comes from the cross-film velocity.
//!
//! In `theta` the equation reads
//! `d/dtheta [D (dtheta/dx) dp/dtheta] = (1/2) U (dh/dtheta)` with `U` the
//! wall-speed combination of the variant. The inlet is pinned at
//! `theta = -pi/2` and the exit angle `theta2` is located by bisection on the
//! sign of the exit slope (Swift-Stieber condition).

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::coupling::{SolverConfig, VelocityField};
use crate::error::{Error, Result};
use crate::fem1d::{self, NodalField, UniformMesh};
use crate::geometry::{CylinderPlaneGeometry, Kinematics};
use crate::velocity::VelocityProfile;
use crate::viscosity::ViscosityModel;

pub const INLET_ANGLE: f64 = -FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Classical,
    Piezo,
    Modified,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [
        ModelVariant::Classical,
        ModelVariant::Piezo,
        ModelVariant::Modified,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelVariant::Classical => "classical",
            ModelVariant::Piezo => "piezo",
            ModelVariant::Modified => "modified",
        }
    }

    /// Whether the source term uses `Uh + U0` (classical/piezo) or `Uh - U0`
    /// (modified), unless overridden.
    pub fn uses_velocity_sum(&self, override_sum: Option<bool>) -> bool {
        override_sum.unwrap_or(*self != ModelVariant::Modified)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(ModelVariant::Classical),
            "piezo" => Ok(ModelVariant::Piezo),
            "modified" => Ok(ModelVariant::Modified),
            other => Err(Error::Config(format!(
                "unknown variant `{other}` (expected classical, piezo or modified)"
            ))),
        }
    }
}

/// Everything physical about a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub geometry: CylinderPlaneGeometry,
    pub kinematics: Kinematics,
    pub viscosity: ViscosityModel,
}

impl Problem {
    /// The viscosity law a variant actually uses.
    pub fn effective_viscosity(&self, variant: ModelVariant) -> ViscosityModel {
        match variant {
            ModelVariant::Classical => ViscosityModel::Constant {
                mu0: self.viscosity.mu0(),
            },
            _ => self.viscosity,
        }
    }

    fn entrainment(&self, variant: ModelVariant, cfg: &SolverConfig) -> f64 {
        let Kinematics { u0, uh } = self.kinematics;
        if variant.uses_velocity_sum(cfg.rhs_velocity_sum) {
            uh + u0
        } else {
            uh - u0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureSolution {
    pressure: NodalField,
    theta2: f64,
    variant: ModelVariant,
    min_coefficient: f64,
    iterations: usize,
}

impl PressureSolution {
    pub fn pressure(&self) -> &NodalField {
        &self.pressure
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.pressure.mesh()
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    /// Smallest pressure coefficient `D` over the element midpoints of the
    /// final assembly.
    pub fn min_coefficient(&self) -> f64 {
        self.min_coefficient
    }

    /// Fixed-point iterations used by the last solve.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn p_max(&self) -> f64 {
        self.pressure.max()
    }

    /// `dp/dtheta` of the last element.
    pub fn exit_slope(&self) -> f64 {
        let v = self.pressure.values();
        let n = v.len();
        (v[n - 1] - v[n - 2]) / self.mesh().spacing()
    }
}

/// `int_0^h y (h - y) (du/dy)^2 dy`, exact for a piecewise-linear profile.
pub fn shear_integral(profile: &VelocityProfile) -> f64 {
    let h = profile.h();
    let mesh = profile.mesh();
    profile
        .shear_rates()
        .iter()
        .enumerate()
        .map(|(e, g)| {
            let (a, b) = (mesh.node(e), mesh.node(e + 1));
            let weight = h * (b * b - a * a) / 2.0 - (b * b * b - a * a * a) / 3.0;
            g * g * weight
        })
        .sum()
}

/// `h^3 / (12 mu) - alpha^2 mu int_0^h y (h - y) (du/dy)^2 dy`.
///
/// Non-positive values are returned as-is; see [`check_ellipticity`].
pub fn modified_coefficient(h: f64, mu: f64, alpha: f64, profile: &VelocityProfile) -> f64 {
    h * h * h / (12.0 * mu) - alpha * alpha * mu * shear_integral(profile)
}

/// Returns the smallest coefficient, or an ellipticity error naming the
/// first midpoint where it is at or below `floor` (or not finite).
pub fn check_ellipticity(coefficients: &[f64], thetas: &[f64], floor: f64) -> Result<f64> {
    let mut min = f64::INFINITY;
    for (&d, &theta) in coefficients.iter().zip(thetas) {
        if d <= floor || !d.is_finite() {
            return Err(Error::EllipticityLoss { theta, value: d });
        }
        min = min.min(d);
    }
    Ok(min)
}

/// Per-trial data that does not depend on the pressure iterate.
struct Assembly {
    mesh: UniformMesh,
    mids: Vec<f64>,
    h: Vec<f64>,
    dtheta_dx: Vec<f64>,
    shear: Vec<f64>,
    load: Vec<f64>,
}

impl Assembly {
    fn new(
        problem: &Problem,
        variant: ModelVariant,
        theta2: f64,
        vel: Option<&VelocityField>,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let mesh = UniformMesh::new(INLET_ANGLE, theta2, cfg.n_theta)?;
        let mids = mesh.midpoints();
        let geom = &problem.geometry;
        let h: Vec<f64> = mids.iter().map(|&t| geom.film_thickness(t)).collect();
        let dtheta_dx = mids
            .iter()
            .map(|&t| geom.dtheta_dx(t))
            .collect::<Result<Vec<_>>>()?;
        let shear = match (variant, vel) {
            (ModelVariant::Modified, Some(field)) => mids
                .iter()
                .zip(&h)
                .map(|(&t, &hm)| field.shear_integral(t, hm))
                .collect::<Result<Vec<_>>>()?,
            _ => vec![0.0; mids.len()],
        };
        let speed = problem.entrainment(variant, cfg);
        let load = mids
            .iter()
            .map(|&t| 0.5 * speed * geom.dh_dtheta(t))
            .collect();
        Ok(Self {
            mesh,
            mids,
            h,
            dtheta_dx,
            shear,
            load,
        })
    }

    /// Pressure coefficient at each midpoint for the given nodal pressure.
    fn coefficients(
        &self,
        model: &ViscosityModel,
        variant: ModelVariant,
        p: &[f64],
    ) -> Result<Vec<f64>> {
        (0..self.mids.len())
            .map(|e| {
                let pm = 0.5 * (p[e] + p[e + 1]);
                let mu = model.mu(pm)?;
                let h = self.h[e];
                let base = h * h * h / (12.0 * mu);
                if variant == ModelVariant::Modified && self.shear[e] != 0.0 {
                    let alpha = model.log_derivative(pm)?;
                    Ok(base - alpha * alpha * mu * self.shear[e])
                } else {
                    Ok(base)
                }
            })
            .collect()
    }
}

/// Solves the pressure equation on `[-pi/2, theta2]` with `p = 0` at both
/// ends. The viscosity nonlinearity is resolved by fixed-point iteration
/// starting from `p = 0`.
///
/// For `Modified`, `vel = None` stands for `u = 0` (no shear correction).
pub fn solve_pressure_given_theta2(
    problem: &Problem,
    variant: ModelVariant,
    theta2: f64,
    vel: Option<&VelocityField>,
    cfg: &SolverConfig,
) -> Result<PressureSolution> {
    if !(theta2 > INLET_ANGLE && theta2 <= FRAC_PI_2) {
        return Err(Error::OutOfRange {
            theta: theta2,
            lo: INLET_ANGLE,
            hi: FRAC_PI_2,
        });
    }
    let asm = Assembly::new(problem, variant, theta2, vel, cfg)?;
    let model = problem.effective_viscosity(variant);
    let mut p = vec![0.0; asm.mesh.nodes()];
    let mut change = f64::INFINITY;
    for iter in 1..=cfg.max_fixed_point {
        let d = asm.coefficients(&model, variant, &p)?;
        let min_coefficient = check_ellipticity(&d, &asm.mids, cfg.ellipticity_floor)?;
        let stiffness: Vec<f64> = d.iter().zip(&asm.dtheta_dx).map(|(d, k)| d * k).collect();
        let next = fem1d::solve_with_element_data(&asm.mesh, &stiffness, &asm.load, 0.0, 0.0)
            .map_err(|e| match e {
                Error::FieldMismatch(_) => Error::NonConvergence {
                    what: format!("pressure fixed point at theta2 = {theta2:e}"),
                    iterations: iter,
                    residual: f64::INFINITY,
                },
                e => e,
            })?;
        let diff = fem1d::l2_diff(&next, &NodalField::new(asm.mesh, p)?)?;
        let norm = next.l2_norm();
        change = if norm > 0.0 { diff / norm } else { 0.0 };
        p = next.into_values();
        if change < cfg.pressure_tol {
            return Ok(PressureSolution {
                pressure: NodalField::new(asm.mesh, p)?,
                theta2,
                variant,
                min_coefficient,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        what: format!("pressure fixed point at theta2 = {theta2:e}"),
        iterations: cfg.max_fixed_point,
        residual: change,
    })
}

/// Locates the exit angle by bisection on `(0, pi/2)`: a negative exit slope
/// means the trial exit is too early, a positive one too late.
pub fn find_theta2(
    problem: &Problem,
    variant: ModelVariant,
    vel: Option<&VelocityField>,
    cfg: &SolverConfig,
) -> Result<PressureSolution> {
    if problem.entrainment(variant, cfg) == 0.0 {
        return Err(Error::ZeroEntrainment);
    }
    let solve = |theta2: f64| solve_pressure_given_theta2(problem, variant, theta2, vel, cfg);

    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    let lower = solve(lo)?;
    let upper = solve(hi)?;
    let (s_lo, s_hi) = (lower.exit_slope(), upper.exit_slope());
    if !(s_lo < 0.0 && s_hi > 0.0) {
        return Err(Error::BracketFailure {
            lower_slope: s_lo,
            upper_slope: s_hi,
        });
    }

    let mut best = None;
    while hi - lo > cfg.theta2_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let trial = solve(mid)?;
        let slope = trial.exit_slope();
        debug!("{variant}: theta2 = {mid:.17e}, exit slope {slope:e}");
        if slope.abs() < cfg.slope_tol {
            return Ok(trial);
        }
        if slope < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some(trial);
    }
    match best {
        Some(b) => Ok(b),
        None => solve(0.5 * (lo + hi)),
    }
}

//! Elastohydrodynamic line contact with a pressure-dependent viscosity,
//! solved with the classical, piezoviscous and modified Reynolds equations.
//!
//! The modified equation replaces the flow coefficient `h^3 / (12 mu)` by
//! `h^3 / (12 mu) - alpha^2 mu int_0^h y (h - y) (du/dy)^2 dy`, where `u(y)`
//! solves the cross-film momentum balance at each station. The two problems
//! are coupled through an outer fixed-point iteration.

pub mod config;
pub mod coupling;
pub mod error;
pub mod fem1d;
pub mod geometry;
pub mod output;
pub mod reynolds;
pub mod velocity;
pub mod viscosity;

pub use config::RunConfig;
pub use coupling::{
    compute_velocity_field, interpolate_velocity, outer_solve, OuterSolution, OuterState,
    RunSummary, SolverConfig, VelocityField,
};
pub use error::{Error, Result};
pub use fem1d::{NodalField, UniformMesh};
pub use geometry::{CylinderPlaneGeometry, Kinematics};
pub use reynolds::{
    find_theta2, solve_pressure_given_theta2, ModelVariant, PressureSolution, Problem,
};
pub use velocity::{solve_velocity_profile, Station, VelocityProfile, VelocitySettings};
pub use viscosity::ViscosityModel;

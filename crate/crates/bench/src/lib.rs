//! Fixtures shared by the benchmarks.

use modreyn::{CylinderPlaneGeometry, Kinematics, Problem, SolverConfig, ViscosityModel};

/// Rigid cylinder, R = 10 mm, h0 = 1 um, Barus oil, plane at rest.
pub fn reference_problem() -> Problem {
    Problem {
        geometry: CylinderPlaneGeometry::new(1e-2, 1e-6).unwrap(),
        kinematics: Kinematics::new(0.0, 1.0).unwrap(),
        viscosity: ViscosityModel::barus(0.158, 5.59e-8).unwrap(),
    }
}

pub fn config(n_theta: usize) -> SolverConfig {
    SolverConfig {
        n_theta,
        ..SolverConfig::default()
    }
}

use modreyn::coupling::nodal_pressure_gradient;
use modreyn::fem1d::gradient;
use modreyn::{
    find_theta2, outer_solve, CylinderPlaneGeometry, Error, Kinematics, ModelVariant, Problem,
    SolverConfig, ViscosityModel,
};

fn cfg(n: usize) -> SolverConfig {
    SolverConfig {
        n_theta: n,
        ..SolverConfig::default()
    }
}

fn problem(u0: f64, uh: f64, viscosity: ViscosityModel) -> Problem {
    Problem {
        geometry: CylinderPlaneGeometry::new(1e-2, 1e-6).unwrap(),
        kinematics: Kinematics::new(u0, uh).unwrap(),
        viscosity,
    }
}

fn barus() -> ViscosityModel {
    ViscosityModel::barus(0.158, 5.59e-8).unwrap()
}

#[test]
fn classical_flux_is_uniform() {
    // q = (U/2) h - h^3/(12 mu) dp/dx is constant and equals (U/2) h(theta2)
    let prob = problem(0.0, 1.0, barus());
    let sol = find_theta2(&prob, ModelVariant::Classical, None, &cfg(8000)).unwrap();
    let p = sol.pressure();
    let mesh = p.mesh();
    let g = &prob.geometry;
    let q_exit = 0.5 * g.film_thickness(sol.theta2());
    let mut worst = 0.0f64;
    for (e, dp) in gradient(p).into_iter().enumerate() {
        let t = mesh.midpoint(e);
        let h = g.film_thickness(t);
        let q = 0.5 * h - h.powi(3) / (12.0 * 0.158) * dp * g.dtheta_dx(t).unwrap();
        worst = worst.max((q - q_exit).abs() / q_exit);
    }
    // P1 fluxes are first order in the element size
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn peak_pressure_converges_under_refinement() {
    let prob = problem(0.0, 1.0, barus());
    let p: Vec<f64> = [2500, 5000, 10000]
        .iter()
        .map(|&n| {
            find_theta2(&prob, ModelVariant::Piezo, None, &cfg(n))
                .unwrap()
                .p_max()
        })
        .collect();
    let (d1, d2) = ((p[1] - p[0]).abs(), (p[2] - p[1]).abs());
    assert!(d2 < d1, "{p:?}");
    assert!(d2 < 2e-3 * p[2], "{p:?}");
}

#[test]
fn relaxation_reaches_the_same_fixed_point() {
    let prob = problem(0.0, 1.0, barus());
    let plain = outer_solve(&prob, ModelVariant::Modified, &cfg(3000)).unwrap();
    let damped = SolverConfig {
        relaxation: 0.5,
        outer_iterations: 40,
        ..cfg(3000)
    };
    let damped = outer_solve(&prob, ModelVariant::Modified, &damped).unwrap();
    let (a, b) = (plain.summary.p_max_pa, damped.summary.p_max_pa);
    assert!((a - b).abs() < 1e-8 * a, "{a} {b}");
}

#[test]
fn modified_correction_direction_and_velocity_data() {
    let prob = problem(0.0, 1.0, barus());
    let c = cfg(3000);
    let piezo = outer_solve(&prob, ModelVariant::Piezo, &c).unwrap();
    let modified = outer_solve(&prob, ModelVariant::Modified, &c).unwrap();
    assert!(modified.summary.p_max_pa > piezo.summary.p_max_pa);
    assert!(modified.summary.min_coefficient > 0.0);
    let field = modified.velocity.unwrap();
    assert_eq!(field.stations().len(), modified.pressure.mesh().nodes());
    assert_eq!(
        field.stations().last().copied(),
        Some(modified.summary.theta2_rad)
    );
    // walls are imposed exactly
    for profile in field.profiles() {
        assert_eq!(profile.values()[0], 0.0);
        assert_eq!(*profile.values().last().unwrap(), 1.0);
    }
    let dpdx = nodal_pressure_gradient(&prob.geometry, modified.pressure.pressure()).unwrap();
    assert!(dpdx.iter().all(|g| g.is_finite()));
}

#[test]
fn rhs_convention_override() {
    // with a moving plane the modified source uses Uh - U0 unless overridden
    let prob = problem(0.25, 0.75, barus());
    let c = cfg(3000);
    let piezo = find_theta2(&prob, ModelVariant::Piezo, None, &c).unwrap();
    let first_modified = find_theta2(&prob, ModelVariant::Modified, None, &c).unwrap();
    assert!(first_modified.p_max() < piezo.p_max());
    let summed = SolverConfig {
        rhs_velocity_sum: Some(true),
        ..c
    };
    let forced = find_theta2(&prob, ModelVariant::Modified, None, &summed).unwrap();
    assert_eq!(forced.pressure(), piezo.pressure());
}

#[test]
fn opposed_walls() {
    let prob = problem(-1.0, 1.0, barus());
    let err = outer_solve(&prob, ModelVariant::Piezo, &cfg(1000)).unwrap_err();
    assert!(matches!(err.root(), Error::ZeroEntrainment));
    assert_eq!(err.kind(), "zero_entrainment");
}

#[test]
fn roelands_runs() {
    let model = ViscosityModel::roelands_default(0.158, 4e-8).unwrap();
    let prob = problem(0.0, 1.0, model);
    let piezo = outer_solve(&prob, ModelVariant::Piezo, &cfg(3000)).unwrap();
    let modified = outer_solve(&prob, ModelVariant::Modified, &cfg(3000)).unwrap();
    let s = &modified.summary;
    assert_eq!(s.mu_max_pas, model.mu(s.p_max_pa).unwrap());
    assert!(s.p_max_pa > piezo.summary.p_max_pa);
}

#[test]
fn roelands_loses_ellipticity_before_barus() {
    // Z > 1 here, so the Roelands viscosity outgrows the Barus one at the
    // same alpha and the modified coefficient changes sign
    let model = ViscosityModel::roelands_default(0.158, 5.59e-8).unwrap();
    assert!(model.roelands_z().unwrap() > 1.0);
    let err = outer_solve(
        &problem(0.0, 1.0, model),
        ModelVariant::Modified,
        &cfg(3000),
    )
    .unwrap_err();
    assert_eq!(err.kind(), "ellipticity_loss");
}

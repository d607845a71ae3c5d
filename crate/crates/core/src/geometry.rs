//! Rigid cylinder above a plane, parametrized by the angle `theta` measured
//! from the line of closest approach (`x = R sin theta`).

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPlaneGeometry {
    radius: f64,
    h0: f64,
    n: f64,
}

impl CylinderPlaneGeometry {
    /// `radius` is the cylinder radius and `h0` the minimum gap, both in m.
    pub fn new(radius: f64, h0: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "R",
                format!("must be finite and > 0, got {radius}"),
            ));
        }
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(Error::invalid(
                "h0",
                format!("must be finite and > 0, got {h0}"),
            ));
        }
        let n = -radius / (h0 + radius);
        assert!(-1.0 < n && n < 0.0);
        Ok(Self { radius, h0, n })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    /// `n = -R / (h0 + R)`, in (-1, 0).
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Film thickness `h(theta) = -(R/n) (1 + n cos theta)`.
    ///
    /// Evaluated as `h0 + 2 R sin^2(theta/2)`, the same function without the
    /// cancellation between `h0 + R` and `R cos theta` near the contact.
    pub fn film_thickness(&self, theta: f64) -> f64 {
        let s = (0.5 * theta).sin();
        self.h0 + 2.0 * self.radius * s * s
    }

    pub fn dh_dtheta(&self, theta: f64) -> f64 {
        self.radius * theta.sin()
    }

    /// `dtheta/dx = 1 / (R cos theta)`; singular at `|theta| = pi/2`.
    pub fn dtheta_dx(&self, theta: f64) -> Result<f64> {
        let c = theta.cos();
        if theta.abs() >= FRAC_PI_2 || c <= 0.0 {
            return Err(Error::Singularity { theta });
        }
        Ok(1.0 / (self.radius * c))
    }
}

/// Wall speeds: `u0` for the plane at `y = 0`, `uh` for the cylinder at
/// `y = h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub u0: f64,
    pub uh: f64,
}

impl Kinematics {
    pub fn new(u0: f64, uh: f64) -> Result<Self> {
        if !u0.is_finite() {
            return Err(Error::invalid("U0", "must be finite"));
        }
        if !uh.is_finite() {
            return Err(Error::invalid("Uh", "must be finite"));
        }
        Ok(Self { u0, uh })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom() -> CylinderPlaneGeometry {
        CylinderPlaneGeometry::new(1e-2, 1e-6).unwrap()
    }

    #[test]
    fn thickness_values() {
        let g = geom();
        assert_eq!(g.film_thickness(0.0), 1e-6);
        let edge = g.film_thickness(FRAC_PI_2);
        assert!((edge - (1e-6 + 1e-2)).abs() < 1e-16);
        // 1 - cos t = t^2/2 - t^4/24 + t^6/720 - ..., summed in f64 at t = 0.01
        let t: f64 = 0.01;
        let one_minus_cos = t * t / 2.0 - t.powi(4) / 24.0 + t.powi(6) / 720.0;
        let expected = 1e-6 + 1e-2 * one_minus_cos;
        assert!((g.film_thickness(0.01) - expected).abs() < 1e-20);
        assert!((g.film_thickness(0.01) - 1.4999958e-6).abs() < 1e-13);
    }

    #[test]
    fn transform_factors() {
        let g = geom();
        assert_eq!(g.dh_dtheta(0.0), 0.0);
        assert_eq!(g.dh_dtheta(FRAC_PI_2), 1e-2);
        assert!((g.dh_dtheta(-0.01) + 9.99983e-5).abs() < 1e-10);
        assert!((g.dtheta_dx(0.0).unwrap() - 100.0).abs() < 1e-12);
        let unit = CylinderPlaneGeometry::new(1.0, 1e-3).unwrap();
        assert!((unit.dtheta_dx(std::f64::consts::FRAC_PI_3).unwrap() - 2.0).abs() < 1e-12);
        assert!(g.dtheta_dx(FRAC_PI_2).is_err());
        assert!(g.dtheta_dx(-FRAC_PI_2).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(CylinderPlaneGeometry::new(0.0, 1e-6).is_err());
        assert!(CylinderPlaneGeometry::new(1e-2, -1e-6).is_err());
        assert!(Kinematics::new(f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn expanded_form_identity(theta in -FRAC_PI_2..FRAC_PI_2, r in 1e-3f64..1.0, ratio in 1e-5f64..1e-2) {
            let g = CylinderPlaneGeometry::new(r, ratio * r).unwrap();
            let expanded = g.h0() + r * (1.0 - theta.cos());
            let eccentric = -(r / g.n()) * (1.0 + g.n() * theta.cos());
            prop_assert!((g.film_thickness(theta) - expanded).abs() <= 1e-14 * (g.h0() + r));
            prop_assert!((g.film_thickness(theta) - eccentric).abs() <= 1e-14 * (g.h0() + r));
        }

        #[test]
        fn parity(theta in 0.0..FRAC_PI_2) {
            let g = geom();
            prop_assert_eq!(g.film_thickness(theta), g.film_thickness(-theta));
            prop_assert_eq!(g.dh_dtheta(theta), -g.dh_dtheta(-theta));
        }

        #[test]
        fn derivative_matches_finite_difference(theta in 0.05f64..1.5) {
            let g = geom();
            let step = 1e-5;
            let fd = (g.film_thickness(theta + step) - g.film_thickness(theta - step)) / (2.0 * step);
            let exact = g.dh_dtheta(theta);
            prop_assert!((fd - exact).abs() / exact.abs() < 1e-8);
        }
    }
}

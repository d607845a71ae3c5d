//! Pressure-viscosity constitutive laws.
//!
//! Three laws are supported: a constant viscosity, the exponential Barus law
//! `mu0 * exp(alpha * p)` and the Roelands formula, whose exponent `Z` is
//! fitted so that its logarithmic pressure derivative equals `alpha` at
//! ambient pressure.

use crate::error::{Error, Result};

/// Default Roelands reference viscosity, Pa s.
pub const ROELANDS_MU_R: f64 = 6.31e-5;
/// Default Roelands reference pressure, Pa.
pub const ROELANDS_P_R: f64 = 1.98e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViscosityModel {
    Constant {
        mu0: f64,
    },
    Barus {
        mu0: f64,
        alpha: f64,
    },
    /// `z` is always derived from the other constants, see [`roelands_z`].
    Roelands {
        mu0: f64,
        alpha: f64,
        mu_r: f64,
        p_r: f64,
        z: f64,
    },
}

fn check_mu0(mu0: f64) -> Result<()> {
    if !(mu0.is_finite() && mu0 > 0.0) {
        return Err(Error::invalid(
            "mu0",
            format!("must be finite and > 0, got {mu0}"),
        ));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must be finite and >= 0, got {alpha}"),
        ));
    }
    Ok(())
}

/// Roelands exponent adjusted to the Barus slope at ambient pressure,
/// `Z = alpha p_R / (ln mu0 - ln mu_R)`.
pub fn roelands_z(mu0: f64, alpha: f64, mu_r: f64, p_r: f64) -> Result<f64> {
    let log_ratio = mu0.ln() - mu_r.ln();
    if log_ratio == 0.0 {
        return Err(Error::invalid(
            "mu_R",
            "mu0 == mu_R makes the Roelands exponent undefined",
        ));
    }
    Ok(alpha * p_r / log_ratio)
}

impl ViscosityModel {
    pub fn constant(mu0: f64) -> Result<Self> {
        check_mu0(mu0)?;
        Ok(ViscosityModel::Constant { mu0 })
    }

    pub fn barus(mu0: f64, alpha: f64) -> Result<Self> {
        check_mu0(mu0)?;
        check_alpha(alpha)?;
        Ok(ViscosityModel::Barus { mu0, alpha })
    }

    pub fn roelands(mu0: f64, alpha: f64, mu_r: f64, p_r: f64) -> Result<Self> {
        check_mu0(mu0)?;
        check_alpha(alpha)?;
        if !(mu_r.is_finite() && mu_r > 0.0) {
            return Err(Error::invalid(
                "mu_R",
                format!("must be finite and > 0, got {mu_r}"),
            ));
        }
        if !(p_r.is_finite() && p_r > 0.0) {
            return Err(Error::invalid(
                "p_R",
                format!("must be finite and > 0, got {p_r}"),
            ));
        }
        let z = roelands_z(mu0, alpha, mu_r, p_r)?;
        Ok(ViscosityModel::Roelands {
            mu0,
            alpha,
            mu_r,
            p_r,
            z,
        })
    }

    /// Roelands with the default reference constants.
    pub fn roelands_default(mu0: f64, alpha: f64) -> Result<Self> {
        Self::roelands(mu0, alpha, ROELANDS_MU_R, ROELANDS_P_R)
    }

    pub fn mu0(&self) -> f64 {
        match *self {
            ViscosityModel::Constant { mu0 }
            | ViscosityModel::Barus { mu0, .. }
            | ViscosityModel::Roelands { mu0, .. } => mu0,
        }
    }

    /// Pressure-viscosity coefficient; zero for a constant viscosity.
    pub fn alpha(&self) -> f64 {
        match *self {
            ViscosityModel::Constant { .. } => 0.0,
            ViscosityModel::Barus { alpha, .. } | ViscosityModel::Roelands { alpha, .. } => alpha,
        }
    }

    /// The fitted Roelands exponent. Errors for the other laws.
    pub fn roelands_z(&self) -> Result<f64> {
        match *self {
            ViscosityModel::Roelands { z, .. } => Ok(z),
            _ => Err(Error::invalid(
                "kind",
                "Z is only defined for the Roelands law",
            )),
        }
    }

    /// Same law with the ambient viscosity replaced; Roelands refits `Z`.
    pub fn with_mu0(&self, mu0: f64) -> Result<Self> {
        match *self {
            ViscosityModel::Constant { .. } => Self::constant(mu0),
            ViscosityModel::Barus { alpha, .. } => Self::barus(mu0, alpha),
            ViscosityModel::Roelands {
                alpha, mu_r, p_r, ..
            } => Self::roelands(mu0, alpha, mu_r, p_r),
        }
    }

    fn roelands_base(pressure: f64, p_r: f64) -> Result<f64> {
        let base = 1.0 + pressure / p_r;
        if base > 0.0 {
            Ok(base)
        } else {
            Err(Error::ViscosityDomain {
                pressure,
                reason: "1 + p/p_R must be positive",
            })
        }
    }

    /// Viscosity at `pressure` (Pa).
    ///
    /// Negative pressures are evaluated as written; the Roelands law fails
    /// once `1 + p/p_R <= 0`.
    pub fn mu(&self, pressure: f64) -> Result<f64> {
        match *self {
            ViscosityModel::Constant { mu0 } => Ok(mu0),
            ViscosityModel::Barus { mu0, alpha } => Ok(mu0 * (alpha * pressure).exp()),
            ViscosityModel::Roelands {
                mu0, mu_r, p_r, z, ..
            } => {
                let base = Self::roelands_base(pressure, p_r)?;
                // mu0 * (mu0/mu_R)^((1 + p/p_R)^Z - 1): increasing in p for mu0 > mu_R.
                let log_ratio = mu0.ln() - mu_r.ln();
                Ok(mu0 * (log_ratio * (base.powf(z) - 1.0)).exp())
            }
        }
    }

    /// Logarithmic pressure derivative `(1/mu) dmu/dp`, Pa^-1.
    pub fn log_derivative(&self, pressure: f64) -> Result<f64> {
        match *self {
            ViscosityModel::Constant { .. } => Ok(0.0),
            ViscosityModel::Barus { alpha, .. } => Ok(alpha),
            ViscosityModel::Roelands { alpha, p_r, z, .. } => {
                let base = Self::roelands_base(pressure, p_r)?;
                Ok(alpha * base.powf(z - 1.0))
            }
        }
    }
}

//! Simulation and verification engine for the zero sets of stationary
//! Gaussian analytic functions (GAFs) and symmetric GAFs on a horizontal
//! strip `|Im z| < Δ`.
//!
//! The pipeline is: a [`spectral::SpectralMeasure`] defines the covariance
//! kernel; [`sampler`] draws realizations from a discretization of it;
//! [`zeros`] locates their zeros with argument-principle certificates;
//! [`stats`] turns located zeros into empirical horizontal measures and
//! compares them with the predictions of [`densities`] and [`intensity`].

use serde::{Deserialize, Serialize};

pub mod densities;
pub mod exec;
pub mod intensity;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod stats;
pub mod zeros;

/// Which kind of random function is built from a spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// Complex Gaussian coefficients.
    #[serde(rename = "gaf")]
    Gaf,
    /// Real Gaussian coefficients on a conjugation-symmetric basis.
    #[serde(rename = "sym", alias = "symmetric")]
    Symmetric,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Gaf => "gaf",
            Kind::Symmetric => "sym",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaf" => Ok(Kind::Gaf),
            "sym" | "symmetric" => Ok(Kind::Symmetric),
            other => Err(format!("unknown kind `{other}` (expected gaf or sym)")),
        }
    }
}

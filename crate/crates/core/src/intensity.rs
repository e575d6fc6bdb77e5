//! First intensity of zeros in the plane.
//!
//! For a GAF with kernel `K` the zeros have density `(1/4π) Δ log K(z,z)`.
//! For a symmetric GAF, off the real axis, the density is
//! `(1/4π) Δ log(K(z,z) + √(K(z,z)² − |K(z,z̄)|²))`; the real axis carries an
//! extra singular part handled by [`crate::densities::real_atom_r`].
//! Laplacians are taken numerically from kernel values, so these formulas
//! double as an independent check of the moment-based densities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::map_indexed;
use crate::spectral::{Kernel, SpectralError};
use crate::Kind;

/// Coarse Laplacian step; the fine step is half of it.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Slack allowed in `K(z,z) ≥ |K(z,z̄)|`.
const CAUCHY_SCHWARZ_SLACK: f64 = 1e-12;
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntensityError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid kernel values: K(z,z) = {k_zz} < |K(z,z̄)| = {k_zzbar_abs}")]
    InvalidKernel { k_zz: f64, k_zzbar_abs: f64 },
    #[error("stencil of half-width {h} around {z} leaves the band [{y_min}, {y_max}]")]
    OutsideStrip { z: Complex64, h: f64, y_min: f64, y_max: f64 },
    #[error("stencil of half-width {h} around {z} reaches the real axis")]
    CrossesRealAxis { z: Complex64, h: f64 },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

pub type Result<T> = std::result::Result<T, IntensityError>;

/// Eigenvalues `λ₁ ≥ λ₂ ≥ 0` of the covariance of `(Re f, Im f)` at `z`
/// for a symmetric GAF: `(K(z,z) ± |K(z,z̄)|)/2`.
pub fn sigma_eigenvalues(k_zz: f64, k_zzbar: Complex64) -> Result<(f64, f64)> {
    let c = k_zzbar.norm();
    if !(k_zz >= c - CAUCHY_SCHWARZ_SLACK * k_zz.abs().max(1.0)) {
        return Err(IntensityError::InvalidKernel { k_zz, k_zzbar_abs: c });
    }
    let l1 = 0.5 * (k_zz + c);
    let l2 = (0.5 * (k_zz - c)).max(0.0);
    Ok((l1, l2))
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(IntensityError::InvalidStep(h));
    }
    Ok(())
}

fn check_band<K: Kernel + ?Sized>(kernel: &K, z: Complex64, h: f64) -> Result<()> {
    if let Some((y_min, y_max)) = kernel.band() {
        if z.im - h < y_min || z.im + h > y_max {
            return Err(IntensityError::OutsideStrip { z, h, y_min, y_max });
        }
    }
    Ok(())
}

fn diagonal<K: Kernel + ?Sized>(kernel: &K, z: Complex64) -> Result<f64> {
    Ok(kernel.kernel(z, z)?.re)
}

/// Richardson-extrapolated 5-point Laplacian of `g` at `z`, divided by 4π.
fn laplacian_over_4pi<G>(g: G, z: Complex64, h: f64) -> Result<f64>
where
    G: Fn(Complex64) -> Result<f64>,
{
    let centre = g(z)?;
    let five_point = |h: f64| -> Result<f64> {
        let mut s = -4.0 * centre;
        for d in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
            s += g(z + d)?;
        }
        Ok(s / (h * h))
    };
    let coarse = five_point(h)?;
    let fine = five_point(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0 / (4.0 * std::f64::consts::PI))
}

/// Zero intensity of a GAF, `(1/4π) Δ log K(z,z)`, in zeros per unit area.
pub fn gaf_intensity<K: Kernel + ?Sized>(kernel: &K, z: Complex64, h: f64) -> Result<f64> {
    check_step(h)?;
    check_band(kernel, z, h)?;
    laplacian_over_4pi(|w| Ok(diagonal(kernel, w)?.max(LOG_FLOOR).ln()), z, h)
}

/// Zero intensity of a symmetric GAF off the real axis.
pub fn sym_intensity<K: Kernel + ?Sized>(kernel: &K, z: Complex64, h: f64) -> Result<f64> {
    check_step(h)?;
    if z.im.abs() <= 2.0 * h {
        return Err(IntensityError::CrossesRealAxis { z, h });
    }
    check_band(kernel, z, h)?;
    laplacian_over_4pi(
        |w| {
            let (l1, l2) = sigma_eigenvalues(diagonal(kernel, w)?, kernel.kernel(w, w.conj())?)?;
            // K + √(K² − |K(z,z̄)|²) = λ₁ + λ₂ + 2√(λ₁λ₂)
            Ok((l1 + l2 + 2.0 * (l1 * l2).sqrt()).max(LOG_FLOOR).ln())
        },
        z,
        h,
    )
}

/// A kernel together with the intensity formula to apply to it.
#[derive(Clone, Copy)]
pub struct IntensityField<'a> {
    pub kind: Kind,
    pub kernel: &'a dyn Kernel,
    pub h: f64,
}

/// One grid sample of an intensity field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensitySample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

impl<'a> IntensityField<'a> {
    pub fn new(kind: Kind, kernel: &'a dyn Kernel) -> Self {
        Self { kind, kernel, h: DEFAULT_STEP }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn value(&self, z: Complex64) -> Result<f64> {
        match self.kind {
            Kind::Gaf => gaf_intensity(self.kernel, z, self.h),
            Kind::Symmetric => sym_intensity(self.kernel, z, self.h),
        }
    }

    /// Evaluate on the product grid `xs × ys`, rows ordered by `y` then `x`.
    pub fn grid(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<IntensitySample>> {
        let nx = xs.len();
        map_indexed(nx * ys.len(), |k| {
            let (x, y) = (xs[k % nx], ys[k / nx]);
            self.value(Complex64::new(x, y)).map(|value| IntensitySample { x, y, value })
        })
        .into_iter()
        .collect()
    }
}

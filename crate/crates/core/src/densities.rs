//! Horizontal densities of the limiting zero-counting measure.
//!
//! For a stationary GAF the limit is `L(y) dy`; for a symmetric GAF it is
//! `S(y) dy + R δ₀`. Everything is computed from the exponential moments
//! `m_k(y)` of the spectral measure, with the closed forms of the three
//! standard families available as independent oracles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::integrate_adaptive;
use crate::spectral::{Degeneracy, SpectralError, SpectralMeasure};
use crate::Kind;

/// Below this `|y|` the symmetric density is evaluated from its Taylor branch.
pub const S_NEAR_ZERO: f64 = 3e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("degenerate spectral measure {0:?}: the limiting measure is random, use the exact atomic model")]
    Degenerate(Degeneracy),
    #[error("symmetric GAF densities need a measure symmetric under λ ↦ -λ")]
    NotSymmetric,
    #[error("height y = {y} is outside the family's strip |y| < {half_width}")]
    OutsideStrip { y: f64, half_width: f64 },
    #[error("the symmetric density S(y) is only defined for y ≠ 0")]
    AtRealAxis,
}

pub type Result<T> = std::result::Result<T, DensityError>;

fn check_height(measure: &SpectralMeasure, y: f64) -> Result<()> {
    let hw = measure.half_width();
    if !(y.abs() < hw) {
        return Err(DensityError::OutsideStrip { y, half_width: hw });
    }
    Ok(())
}

/// `L(y) = 4π (m₂m₀ − m₁²) / m₀²`, the horizontal zero density of a GAF.
pub fn gaf_density_l(measure: &SpectralMeasure, y: f64) -> Result<f64> {
    if let d @ Degeneracy::SingleAtom { .. } = measure.degeneracy() {
        return Err(DensityError::Degenerate(d));
    }
    check_height(measure, y)?;
    let m0 = measure.exp_moment(0, y)?;
    let m1 = measure.exp_moment(1, y)?;
    let m2 = measure.exp_moment(2, y)?;
    // Tilted variance; clamp the rounding-level negatives.
    Ok((4.0 * PI * (m2 * m0 - m1 * m1) / (m0 * m0)).max(0.0))
}

fn check_symmetric(measure: &SpectralMeasure) -> Result<()> {
    if !measure.is_symmetric() {
        return Err(DensityError::NotSymmetric);
    }
    Ok(())
}

/// Continuous part `S(y)` of the horizontal measure of a symmetric GAF.
///
/// `S(y) = (1/4π) [ψ''(ψ² − ψ(0)²) − ψψ'²] / (ψ² − ψ(0)²)^{3/2}`; for
/// `|y| < S_NEAR_ZERO` the Taylor expansion through `|y|³` is used instead,
/// whose leading term is `4π² √(m₂/m₀) (m₄/m₂ − m₂/m₀) |y|` (moments at 0).
pub fn sym_density_s(measure: &SpectralMeasure, y: f64) -> Result<f64> {
    check_symmetric(measure)?;
    if let d @ Degeneracy::SymmetricPair { .. } = measure.degeneracy() {
        return Err(DensityError::Degenerate(d));
    }
    check_height(measure, y)?;
    let y = y.abs();
    if y < S_NEAR_ZERO {
        // Series in s = 4π|y| through the cubic term.
        let m0 = measure.exp_moment(0, 0.0)?;
        let m2 = measure.exp_moment(2, 0.0)?;
        let m4 = measure.exp_moment(4, 0.0)?;
        let m6 = measure.exp_moment(6, 0.0)?;
        let c1 = (m0 * m4 - m2 * m2) / (4.0 * m0.powf(1.5) * m2.sqrt());
        let c3 = (8.0 * m0 * m0 * m2 * m6 - 5.0 * m0 * m0 * m4 * m4 - 30.0 * m0 * m2 * m2 * m4
            + 27.0 * m2.powi(4))
            / (288.0 * m0.powf(2.5) * m2.powf(1.5));
        let s = 4.0 * PI * y;
        return Ok((4.0 * PI * s * (c1 + c3 * s * s)).max(0.0));
    }
    let psi0 = measure.exp_moment(0, 0.0)?;
    let psi = measure.exp_moment(0, y)?;
    let dpsi = -4.0 * PI * measure.exp_moment(1, y)?;
    let ddpsi = 16.0 * PI * PI * measure.exp_moment(2, y)?;
    let gap = (psi - psi0) * (psi + psi0);
    let value = (ddpsi * gap - psi * dpsi * dpsi) / (4.0 * PI * gap.powf(1.5));
    Ok(value.max(0.0))
}

/// Mass of the real-axis atom, `R = 2 √(m₂(0) / m₀(0))`.
pub fn real_atom_r(measure: &SpectralMeasure) -> Result<f64> {
    check_symmetric(measure)?;
    let m0 = measure.exp_moment(0, 0.0)?;
    let m2 = measure.exp_moment(2, 0.0)?;
    Ok(2.0 * (m2 / m0).sqrt())
}

/// Predicted horizontal limiting measure for a non-degenerate measure.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalDensityPrediction {
    pub kind: Kind,
    measure: SpectralMeasure,
    pub atom_at_zero: f64,
}

impl HorizontalDensityPrediction {
    pub fn new(measure: &SpectralMeasure, kind: Kind) -> Result<Self> {
        let atom_at_zero = match kind {
            Kind::Gaf => {
                if let d @ Degeneracy::SingleAtom { .. } = measure.degeneracy() {
                    return Err(DensityError::Degenerate(d));
                }
                0.0
            }
            Kind::Symmetric => {
                check_symmetric(measure)?;
                if let d @ Degeneracy::SymmetricPair { .. } = measure.degeneracy() {
                    return Err(DensityError::Degenerate(d));
                }
                real_atom_r(measure)?
            }
        };
        Ok(Self { kind, measure: measure.clone(), atom_at_zero })
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    /// Continuous density at height `y`.
    pub fn density(&self, y: f64) -> Result<f64> {
        match self.kind {
            Kind::Gaf => gaf_density_l(&self.measure, y),
            Kind::Symmetric => sym_density_s(&self.measure, y),
        }
    }

    /// `∫_lo^hi density(y) dy` by adaptive quadrature (continuous part only).
    pub fn bin_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        check_height(&self.measure, lo)?;
        check_height(&self.measure, hi)?;
        // The symmetric density has a kink at 0; integrate each side separately.
        if self.kind == Kind::Symmetric && lo < 0.0 && hi > 0.0 {
            return Ok(self.bin_mass(lo, 0.0)? + self.bin_mass(0.0, hi)?);
        }
        let failure = std::cell::RefCell::new(None);
        let (value, _) = integrate_adaptive(
            |y| match self.density(y) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            1e-10 * (hi - lo).abs().max(1e-300),
        );
        let failure = failure.into_inner();
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// The three families with closed-form densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Uniform spectrum on `[-a, a]`, sinc kernel.
    PaleyWiener { a: f64 },
    /// Gaussian spectrum, Gaussian kernel.
    FockBargmann { a: f64 },
    /// `sech(πλ)` spectrum, valid for `|y| < 1/4`.
    Sech,
}

/// Which density a closed form refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    L,
    S,
}

impl Family {
    pub fn measure(&self) -> SpectralMeasure {
        match *self {
            Family::PaleyWiener { a } => SpectralMeasure::paley_wiener(a),
            Family::FockBargmann { a } => SpectralMeasure::fock_bargmann(a),
            Family::Sech => SpectralMeasure::sech(),
        }
        .expect("family parameters are positive")
    }

    pub fn half_width(&self) -> f64 {
        match self {
            Family::Sech => 0.25,
            _ => f64::INFINITY,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::PaleyWiener { .. } => "paley-wiener",
            Family::FockBargmann { .. } => "fock-bargmann",
            Family::Sech => "sech",
        }
    }

    /// Parse `paley-wiener`, `fock-bargmann`, `sech` (aliases `pw`, `fb`, `exponential`).
    pub fn parse(name: &str, a: f64) -> Option<Self> {
        match name {
            "paley-wiener" | "pw" | "uniform" => Some(Family::PaleyWiener { a }),
            "fock-bargmann" | "fb" | "gaussian" => Some(Family::FockBargmann { a }),
            "sech" | "exponential" => Some(Family::Sech),
            _ => None,
        }
    }

    /// Real-atom mass `2√(m₂/m₀)` in closed form: `2a/√3`, `√2 a`, `1`.
    pub fn atom(&self) -> f64 {
        match *self {
            Family::PaleyWiener { a } => 2.0 * a / 3f64.sqrt(),
            Family::FockBargmann { a } => 2f64.sqrt() * a,
            Family::Sech => 1.0,
        }
    }

    /// The competing Paley–Wiener value `a/√3`, half the atom above; reports
    /// show how far observations are from it.
    pub fn half_atom(&self) -> f64 {
        match *self {
            Family::PaleyWiener { a } => a / 3f64.sqrt(),
            _ => self.atom(),
        }
    }
}

/// Evaluate the closed-form `L` or `S` of a family at height `y`.
pub fn closed_form(family: Family, which: Which, y: f64) -> Result<f64> {
    let hw = family.half_width();
    if !(y.abs() < hw) {
        return Err(DensityError::OutsideStrip { y, half_width: hw });
    }
    if which == Which::S && y == 0.0 {
        return Err(DensityError::AtRealAxis);
    }
    Ok(match (family, which) {
        (Family::PaleyWiener { a }, Which::L) => {
            // 4πa² d/dv (coth v − 1/v) at v = 4πay
            let v = 4.0 * PI * a * y;
            4.0 * PI * a * a * pw_dlangevin(v)
        }
        (Family::PaleyWiener { a }, Which::S) => {
            let v = 4.0 * PI * a * y.abs();
            4.0 * PI * a * a * pw_sym_derivative(v)
        }
        (Family::FockBargmann { a }, Which::L) => 2.0 * PI * a * a,
        (Family::FockBargmann { a }, Which::S) => {
            // 2πa² d/du (u e^{u²} / √(e^{2u²} − 1)) at u = 2πa|y|
            let u = 2.0 * PI * a * y.abs();
            let e = -(-2.0 * u * u).exp_m1();
            2.0 * PI * a * a * (e - 2.0 * u * u * (1.0 - e)) / e.powf(1.5)
        }
        (Family::Sech, Which::L) => PI / (2.0 * PI * y).cos().powi(2),
        (Family::Sech, Which::S) => PI * (2.0 * PI * y).sin().abs() / (2.0 * PI * y).cos().powi(2),
    })
}

/// `sinh v / v` and friends by series for small `v`.
fn sinhc_minus_one(v: f64) -> f64 {
    // sinh v / v − 1
    if v.abs() > 0.5 {
        return v.sinh() / v - 1.0;
    }
    let v2 = v * v;
    let mut term = v2 / 6.0;
    let mut sum = 0.0_f64;
    let mut n = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        sum += term;
        term *= v2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        n += 1.0;
    }
    sum
}

/// `sinh²v − v²`, without cancellation.
fn sinh2_minus_v2(v: f64) -> f64 {
    if v.abs() > 0.5 {
        return v.sinh().powi(2) - v * v;
    }
    // (cosh 2v − 1)/2 − v² = Σ_{n≥2} (2v)^{2n} / (2 (2n)!)
    let x = 2.0 * v;
    let x2 = x * x;
    let mut term = x2 * x2 / 48.0; // n = 2: x⁴/(2·4!)
    let mut sum = 0.0_f64;
    let mut n = 2.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        sum += term;
        term *= x2 / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
        n += 1.0;
    }
    sum
}

/// `d/dv (coth v − 1/v) = (sinh²v − v²) / (v² sinh²v)`.
fn pw_dlangevin(v: f64) -> f64 {
    if v == 0.0 {
        return 1.0 / 3.0;
    }
    sinh2_minus_v2(v) / (v * v * v.sinh().powi(2))
}

/// `d/dv [(cosh v − sinh v / v) / √(sinh²v − v²)]` for `v > 0`.
fn pw_sym_derivative(v: f64) -> f64 {
    // N = cosh v − sinh v / v, D² = sinh²v − v².
    let c1 = cosh_minus_sinhc(v);
    let n_prime = v.sinh() - v.cosh() / v + v.sinh() / (v * v);
    let n_prime = if v < 0.5 { cosh_minus_sinhc_prime(v) } else { n_prime };
    let d2 = sinh2_minus_v2(v);
    // (D²)' = 2 sinh v cosh v − 2v = sinh 2v − 2v
    let d2_prime = if v < 0.5 { 2.0 * v * sinhc_minus_one(2.0 * v) } else { (2.0 * v).sinh() - 2.0 * v };
    (n_prime * d2 - 0.5 * c1 * d2_prime) / d2.powf(1.5)
}

/// `cosh v − sinh v / v = Σ_{n≥1} 2n v^{2n} / (2n+1)!`.
fn cosh_minus_sinhc(v: f64) -> f64 {
    if v.abs() > 0.5 {
        return v.cosh() - v.sinh() / v;
    }
    let v2 = v * v;
    let mut pow = v2;
    let mut fact = 6.0; // (2n+1)!
    let mut sum = 0.0;
    for n in 1..30 {
        let term = 2.0 * n as f64 * pow / fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= v2;
        let m = 2.0 * n as f64;
        fact *= (m + 2.0) * (m + 3.0);
    }
    sum
}

/// Derivative of [`cosh_minus_sinhc`]: `Σ 4n² v^{2n−1} / (2n+1)!`.
fn cosh_minus_sinhc_prime(v: f64) -> f64 {
    let v2 = v * v;
    let mut pow = v;
    let mut fact = 6.0;
    let mut sum = 0.0;
    for n in 1..30 {
        let nf = n as f64;
        let term = 4.0 * nf * nf * pow / fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= v2;
        let m = 2.0 * nf;
        fact *= (m + 2.0) * (m + 3.0);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Atom;
    use approx::assert_relative_eq;

    #[test]
    fn gaf_density_examples() {
        let fb = SpectralMeasure::fock_bargmann(1.0).unwrap();
        for y in [-0.3, 0.0, 0.17] {
            assert_relative_eq!(gaf_density_l(&fb, y).unwrap(), 2.0 * PI, max_relative = 1e-12);
        }
        let pw = SpectralMeasure::paley_wiener(1.0).unwrap();
        assert_relative_eq!(gaf_density_l(&pw, 0.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-12);
        let sech = SpectralMeasure::sech().unwrap();
        assert_relative_eq!(gaf_density_l(&sech, 0.0).unwrap(), PI, max_relative = 1e-12);
    }

    #[test]
    fn single_atom_rejected() {
        let m = SpectralMeasure::from_atoms(vec![Atom { lambda: 1.0, mass: 1.0 }]).unwrap();
        assert!(matches!(gaf_density_l(&m, 0.1), Err(DensityError::Degenerate(_))));
    }

    #[test]
    fn sym_density_examples() {
        let sech = SpectralMeasure::sech().unwrap();
        let s = sym_density_s(&sech, 0.125).unwrap();
        assert_relative_eq!(s, PI * 2f64.sqrt(), max_relative = 1e-10);
        assert_eq!(sym_density_s(&sech, -0.125).unwrap(), s);

        let fb = SpectralMeasure::fock_bargmann(1.0).unwrap();
        for y in [0.01, 0.1, 0.25] {
            let expected = closed_form(Family::FockBargmann { a: 1.0 }, Which::S, y).unwrap();
            assert_relative_eq!(sym_density_s(&fb, y).unwrap(), expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn sym_density_near_zero_branch_is_continuous() {
        for fam in [Family::PaleyWiener { a: 1.0 }, Family::FockBargmann { a: 1.0 }, Family::Sech] {
            let m = fam.measure();
            let below = sym_density_s(&m, S_NEAR_ZERO * (1.0 - 1e-9)).unwrap();
            let above = sym_density_s(&m, S_NEAR_ZERO * (1.0 + 1e-9)).unwrap();
            assert_relative_eq!(below, above, max_relative = 1e-5);
            assert_eq!(sym_density_s(&m, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn sech_near_zero_slope_is_two_pi_squared() {
        let sech = SpectralMeasure::sech().unwrap();
        let y = 5e-4;
        assert_relative_eq!(sym_density_s(&sech, y).unwrap(), 2.0 * PI * PI * y, max_relative = 1e-5);
    }

    #[test]
    fn degenerate_symmetric_refused() {
        let two = SpectralMeasure::two_atom(1.0, 0.5).unwrap();
        assert!(matches!(sym_density_s(&two, 0.1), Err(DensityError::Degenerate(_))));
        assert!(HorizontalDensityPrediction::new(&two, Kind::Symmetric).is_err());
        // The atom itself is still well defined for the two-atom model.
        assert_relative_eq!(real_atom_r(&two).unwrap(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn non_symmetric_refused() {
        let m = SpectralMeasure::from_atoms(vec![Atom { lambda: 1.0, mass: 1.0 }, Atom { lambda: 0.5, mass: 1.0 }])
            .unwrap();
        assert_eq!(real_atom_r(&m), Err(DensityError::NotSymmetric));
        assert_eq!(sym_density_s(&m, 0.2), Err(DensityError::NotSymmetric));
    }

    #[test]
    fn atom_examples() {
        let fb = SpectralMeasure::fock_bargmann(1.0).unwrap();
        assert_relative_eq!(real_atom_r(&fb).unwrap(), 2f64.sqrt(), max_relative = 1e-13);
        let pw = SpectralMeasure::paley_wiener(1.0).unwrap();
        assert_relative_eq!(real_atom_r(&pw).unwrap(), 2.0 / 3f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(real_atom_r(&SpectralMeasure::sech().unwrap()).unwrap(), 1.0, max_relative = 1e-13);
    }

    /// Kac–Rice: real zeros per unit length of a stationary real process is
    /// `(1/π) √(−r''(0)/r(0))`. For the sinc kernel, `r''(0) = −(2π)²/3`.
    #[test]
    fn pw_atom_matches_kac_rice() {
        let r = |t: f64| if t == 0.0 { 1.0 } else { (2.0 * PI * t).sin() / (2.0 * PI * t) };
        let h = 1e-3;
        // Richardson-extrapolated second difference.
        let d2 = |h: f64| (r(h) - 2.0 * r(0.0) + r(-h)) / (h * h);
        let r2 = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
        let kac_rice = (-r2).sqrt() / PI;
        assert_relative_eq!(kac_rice, 2.0 / 3f64.sqrt(), max_relative = 1e-6);
        assert_relative_eq!(Family::PaleyWiener { a: 1.0 }.atom(), kac_rice, max_relative = 1e-6);
        assert!((Family::PaleyWiener { a: 1.0 }.half_atom() - kac_rice).abs() > 0.5);
    }

    #[test]
    fn closed_form_examples() {
        assert_relative_eq!(closed_form(Family::Sech, Which::L, 0.125).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(
            closed_form(Family::PaleyWiener { a: 1.0 }, Which::L, 0.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-14
        );
        assert_eq!(closed_form(Family::FockBargmann { a: 1.0 }, Which::L, 0.4).unwrap(), 2.0 * PI);
        assert!(closed_form(Family::Sech, Which::L, 0.3).is_err());
        assert_eq!(closed_form(Family::Sech, Which::S, 0.0), Err(DensityError::AtRealAxis));
    }

    /// The FB symmetric form `d/du (e^{u²}/√(e^{2u²}−1))` without the factor `u` is
    /// negative for every `u > 0`; the kernel-consistent expression carries an
    /// extra factor `u` inside the derivative.
    #[test]
    fn fb_symmetric_form_without_u_is_negative() {
        for u in [0.05f64, 0.3, 1.0, 2.0] {
            let g = |u: f64| (u * u).exp() / ((2.0 * u * u).exp() - 1.0).sqrt();
            let h = 1e-5;
            let slope = (g(u + h) - g(u - h)) / (2.0 * h);
            assert!(slope < 0.0);
            let y = u / (2.0 * PI);
            assert!(closed_form(Family::FockBargmann { a: 1.0 }, Which::S, y).unwrap() > 0.0);
        }
    }

    #[test]
    fn pw_series_helpers_match_direct_formulas() {
        for v in [0.3f64, 0.49] {
            assert_relative_eq!(cosh_minus_sinhc(v), v.cosh() - v.sinh() / v, max_relative = 1e-12);
            assert_relative_eq!(sinh2_minus_v2(v), v.sinh().powi(2) - v * v, max_relative = 1e-10);
            let h = 1e-5;
            let fd = (cosh_minus_sinhc(v + h) - cosh_minus_sinhc(v - h)) / (2.0 * h);
            assert_relative_eq!(cosh_minus_sinhc_prime(v), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn bin_mass_matches_antiderivative() {
        // ∫ L dy = [−m₁/m₀]; for sech: [tan(2πy)/2].
        let pred = HorizontalDensityPrediction::new(&SpectralMeasure::sech().unwrap(), Kind::Gaf).unwrap();
        let mass = pred.bin_mass(-0.1, 0.1).unwrap();
        assert_relative_eq!(mass, (0.2 * PI).tan(), max_relative = 1e-10);

        // Symmetric: ∫_a^b S over an interval crossing 0 is G(b) − G(a) − R.
        let sym = HorizontalDensityPrediction::new(&SpectralMeasure::sech().unwrap(), Kind::Symmetric).unwrap();
        assert_relative_eq!(sym.atom_at_zero, 1.0, max_relative = 1e-13);
        let g = |y: f64| 0.5 / (2.0 * PI * y).cos() * y.signum(); // sec(2πy)/2 · sign
        let expected = g(0.15) - g(-0.1) - 1.0;
        assert_relative_eq!(sym.bin_mass(-0.1, 0.15).unwrap(), expected, max_relative = 1e-7);
    }
}

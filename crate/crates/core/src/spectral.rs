//! Spectral measures, their exponential moments, covariance functions and
//! kernels, and discretizations used by the samplers.
//!
//! A stationary GAF on the strip `|Im z| < Δ` is determined by a finite
//! positive measure `ρ` on the real line through
//! `K(z, w) = ∫ exp(2πi (z - w̄) λ) dρ(λ)`. Every other module reads the
//! measure through the functions defined here.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{gauss_hermite, gauss_legendre, sinh_trapezoid};

/// Relative tolerance used when matching atoms under `λ ↦ -λ`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Target relative accuracy of the moment integrals.
const INTEGRAL_TOL: f64 = 1e-14;

/// Discarded tail mass allowed when truncating an unbounded component.
const TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("spectral measure has no atoms and no density components")]
    Empty,
    #[error("atom at λ = {lambda} has invalid mass {mass}")]
    InvalidAtom { lambda: f64, mass: f64 },
    #[error("invalid density component: {0}")]
    InvalidComponent(String),
    #[error("band [{y_min}, {y_max}] is not strictly inside the strip of half-width {half_width}")]
    OutsideStrip { y_min: f64, y_max: f64, half_width: f64 },
    #[error("argument {t} lies outside the strip |Im t| < {limit}")]
    ArgumentOutsideStrip { t: Complex64, limit: f64 },
    #[error("quadrature did not converge (achieved error estimate {estimate:e})")]
    NoConvergence { estimate: f64 },
    #[error("measure is not symmetric under λ ↦ -λ")]
    NotSymmetric,
    #[error("could not read measure: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// A point mass `mass · δ_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub mass: f64,
}

/// Absolutely continuous part of a spectral measure.
///
/// The parametric families are normalized to unit mass and then scaled by
/// `mass`:
/// * `Uniform { a }`: `1/(2a)` on `[-a, a]`;
/// * `Gaussian { a }`: `exp(-λ²/a²) / (a√π)`;
/// * `Sech`: `sech(πλ)`.
///
/// `Tabulated` is a piecewise-linear density through `(grid[i], values[i])`,
/// zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityComponent {
    Uniform { a: f64, mass: f64 },
    Gaussian { a: f64, mass: f64 },
    Sech { mass: f64 },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl DensityComponent {
    pub fn uniform(a: f64) -> Self {
        DensityComponent::Uniform { a, mass: 1.0 }
    }

    pub fn gaussian(a: f64) -> Self {
        DensityComponent::Gaussian { a, mass: 1.0 }
    }

    pub fn sech() -> Self {
        DensityComponent::Sech { mass: 1.0 }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(SpectralError::InvalidComponent(msg));
        match self {
            DensityComponent::Uniform { a, mass } | DensityComponent::Gaussian { a, mass } => {
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("scale a = {a} must be positive"));
                }
                if !(mass.is_finite() && *mass > 0.0) {
                    return bad(format!("mass {mass} must be positive"));
                }
            }
            DensityComponent::Sech { mass } => {
                if !(mass.is_finite() && *mass > 0.0) {
                    return bad(format!("mass {mass} must be positive"));
                }
            }
            DensityComponent::Tabulated { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return bad(format!(
                        "tabulated density needs matching grid/values with at least 2 points (got {} and {})",
                        grid.len(),
                        values.len()
                    ));
                }
                if !grid.windows(2).all(|w| w[0] < w[1]) || grid.iter().any(|g| !g.is_finite()) {
                    return bad("tabulated grid must be finite and strictly increasing".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("tabulated values must be finite and nonnegative".into());
                }
                if values.iter().all(|v| *v == 0.0) {
                    return bad("tabulated density is identically zero".into());
                }
            }
        }
        Ok(())
    }

    /// Total mass of the component.
    pub fn mass(&self) -> f64 {
        match self {
            DensityComponent::Uniform { mass, .. }
            | DensityComponent::Gaussian { mass, .. }
            | DensityComponent::Sech { mass } => *mass,
            DensityComponent::Tabulated { grid, values } => grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
                .sum(),
        }
    }

    /// Largest `Δ` such that `∫ e^{4πΔ'|λ|} dρ < ∞` for every `Δ' < Δ`.
    pub fn half_width(&self) -> f64 {
        match self {
            DensityComponent::Uniform { .. } | DensityComponent::Gaussian { .. } => f64::INFINITY,
            DensityComponent::Sech { .. } => 0.25,
            DensityComponent::Tabulated { grid, values } => tabulated_half_width(grid, values),
        }
    }

    fn is_symmetric(&self) -> bool {
        match self {
            DensityComponent::Tabulated { grid, values } => {
                let n = grid.len();
                let scale = grid.iter().fold(1.0f64, |m, g| m.max(g.abs()));
                let vscale = values.iter().fold(0.0f64, |m, v| m.max(*v));
                (0..n).all(|i| {
                    (grid[i] + grid[n - 1 - i]).abs() <= SYMMETRY_TOL * scale
                        && (values[i] - values[n - 1 - i]).abs() <= SYMMETRY_TOL * vscale
                })
            }
            _ => true,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            DensityComponent::Uniform { a, mass } => DensityComponent::Uniform { a: *a, mass: mass * factor },
            DensityComponent::Gaussian { a, mass } => DensityComponent::Gaussian { a: *a, mass: mass * factor },
            DensityComponent::Sech { mass } => DensityComponent::Sech { mass: mass * factor },
            DensityComponent::Tabulated { grid, values } => DensityComponent::Tabulated {
                grid: grid.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }
}

/// Decay-rate estimate for a tabulated density: fit `log v ≈ c - κ|λ|` on the
/// outer 20% of each side of the grid and return `κ / 4π`, rounded down to
/// three significant digits. Densities that vanish at both ends are treated as
/// compactly supported.
fn tabulated_half_width(grid: &[f64], values: &[f64]) -> f64 {
    let n = grid.len();
    if values[0] == 0.0 && values[n - 1] == 0.0 {
        return f64::INFINITY;
    }
    let outer = ((n as f64) * 0.2).ceil().max(2.0) as usize;
    let outer = outer.min(n);
    let mut rates = Vec::new();
    for side in [&(n - outer..n).collect::<Vec<_>>(), &(0..outer).rev().collect::<Vec<_>>()] {
        let pts: Vec<(f64, f64)> = side
            .iter()
            .filter(|&&i| values[i] > 0.0)
            .map(|&i| (grid[i].abs(), values[i].ln()))
            .collect();
        if values[side[side.len() - 1]] == 0.0 && pts.len() < 2 {
            continue;
        }
        if pts.len() < 2 {
            return 0.0;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx <= 0.0 {
            return 0.0;
        }
        rates.push(-sxy / sxx);
    }
    let Some(kappa) = rates.into_iter().reduce(f64::min) else {
        return f64::INFINITY;
    };
    if kappa <= 0.0 {
        return 0.0;
    }
    round_down_3(kappa / (4.0 * PI))
}

fn round_down_3(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let mag = 10f64.powi(x.log10().floor() as i32 - 2);
    (x / mag).floor() * mag
}

/// How a measure fails to produce a non-degenerate process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    /// One atom: a GAF whose zeros form a single random horizontal line.
    SingleAtom { lambda: f64, mass: f64 },
    /// `c(δ_q + δ_{-q})`: degenerate for symmetric GAFs (all zeros real).
    SymmetricPair { q: f64, mass: f64 },
}

/// A finite positive measure on the frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    densities: Vec<DensityComponent>,
    total_mass: f64,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>, densities: Vec<DensityComponent>) -> Result<Self> {
        if atoms.is_empty() && densities.is_empty() {
            return Err(SpectralError::Empty);
        }
        for a in &atoms {
            if !(a.lambda.is_finite() && a.mass.is_finite() && a.mass > 0.0) {
                return Err(SpectralError::InvalidAtom { lambda: a.lambda, mass: a.mass });
            }
        }
        for d in &densities {
            d.check()?;
        }
        let total_mass = atoms.iter().map(|a| a.mass).sum::<f64>() + densities.iter().map(|d| d.mass()).sum::<f64>();
        if !(total_mass > 0.0) {
            return Err(SpectralError::Empty);
        }
        Ok(Self { atoms, densities, total_mass })
    }

    pub fn from_density(density: DensityComponent) -> Result<Self> {
        Self::new(Vec::new(), vec![density])
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, Vec::new())
    }

    /// `(1/2a) χ_[-a,a]`: the Paley–Wiener (sinc kernel) measure.
    pub fn paley_wiener(a: f64) -> Result<Self> {
        Self::from_density(DensityComponent::uniform(a))
    }

    /// `exp(-λ²/a²)/(a√π)`: the Fock–Bargmann (Gaussian kernel) measure.
    pub fn fock_bargmann(a: f64) -> Result<Self> {
        Self::from_density(DensityComponent::gaussian(a))
    }

    /// `sech(πλ)`: the exponential-spectrum measure, valid for `|Im z| < 1/4`.
    pub fn sech() -> Result<Self> {
        Self::from_density(DensityComponent::sech())
    }

    /// `mass (δ_q + δ_{-q})`.
    pub fn two_atom(q: f64, mass: f64) -> Result<Self> {
        Self::from_atoms(vec![Atom { lambda: -q, mass }, Atom { lambda: q, mass }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityComponent] {
        &self.densities
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Multiply the whole measure by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom { lambda: a.lambda, mass: a.mass * factor }).collect(),
            densities: self.densities.iter().map(|d| d.scaled(factor)).collect(),
            total_mass: self.total_mass * factor,
        }
    }

    /// Sum of two measures.
    pub fn plus(&self, other: &SpectralMeasure) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut densities = self.densities.clone();
        densities.extend(other.densities.iter().cloned());
        Self { atoms, densities, total_mass: self.total_mass + other.total_mass }
    }

    /// Half-width `Δ` of the widest strip on which the kernel is defined.
    pub fn half_width(&self) -> f64 {
        self.densities.iter().map(|d| d.half_width()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.atoms.iter().fold(1.0f64, |m, a| m.max(a.lambda.abs()));
        let mscale = self.atoms.iter().fold(0.0f64, |m, a| m.max(a.mass));
        let atoms_ok = self.atoms.iter().all(|a| {
            self.atoms.iter().any(|b| {
                (a.lambda + b.lambda).abs() <= SYMMETRY_TOL * scale && (a.mass - b.mass).abs() <= SYMMETRY_TOL * mscale
            })
        });
        atoms_ok && self.densities.iter().all(|d| d.is_symmetric())
    }

    pub fn degeneracy(&self) -> Degeneracy {
        if !self.densities.is_empty() {
            return Degeneracy::None;
        }
        match self.atoms.as_slice() {
            [a] => Degeneracy::SingleAtom { lambda: a.lambda, mass: a.mass },
            [a, b] => {
                let q = a.lambda.abs().max(b.lambda.abs());
                let symmetric = (a.lambda + b.lambda).abs() <= SYMMETRY_TOL * q.max(1.0)
                    && (a.mass - b.mass).abs() <= SYMMETRY_TOL * a.mass.max(b.mass);
                if symmetric && q > 0.0 {
                    Degeneracy::SymmetricPair { q, mass: a.mass }
                } else {
                    Degeneracy::None
                }
            }
            _ => Degeneracy::None,
        }
    }

    /// Check the band against the measure's exponential-moment condition.
    pub fn validate(&self, strip: &StripSpec) -> ValidationReport {
        let half_width = self.half_width();
        let height = strip.height();
        let mut problems = Vec::new();
        if !(height < half_width) {
            problems.push(format!(
                "exponential moment ∫exp(4π·{height}|λ|)dρ diverges: band height {height} ≥ half-width {half_width}"
            ));
        }
        ValidationReport {
            valid: problems.is_empty(),
            symmetric: self.is_symmetric(),
            degeneracy: self.degeneracy(),
            half_width,
            band_height: height,
            problems,
        }
    }

    /// `∫ λ^k exp(2πi t λ) dρ(λ)` with an error estimate.
    pub fn moment_integral(&self, k: u32, t: Complex64) -> Result<(Complex64, f64)> {
        let limit = 2.0 * self.half_width();
        if !(t.im.abs() < limit) {
            return Err(SpectralError::ArgumentOutsideStrip { t, limit });
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for a in &self.atoms {
            total += a.mass * a.lambda.powi(k as i32) * cis_lambda(t, a.lambda);
        }
        for d in &self.densities {
            let (v, e) = component_integral(d, k, t)?;
            total += v;
            err += e;
        }
        Ok((total, err))
    }

    /// Exponential moment `m_k(y) = ∫ λ^k e^{-4πyλ} dρ(λ)`, so that
    /// `ψ = m_0`, `ψ' = -4π m_1`, `ψ'' = (4π)² m_2`.
    pub fn exp_moment(&self, k: u32, y: f64) -> Result<f64> {
        let (v, _) = self.moment_integral(k, Complex64::new(0.0, 2.0 * y))?;
        Ok(v.re)
    }

    /// Covariance function `r(t) = ∫ exp(2πi t λ) dρ(λ)` for `|Im t| < 2Δ`.
    pub fn covariance(&self, t: Complex64) -> Result<Complex64> {
        Ok(self.moment_integral(0, t)?.0)
    }

    /// Nodes and weights approximating the measure, `n_modes` nodes per
    /// continuous component (atoms pass through unchanged), sorted by
    /// frequency. `height` is the largest `|Im z|` at which the discretized
    /// kernel will be used; it sets the truncation of unbounded components.
    pub fn discretize(&self, n_modes: usize, height: f64) -> Result<Vec<SpectralNode>> {
        if !(height.abs() < self.half_width()) {
            return Err(SpectralError::OutsideStrip { y_min: -height.abs(), y_max: height.abs(), half_width: self.half_width() });
        }
        let n = n_modes.max(2);
        let mut nodes: Vec<SpectralNode> =
            self.atoms.iter().map(|a| SpectralNode { lambda: a.lambda, weight: a.mass }).collect();
        for d in &self.densities {
            discretize_component(d, n, height.abs(), &mut nodes);
        }
        nodes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Ok(nodes)
    }

    /// Parse the JSON measure document
    /// `{"atoms":[{"lambda":..,"mass":..}], "densities":[{"family":"uniform","a":..}, ...]}`.
    ///
    /// Tabulated densities given by a `csv` path are resolved relative to
    /// `base_dir` when the path is relative.
    pub fn from_json_str(json: &str, base_dir: Option<&Path>) -> Result<Self> {
        let doc: MeasureDoc = serde_json::from_str(json).map_err(|e| SpectralError::Parse(e.to_string()))?;
        doc.into_measure(base_dir)
    }

    pub fn from_json_value(value: &serde_json::Value, base_dir: Option<&Path>) -> Result<Self> {
        let doc: MeasureDoc =
            serde_json::from_value(value.clone()).map_err(|e| SpectralError::Parse(e.to_string()))?;
        doc.into_measure(base_dir)
    }

    /// JSON form with tabulated densities inlined.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(MeasureDoc::from(self)).expect("measure document serializes")
    }
}

impl Serialize for SpectralMeasure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = MeasureDoc::deserialize(deserializer)?;
        doc.into_measure(None).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasureDoc {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    densities: Vec<DensityDoc>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
enum DensityDoc {
    Uniform {
        a: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    Gaussian {
        a: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    Sech {
        #[serde(default = "one")]
        mass: f64,
    },
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    },
}

impl MeasureDoc {
    fn into_measure(self, base_dir: Option<&Path>) -> Result<SpectralMeasure> {
        let mut densities = Vec::with_capacity(self.densities.len());
        for d in self.densities {
            densities.push(match d {
                DensityDoc::Uniform { a, mass } => DensityComponent::Uniform { a, mass },
                DensityDoc::Gaussian { a, mass } => DensityComponent::Gaussian { a, mass },
                DensityDoc::Sech { mass } => DensityComponent::Sech { mass },
                DensityDoc::Tabulated { grid, values, csv } => match (grid, values, csv) {
                    (Some(grid), Some(values), None) => DensityComponent::Tabulated { grid, values },
                    (None, None, Some(path)) => {
                        let path = match base_dir {
                            Some(dir) if Path::new(&path).is_relative() => dir.join(path),
                            _ => Path::new(&path).to_path_buf(),
                        };
                        let (grid, values) = read_two_column_csv(&path)?;
                        DensityComponent::Tabulated { grid, values }
                    }
                    _ => {
                        return Err(SpectralError::Parse(
                            "tabulated density needs either `grid` and `values` or a `csv` path".into(),
                        ))
                    }
                },
            });
        }
        SpectralMeasure::new(self.atoms, densities)
    }
}

impl From<&SpectralMeasure> for MeasureDoc {
    fn from(m: &SpectralMeasure) -> Self {
        MeasureDoc {
            atoms: m.atoms.clone(),
            densities: m
                .densities
                .iter()
                .map(|d| match d {
                    DensityComponent::Uniform { a, mass } => DensityDoc::Uniform { a: *a, mass: *mass },
                    DensityComponent::Gaussian { a, mass } => DensityDoc::Gaussian { a: *a, mass: *mass },
                    DensityComponent::Sech { mass } => DensityDoc::Sech { mass: *mass },
                    DensityComponent::Tabulated { grid, values } => DensityDoc::Tabulated {
                        grid: Some(grid.clone()),
                        values: Some(values.clone()),
                        csv: None,
                    },
                })
                .collect(),
        }
    }
}

fn read_two_column_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| SpectralError::Parse(format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
            return Err(SpectralError::Parse(format!("{}:{}: expected two columns", path.display(), lineno + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(v)) => {
                grid.push(x);
                values.push(v);
            }
            // header row
            _ if grid.is_empty() => continue,
            _ => {
                return Err(SpectralError::Parse(format!("{}:{}: not a number", path.display(), lineno + 1)));
            }
        }
    }
    Ok((grid, values))
}

/// The horizontal band `[y_min, y_max]` of a strip `|Im z| < half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    /// `f64::INFINITY` for entire processes; serialized as `null`.
    #[serde(with = "infinite_as_null")]
    pub half_width: f64,
    pub y_min: f64,
    pub y_max: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl StripSpec {
    pub fn new(half_width: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let out = SpectralError::OutsideStrip { y_min, y_max, half_width };
        if !(half_width > 0.0) || !(y_min < y_max) || !(y_min > -half_width) || !(y_max < half_width) {
            return Err(out);
        }
        Ok(Self { half_width, y_min, y_max })
    }

    /// Band on the strip of the given measure.
    pub fn for_measure(measure: &SpectralMeasure, y_min: f64, y_max: f64) -> Result<Self> {
        Self::new(measure.half_width(), y_min, y_max)
    }

    /// `Δ₁ = max(|y_min|, |y_max|)`.
    pub fn height(&self) -> f64 {
        self.y_min.abs().max(self.y_max.abs())
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.y_min && y <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub symmetric: bool,
    pub degeneracy: Degeneracy,
    #[serde(with = "infinite_as_null")]
    pub half_width: f64,
    pub band_height: f64,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_degenerate(&self) -> bool {
        self.degeneracy != Degeneracy::None
    }

    pub fn into_result(self) -> Result<Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(SpectralError::OutsideStrip {
                y_min: -self.band_height,
                y_max: self.band_height,
                half_width: self.half_width,
            })
        }
    }
}

/// Quadrature node of a discretized measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralNode {
    pub lambda: f64,
    pub weight: f64,
}

/// Evaluates `r(t)` and `K(z, w) = r(z - w̄)` for a measure on a strip.
#[derive(Debug, Clone, Copy)]
pub struct KernelEvaluator<'a> {
    measure: &'a SpectralMeasure,
    strip: StripSpec,
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(measure: &'a SpectralMeasure, strip: StripSpec) -> Result<Self> {
        measure.validate(&strip).into_result()?;
        Ok(Self { measure, strip })
    }

    pub fn measure(&self) -> &'a SpectralMeasure {
        self.measure
    }

    pub fn strip(&self) -> StripSpec {
        self.strip
    }

    pub fn covariance(&self, t: Complex64) -> Result<Complex64> {
        self.measure.covariance(t)
    }

    pub fn kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.measure.covariance(z - w.conj())
    }
}

/// Anything that can serve as a covariance kernel `K(z, w) = E f(z) conj(f(w))`.
pub trait Kernel: Sync {
    fn kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64>;

    /// Closed band `[y_min, y_max]` the kernel may be evaluated on, if limited.
    fn band(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Kernel for KernelEvaluator<'_> {
    fn kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        KernelEvaluator::kernel(self, z, w)
    }

    fn band(&self) -> Option<(f64, f64)> {
        Some((self.strip.y_min, self.strip.y_max))
    }
}

impl<F> Kernel for F
where
    F: Fn(Complex64, Complex64) -> Complex64 + Sync,
{
    fn kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        Ok(self(z, w))
    }
}

#[inline]
fn cis_lambda(t: Complex64, lambda: f64) -> Complex64 {
    // exp(2πi t λ)
    let arg = 2.0 * PI * lambda;
    Complex64::from_polar((-arg * t.im).exp(), arg * t.re)
}

/// `exp(2πi t λ) / cosh(πλ)` with the exponents combined, so that it stays
/// finite where each factor alone would overflow.
fn sech_cis(t: Complex64, lambda: f64) -> Complex64 {
    let a = PI * lambda.abs();
    let modulus = 2.0 * (-2.0 * PI * lambda * t.im - a).exp() / (1.0 + (-2.0 * a).exp());
    Complex64::from_polar(modulus, 2.0 * PI * lambda * t.re)
}

fn component_integral(d: &DensityComponent, k: u32, t: Complex64) -> Result<(Complex64, f64)> {
    match d {
        DensityComponent::Gaussian { a, mass } => {
            // Shift the contour by iπa²t: the remaining integrand is a polynomial
            // against exp(-x²), integrated exactly by a short Hermite rule.
            let rule = gauss_hermite(8);
            let shift = Complex64::new(0.0, PI * a * a) * t;
            let sum: Complex64 = rule.iter().map(|(x, w)| w * (a * x + shift).powu(k)).sum();
            let value = mass * (-(PI * a * t) * (PI * a * t)).exp() * sum / PI.sqrt();
            Ok((value, 0.0))
        }
        DensityComponent::Uniform { a, mass } => {
            let density = mass / (2.0 * a);
            let m = 2.0 * PI * t.norm() * a;
            let mut n = ((1.5 * m) as usize + 16 + k as usize).next_power_of_two();
            let eval = |n: usize| -> (Complex64, f64) {
                let rule = gauss_legendre(n);
                let mut s = Complex64::new(0.0, 0.0);
                let mut scale = 0.0;
                for (x, w) in rule.iter() {
                    let l = a * x;
                    let v = l.powi(k as i32) * cis_lambda(t, l);
                    s += w * v;
                    scale += w * v.norm();
                }
                (s * density * a, scale * density * a)
            };
            let (mut prev, _) = eval(n);
            loop {
                n *= 2;
                let (cur, scale) = eval(n);
                let err = (cur - prev).norm();
                if err <= INTEGRAL_TOL * scale.max(f64::MIN_POSITIVE) || err == 0.0 {
                    return Ok((cur, err));
                }
                if n >= 1 << 16 {
                    return Err(SpectralError::NoConvergence { estimate: err / scale });
                }
                prev = cur;
            }
        }
        DensityComponent::Sech { mass } => {
            let kappa = PI * (1.0 - 2.0 * t.im.abs());
            let lambda_max = tail_cutoff(kappa, k, 1e-17);
            let scale_param = 1.0 / PI;
            let s_max = (lambda_max / scale_param).asinh();
            let eval = |n: usize| -> (Complex64, f64) {
                let rule = sinh_trapezoid(n, s_max, scale_param);
                let mut s = Complex64::new(0.0, 0.0);
                let mut scale = 0.0;
                for (l, w) in rule.iter() {
                    let v = l.powi(k as i32) * sech_cis(t, l);
                    s += w * v;
                    scale += w * v.norm();
                }
                (s * *mass, scale * *mass)
            };
            let mut h = 0.25 / (1.0 + 2.0 * t.re.abs());
            let n_of = |h: f64| ((2.0 * s_max / h).ceil() as usize + 1) | 1;
            let (mut prev, _) = eval(n_of(h));
            loop {
                h *= 0.5;
                let (cur, scale) = eval(n_of(h));
                let err = (cur - prev).norm();
                if err <= INTEGRAL_TOL * scale.max(f64::MIN_POSITIVE) || err == 0.0 {
                    return Ok((cur, err));
                }
                if h < 1e-5 {
                    return Err(SpectralError::NoConvergence { estimate: err / scale });
                }
                prev = cur;
            }
        }
        DensityComponent::Tabulated { grid, values } => {
            let mut total = Complex64::new(0.0, 0.0);
            let mut err_total = 0.0;
            for (g, v) in grid.windows(2).zip(values.windows(2)) {
                if v[0] == 0.0 && v[1] == 0.0 {
                    continue;
                }
                let (lo, hi) = (g[0], g[1]);
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let m = 2.0 * PI * t.norm() * half;
                let eval = |n: usize| -> (Complex64, f64) {
                    let rule = gauss_legendre(n);
                    let mut s = Complex64::new(0.0, 0.0);
                    let mut scale = 0.0;
                    for (x, w) in rule.iter() {
                        let l = mid + half * x;
                        let dens = v[0] + (v[1] - v[0]) * (x + 1.0) * 0.5;
                        let val = dens * l.powi(k as i32) * cis_lambda(t, l);
                        s += w * val;
                        scale += w * val.norm();
                    }
                    (s * half, scale * half)
                };
                let mut n = ((1.5 * m) as usize + 4 + k as usize).next_power_of_two();
                let (mut prev, _) = eval(n);
                loop {
                    n *= 2;
                    let (cur, scale) = eval(n);
                    let err = (cur - prev).norm();
                    if err <= INTEGRAL_TOL * scale.max(f64::MIN_POSITIVE) || err == 0.0 {
                        total += cur;
                        err_total += err;
                        break;
                    }
                    if n >= 1 << 16 {
                        return Err(SpectralError::NoConvergence { estimate: err / scale });
                    }
                    prev = cur;
                }
            }
            Ok((total, err_total))
        }
    }
}

/// Smallest `Λ` with `2 Λ^k e^{-κΛ} / κ < eps`.
fn tail_cutoff(kappa: f64, k: u32, eps: f64) -> f64 {
    let mut lambda = 1.0f64;
    for _ in 0..50 {
        let next = ((k as f64) * lambda.max(1.0).ln() + (2.0 / (kappa * eps)).ln()) / kappa;
        if (next - lambda).abs() < 1e-9 * next {
            return next.max(1.0);
        }
        lambda = next;
    }
    lambda.max(1.0)
}

fn discretize_component(d: &DensityComponent, n: usize, height: f64, out: &mut Vec<SpectralNode>) {
    match d {
        DensityComponent::Uniform { a, mass } => {
            let rule = gauss_legendre(n);
            let scale = mass / 2.0;
            out.extend(rule.iter().map(|(x, w)| SpectralNode { lambda: a * x, weight: w * scale }));
        }
        DensityComponent::Gaussian { a, mass } => {
            // Sinh-mapped trapezoid: near-uniform weights in the bulk, so
            // the effective number of modes grows linearly with n.
            let kappa = 4.0 * PI * height.abs() * a;
            let log_eps = (2.0 / TAIL_TOL).ln();
            let x_max = 0.5 * (kappa + (kappa * kappa + 4.0 * log_eps).sqrt());
            let rule = sinh_trapezoid(n, x_max.asinh(), 1.0);
            let scale = mass / PI.sqrt();
            out.extend(rule.iter().map(|(x, w)| SpectralNode {
                lambda: a * x,
                weight: w * scale * (-x * x).exp(),
            }));
        }
        DensityComponent::Sech { mass } => {
            let kappa = PI * (1.0 - 4.0 * height);
            let lambda_max = tail_cutoff(kappa, 0, TAIL_TOL);
            let scale_param = 1.0 / PI;
            let rule = sinh_trapezoid(n, (lambda_max / scale_param).asinh(), scale_param);
            out.extend(
                rule.iter().map(|(l, w)| SpectralNode { lambda: l, weight: mass * w / (PI * l).cosh() }),
            );
        }
        DensityComponent::Tabulated { grid, values } => {
            let segments = grid.len() - 1;
            let per = n.div_ceil(segments).max(2);
            let rule = gauss_legendre(per);
            for (g, v) in grid.windows(2).zip(values.windows(2)) {
                if v[0] == 0.0 && v[1] == 0.0 {
                    continue;
                }
                let mid = 0.5 * (g[0] + g[1]);
                let half = 0.5 * (g[1] - g[0]);
                out.extend(rule.iter().map(|(x, w)| SpectralNode {
                    lambda: mid + half * x,
                    weight: w * half * (v[0] + (v[1] - v[0]) * (x + 1.0) * 0.5),
                }));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform() -> SpectralMeasure {
        SpectralMeasure::paley_wiener(1.0).unwrap()
    }

    #[test]
    fn validation_examples() {
        let strip = StripSpec::new(f64::INFINITY, -5.0, 5.0).unwrap();
        let r = uniform().validate(&strip);
        assert!(r.valid && r.symmetric && !r.is_degenerate());

        let two = SpectralMeasure::two_atom(1.0, 0.5).unwrap();
        let r = two.validate(&StripSpec::new(f64::INFINITY, -0.7, 0.2).unwrap());
        assert!(r.valid && r.symmetric && r.is_degenerate());
        assert_eq!(r.degeneracy, Degeneracy::SymmetricPair { q: 1.0, mass: 0.5 });

        let sech = SpectralMeasure::sech().unwrap();
        let r = sech.validate(&StripSpec::new(f64::INFINITY, -0.3, 0.3).unwrap());
        assert!(!r.valid);
        assert_eq!(r.half_width, 0.25);
        assert!(StripSpec::for_measure(&sech, -0.3, 0.3).is_err());
    }

    #[test]
    fn empty_and_bad_inputs_rejected() {
        assert_eq!(SpectralMeasure::new(vec![], vec![]), Err(SpectralError::Empty));
        assert!(SpectralMeasure::from_atoms(vec![Atom { lambda: 1.0, mass: 0.0 }]).is_err());
        assert!(SpectralMeasure::from_density(DensityComponent::Tabulated {
            grid: vec![0.0, 0.0, 1.0],
            values: vec![1.0, 1.0, 1.0]
        })
        .is_err());
        assert!(SpectralMeasure::from_density(DensityComponent::Tabulated {
            grid: vec![0.0, 1.0],
            values: vec![1.0, -1.0]
        })
        .is_err());
    }

    #[test]
    fn single_atom_is_degenerate_but_asymmetric() {
        let m = SpectralMeasure::from_atoms(vec![Atom { lambda: 0.7, mass: 2.0 }]).unwrap();
        assert_eq!(m.degeneracy(), Degeneracy::SingleAtom { lambda: 0.7, mass: 2.0 });
        assert!(!m.is_symmetric());
    }

    #[test]
    fn uniform_moments() {
        let m = uniform();
        assert_relative_eq!(m.exp_moment(0, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(m.exp_moment(2, 0.0).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
        let v: f64 = 0.4 * PI;
        assert_relative_eq!(m.exp_moment(0, 0.1).unwrap(), v.sinh() / v, max_relative = 1e-13);
        assert!((m.exp_moment(0, 0.1).unwrap() - 1.28477).abs() < 1e-5);
    }

    #[test]
    fn covariance_examples() {
        let m = uniform();
        assert_relative_eq!(m.covariance(Complex64::new(0.0, 0.0)).unwrap().re, 1.0, max_relative = 1e-14);
        let r = m.covariance(Complex64::new(0.25, 0.0)).unwrap();
        assert_relative_eq!(r.re, 2.0 / PI, max_relative = 1e-13);
        assert!(r.im.abs() < 1e-15);

        let g = SpectralMeasure::fock_bargmann(1.0).unwrap();
        for x in [0.0, 0.3, 1.1] {
            let r = g.covariance(Complex64::new(x, 0.0)).unwrap();
            assert_relative_eq!(r.re, (-PI * PI * x * x).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn covariance_outside_strip_is_rejected() {
        let sech = SpectralMeasure::sech().unwrap();
        assert!(matches!(
            sech.covariance(Complex64::new(0.0, 0.6)),
            Err(SpectralError::ArgumentOutsideStrip { .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        let m = uniform();
        let strip = StripSpec::for_measure(&m, -0.3, 0.3).unwrap();
        let k = KernelEvaluator::new(&m, strip).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        assert_relative_eq!(k.kernel(zero, zero).unwrap().re, 1.0, max_relative = 1e-14);
        let z = Complex64::new(0.0, 0.1);
        assert_relative_eq!(k.kernel(z, z).unwrap().re, m.exp_moment(0, 0.1).unwrap(), max_relative = 1e-14);

        let g = SpectralMeasure::fock_bargmann(1.3).unwrap();
        let kg = KernelEvaluator::new(&g, StripSpec::for_measure(&g, -0.3, 0.3).unwrap()).unwrap();
        let (z, w) = (Complex64::new(0.2, 0.1), Complex64::new(-0.4, 0.25));
        let d = z - w.conj();
        let expected = (-(PI * 1.3 * d) * (PI * 1.3 * d)).exp();
        assert!((kg.kernel(z, w).unwrap() - expected).norm() < 1e-13 * expected.norm());
    }

    #[test]
    fn discretize_examples() {
        let two = SpectralMeasure::two_atom(1.0, 0.5).unwrap();
        assert_eq!(
            two.discretize(64, 0.3).unwrap(),
            vec![SpectralNode { lambda: -1.0, weight: 0.5 }, SpectralNode { lambda: 1.0, weight: 0.5 }]
        );

        let nodes = uniform().discretize(64, 0.3).unwrap();
        assert_eq!(nodes.len(), 64);
        let rule = gauss_legendre(64);
        for (n, x) in nodes.iter().zip(rule.nodes.iter()) {
            assert_eq!(n.lambda, *x);
        }
        let sum: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_relative_eq!(sum, 1.0, max_relative = 1e-12);

        let sech = SpectralMeasure::sech().unwrap().discretize(128, 0.0).unwrap();
        let sum: f64 = sech.iter().map(|n| n.weight).sum();
        assert!((sum - 1.0).abs() < 1e-10);
        assert_symmetric_nodes(&sech);
    }

    fn assert_symmetric_nodes(nodes: &[SpectralNode]) {
        let n = nodes.len();
        for i in 0..n {
            assert_eq!(nodes[i].lambda, -nodes[n - 1 - i].lambda);
            assert_eq!(nodes[i].weight, nodes[n - 1 - i].weight);
        }
    }

    #[test]
    fn gaussian_and_sech_discretizations_are_symmetric() {
        for m in [SpectralMeasure::fock_bargmann(1.0).unwrap(), SpectralMeasure::sech().unwrap()] {
            let nodes = m.discretize(97, 0.2).unwrap();
            assert_symmetric_nodes(&nodes);
            let sum: f64 = nodes.iter().map(|n| n.weight).sum();
            assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn tabulated_measure_matches_its_analytic_counterpart() {
        // Triangle density on [-1, 1]: mass 1, second moment 1/6.
        let grid: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 * 0.01).collect();
        let values: Vec<f64> = grid.iter().map(|x| 1.0 - x.abs()).collect();
        let m = SpectralMeasure::from_density(DensityComponent::Tabulated { grid, values }).unwrap();
        assert!(m.is_symmetric());
        assert_eq!(m.half_width(), f64::INFINITY);
        assert_relative_eq!(m.total_mass(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.exp_moment(0, 0.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.exp_moment(2, 0.0).unwrap(), 1.0 / 6.0, max_relative = 1e-12);
        let sum: f64 = m.discretize(400, 1.0).unwrap().iter().map(|n| n.weight).sum();
        assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn tabulated_half_width_from_exponential_tail() {
        // Samples of sech(πλ) on [-6, 6]: decay rate π, so Δ ≈ 1/4 (rounded down).
        let grid: Vec<f64> = (0..=240).map(|i| -6.0 + i as f64 * 0.05).collect();
        let values: Vec<f64> = grid.iter().map(|x| 1.0 / (PI * x).cosh()).collect();
        let m = SpectralMeasure::from_density(DensityComponent::Tabulated { grid, values }).unwrap();
        let hw = m.half_width();
        assert!(hw <= 0.25 && hw > 0.245, "half-width {hw}");
        assert!(!m.validate(&StripSpec::new(f64::INFINITY, -0.3, 0.3).unwrap()).valid);

        // A flat tail never decays: no band is admissible.
        let flat = SpectralMeasure::from_density(DensityComponent::Tabulated {
            grid: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            values: vec![1.0, 1.0, 1.0, 1.0, 1.0],
        })
        .unwrap();
        assert_eq!(flat.half_width(), 0.0);
        assert!(!flat.validate(&StripSpec::new(f64::INFINITY, -0.01, 0.01).unwrap()).valid);
    }

    #[test]
    fn json_round_trip_and_csv() {
        let json = r#"{"atoms":[{"lambda":1.0,"mass":0.25},{"lambda":-1.0,"mass":0.25}],
                       "densities":[{"family":"sech","mass":0.5}]}"#;
        let m = SpectralMeasure::from_json_str(json, None).unwrap();
        assert!(m.is_symmetric());
        assert_relative_eq!(m.total_mass(), 1.0);
        let back = SpectralMeasure::from_json_value(&m.to_json_value(), None).unwrap();
        assert_eq!(back, m);

        let dir = std::env::temp_dir().join(format!("gafzeros-spectral-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("tri.csv"), "lambda,value\n-1,0\n0,1\n1,0\n").unwrap();
        let m = SpectralMeasure::from_json_str(r#"{"densities":[{"family":"tabulated","csv":"tri.csv"}]}"#, Some(&dir))
            .unwrap();
        assert_relative_eq!(m.total_mass(), 1.0);
        assert!(SpectralMeasure::from_json_str(r#"{"densities":[{"family":"tabulated"}]}"#, None).is_err());
    }

    #[test]
    fn strip_spec_rules() {
        assert!(StripSpec::new(0.25, -0.2, 0.2).is_ok());
        assert!(StripSpec::new(0.25, 0.2, -0.2).is_err());
        assert!(StripSpec::new(0.25, -0.25, 0.2).is_err());
        let s = StripSpec::new(f64::INFINITY, -0.3, 0.1).unwrap();
        assert_eq!(s.height(), 0.3);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("null"));
        assert_eq!(serde_json::from_str::<StripSpec>(&json).unwrap(), s);
    }
}

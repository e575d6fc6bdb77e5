use std::path::Path;

use anyhow::{bail, Context, Result};
use gafzeros::densities::{Family, Which};
use gafzeros::spectral::SpectralMeasure;
use gafzeros::stats::{config_digest, mixture_measure};
use gafzeros::Kind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Density,
    Intensity,
    Sample,
    Zeros,
    Measure,
    Randomness,
    Verify,
    Tail,
    Figure1,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::Intensity => "intensity",
            Command::Sample => "sample",
            Command::Zeros => "zeros",
            Command::Measure => "measure",
            Command::Randomness => "randomness",
            Command::Verify => "verify",
            Command::Tail => "tail",
            Command::Figure1 => "figure1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MeasureSpec {
    /// `paley-wiener`, `fock-bargmann` or `sech`, with parameter `a`.
    Family { name: String, a: f64 },
    /// `mass (δ_q + δ_{-q})`.
    TwoAtom { q: f64, mass: f64 },
    /// `½ sech(πλ) + atom_mass (δ₁ + δ₋₁)`.
    Mixture { atom_mass: f64 },
    Custom { measure: SpectralMeasure },
}

impl MeasureSpec {
    pub fn parse(name: &str, param: Option<f64>) -> Result<Self> {
        Ok(match name {
            "two-atom" => MeasureSpec::TwoAtom { q: param.unwrap_or(1.0), mass: 0.5 },
            "mixture" => MeasureSpec::Mixture { atom_mass: param.unwrap_or(0.5) },
            other => {
                let a = param.unwrap_or(1.0);
                let family = Family::parse(other, a).with_context(|| format!("unknown family `{other}`"))?;
                MeasureSpec::Family { name: family.name().to_string(), a }
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let measure = SpectralMeasure::from_json_str(&text, path.parent())?;
        Ok(MeasureSpec::Custom { measure })
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            MeasureSpec::Family { name, a } => Family::parse(name, *a),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<SpectralMeasure> {
        Ok(match self {
            MeasureSpec::Family { .. } => self.family().context("unknown family")?.measure(),
            MeasureSpec::TwoAtom { q, mass } => SpectralMeasure::two_atom(*q, *mass)?,
            MeasureSpec::Mixture { atom_mass } => mixture_measure(*atom_mass)?,
            MeasureSpec::Custom { measure } => measure.clone(),
        })
    }

    /// A band well inside the strip of the measure.
    pub fn default_band(&self) -> Result<[f64; 2]> {
        let hw = self.build()?.half_width();
        let b = if hw.is_finite() { 0.3f64.min(0.8 * hw) } else { 0.3 };
        Ok([-b, b])
    }
}

/// Everything a run depends on. Results embed this together with its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub measure: MeasureSpec,
    pub kind: Kind,
    /// Horizontal band `[y_min, y_max]`.
    pub band: [f64; 2],
    /// Horizontal range for single-realization commands and intensity grids.
    pub x_range: [f64; 2],
    pub t_list: Vec<f64>,
    pub trials: usize,
    pub bins: usize,
    pub n_modes: usize,
    pub seed: u64,
    /// Trial index for `sample` and `zeros`.
    pub trial: u64,
    /// Density tables and figures: `L`, `S`, or `None` for both.
    pub which: Option<Which>,
    pub points: usize,
    pub nx: usize,
    pub ny: usize,
    pub step: f64,
}

impl ExperimentConfig {
    pub fn new(command: Command, measure: MeasureSpec) -> Result<Self> {
        let band = measure.default_band()?;
        Ok(Self {
            command,
            measure,
            kind: Kind::Gaf,
            band,
            x_range: [0.0, 10.0],
            t_list: vec![200.0],
            trials: 20,
            bins: 6,
            n_modes: 1024,
            seed: 0,
            trial: 0,
            which: None,
            points: 201,
            nx: 20,
            ny: 40,
            step: gafzeros::intensity::DEFAULT_STEP,
        })
    }

    pub fn digest(&self) -> String {
        config_digest(self)
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.band;
        if !(lo < hi) {
            bail!("band [{lo}, {hi}] is empty");
        }
        let hw = self.measure.build()?.half_width();
        if !(lo > -hw && hi < hw) {
            bail!("band [{lo}, {hi}] is outside the strip |y| < {hw}");
        }
        if !(self.x_range[0] < self.x_range[1]) {
            bail!("x range {:?} is empty", self.x_range);
        }
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        Ok(())
    }
}

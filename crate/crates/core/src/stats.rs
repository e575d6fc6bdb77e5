//! Empirical horizontal zero-counting measures and the ensemble experiments
//! built on them.
//!
//! `ν_T(Y) = n_f([0, T) × Y) / T` is recorded per trial as integer counts on
//! a fixed grid of height bins, so that measures over adjacent windows add up
//! exactly. For symmetric GAFs the real zeros are kept apart as an atom at 0.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::densities::{DensityError, HorizontalDensityPrediction};
use crate::exec::Schedule;
use crate::sampler::{auto_n_modes, Realization, Sampler, SamplerError};
use crate::spectral::{SpectralError, SpectralMeasure};
use crate::zeros::{grid_counts, real_zeros, winding_count, Holomorphic, Rect, ZeroError, ZeroOptions, ZeroSet, THIN_STRIP};
use crate::Kind;

pub const DEFAULT_BINS: usize = 40;
/// Variance floor, in units of the counting-noise estimate, above which the
/// limit is declared random.
pub const FLOOR_EXCESS: f64 = 10.0;
/// Accepted range for `Var ν_{T₁} / Var ν_{T₂}` relative to `T₂/T₁ = 4`,
/// rescaled for other ratios.
pub const DETERMINISTIC_RATIO: (f64, f64) = (3.0, 5.5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("bin edges must be finite and strictly increasing, got {0:?}")]
    InvalidBins(Vec<f64>),
    #[error("tiles {0:?} and {1:?} overlap")]
    OverlappingTiles(Rect, Rect),
    #[error("bin grids differ")]
    BinMismatch,
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("trial {trial}: {found} real zeros but only {cell} zeros in the axis cell over [{x0}, {x1})")]
    AxisMismatch { trial: u64, x0: f64, x1: f64, found: usize, cell: i64 },
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Height bins `[e₀, e₁), [e₁, e₂), …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Bins {
    edges: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Bins {
    type Error = StatsError;

    fn try_from(edges: Vec<f64>) -> Result<Self> {
        Self::new(edges)
    }
}

impl From<Bins> for Vec<f64> {
    fn from(b: Bins) -> Self {
        b.edges
    }
}

impl Bins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StatsError::InvalidBins(edges));
        }
        Ok(Self { edges })
    }

    /// `n` equal bins over `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        // Weighted form keeps the middle edge of a symmetric band exactly at 0.
        Self::new((0..=n).map(|i| (a * (n - i) as f64 + b * i as f64) / n as f64).collect())
    }

    /// The same bins with an extra edge at `y` (no-op if outside). An edge
    /// within rounding distance of `y` is moved onto it instead.
    pub fn split_at(&self, y: f64) -> Self {
        let mut edges = self.edges.clone();
        let tol = 1e-12 * (self.hi() - self.lo());
        if let Some(e) = edges.iter_mut().find(|e| (**e - y).abs() <= tol) {
            *e = y;
        } else if y > edges[0] && y < edges[edges.len() - 1] {
            edges.push(y);
            edges.sort_by(f64::total_cmp);
        }
        Self { edges }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// Index of the bin containing `y`.
    pub fn locate(&self, y: f64) -> Option<usize> {
        if !(y >= self.lo() && y < self.hi()) {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= y) - 1)
    }

    pub fn contains_axis(&self) -> bool {
        self.lo() <= 0.0 && 0.0 <= self.hi()
    }
}

/// Empirical `ν_T` on a bin grid. Real zeros of symmetric runs are counted
/// only in `real_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizontalMeasure {
    pub t: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub real_count: u64,
    pub masses: Vec<f64>,
    pub real_atom_mass: f64,
}

impl HorizontalMeasure {
    pub fn from_counts(t: f64, bins: &Bins, counts: Vec<u64>, real_count: u64) -> Result<Self> {
        if counts.len() != bins.len() {
            return Err(StatsError::BinMismatch);
        }
        if !(t > 0.0) {
            return Err(StatsError::Invalid(format!("window length must be positive, got {t}")));
        }
        let masses = counts.iter().map(|&c| c as f64 / t).collect();
        Ok(Self { t, edges: bins.edges.clone(), counts, real_count, masses, real_atom_mass: real_count as f64 / t })
    }

    pub fn bins(&self) -> Bins {
        Bins { edges: self.edges.clone() }
    }

    /// Continuous part plus the real atom.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.real_atom_mass
    }

    /// The measure over the union of two disjoint windows.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.edges != other.edges {
            return Err(StatsError::BinMismatch);
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Self::from_counts(self.t + other.t, &self.bins(), counts, self.real_count + other.real_count)
    }
}

/// `ν_T` from located zeros. The sets must tile `[x₀, x₀ + T)` without
/// overlap; zeros within `real_tol` of the axis go to the real atom when the
/// bins contain the axis.
pub fn horizontal_measure(sets: &[ZeroSet], bins: &Bins, real_tol: f64) -> Result<HorizontalMeasure> {
    let mut rects: Vec<Rect> = sets.iter().map(|s| s.rect).collect();
    rects.sort_by(|a, b| a.x0.total_cmp(&b.x0).then(a.y0.total_cmp(&b.y0)));
    for (i, a) in rects.iter().enumerate() {
        for b in &rects[i + 1..] {
            if a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1 {
                return Err(StatsError::OverlappingTiles(*a, *b));
            }
        }
    }
    let x0 = rects.iter().map(|r| r.x0).fold(f64::INFINITY, f64::min);
    let x1 = rects.iter().map(|r| r.x1).fold(f64::NEG_INFINITY, f64::max);
    let t = if rects.is_empty() { 1.0 } else { x1 - x0 };
    let mut counts = vec![0u64; bins.len()];
    let mut real = 0u64;
    for zero in sets.iter().flat_map(|s| &s.zeros) {
        let m = zero.multiplicity as u64;
        if bins.contains_axis() && zero.z.im.abs() <= real_tol {
            real += m;
        } else if let Some(i) = bins.locate(zero.z.im) {
            counts[i] += m;
        }
    }
    HorizontalMeasure::from_counts(t, bins, counts, real)
}

/// Deterministic content hash of a serializable configuration. Object keys
/// are sorted, so field order does not matter.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("json value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// One Monte Carlo experiment: `trials` independent realizations, each
/// observed over the nested windows `[0, T)` for every `T` in `t_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub measure: SpectralMeasure,
    pub kind: Kind,
    pub t_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Nodes per continuous component; 0 picks one from the truncation report.
    pub n_modes: usize,
    pub bins: Bins,
}

impl EnsembleConfig {
    pub fn digest(&self) -> String {
        config_digest(self)
    }

    fn validate(&self) -> Result<()> {
        if self.t_list.is_empty() || self.t_list[0] <= 0.0 || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StatsError::Invalid(format!("window lengths must be positive and increasing, got {:?}", self.t_list)));
        }
        if self.trials == 0 {
            return Err(StatsError::Invalid("at least one trial is needed".into()));
        }
        let hw = self.measure.half_width();
        if !(self.bins.lo() > -hw && self.bins.hi() < hw) {
            return Err(StatsError::Invalid(format!(
                "bins [{}, {}] leave the strip |y| < {hw}",
                self.bins.lo(),
                self.bins.hi()
            )));
        }
        Ok(())
    }

    /// Bins actually recorded: symmetric runs split the bin containing 0.
    pub fn effective_bins(&self) -> Bins {
        match self.kind {
            Kind::Symmetric => self.bins.split_at(0.0),
            Kind::Gaf => self.bins.clone(),
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        let height = self.bins.lo().abs().max(self.bins.hi().abs());
        let n = if self.n_modes == 0 {
            let t_max = self.t_list[self.t_list.len() - 1];
            auto_n_modes(&self.measure, &Rect::new(0.0, t_max, self.bins.lo(), self.bins.hi())?)?
        } else {
            self.n_modes
        };
        Ok(Sampler::new(&self.measure, self.kind, n, height)?)
    }
}

/// Per-trial measures, indexed `[trial][window]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub digest: String,
    pub config: EnsembleConfig,
    pub measures: Vec<Vec<HorizontalMeasure>>,
}

impl EnsembleRun {
    /// Summary over trials at window index `k`.
    pub fn summary(&self, k: usize) -> Result<EnsembleSummary> {
        let slice: Vec<HorizontalMeasure> = self.measures.iter().map(|m| m[k].clone()).collect();
        EnsembleSummary::from_measures(&self.digest, &slice)
    }

    pub fn last_summary(&self) -> Result<EnsembleSummary> {
        self.summary(self.config.t_list.len() - 1)
    }
}

/// Run every trial of an experiment.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleRun> {
    run_ensemble_with(config, Schedule::default())
}

pub fn run_ensemble_with(config: &EnsembleConfig, schedule: Schedule) -> Result<EnsembleRun> {
    config.validate()?;
    let sampler = config.sampler()?;
    let opts = ZeroOptions::default();
    let measures = schedule
        .map(config.trials, |trial| {
            let f = sampler.sample(config.seed, trial as u64);
            trial_measures(&f, config, &opts)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRun { digest: config.digest(), config: config.clone(), measures })
}

/// Measures of one realization over the nested windows of `config`.
pub fn trial_measures(f: &Realization, config: &EnsembleConfig, opts: &ZeroOptions) -> Result<Vec<HorizontalMeasure>> {
    let bins = config.effective_bins();
    let mut xs = vec![0.0];
    xs.extend_from_slice(&config.t_list);
    let symmetric = config.kind == Kind::Symmetric && f.conjugate_symmetric();
    // Symmetric functions vanish all along stretches of the real axis, so no
    // grid line may lie on it: the edge at 0 becomes a thin cell [-δ, δ).
    let mut ys = bins.edges().to_vec();
    let axis = if symmetric { ys.iter().position(|&y| y == 0.0) } else { None };
    match axis {
        Some(0) => ys[0] = THIN_STRIP,
        Some(i) if i == ys.len() - 1 => ys[i] = -THIN_STRIP,
        Some(i) => {
            ys[i] = THIN_STRIP;
            ys.insert(i, -THIN_STRIP);
        }
        None => {}
    }
    let cells = grid_counts(f, &xs, &ys, opts)?;
    let interior_axis = axis.filter(|&i| i > 0 && i < bins.len());
    let reals = match interior_axis {
        Some(_) => {
            let step = f.profile(0.0).1;
            real_zeros(f, 0.0, xs[xs.len() - 1], step, opts)?
        }
        None => Vec::new(),
    };

    let mut out = Vec::with_capacity(config.t_list.len());
    let mut counts = vec![0u64; bins.len()];
    let mut real_total = 0u64;
    for (j, row) in cells.iter().enumerate() {
        let (x0, x1) = (xs[j], xs[j + 1]);
        let negative = |n: i64| StatsError::Zeros(ZeroError::NotInteger { value: n as f64 });
        let to_u64 = |n: i64| u64::try_from(n).map_err(|_| negative(n));
        match interior_axis {
            Some(i) => {
                // Cells: bins below the axis, the axis cell, bins above.
                for b in 0..i - 1 {
                    counts[b] += to_u64(row[b])?;
                }
                for b in i..bins.len() {
                    counts[b] += to_u64(row[b + 1])?;
                }
                let found = reals.iter().filter(|&&x| x0 <= x && x < x1).count();
                let cell = row[i];
                let off_axis = cell - found as i64;
                if off_axis < 0 || off_axis % 2 != 0 {
                    return Err(StatsError::AxisMismatch { trial: f.trial, x0, x1, found, cell });
                }
                // Conjugate pairs hugging the axis: one zero on each side.
                counts[i - 1] += to_u64(row[i - 1])? + (off_axis / 2) as u64;
                counts[i] += (off_axis / 2) as u64;
                real_total += found as u64;
            }
            None => {
                for (b, &n) in row.iter().enumerate() {
                    counts[b] += to_u64(n)?;
                }
            }
        }
        out.push(HorizontalMeasure::from_counts(x1, &bins, counts.clone(), real_total)?);
    }
    Ok(out)
}

/// Per-bin mean and variance of `ν_T` across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub digest: String,
    pub t: f64,
    pub trials: usize,
    pub edges: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample variance (zero for a single trial).
    pub variance: Vec<f64>,
    pub real_mean: f64,
    pub real_variance: f64,
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

impl EnsembleSummary {
    pub fn from_measures(digest: &str, measures: &[HorizontalMeasure]) -> Result<Self> {
        let first = measures.first().ok_or_else(|| StatsError::Invalid("no trials to summarize".into()))?;
        if measures.iter().any(|m| m.edges != first.edges || m.t != first.t) {
            return Err(StatsError::BinMismatch);
        }
        let (mean, variance) = (0..first.masses.len()).map(|b| mean_var(measures.iter().map(move |m| m.masses[b]))).unzip();
        let (real_mean, real_variance) = mean_var(measures.iter().map(|m| m.real_atom_mass));
        Ok(Self {
            digest: digest.to_string(),
            t: first.t,
            trials: measures.len(),
            edges: first.edges.clone(),
            mean,
            variance,
            real_mean,
            real_variance,
        })
    }

    pub fn total_mean(&self) -> f64 {
        self.mean.iter().sum::<f64>() + self.real_mean
    }
}

/// Something with binned masses and a real atom to score against a prediction.
pub trait Binned {
    fn edges(&self) -> &[f64];
    fn bin_masses(&self) -> &[f64];
    fn atom_mass(&self) -> f64;
}

impl Binned for HorizontalMeasure {
    fn edges(&self) -> &[f64] {
        &self.edges
    }
    fn bin_masses(&self) -> &[f64] {
        &self.masses
    }
    fn atom_mass(&self) -> f64 {
        self.real_atom_mass
    }
}

impl Binned for EnsembleSummary {
    fn edges(&self) -> &[f64] {
        &self.edges
    }
    fn bin_masses(&self) -> &[f64] {
        &self.mean
    }
    fn atom_mass(&self) -> f64 {
        self.real_mean
    }
}

/// Empirical versus predicted horizontal measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub predicted: Vec<f64>,
    pub observed: Vec<f64>,
    pub relative_error: Vec<f64>,
    pub max_relative_error: f64,
    /// `Σ |observed − predicted|` over bins.
    pub l1: f64,
    /// `l1` over the predicted continuous mass.
    pub l1_relative: f64,
    pub predicted_atom: f64,
    pub observed_atom: f64,
    /// `None` when no atom is predicted.
    pub atom_relative_error: Option<f64>,
}

/// Predicted bin masses `∫_bin density dy` for a grid.
pub fn predicted_masses(prediction: &HorizontalDensityPrediction, edges: &[f64]) -> Result<Vec<f64>> {
    edges.windows(2).map(|w| prediction.bin_mass(w[0], w[1]).map_err(StatsError::from)).collect()
}

pub fn compare<E: Binned + ?Sized>(empirical: &E, prediction: &HorizontalDensityPrediction) -> Result<Comparison> {
    let edges = empirical.edges();
    let predicted = predicted_masses(prediction, edges)?;
    let observed = empirical.bin_masses().to_vec();
    if observed.len() != predicted.len() {
        return Err(StatsError::BinMismatch);
    }
    let relative_error: Vec<f64> = observed
        .iter()
        .zip(&predicted)
        .map(|(&o, &p)| if p > 0.0 { (o - p).abs() / p } else if o == 0.0 { 0.0 } else { f64::INFINITY })
        .collect();
    let l1: f64 = observed.iter().zip(&predicted).map(|(o, p)| (o - p).abs()).sum();
    let total: f64 = predicted.iter().sum();
    let axis = edges[0] <= 0.0 && 0.0 <= edges[edges.len() - 1];
    let predicted_atom = if axis { prediction.atom_at_zero } else { 0.0 };
    let observed_atom = empirical.atom_mass();
    let atom_relative_error = (predicted_atom > 0.0).then(|| (observed_atom - predicted_atom).abs() / predicted_atom);
    Ok(Comparison {
        max_relative_error: relative_error.iter().copied().fold(0.0, f64::max),
        predicted,
        observed,
        relative_error,
        l1,
        l1_relative: if total > 0.0 { l1 / total } else { l1 },
        predicted_atom,
        observed_atom,
        atom_relative_error,
    })
}

/// `ν_T([a, b))` per trial and window, from [`convergence_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub digest: String,
    pub t_list: Vec<f64>,
    /// `values[trial][window]`: total mass over the bins, real atom included.
    pub values: Vec<Vec<f64>>,
    /// Largest deviation, over trials, of the last value from the mean of the
    /// trial's second half of windows.
    pub diagnostic: f64,
}

pub fn convergence_run(config: &EnsembleConfig) -> Result<ConvergenceTable> {
    let run = run_ensemble(config)?;
    Ok(convergence_table(&run))
}

pub fn convergence_table(run: &EnsembleRun) -> ConvergenceTable {
    let values: Vec<Vec<f64>> = run.measures.iter().map(|ms| ms.iter().map(HorizontalMeasure::total_mass).collect()).collect();
    let diagnostic = values
        .iter()
        .map(|v| {
            let tail = &v[v.len() / 2..];
            let mean = tail.iter().sum::<f64>() / tail.len() as f64;
            (v[v.len() - 1] - mean).abs()
        })
        .fold(0.0, f64::max);
    ConvergenceTable { digest: run.digest.clone(), t_list: run.config.t_list.clone(), values, diagnostic }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DeterministicLimit,
    RandomLimit,
    Inconclusive,
}

/// Variance scaling of `ν_T` between a short and a long window. This is a
/// heuristic diagnostic, not a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub digest: String,
    pub t_short: f64,
    pub t_long: f64,
    pub trials: usize,
    /// Per-bin variances; the real atom, when recorded, is the last entry.
    pub variance_short: Vec<f64>,
    pub variance_long: Vec<f64>,
    /// Counting-noise estimate `mean / T_long` per bin.
    pub noise_long: Vec<f64>,
    /// `Σ Var_short / Σ Var_long`; pure counting noise gives `T_long / T_short`.
    pub variance_ratio: f64,
    /// `Σ Var_long / Σ noise_long`.
    pub floor_excess: f64,
    pub verdict: Verdict,
}

/// Run `config` and compare the first and last windows of `t_list`.
pub fn randomness_test(config: &EnsembleConfig) -> Result<RandomnessReport> {
    if config.t_list.len() < 2 {
        return Err(StatsError::Invalid("randomness test needs two window lengths".into()));
    }
    let run = run_ensemble(config)?;
    randomness_report(&run, 0, config.t_list.len() - 1)
}

pub fn randomness_report(run: &EnsembleRun, short: usize, long: usize) -> Result<RandomnessReport> {
    let s = run.summary(short)?;
    let l = run.summary(long)?;
    let with_atom = |v: &[f64], atom: f64| {
        let mut v = v.to_vec();
        if run.config.kind == Kind::Symmetric && run.config.effective_bins().contains_axis() {
            v.push(atom);
        }
        v
    };
    let variance_short = with_atom(&s.variance, s.real_variance);
    let variance_long = with_atom(&l.variance, l.real_variance);
    let noise_long: Vec<f64> = with_atom(&l.mean, l.real_mean).iter().map(|m| m / l.t).collect();
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let variance_ratio = sum(&variance_short) / sum(&variance_long);
    let floor_excess = sum(&variance_long) / sum(&noise_long);
    let scale = (l.t / s.t) / 4.0;
    let verdict = if floor_excess > FLOOR_EXCESS {
        Verdict::RandomLimit
    } else if variance_ratio >= DETERMINISTIC_RATIO.0 * scale && variance_ratio <= DETERMINISTIC_RATIO.1 * scale {
        Verdict::DeterministicLimit
    } else {
        Verdict::Inconclusive
    };
    Ok(RandomnessReport {
        digest: run.digest.clone(),
        t_short: s.t,
        t_long: l.t,
        trials: l.trials,
        variance_short,
        variance_long,
        noise_long,
        variance_ratio,
        floor_excess,
        verdict,
    })
}

/// `ν_T(h) = Σ_bins h(y_mid) ν_T(bin)` and its counting-noise estimate.
pub fn test_function_value<H: Fn(f64) -> f64>(m: &HorizontalMeasure, h: H) -> (f64, f64) {
    let mut value = h(0.0) * m.real_atom_mass;
    let mut var = h(0.0).powi(2) * m.real_atom_mass / m.t;
    for (w, &mass) in m.edges.windows(2).zip(&m.masses) {
        let v = h(0.5 * (w[0] + w[1]));
        value += v * mass;
        var += v * v * mass / m.t;
    }
    (value, var.sqrt())
}

/// Smooth test functions on a band: `cos(kπ(y − a)/(b − a))`, `k = 0..5`.
pub fn band_test_functions(a: f64, b: f64) -> Vec<impl Fn(f64) -> f64> {
    (0..5).map(move |k| move |y: f64| (k as f64 * std::f64::consts::PI * (y - a) / (b - a)).cos()).collect()
}

/// Weak-convergence surrogate: for each test function, the change of the
/// ensemble-mean `ν_T(h)` between the last two windows in units of its
/// counting-noise estimate.
pub fn weak_convergence_surrogate(run: &EnsembleRun) -> Result<Vec<f64>> {
    let k = run.config.t_list.len();
    if k < 2 {
        return Err(StatsError::Invalid("need at least two windows".into()));
    }
    let bins = run.config.effective_bins();
    let trials = run.measures.len() as f64;
    Ok(band_test_functions(bins.lo(), bins.hi())
        .iter()
        .map(|h| {
            let mean_at = |w: usize| {
                let (v, n) = run.measures.iter().fold((0.0, 0.0), |(sv, sn), m| {
                    let (v, n) = test_function_value(&m[w], h);
                    (sv + v, sn + n * n)
                });
                (v / trials, (n / trials).sqrt() / trials.sqrt())
            };
            let (prev, noise) = mean_at(k - 2);
            let (last, _) = mean_at(k - 1);
            if noise > 0.0 {
                (last - prev).abs() / noise
            } else {
                0.0
            }
        })
        .collect())
}

/// Configuration of an exponential-tail experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub measure: SpectralMeasure,
    pub kind: Kind,
    pub rect: Rect,
    pub trials: usize,
    pub seed: u64,
    pub n_modes: usize,
}

/// Empirical survival `P̂(n_f(K) ≥ λ)` of the zero count in `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub digest: String,
    pub trials: usize,
    pub mean: f64,
    /// `histogram[n]` = number of trials with exactly `n` zeros.
    pub histogram: Vec<u64>,
    /// `survival[λ] = P̂(n ≥ λ)` for `λ = 0, 1, …`.
    pub survival: Vec<f64>,
    pub monotone: bool,
    /// Least-squares slope of `ln P̂(n ≥ λ)` over `λ ≥ ⌈mean⌉` with `P̂ > 0`.
    pub log_slope: f64,
}

impl TailReport {
    pub fn survival_at(&self, lambda: f64) -> f64 {
        let k = lambda.ceil().max(0.0) as usize;
        self.survival.get(k).copied().unwrap_or(0.0)
    }
}

pub fn tail_survival(config: &TailConfig) -> Result<TailReport> {
    tail_survival_with(config, Schedule::default())
}

pub fn tail_survival_with(config: &TailConfig, schedule: Schedule) -> Result<TailReport> {
    if config.trials == 0 {
        return Err(StatsError::Invalid("at least one trial is needed".into()));
    }
    let r = config.rect;
    let n_modes = if config.n_modes == 0 { auto_n_modes(&config.measure, &r)? } else { config.n_modes };
    let height = r.y0.abs().max(r.y1.abs());
    let sampler = Sampler::new(&config.measure, config.kind, n_modes, height)?;
    let opts = ZeroOptions::default();
    let counts = schedule
        .map(config.trials, |trial| {
            let f = sampler.sample(config.seed, trial as u64);
            winding_count(&f, &r, &opts)
        })
        .into_iter()
        .collect::<std::result::Result<Vec<i64>, ZeroError>>()?;
    let max = counts.iter().copied().max().unwrap_or(0).max(0) as usize;
    let mut histogram = vec![0u64; max + 1];
    for &c in &counts {
        histogram[c.max(0) as usize] += 1;
    }
    let trials = config.trials as f64;
    let mean = counts.iter().sum::<i64>() as f64 / trials;
    let mut survival = vec![0.0; max + 1];
    let mut above = 0u64;
    for k in (0..=max).rev() {
        above += histogram[k];
        survival[k] = above as f64 / trials;
    }
    let monotone = survival.windows(2).all(|w| w[1] <= w[0]);
    let start = mean.ceil() as usize;
    let points: Vec<(f64, f64)> = (start..=max).map(|k| (k as f64, survival[k].ln())).collect();
    let log_slope = least_squares_slope(&points);
    Ok(TailReport { digest: config_digest(config), trials: config.trials, mean, histogram, survival, monotone, log_slope })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `½ sech(πλ) + atom_mass (δ₁ + δ₋₁)`: a continuous spectrum plus the
/// two-atom part `α cos 2πz + β sin 2πz` in the symmetric case.
pub fn mixture_measure(atom_mass: f64) -> Result<SpectralMeasure> {
    Ok(SpectralMeasure::sech()?.scaled(0.5).plus(&SpectralMeasure::two_atom(1.0, atom_mass)?))
}

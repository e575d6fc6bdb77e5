//! The acceptance pipeline for one named family and kind.

use anyhow::{Context, Result};
use gafzeros::densities::{closed_form, real_atom_r, Family, HorizontalDensityPrediction, Which};
use gafzeros::intensity::{gaf_intensity, sym_intensity};
use gafzeros::spectral::{KernelEvaluator, SpectralMeasure, StripSpec};
use gafzeros::stats::{compare, run_ensemble, Bins, EnsembleConfig};
use gafzeros::Kind;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub family: String,
    pub kind: Kind,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, value: f64, threshold: f64, detail: String) -> Check {
    Check { name: name.to_string(), passed: value < threshold, value, threshold, detail }
}

fn moment_density(measure: &SpectralMeasure, kind: Kind, y: f64) -> Result<f64> {
    let p = HorizontalDensityPrediction::new(measure, kind)?;
    Ok(p.density(y)?)
}

fn which(kind: Kind) -> Which {
    match kind {
        Kind::Gaf => Which::L,
        Kind::Symmetric => Which::S,
    }
}

/// Heights spread over the band by the golden-ratio sequence, away from 0.
fn probe_heights(band: [f64; 2], seed: u64, count: usize, min_abs: f64) -> Vec<f64> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    (0..)
        .map(|k: u64| band[0] + (band[1] - band[0]) * ((seed + k) as f64 * phi).fract())
        .filter(|y| y.abs() > min_abs)
        .take(count)
        .collect()
}

fn closed_form_check(family: Family, measure: &SpectralMeasure, kind: Kind, band: [f64; 2]) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let y = band[0] + (band[1] - band[0]) * (i as f64 + 0.5) / 200.0;
        if y.abs() < 1e-3 {
            continue;
        }
        let exact = closed_form(family, which(kind), y)?;
        let got = moment_density(measure, kind, y)?;
        worst = worst.max((got - exact).abs() / exact.abs());
    }
    Ok(check("closed-form", worst, 1e-8, "max relative error of moment-based density on 200 heights".into()))
}

fn intensity_check(config: &ExperimentConfig, measure: &SpectralMeasure) -> Result<Check> {
    let pad = 2.0 * config.step;
    let strip = StripSpec::for_measure(measure, config.band[0] - pad, config.band[1] + pad)?;
    let kernel = KernelEvaluator::new(measure, strip)?;
    let mut worst: f64 = 0.0;
    for y in probe_heights(config.band, config.seed, 10, 0.01) {
        let z = Complex64::new(0.37, y);
        let value = match config.kind {
            Kind::Gaf => gaf_intensity(&kernel, z, config.step)?,
            Kind::Symmetric => sym_intensity(&kernel, z, config.step)?,
        };
        let expected = moment_density(measure, config.kind, y)?;
        worst = worst.max((value - expected).abs() / expected.abs());
    }
    Ok(check("intensity", worst, 1e-5, "max relative error of the Laplacian formula at 10 heights".into()))
}

fn ensemble(config: &ExperimentConfig, measure: &SpectralMeasure, width: f64) -> Result<EnsembleConfig> {
    let n = ((config.band[1] - config.band[0]) / width).round().max(1.0) as usize;
    Ok(EnsembleConfig {
        measure: measure.clone(),
        kind: config.kind,
        t_list: config.t_list.clone(),
        trials: config.trials,
        seed: config.seed,
        n_modes: config.n_modes,
        bins: Bins::uniform(config.band[0], config.band[1], n)?,
    })
}

pub fn run(config: &ExperimentConfig, measure: &SpectralMeasure) -> Result<Report> {
    let family = config.measure.family().context("verify needs a named family (paley-wiener, fock-bargmann, sech)")?;
    let mut checks = vec![closed_form_check(family, measure, config.kind, config.band)?, intensity_check(config, measure)?];
    let prediction = HorizontalDensityPrediction::new(measure, config.kind)?;
    match config.kind {
        Kind::Gaf => {
            let run = run_ensemble(&ensemble(config, measure, 0.1)?)?;
            let c = compare(&run.last_summary()?, &prediction)?;
            checks.push(check("bin-relative-error", c.max_relative_error, 0.05, format!("per-bin errors {:?}", c.relative_error)));
            checks.push(check("l1", c.l1_relative, 0.05, "L1 distance over predicted mass".into()));
        }
        Kind::Symmetric => {
            let run = run_ensemble(&ensemble(config, measure, 0.02)?)?;
            let s = run.last_summary()?;
            let c = compare(&s, &prediction)?;
            let r = real_atom_r(measure)?;
            let mut detail = format!("observed {:.5}, predicted 2√(m₂/m₀) = {r:.5}", s.real_mean);
            if family.half_atom() != family.atom() {
                let half = family.half_atom();
                detail.push_str(&format!("; competing value a/√3 = {half:.5} is off by {:.1}%", 100.0 * (s.real_mean - half).abs() / half));
            }
            checks.push(check("real-atom", c.atom_relative_error.unwrap_or(f64::INFINITY), 0.03, detail));
            let peak = s.mean.iter().copied().fold(0.0, f64::max);
            let near: f64 = s
                .edges
                .windows(2)
                .zip(&s.mean)
                .filter(|(w, _)| w[0] >= -0.02 - 1e-12 && w[1] <= 0.02 + 1e-12)
                .map(|(_, &m)| m)
                .fold(0.0, f64::max);
            checks.push(check("contraction", near / peak, 0.25, "largest bin mass within 0.02 of the axis over the peak bin".into()));
            let slope = |y: f64| prediction.density(y).map(|v| v / y);
            let at_zero = slope(1e-4)?;
            let sup = (1..=100).map(|k| slope(0.05 * k as f64 / 100.0)).collect::<Result<Vec<_>, _>>()?.into_iter().fold(0.0, f64::max);
            checks.push(check("S-over-y", sup / at_zero, 10.0, format!("sup S(y)/y on (0, 0.05] = {sup:.4}")));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { family: family.name().to_string(), kind: config.kind, passed, checks })
}

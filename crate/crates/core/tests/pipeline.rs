use std::f64::consts::PI;

use gafzeros::exec::Schedule;
use gafzeros::sampler::{sample_gaf, sample_symmetric_gaf, Sampler};
use gafzeros::spectral::SpectralMeasure;
use gafzeros::stats::{
    convergence_run, run_ensemble, run_ensemble_with, tail_survival, tail_survival_with, weak_convergence_surrogate, Bins,
    EnsembleConfig, TailConfig,
};
use gafzeros::zeros::Rect;
use gafzeros::Kind;
use num_complex::Complex64;

fn config(measure: SpectralMeasure, kind: Kind, t_list: Vec<f64>, trials: usize, bins: Bins) -> EnsembleConfig {
    EnsembleConfig { measure, kind, t_list, trials, seed: 11, n_modes: 512, bins }
}

#[test]
fn sequential_and_parallel_runs_agree_exactly() {
    let cfg = config(SpectralMeasure::sech().unwrap(), Kind::Symmetric, vec![10.0, 20.0], 6, Bins::uniform(-0.2, 0.2, 8).unwrap());
    let seq = run_ensemble_with(&cfg, Schedule::Sequential).unwrap();
    let par = run_ensemble_with(&cfg, Schedule::Parallel).unwrap();
    assert_eq!(seq, par);

    let tail = TailConfig {
        measure: SpectralMeasure::paley_wiener(1.0).unwrap(),
        kind: Kind::Gaf,
        rect: Rect::new(0.0, 1.0, -0.3, 0.3).unwrap(),
        trials: 200,
        seed: 3,
        n_modes: 0,
    };
    assert_eq!(tail_survival_with(&tail, Schedule::Sequential).unwrap(), tail_survival_with(&tail, Schedule::Parallel).unwrap());
}

#[test]
fn conjugate_bins_agree_within_monte_carlo_error() {
    let cfg = config(SpectralMeasure::fock_bargmann(1.0).unwrap(), Kind::Symmetric, vec![100.0], 20, Bins::uniform(-0.3, 0.3, 6).unwrap());
    let s = run_ensemble(&cfg).unwrap().last_summary().unwrap();
    let n = s.mean.len();
    for b in 0..n / 2 {
        let (lo, hi) = (b, n - 1 - b);
        assert!((s.edges[lo] + s.edges[hi + 1]).abs() < 1e-12);
        let sigma = ((s.variance[lo] + s.variance[hi]) / s.trials as f64).sqrt();
        assert!((s.mean[lo] - s.mean[hi]).abs() < 4.0 * sigma.max(1e-9), "bin {b}: {} vs {}", s.mean[lo], s.mean[hi]);
    }
}

#[test]
fn sech_band_mass_approaches_the_antiderivative() {
    let cfg = config(SpectralMeasure::sech().unwrap(), Kind::Gaf, vec![50.0, 100.0, 200.0], 10, Bins::uniform(-0.1, 0.1, 1).unwrap());
    let table = convergence_run(&cfg).unwrap();
    let exact = (0.2 * PI).tan();
    assert!((exact - 0.72654).abs() < 1e-5);
    let last: Vec<f64> = table.values.iter().map(|v| v[2]).collect();
    let mean = last.iter().sum::<f64>() / last.len() as f64;
    // Counting noise of the mean: sqrt(mass / T / trials).
    let noise = (exact / 200.0 / last.len() as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * noise, "{mean} vs {exact}");
}

#[test]
fn weak_convergence_surrogate_stabilizes_for_atomless_spectra() {
    let cfg = config(SpectralMeasure::sech().unwrap(), Kind::Gaf, vec![100.0, 200.0], 10, Bins::uniform(-0.2, 0.2, 8).unwrap());
    let run = run_ensemble(&cfg).unwrap();
    let s = weak_convergence_surrogate(&run).unwrap();
    assert_eq!(s.len(), 5);
    assert!(s.iter().all(|&v| v < 3.0), "{s:?}");
}

#[test]
fn tail_survival_starts_at_one() {
    let r = tail_survival(&TailConfig {
        measure: SpectralMeasure::paley_wiener(1.0).unwrap(),
        kind: Kind::Gaf,
        rect: Rect::new(0.0, 1.0, -0.3, 0.3).unwrap(),
        trials: 500,
        seed: 5,
        n_modes: 0,
    })
    .unwrap();
    assert_eq!(r.survival[0], 1.0);
    assert!(r.monotone);
    assert_eq!(r.histogram.iter().sum::<u64>(), 500);
}

#[test]
fn empirical_covariance_matches_the_kernel() {
    let m = SpectralMeasure::paley_wiener(1.0).unwrap();
    let n = 10_000;
    let (z, w) = (Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0));
    let products: Vec<Complex64> = (0..n)
        .map(|t| {
            let f = sample_gaf(&m, 256, 21, t).unwrap();
            f.evaluate(z) * f.evaluate(w).conj()
        })
        .collect();
    let mean = products.iter().sum::<Complex64>() / n as f64;
    let var = products.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let expected = (0.6 * PI).sin() / (0.6 * PI);
    assert!((mean - expected).norm() < 3.0 * se, "{mean} vs {expected} (se {se})");

    let sampler = Sampler::new(&m, Kind::Gaf, 256, 0.3).unwrap();
    assert!((sampler.kernel(z, w).re - expected).abs() < 1e-6);
}

#[test]
fn symmetric_sech_has_unit_variance_at_zero() {
    let m = SpectralMeasure::sech().unwrap();
    let n = 10_000;
    let values: Vec<f64> = (0..n).map(|t| sample_symmetric_gaf(&m, 256, 4, t).unwrap().evaluate(Complex64::new(0.0, 0.0)).re).collect();
    let var = values.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let fourth = values.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
    let se = ((fourth - var * var) / n as f64).sqrt();
    assert!((var - 1.0).abs() < 3.0 * se, "{var} (se {se})");
}

#[test]
fn distinct_trials_are_uncorrelated() {
    let m = SpectralMeasure::sech().unwrap();
    let n = 4000;
    let x = |trial: u64| sample_gaf(&m, 64, 9, trial).unwrap().evaluate(Complex64::new(0.25, 0.0));
    let pairs: Vec<(Complex64, Complex64)> = (0..n).map(|k| (x(2 * k), x(2 * k + 1))).collect();
    let cross = pairs.iter().map(|(a, b)| a * b.conj()).sum::<Complex64>() / n as f64;
    let na = (pairs.iter().map(|(a, _)| a.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let nb = (pairs.iter().map(|(_, b)| b.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let rho = cross.norm() / (na * nb);
    assert!(rho < 4.0 / (n as f64).sqrt(), "{rho}");
}

//! Acceptance suite. Runs as a plain binary so each criterion prints one
//! PASS/FAIL line; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gafzeros::densities::{closed_form, gaf_density_l, sym_density_s, Family, HorizontalDensityPrediction, Which};
use gafzeros::intensity::{gaf_intensity, sym_intensity};
use gafzeros::sampler::{sample_two_atom, two_atom_exact_zeros};
use gafzeros::spectral::{KernelEvaluator, SpectralMeasure, StripSpec};
use gafzeros::stats::{
    compare, mixture_measure, randomness_test, run_ensemble, tail_survival, Bins, EnsembleConfig, EnsembleSummary, TailConfig,
    Verdict,
};
use gafzeros::zeros::{locate_zeros, Rect, ZeroOptions};
use gafzeros::Kind;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn families() -> [Family; 3] {
    [Family::PaleyWiener { a: 1.0 }, Family::FockBargmann { a: 1.0 }, Family::Sech]
}

/// Heights where the closed forms are compared: ±1 for the entire families,
/// just inside the sech strip.
fn family_band(f: Family) -> (f64, f64) {
    match f {
        Family::Sech => (-0.24, 0.24),
        _ => (-1.0, 1.0),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for f in families() {
        let m = f.measure();
        let (lo, hi) = family_band(f);
        let ys = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).filter(|y: &f64| y.abs() >= 1e-3);
        for y in ys {
            worst = worst.max(rel(gaf_density_l(&m, y).unwrap(), closed_form(f, Which::L, y).unwrap()));
            worst = worst.max(rel(sym_density_s(&m, y).unwrap(), closed_form(f, Which::S, y).unwrap()));
        }
    }
    Outcome { passed: worst < 1e-8, detail: format!("max relative error {worst:.2e} (tol 1e-8)") }
}

fn intensity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for f in families() {
        let m = f.measure();
        let (lo, hi) = match f {
            Family::Sech => (-0.2, 0.2),
            _ => (-0.5, 0.5),
        };
        let strip = StripSpec::for_measure(&m, lo - 3.0 * h, hi + 3.0 * h).unwrap();
        let kernel = KernelEvaluator::new(&m, strip).unwrap();
        let mut count = 0;
        while count < 10 {
            let y = lo + (hi - lo) * uniform();
            if y.abs() < 0.01 {
                continue;
            }
            let z = Complex64::new(10.0 * uniform(), y);
            worst = worst.max(rel(gaf_intensity(&kernel, z, h).unwrap(), closed_form(f, Which::L, y).unwrap()));
            worst = worst.max(rel(sym_intensity(&kernel, z, h).unwrap(), closed_form(f, Which::S, y).unwrap()));
            count += 1;
        }
    }
    Outcome { passed: worst < 1e-5, detail: format!("max relative error {worst:.2e} at 10 heights per family (tol 1e-5)") }
}

fn two_atom() -> Outcome {
    let (mut position, mut spread, mut spacing): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut missing = 0;
    for q in [0.5, 1.0, 2.5] {
        for trial in 0..10 {
            let f = sample_two_atom(q, SEED, trial).unwrap();
            let exact = two_atom_exact_zeros(q, SEED, trial, 0..8).unwrap();
            let gap = 1.0 / (2.0 * q);
            let y = exact[0].im;
            // Edges halfway between consecutive zeros.
            let rect = Rect::new(exact[0].re - 0.5 * gap, exact[7].re + 0.5 * gap, y - 0.5, y + 0.5).unwrap();
            let set = locate_zeros(&f, &rect, &ZeroOptions::default()).unwrap();
            if set.len() != exact.len() {
                missing += 1;
                continue;
            }
            let mut found: Vec<Complex64> = set.zeros.iter().map(|z| z.z).collect();
            found.sort_by(|a, b| a.re.total_cmp(&b.re));
            for (z, e) in found.iter().zip(&exact) {
                position = position.max((z - e).norm());
            }
            let (lo, hi) = found.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.im), hi.max(z.im)));
            spread = spread.max(hi - lo);
            for w in found.windows(2) {
                spacing = spacing.max((w[1].re - w[0].re - gap).abs());
            }
        }
    }
    let passed = missing == 0 && position < 1e-10 && spread < 1e-10 && spacing < 1e-10;
    Outcome {
        passed,
        detail: format!(
            "position {position:.1e}, line spread {spread:.1e}, spacing error {spacing:.1e} over 30 realizations ({missing} miscounted)"
        ),
    }
}

fn ensemble(measure: SpectralMeasure, kind: Kind, t_list: Vec<f64>, trials: usize, n_modes: usize, bins: Bins) -> EnsembleConfig {
    EnsembleConfig { measure, kind, t_list, trials, seed: SEED, n_modes, bins }
}

fn mc_density() -> Outcome {
    let cases = [
        ("fock-bargmann", SpectralMeasure::fock_bargmann(1.0).unwrap(), 0.3, 6),
        ("sech", SpectralMeasure::sech().unwrap(), 0.2, 4),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, m, b, n) in cases {
        let cfg = ensemble(m, Kind::Gaf, vec![200.0], 20, 1024, Bins::uniform(-b, b, n).unwrap());
        let s = run_ensemble(&cfg).unwrap().last_summary().unwrap();
        let c = compare(&s, &HorizontalDensityPrediction::new(&cfg.measure, Kind::Gaf).unwrap()).unwrap();
        // The predicted masses must agree with the exact bin integrals of the
        // closed forms: 2π per unit height, and tan(2πy)/2 as antiderivative.
        let exact = |lo: f64, hi: f64| match name {
            "sech" => 0.5 * ((2.0 * PI * hi).tan() - (2.0 * PI * lo).tan()),
            _ => 2.0 * PI * (hi - lo),
        };
        let oracle_ok = s.edges.windows(2).zip(&c.predicted).all(|(w, &p)| rel(p, exact(w[0], w[1])) < 1e-8);
        passed &= oracle_ok && c.max_relative_error < 0.05 && c.l1_relative < 0.05;
        parts.push(format!("{name}: max bin {:.1}%, L1 {:.1}%", 100.0 * c.max_relative_error, 100.0 * c.l1_relative));
    }
    Outcome { passed, detail: parts.join("; ") }
}

/// Symmetric ensembles shared by the real-atom and contraction criteria.
struct SymmetricRun {
    family: Family,
    summary: EnsembleSummary,
    prediction: HorizontalDensityPrediction,
}

fn symmetric_runs() -> Vec<SymmetricRun> {
    families()
        .into_iter()
        .map(|family| {
            let (b, n) = match family {
                Family::Sech => (0.2, 20),
                _ => (0.3, 30),
            };
            let m = family.measure();
            let cfg = ensemble(m, Kind::Symmetric, vec![200.0], 20, 1024, Bins::uniform(-b, b, n).unwrap());
            let summary = run_ensemble(&cfg).unwrap().last_summary().unwrap();
            let prediction = HorizontalDensityPrediction::new(&cfg.measure, Kind::Symmetric).unwrap();
            SymmetricRun { family, summary, prediction }
        })
        .collect()
}

/// Kac–Rice real-zero rate `(1/π)√(−r″(0)/r(0))` from the covariance alone.
fn kac_rice(m: &SpectralMeasure) -> f64 {
    let h = 1e-3;
    let r = |t: f64| m.covariance(Complex64::new(t, 0.0)).unwrap().re;
    let r2 = (r(h) - 2.0 * r(0.0) + r(-h)) / (h * h);
    (-r2 / r(0.0)).sqrt() / PI
}

fn real_atom(runs: &[SymmetricRun]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for run in runs.iter().filter(|r| r.family != Family::Sech) {
        let oracle = kac_rice(&run.family.measure());
        let observed = run.summary.real_mean;
        let err = rel(observed, oracle);
        passed &= err < 0.03 && rel(run.family.atom(), oracle) < 1e-4;
        let mut part = format!("{}: {observed:.4} vs {oracle:.4} ({:.2}%)", run.family.name(), 100.0 * err);
        if run.family.half_atom() != run.family.atom() {
            part.push_str(&format!(", competing value a/√3 = {:.4} off by {:.0}%", run.family.half_atom(), 100.0 * rel(observed, run.family.half_atom())));
        }
        parts.push(part);
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn randomness() -> Outcome {
    let cases = [
        ("sech", ensemble(SpectralMeasure::sech().unwrap(), Kind::Gaf, vec![100.0, 400.0], 60, 8192, Bins::uniform(-0.2, 0.2, 4).unwrap()), Verdict::DeterministicLimit),
        ("two-atom", ensemble(SpectralMeasure::two_atom(1.0, 0.5).unwrap(), Kind::Gaf, vec![100.0, 400.0], 30, 2, Bins::uniform(-0.3, 0.3, 6).unwrap()), Verdict::RandomLimit),
        ("mixture", ensemble(mixture_measure(0.5).unwrap(), Kind::Symmetric, vec![100.0, 400.0], 30, 1024, Bins::uniform(-0.2, 0.2, 4).unwrap()), Verdict::RandomLimit),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, cfg, expected) in cases {
        let r = randomness_test(&cfg).unwrap();
        let ok = r.verdict == expected
            && match expected {
                Verdict::DeterministicLimit => (3.0..=5.5).contains(&r.variance_ratio),
                _ => r.floor_excess > 10.0,
            };
        passed &= ok;
        parts.push(format!("{name}: ratio {:.2}, floor {:.1}x noise, {:?}", r.variance_ratio, r.floor_excess, r.verdict));
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn tail() -> Outcome {
    let cfg = TailConfig {
        measure: SpectralMeasure::paley_wiener(1.0).unwrap(),
        kind: Kind::Gaf,
        rect: Rect::new(0.0, 1.0, -0.3, 0.3).unwrap(),
        trials: 10_000,
        seed: SEED,
        n_modes: 0,
    };
    let r = tail_survival(&cfg).unwrap();
    let at = r.survival_at(r.mean + 5.0);
    Outcome {
        passed: r.monotone && r.log_slope < 0.0 && at < 0.05,
        detail: format!("mean {:.3}, monotone {}, log slope {:.3}, P(n >= mean+5) = {at:.4}", r.mean, r.monotone, r.log_slope),
    }
}

fn contraction(runs: &[SymmetricRun]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for run in runs {
        let s = &run.summary;
        let peak = s.mean.iter().copied().fold(0.0, f64::max);
        let near = s
            .edges
            .windows(2)
            .zip(&s.mean)
            .filter(|(w, _)| w[0] >= -0.02 - 1e-12 && w[1] <= 0.02 + 1e-12)
            .map(|(_, &m)| m)
            .fold(0.0, f64::max);
        // S(y)/y against its limit at 0, which the closed form gives independently.
        let ratios: Vec<f64> = (1..=100).map(|k| 0.05 * k as f64 / 100.0).map(|y| run.prediction.density(y).unwrap() / y).collect();
        let sup = ratios.iter().copied().fold(0.0, f64::max);
        let at_zero = closed_form(run.family, Which::S, 1e-4).unwrap() / 1e-4;
        let bounded = sup.is_finite() && sup / at_zero < 10.0;
        passed &= near / peak < 0.25 && bounded;
        parts.push(format!("{}: near/peak {:.3}, sup S/y {sup:.2}", run.family.name(), near / peak));
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn report(index: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    println!("{} criterion {index} {name}: {} [{:.1}s]", if o.passed { "PASS" } else { "FAIL" }, o.detail, start.elapsed().as_secs_f64());
    o.passed
}

fn main() -> ExitCode {
    // Honour the harness's filter/listing flags so `cargo test <name>` still works.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return ExitCode::SUCCESS;
        }
    }

    let mut results = vec![
        report(1, "closed forms", closed_forms),
        report(2, "intensity", intensity),
        report(3, "two-atom exactness", two_atom),
        report(4, "Monte Carlo density", mc_density),
    ];
    let start = Instant::now();
    let symmetric = symmetric_runs();
    println!("(symmetric ensembles shared by criteria 5 and 8: {:.1}s)", start.elapsed().as_secs_f64());
    results.push(report(5, "real atom", || real_atom(&symmetric)));
    results.push(report(6, "randomness dichotomy", randomness));
    results.push(report(7, "tail", tail));
    results.push(report(8, "contraction near the axis", || contraction(&symmetric)));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

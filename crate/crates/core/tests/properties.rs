use std::f64::consts::PI;

use gafzeros::densities::{gaf_density_l, real_atom_r, sym_density_s};
use gafzeros::intensity::{gaf_intensity, sigma_eigenvalues, sym_intensity};
use gafzeros::sampler::{sample_symmetric_gaf, two_atom_realization};
use gafzeros::spectral::{KernelEvaluator, SpectralMeasure, StripSpec};
use gafzeros::stats::{horizontal_measure, Bins, EnsembleConfig, HorizontalMeasure};
use gafzeros::zeros::{locate_zeros, real_zeros, winding_count, Rect, ZeroOptions, THIN_STRIP};
use gafzeros::Kind;
use num_complex::Complex64;
use proptest::prelude::*;

fn family(i: usize) -> SpectralMeasure {
    match i {
        0 => SpectralMeasure::paley_wiener(1.0),
        1 => SpectralMeasure::fock_bargmann(1.0),
        _ => SpectralMeasure::sech(),
    }
    .unwrap()
}

/// Independent closed-form covariances: sinc, Gaussian and the self-dual sech.
fn closed_covariance(i: usize, t: Complex64) -> Complex64 {
    match i {
        0 => {
            let u = 2.0 * PI * t;
            if u.norm() < 1e-12 {
                Complex64::new(1.0, 0.0)
            } else {
                u.sin() / u
            }
        }
        1 => (-(PI * t).powi(2)).exp(),
        _ => 1.0 / (PI * t).cosh(),
    }
}

fn point(band: f64) -> impl Strategy<Value = Complex64> {
    (-5.0..5.0f64, -band..band).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_hermitian_and_positive(i in 0usize..3, z in point(0.12), w in point(0.12)) {
        let m = family(i);
        let k = KernelEvaluator::new(&m, StripSpec::for_measure(&m, -0.12, 0.12).unwrap()).unwrap();
        let a = k.kernel(z, w).unwrap();
        let b = k.kernel(w, z).unwrap().conj();
        prop_assert!((a - b).norm() < 1e-12 * m.total_mass());
        let d = k.kernel(z, z).unwrap();
        prop_assert!(d.re > 0.0 && d.im.abs() < 1e-12 * d.re);
    }

    #[test]
    fn kernel_matches_closed_forms(i in 0usize..3, z in point(0.12), w in point(0.12)) {
        let m = family(i);
        let k = KernelEvaluator::new(&m, StripSpec::for_measure(&m, -0.12, 0.12).unwrap()).unwrap();
        let got = k.kernel(z, w).unwrap();
        let want = closed_covariance(i, z - w.conj());
        prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1e-3), "{got} vs {want}");
    }

    #[test]
    fn m0_derivative_is_minus_4pi_m1(i in 0usize..3, y in -0.2..0.2f64) {
        let m = family(i);
        let d = |h: f64| (m.exp_moment(0, y + h).unwrap() - m.exp_moment(0, y - h).unwrap()) / (2.0 * h);
        let h = 1e-3;
        let richardson = (4.0 * d(h / 2.0) - d(h)) / 3.0;
        let m1 = -4.0 * PI * m.exp_moment(1, y).unwrap();
        let scale = m1.abs().max(4.0 * PI * m.exp_moment(0, y).unwrap() * y.abs()).max(1e-3);
        prop_assert!((richardson - m1).abs() < 1e-6 * scale, "{richardson} vs {m1}");
    }

    #[test]
    fn densities_are_even_nonnegative_and_scale_free(i in 0usize..3, y in 0.002..0.2f64, c in 0.1..10.0f64) {
        let m = family(i);
        let s = sym_density_s(&m, y).unwrap();
        prop_assert_eq!(s, sym_density_s(&m, -y).unwrap());
        let (m0, m1, m2) = (m.exp_moment(0, y).unwrap(), m.exp_moment(1, y).unwrap(), m.exp_moment(2, y).unwrap());
        prop_assert!(m2 * m0 - m1 * m1 >= -1e-12 * m2 * m0);
        prop_assert!(gaf_density_l(&m, y).unwrap() >= 0.0);

        let scaled = m.scaled(c);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        prop_assert!(close(gaf_density_l(&scaled, y).unwrap(), gaf_density_l(&m, y).unwrap()));
        // S loses digits to cancellation just above the series crossover.
        prop_assert!((sym_density_s(&scaled, y).unwrap() - s).abs() <= 1e-6 * s);
        prop_assert!(close(real_atom_r(&scaled).unwrap(), real_atom_r(&m).unwrap()));
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_determinant(k in 0.01..100.0f64, frac in 0.0..1.0f64, phase in -PI..PI) {
        let c = Complex64::from_polar(k * frac, phase);
        let (l1, l2) = sigma_eigenvalues(k, c).unwrap();
        prop_assert!(l1 >= l2 && l2 >= 0.0);
        prop_assert!((l1 + l2 - k).abs() <= 1e-12 * k);
        let det = 0.25 * (k * k - c.norm_sqr());
        prop_assert!((l1 * l2 - det).abs() <= 1e-12 * k * k);
    }

    #[test]
    fn intensity_is_x_invariant_and_reflection_symmetric(i in 0usize..3, x in -5.0..5.0f64, y in 0.02..0.15f64) {
        let m = family(i);
        let k = KernelEvaluator::new(&m, StripSpec::for_measure(&m, -0.16, 0.16).unwrap()).unwrap();
        let h = 1e-3;
        let base = gaf_intensity(&k, Complex64::new(0.0, y), h).unwrap();
        prop_assert!((gaf_intensity(&k, Complex64::new(x, y), h).unwrap() - base).abs() < 1e-6 * base);
        let up = sym_intensity(&k, Complex64::new(x, y), h).unwrap();
        let down = sym_intensity(&k, Complex64::new(x, -y), h).unwrap();
        prop_assert!((up - down).abs() < 1e-6 * up);
    }

    #[test]
    fn splitting_the_window_is_additive(counts in prop::collection::vec(prop::collection::vec(0u64..50, 5), 1..6), real in prop::collection::vec(0u64..20, 6)) {
        let bins = Bins::uniform(-1.0, 1.0, 5).unwrap();
        let parts: Vec<HorizontalMeasure> = counts
            .iter()
            .enumerate()
            .map(|(j, c)| HorizontalMeasure::from_counts(1.0 + j as f64, &bins, c.clone(), real[j]).unwrap())
            .collect();
        let whole = parts[1..].iter().fold(parts[0].clone(), |acc, p| acc.merge(p).unwrap());
        // Counts add exactly; masses are the T-weighted average of the parts.
        for b in 0..5 {
            prop_assert_eq!(whole.counts[b], counts.iter().map(|c| c[b]).sum::<u64>());
            let weighted: f64 = parts.iter().map(|p| p.t * p.masses[b]).sum::<f64>() / whole.t;
            prop_assert!((whole.masses[b] - weighted).abs() <= 1e-12 * weighted.max(1.0));
        }
    }

    #[test]
    fn config_digest_ignores_field_order(seed in any::<u64>(), trials in 1usize..100) {
        let cfg = EnsembleConfig {
            measure: SpectralMeasure::sech().unwrap(),
            kind: Kind::Gaf,
            t_list: vec![10.0, 20.0],
            trials,
            seed,
            n_modes: 64,
            bins: Bins::uniform(-0.2, 0.2, 4).unwrap(),
        };
        let value = serde_json::to_value(&cfg).unwrap();
        let obj = value.as_object().unwrap();
        let mut reversed = String::from("{");
        for (j, (k, v)) in obj.iter().rev().enumerate() {
            if j > 0 {
                reversed.push(',');
            }
            reversed.push_str(&format!("{}:{}", serde_json::to_string(k).unwrap(), v));
        }
        reversed.push('}');
        let back: EnsembleConfig = serde_json::from_str(&reversed).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.digest(), cfg.digest());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_zero_sets_are_certified_and_closed_under_conjugation(seed in 0u64..1000, i in 0usize..3) {
        let m = family(i);
        let f = sample_symmetric_gaf(&m, 256, seed, 0).unwrap();
        let opts = ZeroOptions::default();
        let rect = Rect::new(0.05, 3.05, -0.2, 0.2).unwrap();
        let set = locate_zeros(&f, &rect, &opts).unwrap();
        prop_assert_eq!(set.zeros.iter().map(|z| z.multiplicity as i64).sum::<i64>(), winding_count(&f, &rect, &opts).unwrap());
        prop_assert_eq!(set.certified_count, set.len());
        let off_axis: Vec<Complex64> = set.zeros.iter().filter(|z| !z.is_real).map(|z| z.z).collect();
        for z in &off_axis {
            let partner = off_axis.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner < 1e-8, "no partner for {z}");
        }

        let reals = real_zeros(&f, 0.05, 3.05, 0.01, &opts).unwrap();
        let strip = Rect::new(0.05, 3.05, -THIN_STRIP, THIN_STRIP).unwrap();
        prop_assert_eq!(reals.len() as i64, winding_count(&f, &strip, &opts).unwrap());
    }

    #[test]
    fn two_atom_zeros_share_one_bin(re1 in -2.0..2.0f64, im1 in -2.0..2.0f64, re2 in -2.0..2.0f64, im2 in -2.0..2.0f64) {
        let (z1, z2) = (Complex64::new(re1, im1), Complex64::new(re2, im2));
        prop_assume!(z1.norm() > 0.05 && z2.norm() > 0.05);
        let line = (z2.norm() / z1.norm()).ln() / (4.0 * PI);
        prop_assume!(line.abs() < 0.9 && (line * 10.0 - (line * 10.0).round()).abs() > 1e-6);
        let f = two_atom_realization(1.0, z1, z2);
        let bins = Bins::uniform(-1.0, 1.0, 20).unwrap();
        let set = locate_zeros(&f, &Rect::new(0.0, 10.0, -1.0, 1.0).unwrap(), &ZeroOptions::default()).unwrap();
        let m = horizontal_measure(&[set], &bins, 1e-8).unwrap();
        prop_assert_eq!(m.real_atom_mass, 0.0);
        let nonzero: Vec<f64> = m.masses.iter().copied().filter(|&v| v > 0.0).collect();
        prop_assert_eq!(nonzero, vec![2.0]);
    }
}

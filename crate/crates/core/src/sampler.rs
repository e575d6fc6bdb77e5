//! Realizations of GAFs and symmetric GAFs as finite mode expansions
//! `f(z) = Σ c_k e^{2πiλ_k z}` over a discretization of the spectral measure.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::GaussianStream;
use crate::spectral::{SpectralError, SpectralMeasure, SpectralNode};
use crate::zeros::{resolved_step, BoundaryHit, Holomorphic, Rect, MAX_REFINE_DEPTH, REFINE_FACTOR};
use crate::Kind;

/// Truncation target used when choosing `n_modes` automatically.
pub const AUTO_MODES_TOL: f64 = 1e-8;
/// Upper bound for the automatic mode count.
pub const AUTO_MODES_CAP: usize = 4096;

/// Steps between exact re-evaluations in [`Realization::eval_segment`].
const RESYNC: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("symmetric sampling needs a measure symmetric under λ ↦ -λ")]
    NotSymmetric,
    #[error("degenerate draw: leading coefficient vanished (trial {trial})")]
    VanishingCoefficient { trial: u64 },
    #[error("invalid sampler parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, SamplerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationKind {
    Gaf,
    Symmetric,
    TwoAtom,
}

/// One exponential mode `coeff · e^{2πiλz}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub lambda: f64,
    pub coeff: Complex64,
}

/// A sampled function, evaluable with its derivative anywhere in the strip.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub kind: RealizationKind,
    pub seed: u64,
    pub trial: u64,
    lambda: Vec<f64>,
    coeff: Vec<Complex64>,
    /// Kernel weights `w_k`, so that `K(z, w) = Σ w_k e^{2πiλ_k(z - w̄)}`.
    weight: Vec<f64>,
}

impl Realization {
    /// Build a realization from explicit modes. Kernel weights are taken as
    /// `|c_k|²`, which makes the tolerance scale match the function's size.
    pub fn from_modes(kind: RealizationKind, modes: &[Mode]) -> Self {
        Self {
            kind,
            seed: 0,
            trial: 0,
            lambda: modes.iter().map(|m| m.lambda).collect(),
            coeff: modes.iter().map(|m| m.coeff).collect(),
            weight: modes.iter().map(|m| m.coeff.norm_sqr()).collect(),
        }
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.lambda.iter().zip(&self.coeff).map(|(&lambda, &coeff)| Mode { lambda, coeff }).collect()
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// `f(z)`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.eval_pair(z).0
    }

    /// `f'(z)`, exact term by term.
    pub fn evaluate_derivative(&self, z: Complex64) -> Complex64 {
        self.eval_pair(z).1
    }

    /// `(f(z), f'(z))`.
    pub fn eval_pair(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut f = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (&l, &c) in self.lambda.iter().zip(&self.coeff) {
            let t = c * mode_phase(l, z);
            f += t;
            d += l * t;
        }
        (f, d * Complex64::new(0.0, TAU))
    }

    /// Discretized kernel diagonal `K(iy, iy) = Σ w_k e^{-4πλ_k y}`.
    pub fn kernel_diagonal(&self, y: f64) -> f64 {
        self.lambda.iter().zip(&self.weight).map(|(&l, &w)| w * (-2.0 * TAU * l * y).exp()).sum()
    }
}

#[inline]
fn mode_phase(lambda: f64, z: Complex64) -> Complex64 {
    let m = (-TAU * lambda * z.im).exp();
    let (s, c) = (TAU * lambda * z.re).sin_cos();
    Complex64::new(m * c, m * s)
}

impl Holomorphic for Realization {
    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        self.eval_pair(z)
    }

    fn eval_segment(&self, z0: Complex64, dz: Complex64, count: usize, out: &mut Vec<(Complex64, Complex64)>) {
        out.clear();
        if count == 0 {
            return;
        }
        let n = self.lambda.len();
        let mult = self.multipliers(dz);
        let mut cur = Terms::zeros(n);
        let mut next = Terms::zeros(n);
        let mut j = 0;
        while j < count {
            let mut value = self.load_terms(z0 + dz * j as f64, &mut cur);
            out.push(value);
            let stop = (j + RESYNC).min(count);
            for _ in j + 1..stop {
                value = advance(&self.lambda, &cur, &mult, &mut next);
                std::mem::swap(&mut cur, &mut next);
                out.push(value);
            }
            j = stop;
        }
    }

    fn profile(&self, y: f64) -> (f64, f64) {
        let (mut m0, mut m2) = (0.0, 0.0);
        for (&l, &w) in self.lambda.iter().zip(&self.weight) {
            let e = w * (-2.0 * TAU * l * y).exp();
            m0 += e;
            m2 += e * l * l;
        }
        // E|f'|²/E|f|² = (2π)² m₂/m₀ sets the typical phase speed.
        let speed = TAU * (m2 / m0).sqrt();
        (m0.sqrt(), (STEP_PHASE / speed.max(1e-3)).min(MAX_STEP))
    }

    fn conjugate_symmetric(&self) -> bool {
        self.kind == RealizationKind::Symmetric
            || (self.kind == RealizationKind::TwoAtom && is_conjugate_closed(&self.lambda, &self.coeff))
    }

    fn arg_steps(&self, a: Complex64, dz: Complex64, steps: usize, floor: f64) -> std::result::Result<Vec<f64>, BoundaryHit> {
        let n = self.lambda.len();
        let mut walker = Walker { f: self, levels: vec![self.multipliers(dz)], dz, floor };
        let mut cur = Terms::zeros(n);
        let mut next = Terms::zeros(n);
        let mut out = Vec::with_capacity(steps);
        let mut p = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for j in 0..steps {
            let z = a + dz * j as f64;
            if j % RESYNC == 0 {
                p = self.load_terms(z, &mut cur);
            }
            let q = advance(&self.lambda, &cur, &walker.levels[0], &mut next);
            out.push(walker.step(&cur, p, q, z, 0)?);
            std::mem::swap(&mut cur, &mut next);
            p = q;
        }
        Ok(out)
    }
}

/// Target `|h f'/f|` for the sampling step on typical stretches.
const STEP_PHASE: f64 = 0.4;
const MAX_STEP: f64 = 0.1;

/// Mode terms `c_k e^{2πiλ_k z}` in split real/imaginary storage.
#[derive(Clone)]
struct Terms {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Terms {
    fn zeros(n: usize) -> Self {
        Self { re: vec![0.0; n], im: vec![0.0; n] }
    }
}

impl Realization {
    fn multipliers(&self, dz: Complex64) -> Terms {
        let mut m = Terms::zeros(self.lambda.len());
        for (k, &l) in self.lambda.iter().enumerate() {
            let v = mode_phase(l, dz);
            m.re[k] = v.re;
            m.im[k] = v.im;
        }
        m
    }

    /// Exact terms at `z`; returns `(f(z), f'(z))`.
    fn load_terms(&self, z: Complex64, t: &mut Terms) -> (Complex64, Complex64) {
        let (mut f, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0..self.lambda.len() {
            let v = self.coeff[k] * mode_phase(self.lambda[k], z);
            t.re[k] = v.re;
            t.im[k] = v.im;
            f += v;
            d += self.lambda[k] * v;
        }
        (f, d * Complex64::new(0.0, TAU))
    }
}

/// `dst = src ⊙ mult`; returns `(f, f')` of the new terms. Four independent
/// accumulators keep the loop vectorizable.
#[inline]
fn advance(lambda: &[f64], src: &Terms, mult: &Terms, dst: &mut Terms) -> (Complex64, Complex64) {
    let mut acc = [[0.0f64; 4]; 4];
    let n = lambda.len();
    let head = n - n % 4;
    let chunks = lambda[..head]
        .chunks_exact(4)
        .zip(src.re[..head].chunks_exact(4))
        .zip(src.im[..head].chunks_exact(4))
        .zip(mult.re[..head].chunks_exact(4))
        .zip(mult.im[..head].chunks_exact(4))
        .zip(dst.re[..head].chunks_exact_mut(4).zip(dst.im[..head].chunks_exact_mut(4)));
    for (((((l, sr), si), mr), mi), (dr, di)) in chunks {
        for k in 0..4 {
            let r = sr[k] * mr[k] - si[k] * mi[k];
            let i = sr[k] * mi[k] + si[k] * mr[k];
            dr[k] = r;
            di[k] = i;
            acc[0][k] += r;
            acc[1][k] += i;
            acc[2][k] += l[k] * r;
            acc[3][k] += l[k] * i;
        }
    }
    for k in head..n {
        let r = src.re[k] * mult.re[k] - src.im[k] * mult.im[k];
        let i = src.re[k] * mult.im[k] + src.im[k] * mult.re[k];
        dst.re[k] = r;
        dst.im[k] = i;
        acc[0][0] += r;
        acc[1][0] += i;
        acc[2][0] += lambda[k] * r;
        acc[3][0] += lambda[k] * i;
    }
    let s = |a: [f64; 4]| (a[0] + a[1]) + (a[2] + a[3]);
    let d = Complex64::new(s(acc[2]), s(acc[3])) * Complex64::new(0.0, TAU);
    (Complex64::new(s(acc[0]), s(acc[1])), d)
}

/// Refines unresolved boundary steps from the terms already in hand, with
/// sub-step multipliers cached per refinement level.
struct Walker<'a> {
    f: &'a Realization,
    levels: Vec<Terms>,
    dz: Complex64,
    floor: f64,
}

impl Walker<'_> {
    fn step(
        &mut self,
        start: &Terms,
        p: (Complex64, Complex64),
        q: (Complex64, Complex64),
        z: Complex64,
        level: usize,
    ) -> std::result::Result<f64, BoundaryHit> {
        let k = REFINE_FACTOR;
        let dz = self.dz / (k as f64).powi(level as i32);
        if let Some(v) = resolved_step(p, q, z, dz, self.floor)? {
            return Ok(v);
        }
        if level >= MAX_REFINE_DEPTH as usize {
            return Err(BoundaryHit(z + 0.5 * dz));
        }
        let sub = dz / k as f64;
        if self.levels.len() <= level + 1 {
            let m = self.f.multipliers(sub);
            self.levels.push(m);
        }
        let mut cur = start.clone();
        let mut next = Terms::zeros(self.f.lambda.len());
        let mut prev = p;
        let mut total = 0.0;
        for j in 0..k {
            let last = j + 1 == k;
            // The end value is already known exactly.
            let value = if last { q } else { advance(&self.f.lambda, &cur, &self.levels[level + 1], &mut next) };
            total += self.step(&cur, prev, value, z + sub * j as f64, level + 1)?;
            if !last {
                std::mem::swap(&mut cur, &mut next);
            }
            prev = value;
        }
        Ok(total)
    }
}

fn is_conjugate_closed(lambda: &[f64], coeff: &[Complex64]) -> bool {
    lambda.iter().zip(coeff).all(|(&l, &c)| {
        lambda
            .iter()
            .zip(coeff)
            .any(|(&m, &d)| m == -l && (d - c.conj()).norm() <= 1e-14 * c.norm().max(1e-300))
    })
}

/// Draws realizations of one kind from a fixed discretization.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: Kind,
    nodes: Vec<SpectralNode>,
    /// For symmetric sampling: `(node index of +λ, node index of -λ)`; a
    /// node at λ = 0 appears as `(i, i)`.
    pairs: Vec<(usize, usize)>,
}

impl Sampler {
    /// Discretize `measure` with `n_modes` nodes per continuous component,
    /// accurate for `|Im z| <= height`.
    pub fn new(measure: &SpectralMeasure, kind: Kind, n_modes: usize, height: f64) -> Result<Self> {
        let nodes = measure.discretize(n_modes, height)?;
        Self::from_nodes(nodes, kind)
    }

    pub fn from_nodes(nodes: Vec<SpectralNode>, kind: Kind) -> Result<Self> {
        if nodes.is_empty() {
            return Err(SamplerError::Invalid("no spectral nodes".into()));
        }
        let pairs = match kind {
            Kind::Gaf => Vec::new(),
            Kind::Symmetric => pair_nodes(&nodes)?,
        };
        Ok(Self { kind, nodes, pairs })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn nodes(&self) -> &[SpectralNode] {
        &self.nodes
    }

    pub fn sample(&self, seed: u64, trial: u64) -> Realization {
        let mut rng = GaussianStream::new(seed, trial);
        let n = self.nodes.len();
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        let kind = match self.kind {
            Kind::Gaf => {
                for (k, node) in self.nodes.iter().enumerate() {
                    coeff[k] = node.weight.sqrt() * rng.complex(k as u64);
                }
                RealizationKind::Gaf
            }
            Kind::Symmetric => {
                for &(p, m) in &self.pairs {
                    let (a, b) = rng.pair(p as u64);
                    if p == m {
                        coeff[p] = Complex64::new(self.nodes[p].weight.sqrt() * a, 0.0);
                    } else {
                        // √(2w)(a cos θ + b sin θ) = √(2w)/2 [(a - ib) e^{iθ} + (a + ib) e^{-iθ}]
                        let c = Complex64::new(a, -b) * (0.5 * (2.0 * self.nodes[p].weight).sqrt());
                        coeff[p] = c;
                        coeff[m] = c.conj();
                    }
                }
                RealizationKind::Symmetric
            }
        };
        Realization {
            kind,
            seed,
            trial,
            lambda: self.nodes.iter().map(|n| n.lambda).collect(),
            coeff,
            weight: self.nodes.iter().map(|n| n.weight).collect(),
        }
    }

    /// `K(z, w)` of the discretized measure.
    pub fn kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        let t = z - w.conj();
        self.nodes.iter().map(|n| n.weight * mode_phase(n.lambda, t)).sum()
    }
}

/// Match every node `+λ` with its mirror `-λ` of equal weight.
fn pair_nodes(nodes: &[SpectralNode]) -> Result<Vec<(usize, usize)>> {
    let key = |i: usize| (nodes[i].lambda.abs(), nodes[i].weight);
    let cmp = |a: &usize, b: &usize| {
        let (la, wa) = key(*a);
        let (lb, wb) = key(*b);
        la.total_cmp(&lb).then(wa.total_cmp(&wb))
    };
    let mut pos: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].lambda > 0.0).collect();
    let mut neg: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].lambda < 0.0).collect();
    if pos.len() != neg.len() {
        return Err(SamplerError::NotSymmetric);
    }
    pos.sort_by(cmp);
    neg.sort_by(cmp);
    let mut pairs: Vec<(usize, usize)> = (0..nodes.len()).filter(|&i| nodes[i].lambda == 0.0).map(|i| (i, i)).collect();
    for (&p, &m) in pos.iter().zip(&neg) {
        let (lp, wp) = key(p);
        let (lm, wm) = key(m);
        if (lp - lm).abs() > 1e-12 * lp || (wp - wm).abs() > 1e-12 * wp {
            return Err(SamplerError::NotSymmetric);
        }
        pairs.push((p, m));
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Height used by the one-shot sampling functions: well inside the strip.
pub fn default_height(measure: &SpectralMeasure) -> f64 {
    let d = measure.half_width();
    if d.is_finite() {
        0.8 * d
    } else {
        1.0
    }
}

/// One GAF realization, `f(z) = Σ ζ_k √w_k e^{2πiλ_k z}`.
pub fn sample_gaf(measure: &SpectralMeasure, n_modes: usize, seed: u64, trial: u64) -> Result<Realization> {
    Ok(Sampler::new(measure, Kind::Gaf, n_modes, default_height(measure))?.sample(seed, trial))
}

/// One symmetric GAF realization,
/// `f(z) = Σ_{λ_k > 0} √(2w_k)(a_k cos 2πλ_k z + b_k sin 2πλ_k z) + √w₀ a₀`.
pub fn sample_symmetric_gaf(measure: &SpectralMeasure, n_modes: usize, seed: u64, trial: u64) -> Result<Realization> {
    if !measure.is_symmetric() {
        return Err(SamplerError::NotSymmetric);
    }
    Ok(Sampler::new(measure, Kind::Symmetric, n_modes, default_height(measure))?.sample(seed, trial))
}

/// The coefficients `(ζ₁, ζ₂)` of the two-atom model
/// `f(z) = (ζ₁ e^{-2πiqz} + ζ₂ e^{2πiqz})/√2`, as drawn by [`sample_gaf`]
/// on the measure `½(δ_{-q} + δ_q)`.
pub fn two_atom_coefficients(seed: u64, trial: u64) -> (Complex64, Complex64) {
    let mut rng = GaussianStream::new(seed, trial);
    (rng.complex(0), rng.complex(1))
}

/// The two-atom realization for given coefficients.
pub fn two_atom_realization(q: f64, zeta1: Complex64, zeta2: Complex64) -> Realization {
    let mut r = Realization::from_modes(
        RealizationKind::TwoAtom,
        &[Mode { lambda: -q, coeff: zeta1 * FRAC_1_SQRT_2 }, Mode { lambda: q, coeff: zeta2 * FRAC_1_SQRT_2 }],
    );
    r.weight = vec![0.5, 0.5];
    r
}

/// Sampled two-atom realization, identical to `sample_gaf` on `½(δ_{-q} + δ_q)`.
pub fn sample_two_atom(q: f64, seed: u64, trial: u64) -> Result<Realization> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(SamplerError::Invalid(format!("atom location q = {q} must be positive")));
    }
    let (z1, z2) = two_atom_coefficients(seed, trial);
    let mut r = two_atom_realization(q, z1, z2);
    r.seed = seed;
    r.trial = trial;
    Ok(r)
}

/// Zeros `z_k`, `k ∈ k_range`, of `(ζ₁ e^{-2πiqz} + ζ₂ e^{2πiqz})/√2`:
/// `z_k = [arg(-ζ₁/ζ₂) + 2πk]/(4πq) + i log|ζ₂/ζ₁|/(4πq)`.
pub fn two_atom_zeros_for(q: f64, zeta1: Complex64, zeta2: Complex64, k_range: std::ops::Range<i64>) -> Result<Vec<Complex64>> {
    if zeta1 == Complex64::new(0.0, 0.0) || zeta2 == Complex64::new(0.0, 0.0) {
        return Err(SamplerError::VanishingCoefficient { trial: 0 });
    }
    let ratio = -zeta1 / zeta2;
    let height = (zeta2.norm() / zeta1.norm()).ln() / (4.0 * PI * q);
    Ok(k_range.map(|k| Complex64::new((ratio.arg() + TAU * k as f64) / (4.0 * PI * q), height)).collect())
}

/// Exact zeros of the sampled two-atom realization for `(seed, trial)`.
pub fn two_atom_exact_zeros(q: f64, seed: u64, trial: u64, k_range: std::ops::Range<i64>) -> Result<Vec<Complex64>> {
    let (z1, z2) = two_atom_coefficients(seed, trial);
    two_atom_zeros_for(q, z1, z2, k_range).map_err(|_| SamplerError::VanishingCoefficient { trial })
}

/// Sup-norm of `K_n(z, w) - K(z, w)` over `z, w` in `region`, where `K_n`
/// comes from the `n_modes` discretization. Both kernels depend on
/// `t = z - w̄` only, so a grid over the attainable `t` suffices.
pub fn truncation_report(measure: &SpectralMeasure, n_modes: usize, region: &Rect) -> Result<f64> {
    let height = region.y0.abs().max(region.y1.abs());
    let nodes = measure.discretize(n_modes, height)?;
    if measure.densities().is_empty() {
        return Ok(0.0);
    }
    let width = region.x1 - region.x0;
    let (nx, ny) = (21, 9);
    let mut worst = 0.0f64;
    for i in 0..nx {
        let x = width * i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let s = region.y0 + (region.y1 - region.y0) * j as f64 / (ny - 1) as f64;
            // z - w̄ for z = x + i y, w = 0 + i y': real part x, imaginary part y + y'.
            let t = Complex64::new(x, 2.0 * s);
            let exact = measure.covariance(t)?;
            let approx: Complex64 = nodes.iter().map(|n| n.weight * mode_phase(n.lambda, t)).sum();
            worst = worst.max((approx - exact).norm());
        }
    }
    Ok(worst)
}

/// Smallest `n = 16·2^j` whose truncation error on `region` is below
/// [`AUTO_MODES_TOL`], capped at [`AUTO_MODES_CAP`].
pub fn auto_n_modes(measure: &SpectralMeasure, region: &Rect) -> Result<usize> {
    let mut n = 16;
    while n < AUTO_MODES_CAP {
        if truncation_report(measure, n, region)? < AUTO_MODES_TOL {
            return Ok(n);
        }
        n *= 2;
    }
    Ok(AUTO_MODES_CAP)
}

/// Paley–Wiener GAF through its sinc basis: `f(z) = Σ_n ζ_n sinc(2az - n)`,
/// `n` ranging over `[n_lo, n_hi)`. Cross-check for the spectral sampler.
#[derive(Debug, Clone)]
pub struct SincBasisRealization {
    pub a: f64,
    pub n_lo: i64,
    coeff: Vec<Complex64>,
    symmetric: bool,
}

impl SincBasisRealization {
    /// Covers `x ∈ [x0, x1]` with `margin` extra basis functions on each side.
    pub fn sample(a: f64, x0: f64, x1: f64, margin: i64, kind: Kind, seed: u64, trial: u64) -> Self {
        let n_lo = (2.0 * a * x0).floor() as i64 - margin;
        let n_hi = (2.0 * a * x1).ceil() as i64 + margin;
        let mut rng = GaussianStream::new(seed, trial);
        let coeff = (n_lo..n_hi)
            .enumerate()
            .map(|(k, _)| match kind {
                Kind::Gaf => rng.complex(k as u64),
                Kind::Symmetric => Complex64::new(rng.pair(k as u64).0, 0.0),
            })
            .collect();
        Self { a, n_lo, coeff, symmetric: kind == Kind::Symmetric }
    }
}

impl Holomorphic for SincBasisRealization {
    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut f = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeff.iter().enumerate() {
            let u = (2.0 * self.a * z - (self.n_lo + k as i64) as f64) * PI;
            let (s, ds) = if u.norm() < 1e-4 {
                let u2 = u * u;
                (1.0 - u2 / 6.0 + u2 * u2 / 120.0, -u / 3.0 + u * u2 / 30.0)
            } else {
                let (sn, cs) = (u.sin(), u.cos());
                (sn / u, (cs * u - sn) / (u * u))
            };
            f += c * s;
            d += c * ds;
        }
        (f, d * (2.0 * self.a * PI))
    }

    fn profile(&self, y: f64) -> (f64, f64) {
        let v = 4.0 * PI * self.a * y;
        let scale = if v.abs() < 1e-8 { 1.0 } else { (v.sinh() / v).sqrt() };
        (scale, 0.05 / self.a)
    }

    fn conjugate_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Fock–Bargmann GAF through its monomial basis:
/// `f(z) = e^{-π²a²z²} Σ_n ζ_n (bz)^n/√n!`, `b = √2 πa`.
#[derive(Debug, Clone)]
pub struct MonomialBasisRealization {
    pub a: f64,
    coeff: Vec<Complex64>,
    symmetric: bool,
}

impl MonomialBasisRealization {
    /// Basis constant reproducing the kernel `e^{-π²a²(z - w̄)²}`.
    pub fn basis_constant(a: f64) -> f64 {
        2f64.sqrt() * PI * a
    }

    /// Accurate for `|z| <= radius`.
    pub fn sample(a: f64, radius: f64, kind: Kind, seed: u64, trial: u64) -> Self {
        let b2r2 = (Self::basis_constant(a) * radius).powi(2);
        let n_terms = (b2r2 + 12.0 * b2r2.sqrt() + 60.0).ceil() as usize;
        let mut rng = GaussianStream::new(seed, trial);
        let coeff = (0..n_terms)
            .map(|k| match kind {
                Kind::Gaf => rng.complex(k as u64),
                Kind::Symmetric => Complex64::new(rng.pair(k as u64).0, 0.0),
            })
            .collect();
        Self { a, coeff, symmetric: kind == Kind::Symmetric }
    }
}

impl Holomorphic for MonomialBasisRealization {
    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let b = Self::basis_constant(self.a);
        let w = b * z;
        // Σ ζ_n w^n/√n! and its w-derivative, with the Gaussian factor folded
        // into the running term to keep magnitudes bounded.
        let g = (-(PI * self.a * z).powi(2)).exp();
        let mut term = g;
        let mut prev = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for (n, c) in self.coeff.iter().enumerate() {
            if n > 0 {
                prev = term;
                term = term * w / (n as f64).sqrt();
            }
            s += c * term;
            // d/dw (w^n/√n!) = √n · w^{n-1}/√(n-1)!
            if n > 0 {
                ds += c * prev * (n as f64).sqrt();
            }
        }
        // f = g(z) h(bz), f' = g' h + g b h'
        let f = s;
        let d = -2.0 * (PI * self.a).powi(2) * z * s + b * ds;
        (f, d)
    }

    fn profile(&self, y: f64) -> (f64, f64) {
        ((2.0 * (PI * self.a * y).powi(2)).exp(), 0.05 / self.a)
    }

    fn conjugate_symmetric(&self) -> bool {
        self.symmetric
    }
}

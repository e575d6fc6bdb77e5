//! Zero localization for analytic functions on rectangles.
//!
//! Counting uses the argument principle: the change of `arg f` along the
//! boundary is accumulated from principal logarithms of ratios of
//! consecutive samples, and a step is accepted only if `|h f'/f| <= 1` at
//! both ends and the principal logarithm agrees with the trapezoid estimate
//! of `∫ f'/f`. Rejected steps are split into [`REFINE_FACTOR`] pieces.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of pieces an unresolved boundary step is split into.
pub const REFINE_FACTOR: usize = 4;
/// Deepest refinement of one boundary step.
pub const MAX_REFINE_DEPTH: u32 = 20;
/// Bound on `|h f'/f|` at the ends of an accepted step. With a zero at
/// distance `r` from both ends this keeps `r >= h`, so the step subtends at
/// most 60° and the principal logarithm cannot wrap.
const STEP_LOG_BOUND: f64 = 1.0;
/// Bound on the disagreement between `Log(f₁/f₀)` and the trapezoid estimate.
const STEP_AGREEMENT: f64 = 0.1;
/// Half-height of the thin rectangle used to certify real-zero scans.
pub const THIN_STRIP: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error("invalid rectangle [{x0}, {x1}] x [{y0}, {y1}]")]
    InvalidRect { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("function is too small on the boundary near {location} after {attempts} perturbations")]
    BoundaryZero { location: Complex64, attempts: usize },
    #[error("winding integral {value} is not close to an integer")]
    NotInteger { value: f64 },
    #[error("could not isolate zeros in [{x0}, {x1}] x [{y0}, {y1}]")]
    Unresolved { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("real-line scan found {found} zeros but the thin-strip count is {expected}")]
    ScanMismatch { found: usize, expected: i64 },
    #[error("real-zero scan needs a function that is real on the real axis")]
    NotSymmetric,
}

pub type Result<T> = std::result::Result<T, ZeroError>;

/// An analytic function that can be evaluated with its derivative.
pub trait Holomorphic: Sync {
    /// `(f(z), f'(z))`.
    fn eval(&self, z: Complex64) -> (Complex64, Complex64);

    /// `(f, f')` at `z0 + j·dz` for `j = 0..count`, written to `out`.
    fn eval_segment(&self, z0: Complex64, dz: Complex64, count: usize, out: &mut Vec<(Complex64, Complex64)>) {
        out.clear();
        out.extend((0..count).map(|j| self.eval(z0 + dz * j as f64)));
    }

    /// `(scale, step)` at height `y`: the typical size of `|f|`, which
    /// tolerances are relative to, and a boundary sampling step.
    fn profile(&self, _y: f64) -> (f64, f64) {
        (1.0, 0.05)
    }

    /// Whether `f(z̄) = conj f(z)`, so that zeros come in conjugate pairs.
    fn conjugate_symmetric(&self) -> bool {
        false
    }

    /// Change of `arg f` over each step `a + j·dz → a + (j+1)·dz`,
    /// `j < steps`, refining steps as needed. Fails if `|f| < floor` is met.
    fn arg_steps(&self, a: Complex64, dz: Complex64, steps: usize, floor: f64) -> std::result::Result<Vec<f64>, BoundaryHit> {
        let mut buf = Vec::with_capacity(steps + 1);
        self.eval_segment(a, dz, steps + 1, &mut buf);
        (0..steps).map(|j| step_arg(self, buf[j], buf[j + 1], a + dz * j as f64, dz, floor, 0)).collect()
    }
}

/// A boundary evaluation came closer to a zero than the floor allows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryHit(pub Complex64);

/// Arg change over a step if the step is resolved: `|h f'/f| <= 1` at both
/// ends and `Log(f₁/f₀)` agrees with the trapezoid estimate of `∫ f'/f`.
/// `Err` carries the offending point when `|f|` is below `floor`.
pub fn resolved_step(
    p: (Complex64, Complex64),
    q: (Complex64, Complex64),
    z: Complex64,
    dz: Complex64,
    floor: f64,
) -> std::result::Result<Option<f64>, BoundaryHit> {
    if p.0.norm() < floor {
        return Err(BoundaryHit(z));
    }
    if q.0.norm() < floor {
        return Err(BoundaryHit(z + dz));
    }
    let u0 = p.1 / p.0 * dz;
    let u1 = q.1 / q.0 * dz;
    let lg = (q.0 / p.0).ln();
    if u0.norm() <= STEP_LOG_BOUND && u1.norm() <= STEP_LOG_BOUND && (lg - 0.5 * (u0 + u1)).norm() <= STEP_AGREEMENT {
        Ok(Some(lg.im))
    } else {
        Ok(None)
    }
}

/// A holomorphic function given by closures for `f` and `f'`.
pub struct FnHolomorphic<F, D> {
    f: F,
    df: D,
    symmetric: bool,
    step: f64,
}

impl<F, D> FnHolomorphic<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(f: F, df: D) -> Self {
        Self { f, df, symmetric: false, step: 0.05 }
    }

    /// Declare `f(z̄) = conj f(z)`.
    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl<F, D> Holomorphic for FnHolomorphic<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        ((self.f)(z), (self.df)(z))
    }

    fn profile(&self, _y: f64) -> (f64, f64) {
        (1.0, self.step)
    }

    fn conjugate_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if x0 < x1 && y0 < y1 && [x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            Ok(Self { x0, x1, y0, y1 })
        } else {
            Err(ZeroError::InvalidRect { x0, x1, y0, y1 })
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Half-open membership `[x0, x1) x [y0, y1)`.
    pub fn contains_half_open(&self, z: Complex64) -> bool {
        self.x0 <= z.re && z.re < self.x1 && self.y0 <= z.im && z.im < self.y1
    }

    pub fn contains_closed(&self, z: Complex64) -> bool {
        self.x0 <= z.re && z.re <= self.x1 && self.y0 <= z.im && z.im <= self.y1
    }

    fn expanded(&self, eps: f64) -> Self {
        Self { x0: self.x0 - eps, x1: self.x1 + eps, y0: self.y0 - eps, y1: self.y1 + eps }
    }

    /// The four children obtained by cutting at fractions `(fx, fy)`.
    fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.x0 + fx * self.width();
        let ym = self.y0 + fy * self.height();
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }
}

/// Tolerances for counting and localization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroOptions {
    /// Newton stops once `|f| < refine_tol · scale`.
    pub refine_tol: f64,
    /// Boundary samples with `|f| < boundary_floor · scale` trigger a perturbation.
    pub boundary_floor: f64,
    /// Zeros with `|Im z| < real_tol` are tagged real.
    pub real_tol: f64,
    /// Cells below this diameter holding several zeros are reported as clusters.
    pub min_size: f64,
    pub max_jitter: usize,
    pub newton_steps: usize,
    /// Boundary sampling step; defaults to the function's hint.
    pub step: Option<f64>,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self {
            refine_tol: 1e-10,
            boundary_floor: 1e-9,
            real_tol: 1e-8,
            min_size: 1e-9,
            max_jitter: 5,
            newton_steps: 50,
            step: None,
        }
    }
}

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub z: Complex64,
    /// `|f(z)|` at the reported location.
    pub residual: f64,
    pub is_real: bool,
    /// 1 for an isolated zero; more for an unresolved cluster.
    pub multiplicity: u32,
}

/// Zeros of a function in a rectangle, with their argument-principle certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub rect: Rect,
    /// Total multiplicity certified by the boundary winding number.
    pub certified_count: usize,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Zero> {
        self.zeros.iter().filter(|z| z.multiplicity > 1)
    }
}

fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic perturbation size for attempt `attempt >= 1` at a location.
fn jitter(key: &[f64], attempt: usize, size: f64) -> f64 {
    let mut h = attempt as u64;
    for v in key {
        h = mix64(h ^ v.to_bits());
    }
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    size * 1e-7 * attempt as f64 * (0.5 + u)
}

/// Change of `arg f` over one step, refined until resolved.
fn step_arg<F: Holomorphic + ?Sized>(
    f: &F,
    p: (Complex64, Complex64),
    q: (Complex64, Complex64),
    z: Complex64,
    dz: Complex64,
    floor: f64,
    depth: u32,
) -> std::result::Result<f64, BoundaryHit> {
    if let Some(v) = resolved_step(p, q, z, dz, floor)? {
        return Ok(v);
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(BoundaryHit(z + 0.5 * dz));
    }
    let k = REFINE_FACTOR;
    let sub = dz / k as f64;
    let mut buf = Vec::with_capacity(k + 1);
    f.eval_segment(z, sub, k + 1, &mut buf);
    // Keep the already known end values exactly.
    buf[0] = p;
    buf[k] = q;
    let mut total = 0.0;
    for j in 0..k {
        total += step_arg(f, buf[j], buf[j + 1], z + sub * j as f64, sub, floor, depth + 1)?;
    }
    Ok(total)
}

/// Boundary floor and sampling step for the segment `a → b`.
fn edge_params<F: Holomorphic + ?Sized>(f: &F, a: Complex64, b: Complex64, opts: &ZeroOptions) -> (f64, f64) {
    let (sa, ha) = f.profile(a.im);
    let (mut scale, mut step) = (sa, ha);
    if a.im != b.im {
        let (sb, hb) = f.profile(b.im);
        scale = scale.min(sb);
        step = step.min(hb);
        if a.im.min(b.im) < 0.0 && a.im.max(b.im) > 0.0 {
            scale = scale.min(f.profile(0.0).0);
        }
    }
    (opts.boundary_floor * scale, opts.step.unwrap_or(step))
}

/// Change of `arg f` along the segment from `a` to `b`.
fn edge_arg<F: Holomorphic + ?Sized>(f: &F, a: Complex64, b: Complex64, opts: &ZeroOptions) -> std::result::Result<f64, BoundaryHit> {
    let (floor, h) = edge_params(f, a, b, opts);
    let steps = ((b - a).norm() / h).ceil().max(1.0) as usize;
    let dz = (b - a) / steps as f64;
    Ok(f.arg_steps(a, dz, steps, floor)?.iter().sum())
}

fn to_count(total_arg: f64) -> Result<i64> {
    let w = total_arg / TAU;
    let n = w.round();
    if (w - n).abs() > 0.25 {
        return Err(ZeroError::NotInteger { value: w });
    }
    Ok(n as i64)
}

fn rect_winding_once<F: Holomorphic + ?Sized>(f: &F, r: &Rect, opts: &ZeroOptions) -> std::result::Result<Result<i64>, BoundaryHit> {
    let c = |x: f64, y: f64| Complex64::new(x, y);
    let total = edge_arg(f, c(r.x0, r.y0), c(r.x1, r.y0), opts)?
        + edge_arg(f, c(r.x1, r.y0), c(r.x1, r.y1), opts)?
        + edge_arg(f, c(r.x1, r.y1), c(r.x0, r.y1), opts)?
        + edge_arg(f, c(r.x0, r.y1), c(r.x0, r.y0), opts)?;
    Ok(to_count(total))
}

/// Winding count on `rect`, perturbing the edges outward if the boundary
/// passes too close to a zero. Returns the count and the rectangle used.
fn winding_with_jitter<F: Holomorphic + ?Sized>(f: &F, rect: &Rect, opts: &ZeroOptions) -> Result<(i64, Rect)> {
    let mut last = rect.center();
    for attempt in 0..=opts.max_jitter {
        let r = if attempt == 0 {
            *rect
        } else {
            rect.expanded(jitter(&[rect.x0, rect.x1, rect.y0, rect.y1], attempt, rect.diameter()))
        };
        match rect_winding_once(f, &r, opts) {
            Ok(count) => return Ok((count?, r)),
            Err(BoundaryHit(z)) => last = z,
        }
    }
    Err(ZeroError::BoundaryZero { location: last, attempts: opts.max_jitter })
}

/// Number of zeros of `f` inside `rect` (with multiplicity).
pub fn winding_count<F: Holomorphic + ?Sized>(f: &F, rect: &Rect, opts: &ZeroOptions) -> Result<i64> {
    winding_with_jitter(f, rect, opts).map(|(n, _)| n)
}

/// Newton iteration from `start`; `Some(z)` if it converged inside `cell`.
fn newton_in<F: Holomorphic + ?Sized>(f: &F, start: Complex64, cell: &Rect, opts: &ZeroOptions) -> Option<(Complex64, f64)> {
    let mut z = start;
    let tol = opts.refine_tol * f.profile(start.im).0;
    let reach = 2.0 * cell.diameter();
    for _ in 0..opts.newton_steps {
        let (v, d) = f.eval(z);
        if v.norm() < tol {
            // One polishing step, kept only if it helps.
            let better = z - v / d;
            let rb = f.eval(better).0.norm();
            let (z, r) = if d.norm() > 0.0 && rb < v.norm() { (better, rb) } else { (z, v.norm()) };
            return cell.contains_closed(z).then_some((z, r));
        }
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return None;
        }
        z -= v / d;
        if (z - start).norm() > reach || !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
    }
    None
}

/// Candidate cut fractions; never exactly one half so that a symmetric
/// subdivision does not land on the real axis.
const SPLITS: [(f64, f64); 5] = [(0.5, 0.5123), (0.4871, 0.4937), (0.5317, 0.4719), (0.4603, 0.5389), (0.5531, 0.4571)];

/// All zeros of `f` in the half-open rectangle `[x0, x1) x [y0, y1)`.
pub fn locate_zeros<F: Holomorphic + ?Sized>(f: &F, rect: &Rect, opts: &ZeroOptions) -> Result<ZeroSet> {
    let (total, root) = winding_with_jitter(f, rect, opts)?;
    let mut found: Vec<Zero> = Vec::new();
    let mut stack = vec![(root, total)];
    while let Some((cell, n)) = stack.pop() {
        if n <= 0 {
            continue;
        }
        if n == 1 {
            if let Some((z, residual)) = newton_in(f, cell.center(), &cell, opts) {
                found.push(Zero { z, residual, is_real: false, multiplicity: 1 });
                continue;
            }
        }
        if cell.diameter() < opts.min_size {
            let z = cell.center();
            found.push(Zero { z, residual: f.eval(z).0.norm(), is_real: false, multiplicity: n as u32 });
            continue;
        }
        let mut children = None;
        for &(fx, fy) in &SPLITS {
            let parts = cell.split(fx, fy);
            let counts: std::result::Result<Vec<Result<i64>>, BoundaryHit> =
                parts.iter().map(|p| rect_winding_once(f, p, opts)).collect();
            if let Ok(counts) = counts {
                if let Ok(counts) = counts.into_iter().collect::<Result<Vec<i64>>>() {
                    if counts.iter().sum::<i64>() == n && counts.iter().all(|&c| c >= 0) {
                        children = Some(parts.into_iter().zip(counts).collect::<Vec<_>>());
                        break;
                    }
                }
            }
        }
        match children {
            Some(ch) => stack.extend(ch),
            None => {
                // Every cut passes too close to a zero: the cell holds a
                // cluster that cannot be separated at this precision.
                let z = cell.center();
                found.push(Zero { z, residual: f.eval(z).0.norm(), is_real: false, multiplicity: n as u32 });
            }
        }
    }
    let found_total: i64 = found.iter().map(|z| z.multiplicity as i64).sum();
    if found_total != total {
        return Err(ZeroError::Unresolved { x0: rect.x0, x1: rect.x1, y0: rect.y0, y1: rect.y1 });
    }
    let symmetric = f.conjugate_symmetric();
    let mut zeros: Vec<Zero> = found
        .into_iter()
        .map(|mut z| {
            if z.z.im.abs() < opts.real_tol {
                z.is_real = true;
                if symmetric {
                    z.z.im = 0.0;
                }
            }
            z
        })
        .filter(|z| rect.contains_half_open(z.z))
        .collect();
    zeros.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let certified_count = zeros.iter().map(|z| z.multiplicity as usize).sum();
    Ok(ZeroSet { zeros, rect: *rect, certified_count })
}

/// Real zeros in `[x0, x1)` of a function that is real on the real axis,
/// bracketed by sign changes on a grid of pitch `scan_step` and refined by
/// safeguarded Newton. The count is certified against the winding number of
/// the thin rectangle `[x0, x1] x [-THIN_STRIP, THIN_STRIP]`; on mismatch the
/// pitch is halved, up to four times.
pub fn real_zeros<F: Holomorphic + ?Sized>(f: &F, x0: f64, x1: f64, scan_step: f64, opts: &ZeroOptions) -> Result<Vec<f64>> {
    if !f.conjugate_symmetric() {
        return Err(ZeroError::NotSymmetric);
    }
    let thin = Rect::new(x0, x1, -THIN_STRIP, THIN_STRIP)?;
    let (expected, used) = winding_with_jitter(f, &thin, opts)?;
    // Zeros picked up by an outward perturbation of the thin rectangle.
    let lo = used.x0;
    let hi = used.x1;
    let mut found = 0;
    for halving in 0..=4 {
        let step = scan_step / (1u32 << halving) as f64;
        let roots = scan_real(f, lo, hi, step, opts);
        found = roots.len();
        if found as i64 == expected {
            return Ok(roots.into_iter().filter(|&x| x0 <= x && x < x1).collect());
        }
    }
    Err(ZeroError::ScanMismatch { found, expected })
}

fn scan_real<F: Holomorphic + ?Sized>(f: &F, x0: f64, x1: f64, step: f64, opts: &ZeroOptions) -> Vec<f64> {
    let steps = ((x1 - x0) / step).ceil().max(1.0) as usize;
    let dx = (x1 - x0) / steps as f64;
    let mut buf = Vec::with_capacity(steps + 1);
    f.eval_segment(Complex64::new(x0, 0.0), Complex64::new(dx, 0.0), steps + 1, &mut buf);
    let tol = opts.refine_tol * f.profile(0.0).0;
    let mut roots = Vec::new();
    for j in 0..steps {
        let (a, b) = (x0 + j as f64 * dx, x0 + (j + 1) as f64 * dx);
        let (ga, gb) = (buf[j].0.re, buf[j + 1].0.re);
        if ga == 0.0 {
            roots.push(a);
        } else if ga.signum() != gb.signum() && gb != 0.0 {
            roots.push(refine_real(f, a, b, ga, tol));
        }
    }
    roots
}

/// Safeguarded Newton on a sign-change bracket.
fn refine_real<F: Holomorphic + ?Sized>(f: &F, mut a: f64, mut b: f64, ga: f64, tol: f64) -> f64 {
    let sa = ga.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (v, d) = f.eval(Complex64::new(x, 0.0));
        let (g, dg) = (v.re, d.re);
        if g.abs() < tol || b - a < 4.0 * f64::EPSILON * x.abs().max(1.0) {
            // Polish a converged root while Newton keeps improving it.
            let (mut x, mut g, mut dg) = (x, g, dg);
            for _ in 0..3 {
                if dg == 0.0 {
                    break;
                }
                let nx = x - g / dg;
                let (nv, nd) = f.eval(Complex64::new(nx, 0.0));
                if nv.re.abs() >= g.abs() {
                    break;
                }
                (x, g, dg) = (nx, nv.re, nd.re);
            }
            return x;
        }
        if g.signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let nx = x - g / dg;
        x = if dg != 0.0 && nx > a && nx < b { nx } else { 0.5 * (a + b) };
    }
    x
}

/// Zero counts in the cells `[xs_j, xs_{j+1}) x [ys_i, ys_{i+1})`, returned
/// as `counts[j][i]`, from the change of `arg f` along the grid lines. Much
/// cheaper than locating the zeros when only counts are needed.
pub fn grid_counts<F: Holomorphic + ?Sized>(f: &F, xs: &[f64], ys: &[f64], opts: &ZeroOptions) -> Result<Vec<Vec<i64>>> {
    if xs.len() < 2 || ys.len() < 2 || xs.windows(2).any(|w| w[0] >= w[1]) || ys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ZeroError::InvalidRect { x0: xs[0], x1: xs[xs.len() - 1], y0: ys[0], y1: ys[ys.len() - 1] });
    }
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    let span = (xs[xs.len() - 1] - xs[0]).hypot(ys[ys.len() - 1] - ys[0]);
    let mut attempts = 0;
    loop {
        match grid_counts_once(f, &xs, &ys, opts) {
            Ok(counts) => return counts,
            Err(BoundaryHit(z)) => {
                attempts += 1;
                if attempts > opts.max_jitter {
                    return Err(ZeroError::BoundaryZero { location: z, attempts: opts.max_jitter });
                }
                // Move the grid line nearest to the offending point.
                let nearest = |v: &[f64], t: f64| {
                    (0..v.len()).min_by(|&a, &b| (v[a] - t).abs().total_cmp(&(v[b] - t).abs())).unwrap()
                };
                let (i, j) = (nearest(&ys, z.im), nearest(&xs, z.re));
                if (ys[i] - z.im).abs() <= (xs[j] - z.re).abs() {
                    ys[i] += jitter(&[ys[i], z.re], attempts, span);
                } else {
                    xs[j] += jitter(&[xs[j], z.im], attempts, span);
                }
            }
        }
    }
}

fn grid_counts_once<F: Holomorphic + ?Sized>(
    f: &F,
    xs: &[f64],
    ys: &[f64],
    opts: &ZeroOptions,
) -> std::result::Result<Result<Vec<Vec<i64>>>, BoundaryHit> {
    let c = |x: f64, y: f64| Complex64::new(x, y);
    // horizontal[i][j]: along y = ys[i] from xs[j] to xs[j+1].
    let mut horizontal = vec![vec![0.0; xs.len() - 1]; ys.len()];
    for (i, &y) in ys.iter().enumerate() {
        for j in 0..xs.len() - 1 {
            horizontal[i][j] = edge_arg(f, c(xs[j], y), c(xs[j + 1], y), opts)?;
        }
    }
    // vertical[j][i]: along x = xs[j] from ys[i] up to ys[i+1].
    let mut vertical = vec![vec![0.0; ys.len() - 1]; xs.len()];
    for (j, &x) in xs.iter().enumerate() {
        for i in 0..ys.len() - 1 {
            vertical[j][i] = edge_arg(f, c(x, ys[i]), c(x, ys[i + 1]), opts)?;
        }
    }
    let mut counts = vec![vec![0i64; ys.len() - 1]; xs.len() - 1];
    for j in 0..xs.len() - 1 {
        for i in 0..ys.len() - 1 {
            let total = horizontal[i][j] + vertical[j + 1][i] - horizontal[i + 1][j] - vertical[j][i];
            match to_count(total) {
                Ok(n) => counts[j][i] = n,
                Err(e) => return Ok(Err(e)),
            }
        }
    }
    Ok(Ok(counts))
}

//! Quadrature rules shared by the spectral integrals and the samplers.
//!
//! Rules are computed on first use and cached per node count; they are
//! immutable afterwards and can be shared across threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterate over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

type Cache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let cache = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build(n));
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`.
///
/// Nodes are returned in increasing order and are exactly antisymmetric.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_gauss_legendre)
}

fn build_gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, then Newton on P_n.
        let theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Hermite rule with `n` nodes for the weight `exp(-x^2)` on the real line.
///
/// Weights sum to `sqrt(pi)`.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_gauss_hermite)
}

fn build_gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    // Golub–Welsch: eigenvalues of the Jacobi matrix with zero diagonal and
    // off-diagonal sqrt(k/2); weights from first eigenvector components.
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let (values, first) = symmetric_tridiagonal_eigen(diag, off);
    let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(first).map(|(x, v)| (x, PI.sqrt() * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize exactly.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        weights[n / 2] = pairs[n / 2].1;
    }
    Rule { nodes, weights }
}

/// Implicit QL on a symmetric tridiagonal matrix, tracking only the first
/// component of each normalized eigenvector.
fn symmetric_tridiagonal_eigen(mut d: Vec<f64>, off: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 200, "tridiagonal eigensolver did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    (d, z)
}

/// Trapezoidal rule in `s` for the substitution `x = scale * sinh(s)`,
/// truncated to `|s| <= s_max`, with `n` equally spaced `s`-nodes.
///
/// Returned nodes/weights are in the `x` variable, so that
/// `sum w_j g(x_j) ~ int g(x) dx` for `g` analytic in a strip and
/// decaying at least exponentially. Symmetric by construction.
pub fn sinh_trapezoid(n: usize, s_max: f64, scale: f64) -> Rule {
    assert!(n >= 2, "sinh-trapezoid rule needs at least two nodes");
    let h = 2.0 * s_max / (n as f64 - 1.0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let s = s_max - i as f64 * h;
        let x = scale * s.sinh();
        let w = scale * s.cosh() * h;
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        weights[n / 2] = scale * h;
    }
    Rule { nodes, weights }
}

/// Panel budget for [`integrate_adaptive`].
const MAX_PANELS: usize = 20_000;

/// Adaptive Gauss–Legendre integration of a real function on `[a, b]`.
///
/// Returns the integral and an error estimate (difference between the two
/// finest refinements).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        let rule = gauss_legendre(16);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        rule.iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        budget: &mut usize,
    ) -> (f64, f64) {
        let mid = 0.5 * (a + b);
        let left = panel(f, a, mid);
        let right = panel(f, mid, b);
        let err = (left + right - whole).abs();
        *budget = budget.saturating_sub(2);
        if err <= tol || *budget == 0 || mid <= a || mid >= b {
            return (left + right, err);
        }
        let (l, el) = recurse(f, a, mid, left, 0.5 * tol, budget);
        let (r, er) = recurse(f, mid, b, right, 0.5 * tol, budget);
        (l + r, el + er)
    }
    if a == b {
        return (0.0, 0.0);
    }
    let whole = panel(&f, a, b);
    let mut budget = MAX_PANELS;
    recurse(&f, a, b, whole, tol, &mut budget)
}

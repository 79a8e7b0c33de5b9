//! Brute-force reference implementations used as test oracles.
//!
//! Nothing here calls the library's matrix, root-finding or swarm code; the
//! model formulas, information matrices and determinants are re-derived
//! with plain `Vec`s and cofactor expansion.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    MichaelisMenten,
    Emax,
    Exponential,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::MichaelisMenten => 2,
            _ => 3,
        }
    }
}

/// `(∂m/∂θ, ∂m/∂x)` written out per family.
pub fn derivatives(f: Family, x: f64, th: &[f64]) -> (Vec<f64>, f64) {
    match f {
        Family::MichaelisMenten => {
            let (t1, t2) = (th[0], th[1]);
            let d = t2 + x;
            (vec![x / d, -(t1 * x) / (d * d)], t1 * t2 / (d * d))
        }
        Family::Emax => {
            let (t1, t2) = (th[1], th[2]);
            let d = t2 + x;
            (vec![1.0, x / d, -(t1 * x) / (d * d)], t1 * t2 / (d * d))
        }
        Family::Exponential => {
            let (t1, t2) = (th[1], th[2]);
            let e = f64::exp(-t2 * x);
            (vec![1.0, e, -t1 * x * e], -t1 * t2 * e)
        }
    }
}

pub fn response(f: Family, x: f64, th: &[f64]) -> f64 {
    match f {
        Family::MichaelisMenten => th[0] * x / (th[1] + x),
        Family::Emax => th[0] + th[1] * x / (th[2] + x),
        Family::Exponential => th[0] + th[1] * (-th[2] * x).exp(),
    }
}

/// Central difference with step `h`.
pub fn central_diff(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (g(x + h) - g(x - h)) / (2.0 * h)
}

/// Determinant by Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0.0;
    for j in 0..n {
        let minor: Vec<Vec<f64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][j] * cofactor_det(&minor);
    }
    total
}

/// `(M_ML, D_0, D_1)` accumulated point by point.
pub fn moments(
    f: Family,
    points: &[f64],
    weights: &[f64],
    th: &[f64],
    s_eta: f64,
    s_eps: f64,
) -> [Vec<Vec<f64>>; 3] {
    let n = f.dim();
    let mut out = [
        vec![vec![0.0; n]; n],
        vec![vec![0.0; n]; n],
        vec![vec![0.0; n]; n],
    ];
    for (&x, &w) in points.iter().zip(weights) {
        let (g, slope) = derivatives(f, x, th);
        let s0 = 1.0 + slope * slope;
        let s1 = s_eta + slope * slope * s_eps;
        let factors = [w / s1, w / s0, w * s1 / s0];
        for (m, fac) in out.iter_mut().zip(factors) {
            for i in 0..n {
                for j in 0..n {
                    m[i][j] += fac * g[i] * g[j];
                }
            }
        }
    }
    out
}

/// `log det M` with `det M_LS = det(D_0)² / det(D_1)`; `-inf` if not positive.
pub fn log_det_atom(
    f: Family,
    points: &[f64],
    weights: &[f64],
    th: &[f64],
    rho_sq: f64,
    ls: bool,
) -> f64 {
    let [ml, d0, d1] = moments(f, points, weights, th, 1.0, rho_sq);
    let det = if ls {
        let a = cofactor_det(&d0);
        let b = cofactor_det(&d1);
        if b <= 0.0 {
            return f64::NEG_INFINITY;
        }
        a * a / b
    } else {
        cofactor_det(&ml)
    };
    if det > 0.0 {
        det.ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn phi(f: Family, points: &[f64], prior: &[(Vec<f64>, f64)], rho_sq: f64, ls: bool) -> f64 {
    let w = vec![1.0 / points.len() as f64; points.len()];
    let mut total = 0.0;
    for (th, p) in prior {
        let v = log_det_atom(f, points, &w, th, rho_sq, ls);
        if !v.is_finite() {
            return f64::NEG_INFINITY;
        }
        total += p * v;
    }
    total
}

/// Uniform grid prior, last coordinate fastest.
pub fn grid_prior(intervals: &[(f64, f64)], nu: usize) -> Vec<(Vec<f64>, f64)> {
    let axes: Vec<Vec<f64>> = intervals
        .iter()
        .map(|&(lo, hi)| {
            if lo == hi {
                vec![lo]
            } else {
                (0..nu)
                    .map(|i| lo + (hi - lo) * i as f64 / (nu - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut atoms: Vec<Vec<f64>> = vec![vec![]];
    for ax in &axes {
        atoms = atoms
            .into_iter()
            .flat_map(|a| ax.iter().map(move |&v| [a.clone(), vec![v]].concat()))
            .collect();
    }
    let w = 1.0 / atoms.len() as f64;
    atoms.into_iter().map(|a| (a, w)).collect()
}

#[derive(Clone, Debug)]
pub struct GridSearchResult {
    pub best_points: Vec<f64>,
    pub best_value: f64,
    pub grid_resolution: usize,
}

/// Exhaustive search over equally weighted saturated designs on `[0, x_u]`.
///
/// One free point: `{x1, x_u}` (MM) or `{0, x1, x_u}`. Two free points:
/// `{x0, x1, x_u}` with `x0 < x1`. Degenerate nodes score `-inf`.
pub fn grid_maximize_phi(
    f: Family,
    prior: &[(Vec<f64>, f64)],
    rho_sq: f64,
    ls: bool,
    x_u: f64,
    free_point_count: usize,
    resolution: usize,
) -> GridSearchResult {
    let node = |i: usize| x_u * i as f64 / (resolution - 1) as f64;
    let mut best = GridSearchResult {
        best_points: Vec::new(),
        best_value: f64::NEG_INFINITY,
        grid_resolution: resolution,
    };
    let mut consider = |pts: Vec<f64>| {
        let v = phi(f, &pts, prior, rho_sq, ls);
        if v > best.best_value {
            best.best_value = v;
            best.best_points = pts;
        }
    };
    match free_point_count {
        1 => {
            for i in 1..resolution - 1 {
                let x = node(i);
                if f == Family::MichaelisMenten {
                    consider(vec![x, x_u]);
                } else {
                    consider(vec![0.0, x, x_u]);
                }
            }
        }
        2 => {
            for i in 0..resolution - 1 {
                for j in i + 1..resolution - 1 {
                    consider(vec![node(i), node(j), x_u]);
                }
            }
        }
        _ => panic!("free_point_count must be 1 or 2"),
    }
    best
}

/// First-order condition for `{x1, x_u}` / `{0, x1, x_u}` under the
/// hyperbolic models, from the derivative of the log-determinant.
pub fn hyperbolic_condition(x: f64, x_u: f64, t1: f64, t2: f64, rho_sq: f64, ls: bool) -> f64 {
    let a = t2 + x;
    let k = (t1 * t2).powi(2);
    let a4 = a.powi(4);
    let mut v = 1.0 / x - 1.0 / (x_u - x) - 2.0 * a.powi(3) / (a4 + k * rho_sq);
    if ls {
        // half the derivative of 4 ln a − ln(a⁴ + k)
        v += 2.0 / a - 2.0 * a.powi(3) / (a4 + k);
    }
    v
}

/// First-order condition for `{0, x1, x_u}` under the exponential model (ML).
pub fn exponential_condition(x: f64, x_u: f64, t1: f64, t2: f64, rho_sq: f64) -> f64 {
    let k = (t1 * t2).powi(2);
    let b = x - x_u + x_u * (t2 * x).exp() - x * (t2 * x_u).exp();
    let db = 1.0 + t2 * x_u * (t2 * x).exp() - (t2 * x_u).exp();
    let e2 = (2.0 * t2 * x).exp();
    db / b - t2 * e2 / (e2 + k * rho_sq)
}

/// Brackets sign changes on a `steps`-point scan of `(a, b)` and bisects each
/// to the last representable midpoint.
pub fn bisection_roots(g: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut x_prev = a;
    let mut g_prev = g(a);
    for i in 1..steps {
        let x = a + (b - a) * i as f64 / (steps - 1) as f64;
        let gx = g(x);
        if g_prev.is_finite() && gx.is_finite() && g_prev.signum() != gx.signum() {
            let (mut lo, mut hi, mut glo) = (x_prev, x, g_prev);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x_prev = x;
        g_prev = gx;
    }
    roots
}

/// Prior-averaged condition over `θ` atoms (shape parameters last).
pub fn averaged(prior: &[(Vec<f64>, f64)], g: impl Fn(f64, f64) -> f64) -> f64 {
    prior
        .iter()
        .map(|(th, w)| {
            let n = th.len();
            w * g(th[n - 2], th[n - 1])
        })
        .sum()
}

//! Independent oracles shared by the integration tests. None of them calls
//! the routine it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Moduli of `τ_d` applied to a hyperbolic element with top eigenvalue `λ`:
/// `λ^{d-1-2i}` for `i = 0..d`.
pub fn tau_moduli(lambda: f64, d: usize) -> Vec<f64> {
    (0..d).map(|i| lambda.powi(d as i32 - 1 - 2 * i as i32)).collect()
}

/// Attracting eigenvector of a hyperbolic `2×2` matrix from the quadratic
/// formula.
pub fn sl2_attracting(g: &DMatrix<f64>) -> (f64, f64) {
    let tr = g[(0, 0)] + g[(1, 1)];
    let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    let l = 0.5 * (tr + tr.signum() * (tr * tr - 4.0 * det).sqrt());
    let u = (g[(0, 1)], l - g[(0, 0)]);
    let v = (l - g[(1, 1)], g[(1, 0)]);
    if u.0.hypot(u.1) > v.0.hypot(v.1) {
        u
    } else {
        v
    }
}

/// Veronese image of `[a : b]` in the polynomial model of `τ_3`: the
/// coefficients of `(aY - bX)²` indexed by the power of `Y`.
pub fn veronese(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![b * b, -2.0 * a * b, a * a])
}

/// Sine of the angle between two nonzero vectors.
pub fn sine(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (u, v) = (u.normalize(), v.normalize());
    (&u - &v * u.dot(&v)).norm()
}

/// Smallest singular value of the `n×6` moment matrix `(x², xy, xz, y², yz,
/// z²)` of unit representatives: zero iff one conic contains every point.
pub fn conic_residual(points: &[DVector<f64>]) -> f64 {
    let rows: Vec<f64> = points
        .iter()
        .flat_map(|p| {
            let p = p.normalize();
            let (x, y, z) = (p[0], p[1], p[2]);
            [x * x, x * y, x * z, y * y, y * z, z * z]
        })
        .collect();
    DMatrix::from_row_slice(points.len(), 6, &rows).singular_values().min()
}

/// Roots of `t ↦ det(X + tY)` for positive-definite `X, Y`: all real and
/// negative, found by sign changes on a logarithmic grid and bisection.
pub fn pencil_roots(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let d = x.nrows();
    let ex = SymmetricEigen::new(x.clone()).eigenvalues;
    let ey = SymmetricEigen::new(y.clone()).eigenvalues;
    // Rayleigh bounds on -t.
    let lo = ex.min() / ey.max() / 1.5;
    let hi = ex.max() / ey.min() * 1.5;
    let p = |s: f64| (x - y * s).determinant();
    let mut n = 4000;
    loop {
        let grid: Vec<f64> = (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect();
        let mut roots = Vec::new();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (fa, fb) = (p(a), p(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa.signum() == fb.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if p(mid).signum() == p(a).signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        if roots.len() == d || n > 1_000_000 {
            return roots.into_iter().map(|s| -s).collect();
        }
        n *= 10;
    }
}

/// Hilbert distance between `[X]` and `[Y]` from the cross ratio of the
/// parameters `0` (at `X`), `∞` (at `Y`) and the two boundary roots
/// `t_near`, `t_far` of `det(X + tY)`.
pub fn hilbert_cross_ratio(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let roots = pencil_roots(x, y);
    let far = roots.iter().cloned().fold(f64::INFINITY, f64::min);
    let near = roots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (far / near).ln()
}

/// Random symmetric positive-definite matrix.
pub fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.05
}

/// `‖M^k‖`-normalized power iteration for `σ_1(M^k)^{1/k}`, computed in
/// logs with a plain SVD per step.
pub fn gelfand_top(m: &DMatrix<f64>, k: usize) -> f64 {
    let mut p = DMatrix::identity(m.nrows(), m.ncols());
    let mut log_scale = 0.0;
    for _ in 0..k {
        p = &p * m;
        let s = p.abs().max();
        p /= s;
        log_scale += s.ln();
    }
    ((p.singular_values().max().ln() + log_scale) / k as f64).exp()
}

//! Francis double-shift QR on a Hessenberg matrix, with Wilkinson and
//! MATLAB-style exceptional shifts, accumulating the orthogonal factor.
//!
//! nalgebra's own iteration has no exceptional shifts and cycles on
//! exterior powers with highly repeated moduli, so only its Hessenberg
//! reduction is used.

use nalgebra::linalg::Hessenberg;
use nalgebra::DMatrix;

/// Iterations allowed per deflated eigenvalue.
const ITER_PER_EIGENVALUE: usize = 60;

/// Real Schur form `M = Q T Qᵀ`, with `T` quasi upper triangular, exact
/// zeros below the block diagonal and real-spectrum `2×2` blocks already
/// split. `None` if the iteration does not converge.
pub(crate) fn francis_schur(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let nn = m.nrows();
    let (mut v, mut h) = Hessenberg::new(m.clone()).unpack();
    if nn < 2 {
        return Some((v, h));
    }
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let norm: f64 =
        (0..nn).flat_map(|i| (i.saturating_sub(1)..nn).map(move |j| (i, j))).map(|(i, j)| h[(i, j)].abs()).sum();
    if norm == 0.0 {
        return Some((v, h));
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while n >= 0 {
        let nu = n as usize;
        // Deflate at the lowest negligible subdiagonal entry.
        let mut l = nu;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            let p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            let q = p * p + w;
            let mut z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                let x = h[(nu, nu - 1)];
                let s = x.abs() + z.abs();
                let (mut p, mut q) = (x / s, z / s);
                let r = p.hypot(q);
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    let z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    let z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in 0..nn {
                    let z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = 0.0;
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > ITER_PER_EIGENVALUE * nn {
                return None;
            }
            let mut x = h[(nu, nu)];
            let mut y = h[(nu - 1, nu - 1)];
            let mut w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            if iter > 0 && iter % 20 == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                let s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter > 0 && iter.is_multiple_of(20) {
                let half = (y - x) / 2.0;
                let mut s = half * half + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / (half + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // Start of the bulge: two consecutive small subdiagonal entries.
            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut mm = nu - 2;
            loop {
                let z = h[(mm, mm)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(mm + 1, mm)] + h[(mm, mm + 1)];
                q = h[(mm + 1, mm + 1)] - z - rr - ss;
                r = h[(mm + 2, mm + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let lhs = h[(mm, mm - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (h[(mm - 1, mm - 1)].abs() + z.abs() + h[(mm + 1, mm + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > mm + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            for k in mm..nu {
                let notlast = k != nu - 1;
                let mut xs = 1.0;
                if k != mm {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    xs = p.abs() + q.abs() + r.abs();
                    if xs == 0.0 {
                        continue;
                    }
                    p /= xs;
                    q /= xs;
                    r /= xs;
                }
                let mut s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != mm {
                    h[(k, k - 1)] = -s * xs;
                } else if l != mm {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                let (cx, cy, cz) = (p / s, q / s, r / s);
                let (cq, cr) = (q / p, r / p);
                for j in k..nn {
                    let mut t = h[(k, j)] + cq * h[(k + 1, j)];
                    if notlast {
                        t += cr * h[(k + 2, j)];
                        h[(k + 2, j)] -= t * cz;
                    }
                    h[(k, j)] -= t * cx;
                    h[(k + 1, j)] -= t * cy;
                }
                for i in 0..=nu.min(k + 3) {
                    let mut t = cx * h[(i, k)] + cy * h[(i, k + 1)];
                    if notlast {
                        t += cz * h[(i, k + 2)];
                        h[(i, k + 2)] -= t * cr;
                    }
                    h[(i, k)] -= t;
                    h[(i, k + 1)] -= t * cq;
                }
                for i in 0..nn {
                    let mut t = cx * v[(i, k)] + cy * v[(i, k + 1)];
                    if notlast {
                        t += cz * v[(i, k + 2)];
                        v[(i, k + 2)] -= t * cr;
                    }
                    v[(i, k)] -= t;
                    v[(i, k + 1)] -= t * cq;
                }
            }
        }
    }
    for j in 0..nn {
        for i in j + 2..nn {
            h[(i, j)] = 0.0;
        }
    }
    Some((v, h))
}

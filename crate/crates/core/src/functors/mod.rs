//! Representation constructors: the irreducible `τ_d`, exterior and
//! symmetric powers, direct sums, perturbations, and the induced maps on
//! boundary data.
//!
//! Basis conventions:
//! - `τ_d` acts on degree `d-1` binary forms, `(g·P)(X, Y) = P(g⁻¹·(X, Y))`,
//!   in the monomial basis `X^{d-1-j} Y^j`, `j = 0..d`.
//! - `∧^k` uses the lexicographic basis `e_{i_1} ∧ … ∧ e_{i_k}`.
//! - `Sym₂` uses `e_i e_iᵀ` and `(e_i e_jᵀ + e_j e_iᵀ)/√2` (`i < j`), ordered
//!   lexicographically in `(i, j)`. This basis is Frobenius-orthonormal, so
//!   `S(M)` is orthogonal whenever `M` is.

mod recipe;
mod su21;
mod zeta;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::GeneratorSet;
use crate::linalg::{MatrixD, Subspace};

pub use recipe::{Base, Functor, Recipe, Representation};
pub use su21::{build_su21_rep, su21_fixed_basis, su21_residual, Complex3};
pub use zeta::{hitchin_zeta, PartialFlag, ZetaLevel};

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn det_small(m: DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.determinant(),
    }
}

/// Coordinates of `v_1 ∧ … ∧ v_k` (the columns of `vectors`) in the
/// lexicographic basis of `∧^k R^d`.
pub fn wedge_vectors(vectors: &DMatrix<f64>) -> DVector<f64> {
    let (d, k) = vectors.shape();
    let rows = combinations(d, k);
    DVector::from_iterator(rows.len(), rows.iter().map(|r| det_small(vectors.select_rows(r.iter()))))
}

/// `τ_d(g)` for a `2×2` lift `g`.
pub fn tau_d(g: &MatrixD, d: usize) -> Result<MatrixD> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: g.dim() });
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("tau_d needs d >= 2, got {d}")));
    }
    let m = g.as_matrix();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    // h = g⁻¹ sends (X, Y) to (pX + qY, rX + sY).
    let (p, q, r, s) = (m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det);
    let n = d - 1;
    let mut out = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        // Polynomials are coefficient vectors indexed by the power of Y.
        let mut poly = vec![1.0];
        for _ in 0..n - j {
            poly = poly_mul(&poly, &[p, q]);
        }
        for _ in 0..j {
            poly = poly_mul(&poly, &[r, s]);
        }
        for (i, c) in poly.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    // det τ_d(g) = det(g)^{-d(d-1)/2} has unit modulus already.
    Ok(MatrixD::from_parts_unchecked(out, sign_power(g.det_sign(), d * (d - 1) / 2)))
}

fn sign_power(sign: i8, exponent: usize) -> i8 {
    if sign < 0 && exponent % 2 == 1 {
        -1
    } else {
        1
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∧^k M` in the lexicographic basis.
pub fn wedge_power(m: &MatrixD, k: usize) -> Result<MatrixD> {
    let d = m.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidArgument(format!("wedge power {k} outside 1..{d}")));
    }
    let subsets = combinations(d, k);
    let a = m.as_matrix();
    let n = subsets.len();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (jj, cols) in subsets.iter().enumerate() {
        let sub = a.select_columns(cols.iter());
        for (ii, rows) in subsets.iter().enumerate() {
            out[(ii, jj)] = det_small(sub.select_rows(rows.iter()));
        }
    }
    // det ∧^k M = det(M)^{C(d-1, k-1)}.
    let exponent = combinations(d - 1, k - 1).len();
    Ok(MatrixD::from_parts_unchecked(out, sign_power(m.det_sign(), exponent)))
}

/// Dimension of `Sym₂(R^d)`.
pub fn sym_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

fn sym_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect()
}

/// Coordinates of a symmetric matrix in the weighted `Sym₂` basis.
pub fn sym_coords(b: &DMatrix<f64>) -> DVector<f64> {
    let d = b.nrows();
    let s2 = std::f64::consts::SQRT_2;
    DVector::from_iterator(
        sym_dim(d),
        sym_pairs(d).into_iter().map(|(i, j)| if i == j { b[(i, i)] } else { 0.5 * s2 * (b[(i, j)] + b[(j, i)]) }),
    )
}

/// The symmetric matrix with the given `Sym₂` coordinates.
pub fn sym_matrix(c: &DVector<f64>, d: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(d, d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (idx, (i, j)) in sym_pairs(d).into_iter().enumerate() {
        if i == j {
            b[(i, i)] = c[idx];
        } else {
            b[(i, j)] = h * c[idx];
            b[(j, i)] = h * c[idx];
        }
    }
    b
}

/// `S(M): B ↦ M B Mᵀ` on `Sym₂(R^d)`.
pub fn sym_square(m: &MatrixD) -> Result<MatrixD> {
    let d = m.dim();
    let a = m.as_matrix();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pairs = sym_pairs(d);
    let mut out = DMatrix::<f64>::zeros(pairs.len(), pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        let (ci, cj) = (a.column(i), a.column(j));
        let img = if i == j { ci * ci.transpose() } else { (ci * cj.transpose() + cj * ci.transpose()) * h };
        out.set_column(col, &sym_coords(&img));
    }
    // det S(M) = det(M)^{d+1}.
    Ok(MatrixD::from_parts_unchecked(out, sign_power(m.det_sign(), d + 1)))
}

/// The Veronese point `Φ([v]) = [v vᵀ]`.
pub fn veronese_point(v: &Subspace) -> Result<Subspace> {
    let u = v.frame().column(0);
    Subspace::line(sym_coords(&(u * u.transpose())))
}

/// `Φ*(W) = Span{v wᵀ + w vᵀ : w ∈ W, v ∈ R^d}` for a hyperplane `W`.
pub fn veronese_hyperplane(w: &Subspace) -> Result<Subspace> {
    let d = w.ambient_dim();
    if w.rank() + 1 != d {
        return Err(Error::InvalidArgument("veronese_hyperplane needs a hyperplane".into()));
    }
    let mut cols = Vec::with_capacity(d * w.rank());
    for i in 0..d {
        let e = DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
        for c in w.frame().column_iter() {
            cols.push(sym_coords(&(&e * c.transpose() + c * e.transpose())));
        }
    }
    let s = Subspace::span_of(&DMatrix::from_columns(&cols), 1e-10)?;
    if s.rank() != sym_dim(d) - 1 {
        return Err(Error::InvalidArgument("degenerate hyperplane image".into()));
    }
    Ok(s)
}

/// The Plücker point `[v_1 ∧ … ∧ v_m]` of an `m`-dimensional subspace.
pub fn flag_wedge(v: &Subspace) -> Result<Subspace> {
    Subspace::line(wedge_vectors(v.frame()))
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n1, n2) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n1 + n2, n1 + n2);
    out.view_mut((0, 0), (n1, n1)).copy_from(a);
    out.view_mut((n1, n1), (n2, n2)).copy_from(b);
    out
}

/// Block-diagonal sum of two generator sets over the same labels.
pub fn direct_sum_generators(a: &GeneratorSet, b: &GeneratorSet) -> Result<GeneratorSet> {
    if a.len() != b.len() {
        return Err(Error::LabelMismatch { left: a.len(), right: b.len() });
    }
    let sum = |x: &[MatrixD], y: &[MatrixD]| -> Result<Vec<MatrixD>> {
        x.iter()
            .zip(y)
            .map(|(p, q)| {
                Ok(MatrixD::from_parts_unchecked(block_diag(p.as_matrix(), q.as_matrix()), p.det_sign() * q.det_sign()))
            })
            .collect()
    };
    GeneratorSet::from_pairs(sum(a.generators(), b.generators())?, sum(a.inverses(), b.inverses())?)
}

/// Adds i.i.d. uniform `[-eps, eps]` noise to every forward generator (row
/// major, generator order), renormalizes, and recomputes inverses.
pub fn perturb_generators(gens: &GeneratorSet, eps: f64, seed: u64) -> Result<GeneratorSet> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("perturbation size {eps} must be >= 0")));
    }
    if eps == 0.0 {
        return Ok(gens.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = gens.dim();
    let forward = gens
        .generators()
        .iter()
        .map(|g| {
            let mut m = g.as_matrix().clone();
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += rng.random_range(-eps..=eps);
                }
            }
            MatrixD::normalize_lift(m)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::new(forward)
}

/// Convenience: `τ_d ∘ ρ` for a representation into `PGL_2`.
pub fn tau_rep(rep: &Representation, d: usize) -> Result<Representation> {
    rep.apply(&Functor::Tau { d })
}

/// `∧^k ∘ ρ`.
pub fn wedge_rep(rep: &Representation, k: usize) -> Result<Representation> {
    rep.apply(&Functor::Wedge { k })
}

/// `S ∘ ρ`.
pub fn sym2_rep(rep: &Representation) -> Result<Representation> {
    rep.apply(&Functor::Sym2)
}

/// `ρ_1 ⊕ ρ_2`.
pub fn direct_sum_rep(r1: &Representation, r2: &Representation) -> Result<Representation> {
    Representation::direct_sum(r1, r2)
}

/// Seeded perturbation of the forward generators.
pub fn perturb_rep(rep: &Representation, eps: f64, seed: u64) -> Result<Representation> {
    rep.apply(&Functor::Perturb { eps, seed })
}

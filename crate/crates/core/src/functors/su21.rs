//! The 9-dimensional representation of `SU(2,1)` on the `J`-fixed part of
//! `∧²R⁶`.
//!
//! `C³` is identified with `R⁶` by `z ↦ (Re z_1, Im z_1, …, Re z_3, Im z_3)`,
//! so complex matrices act through `j(g)`, whose entries are the blocks
//! `[[Re, -Im], [Im, Re]]`. The fixed space `E = {v : ∧²J v = v}` has the
//! basis `f_1, …, f_9` returned by [`su21_fixed_basis`]; output matrices are
//! written in that basis.

use nalgebra::{Complex, DMatrix};

use super::wedge_power;
use crate::error::{Error, Result};
use crate::linalg::MatrixD;

/// A `3×3` complex matrix, row-major, entries as `[re, im]`.
pub type Complex3 = [[[f64; 2]; 3]; 3];

const SU21_TOL: f64 = 1e-8;

fn to_complex(g: &Complex3) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(3, 3, |i, j| Complex::new(g[i][j][0], g[i][j][1]))
}

/// `‖g* J g − J‖_max` for the antidiagonal `J`.
pub fn su21_residual(g: &Complex3) -> f64 {
    let m = to_complex(g);
    let j = DMatrix::from_fn(3, 3, |r, c| if r + c == 2 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) });
    let lhs = m.adjoint() * &j * &m;
    (lhs - j).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The real `6×6` matrix of a complex `3×3` matrix.
pub fn realify(g: &Complex3) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(6, 6);
    for a in 0..3 {
        for b in 0..3 {
            let [re, im] = g[a][b];
            out[(2 * a, 2 * b)] = re;
            out[(2 * a, 2 * b + 1)] = -im;
            out[(2 * a + 1, 2 * b)] = im;
            out[(2 * a + 1, 2 * b + 1)] = re;
        }
    }
    out
}

/// Index of `e_i ∧ e_j` (`i < j`, 0-based) in the lexicographic basis of
/// `∧²R⁶`.
fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < 6);
    // Pairs starting below i contribute 5 + 4 + … terms.
    i * (11 - i) / 2 + (j - i - 1)
}

/// The `15×9` coefficient matrix of `f_1, …, f_9` in the lexicographic
/// basis of `∧²R⁶`.
pub fn su21_fixed_basis() -> DMatrix<f64> {
    // (i, j, coefficient) with 1-based indices, one list per f_k.
    let terms: [&[(usize, usize, f64)]; 9] = [
        &[(1, 2, 1.0)],
        &[(2, 3, 1.0), (1, 4, -1.0)],
        &[(1, 3, 1.0), (2, 4, 1.0)],
        &[(3, 4, 1.0)],
        &[(2, 5, 1.0), (1, 6, -1.0)],
        &[(1, 5, 1.0), (2, 6, 1.0)],
        &[(3, 5, 1.0), (4, 6, 1.0)],
        &[(4, 5, 1.0), (3, 6, -1.0)],
        &[(5, 6, 1.0)],
    ];
    let mut f = DMatrix::zeros(15, 9);
    for (k, list) in terms.iter().enumerate() {
        for &(i, j, c) in *list {
            f[(pair_index(i - 1, j - 1), k)] = c;
        }
    }
    f
}

/// The `9×9` matrix of `g ∈ SU(2,1)` acting on `E` in the basis `f_k`.
pub fn build_su21_rep(g: &Complex3) -> Result<MatrixD> {
    let residual = su21_residual(g);
    if !(residual <= SU21_TOL) {
        return Err(Error::NotSu21 { residual });
    }
    let w = wedge_power(&MatrixD::normalize_lift(realify(g))?, 2)?;
    let f = su21_fixed_basis();
    let ft = f.transpose();
    // Columns of F are orthogonal, so FᵀF is diagonal.
    let gram = &ft * &f;
    let proj = &ft * w.as_matrix() * &f;
    let out = DMatrix::from_fn(9, 9, |i, j| proj[(i, j)] / gram[(i, i)]);
    MatrixD::normalize_lift(out)
}

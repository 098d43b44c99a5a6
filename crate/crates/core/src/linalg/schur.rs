//! Real Schur form with block reordering.
//!
//! The QR iteration lives in `francis`. On top of it we track the 1×1 and
//! 2×2 diagonal blocks explicitly and implement adjacent block swaps, which
//! is what extracting a spectral invariant subspace needs: move the selected
//! blocks to the top, then read off the leading Schur vectors.

use nalgebra::DMatrix;

use super::francis::francis_schur;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Block {
    start: usize,
    size: usize,
}

/// `M = Q T Qᵀ` with `T` quasi upper triangular.
#[derive(Clone, Debug)]
pub struct RealSchur {
    q: DMatrix<f64>,
    t: DMatrix<f64>,
    blocks: Vec<Block>,
}

impl RealSchur {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || !m.is_square() {
            return Err(Error::InvalidArgument("schur of non-square or empty matrix".into()));
        }
        let (q, t) = francis_schur(m).ok_or_else(|| Error::NoConvergence { residual: hessenberg_residual(m) })?;
        let mut out = Self { q, t, blocks: Vec::with_capacity(d) };
        out.split_blocks();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// Identifies diagonal blocks; 2×2 blocks with real spectrum are
    /// triangularized with a rotation.
    fn split_blocks(&mut self) {
        let d = self.dim();
        self.blocks.clear();
        let mut i = 0;
        while i < d {
            if i + 1 < d && self.t[(i + 1, i)] != 0.0 {
                let (a, b, c, dd) = (self.t[(i, i)], self.t[(i, i + 1)], self.t[(i + 1, i)], self.t[(i + 1, i + 1)]);
                let half = 0.5 * (a - dd);
                let disc = half * half + b * c;
                if disc >= 0.0 {
                    let mean = 0.5 * (a + dd);
                    let root = disc.sqrt();
                    let lam = if mean >= 0.0 { mean + root } else { mean - root };
                    let v1 = (lam - dd, c);
                    let v2 = (b, lam - a);
                    let (x0, x1) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
                    let n = x0.hypot(x1);
                    if n > 0.0 {
                        let g = DMatrix::from_row_slice(2, 2, &[x0 / n, -x1 / n, x1 / n, x0 / n]);
                        self.apply_local(i, &g);
                    }
                    self.t[(i + 1, i)] = 0.0;
                    self.blocks.push(Block { start: i, size: 1 });
                    self.blocks.push(Block { start: i + 1, size: 1 });
                } else {
                    self.blocks.push(Block { start: i, size: 2 });
                }
                i += 2;
            } else {
                self.blocks.push(Block { start: i, size: 1 });
                i += 1;
            }
        }
    }

    /// Applies an orthogonal `s×s` change of basis on coordinates `p..p+s`:
    /// `T ← Gᵀ T G`, `Q ← Q G`.
    fn apply_local(&mut self, p: usize, g: &DMatrix<f64>) {
        let s = g.nrows();
        let d = self.dim();
        let rows = g.transpose() * self.t.rows(p, s);
        self.t.rows_mut(p, s).copy_from(&rows);
        let cols = self.t.columns(p, s) * g;
        self.t.columns_mut(p, s).copy_from(&cols);
        let qc = self.q.columns(p, s) * g;
        self.q.columns_mut(p, s).copy_from(&qc);
        debug_assert_eq!(self.q.nrows(), d);
    }

    /// Eigenvalues per block as `(re, im)` pairs in Schur order; 2×2 blocks
    /// contribute a conjugate pair.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            let i = b.start;
            if b.size == 1 {
                out.push((self.t[(i, i)], 0.0));
            } else {
                let (a, bb, c, dd) = (self.t[(i, i)], self.t[(i, i + 1)], self.t[(i + 1, i)], self.t[(i + 1, i + 1)]);
                let half = 0.5 * (a - dd);
                let disc = half * half + bb * c;
                let mean = 0.5 * (a + dd);
                let im = (-disc).max(0.0).sqrt();
                out.push((mean, im));
                out.push((mean, -im));
            }
        }
        out
    }

    /// Modulus of each block's eigenvalue(s).
    fn block_moduli(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| {
                let i = b.start;
                if b.size == 1 {
                    self.t[(i, i)].abs()
                } else {
                    let det = self.t[(i, i)] * self.t[(i + 1, i + 1)] - self.t[(i, i + 1)] * self.t[(i + 1, i)];
                    det.abs().sqrt()
                }
            })
            .collect()
    }

    /// Eigenvalue moduli in Schur order (one entry per eigenvalue).
    pub fn moduli(&self) -> Vec<f64> {
        self.blocks.iter().zip(self.block_moduli()).flat_map(|(b, m)| std::iter::repeat_n(m, b.size)).collect()
    }

    /// Number of diagonal blocks.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Size of each block, in Schur order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// Moves the blocks flagged in `select` (indexed by block, Schur order)
    /// to the top of `T`, preserving relative order within both groups.
    pub fn reorder_to_front(&mut self, select: &[bool]) -> Result<()> {
        if select.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), found: select.len() });
        }
        let mut sel: Vec<bool> = select.to_vec();
        let mut next = 0;
        for i in 0..sel.len() {
            if !sel[i] {
                continue;
            }
            let mut j = i;
            while j > next {
                self.swap_adjacent(j - 1)?;
                sel.swap(j - 1, j);
                j -= 1;
            }
            next += 1;
        }
        Ok(())
    }

    /// Swaps block `k` with block `k + 1`.
    fn swap_adjacent(&mut self, k: usize) -> Result<()> {
        let b1 = self.blocks[k];
        let b2 = self.blocks[k + 1];
        let (p, n1, n2) = (b1.start, b1.size, b2.size);
        let s = n1 + n2;
        let a = self.t.view((p, p), (n1, n1)).clone_owned();
        let b = self.t.view((p + n1, p + n1), (n2, n2)).clone_owned();
        let c = self.t.view((p, p + n1), (n1, n2)).clone_owned();

        // Solve A X - X B = C via its Kronecker form (at most 4×4).
        let nn = n1 * n2;
        let mut kron = DMatrix::<f64>::zeros(nn, nn);
        for col in 0..n2 {
            for row in 0..n1 {
                let r = col * n1 + row;
                for k2 in 0..n1 {
                    kron[(r, col * n1 + k2)] += a[(row, k2)];
                }
                for l in 0..n2 {
                    kron[(r, l * n1 + row)] -= b[(l, col)];
                }
            }
        }
        let rhs = DMatrix::from_fn(nn, 1, |r, _| c[(r % n1, r / n1)]);
        let sol = kron
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidArgument("cannot swap Schur blocks with a shared eigenvalue".into()))?;
        if sol.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("cannot swap Schur blocks with a shared eigenvalue".into()));
        }

        // Columns of [-X; I] span the invariant subspace of B's eigenvalues.
        let mut z = DMatrix::<f64>::zeros(s, s);
        for j in 0..n2 {
            for i in 0..n1 {
                z[(i, j)] = -sol[(j * n1 + i, 0)];
            }
            z[(n1 + j, j)] = 1.0;
        }
        for j in 0..n1 {
            z[(j, n2 + j)] = 1.0;
        }
        let g = nalgebra::linalg::QR::new(z).q();
        self.apply_local(p, &g);

        let scale = self.t.view((p, p), (s, s)).amax().max(f64::MIN_POSITIVE);
        for i in 0..n1 {
            for j in 0..n2 {
                let v = self.t[(p + n2 + i, p + j)];
                if v.abs() > 1e-6 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "ill-conditioned Schur block swap (residual {:e})",
                        v.abs() / scale
                    )));
                }
                self.t[(p + n2 + i, p + j)] = 0.0;
            }
        }
        if n2 == 1 && n1 == 1 {
            self.t[(p + 1, p)] = 0.0;
        }
        self.blocks[k] = Block { start: p, size: n2 };
        self.blocks[k + 1] = Block { start: p + n2, size: n1 };
        Ok(())
    }

    /// The first `k` Schur vectors.
    pub fn leading_columns(&self, k: usize) -> DMatrix<f64> {
        self.q.columns(0, k).clone_owned()
    }
}

fn hessenberg_residual(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    let mut r: f64 = 0.0;
    for j in 0..d {
        for i in j + 1..d {
            r = r.max(m[(i, j)].abs());
        }
    }
    r
}

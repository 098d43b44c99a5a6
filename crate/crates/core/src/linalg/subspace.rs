use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A `k`-dimensional linear subspace of `R^d`, stored as an orthonormal
/// `d × k` frame. Rank one subspaces are points of projective space.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalizes the columns of `spanning`, which must be linearly
    /// independent.
    pub fn from_spanning(spanning: DMatrix<f64>) -> Result<Self> {
        let (d, k) = spanning.shape();
        if k == 0 || k > d {
            return Err(Error::InvalidArgument(format!("subspace rank {k} outside 1..={d}")));
        }
        if spanning.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sv = spanning.singular_values();
        let smax = sv.max();
        if smax == 0.0 || sv.min() <= 1e-13 * smax {
            return Err(Error::InvalidArgument("spanning vectors are linearly dependent".into()));
        }
        Ok(Self { frame: gram_schmidt(&spanning) })
    }

    /// Span of an arbitrary set of vectors, using numerical rank with
    /// relative threshold `rtol`.
    pub fn span_of(vectors: &DMatrix<f64>, rtol: f64) -> Result<Self> {
        let d = vectors.nrows();
        if vectors.ncols() == 0 {
            return Err(Error::InvalidArgument("empty span".into()));
        }
        let svd = vectors.clone().svd(true, false);
        let u = svd.u.as_ref().expect("requested U");
        let smax = svd.singular_values.max();
        let mut idx: Vec<usize> =
            (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > rtol * smax).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        if idx.is_empty() {
            return Err(Error::InvalidArgument("zero span".into()));
        }
        let frame = DMatrix::from_fn(d, idx.len(), |i, j| u[(i, idx[j])]);
        Ok(Self { frame })
    }

    /// The line spanned by `v`.
    pub fn line(v: DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("zero vector spans no line".into()));
        }
        let d = v.len();
        Ok(Self { frame: DMatrix::from_column_slice(d, 1, (v / n).as_slice()) })
    }

    /// Span of the standard basis vectors `e_i`, `i ∈ indices` (0-based).
    pub fn coordinate(d: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|&i| i >= d) {
            return Err(Error::InvalidArgument("bad coordinate indices".into()));
        }
        let mut frame = DMatrix::zeros(d, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            frame[(i, j)] = 1.0;
        }
        Self::from_spanning(frame)
    }

    /// Wraps a frame with orthonormal columns without re-orthonormalizing.
    pub(crate) fn from_orthonormal_unchecked(frame: DMatrix<f64>) -> Self {
        Self { frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Unit representative of a rank one subspace, sign-normalized so that
    /// its first coordinate of modulus above `1e-9` is positive.
    pub fn unit_vector(&self) -> DVector<f64> {
        let mut v = self.frame.column(0).clone_owned();
        if let Some(x) = v.iter().find(|x| x.abs() > 1e-9) {
            if *x < 0.0 {
                v.neg_mut();
            }
        }
        v
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Component of `v` orthogonal to the subspace.
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.frame.transpose() * v;
        v - &self.frame * coeffs
    }

    /// `max_i ‖(I - P_self) w_i‖` over the frame vectors of `other`: zero iff
    /// `other ⊂ self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        let r = other.frame() - &self.frame * (self.frame.transpose() * other.frame());
        r.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sine of the largest principal angle (the gap metric) between subspaces
    /// of equal rank; `1` when ranks differ.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.rank() != other.rank() || self.ambient_dim() != other.ambient_dim() {
            return 1.0;
        }
        let r = other.frame() - &self.frame * (self.frame.transpose() * other.frame());
        r.singular_values().max().min(1.0)
    }

    /// Image under a linear map, re-orthonormalized.
    pub fn transform(&self, m: &DMatrix<f64>) -> Result<Subspace> {
        Subspace::from_spanning(m * &self.frame)
    }

    /// Orthogonal complement (rank `d - k`); `None` when `k = d`.
    pub fn orthogonal_complement(&self) -> Option<Subspace> {
        let (d, k) = self.frame.shape();
        if k == d {
            return None;
        }
        let p = DMatrix::identity(d, d) - self.projector();
        Some(Subspace::from_orthonormal_unchecked(pivoted_basis(&p, d - k)))
    }

    /// Orthonormal basis obtained by column-pivoted Gram-Schmidt on the
    /// projector: for coordinate subspaces this returns the coordinate
    /// vectors themselves, in increasing index order.
    pub fn canonical_frame(&self) -> DMatrix<f64> {
        pivoted_basis(&self.projector(), self.rank())
    }

    /// Intersection with `other` (numerical threshold `tol` on principal
    /// angles); `None` when the intersection is trivial.
    pub fn intersection(&self, other: &Subspace, tol: f64) -> Option<Subspace> {
        // x = F a lies in `other` iff (I - P_other) F a = 0.
        let d = self.ambient_dim();
        let p = DMatrix::identity(d, d) - other.projector();
        let a = &p * &self.frame;
        let svd = a.svd(false, true);
        let vt = svd.v_t.as_ref().expect("requested V");
        let k = self.rank();
        let null: Vec<usize> = (0..k).filter(|&i| svd.singular_values.get(i).copied().unwrap_or(0.0) <= tol).collect();
        // Rows of Vᵀ beyond the number of singular values are also null.
        let mut cols = Vec::new();
        for i in null {
            cols.push(vt.row(i).transpose());
        }
        if cols.is_empty() {
            return None;
        }
        let coeffs = DMatrix::from_columns(&cols);
        Subspace::from_spanning(&self.frame * coeffs).ok()
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass, columns in order.
pub(crate) fn gram_schmidt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, k) = a.shape();
    let mut q = DMatrix::<f64>::zeros(d, k);
    for j in 0..k {
        let mut v = a.column(j).clone_owned();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v -= c * qi;
            }
        }
        let n = v.norm();
        q.set_column(j, &(v / n));
    }
    q
}

/// Picks `k` orthonormal vectors from the column space of `p` by repeatedly
/// taking the column with the largest residual (lowest index on ties).
pub(crate) fn pivoted_basis(p: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let d = p.nrows();
    let mut work = p.clone();
    let mut out = DMatrix::<f64>::zeros(d, k);
    for j in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for c in 0..work.ncols() {
            let n = work.column(c).norm();
            if n > best_norm * (1.0 + 1e-12) {
                best = c;
                best_norm = n;
            }
        }
        let mut q = work.column(best).clone_owned() / best_norm;
        for i in 0..j {
            let qi = out.column(i);
            let c = qi.dot(&q);
            q -= c * qi;
        }
        q /= q.norm();
        out.set_column(j, &q);
        for c in 0..work.ncols() {
            let coef = q.dot(&work.column(c));
            let mut col = work.column_mut(c);
            col -= coef * &q;
        }
    }
    out
}

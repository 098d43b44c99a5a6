use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative threshold on `sigma_min / sigma_max` below which a matrix is
/// treated as singular.
const SINGULAR_RTOL: f64 = 1e-14;

/// A lift of a projective transformation into `SL±_d(R)`: a square matrix
/// scaled to unit determinant modulus, with the sign of its determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixD {
    mat: DMatrix<f64>,
    det_sign: i8,
}

impl MatrixD {
    /// Scales `raw` by `|det raw|^{-1/d}` and records the determinant sign.
    pub fn normalize_lift(raw: DMatrix<f64>) -> Result<Self> {
        if !raw.is_square() {
            return Err(Error::DimensionMismatch { expected: raw.nrows(), found: raw.ncols() });
        }
        if raw.nrows() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sv = raw.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smax == 0.0 || smin <= SINGULAR_RTOL * smax {
            return Err(Error::NonInvertible { sigma_min: if smax == 0.0 { 0.0 } else { smin / smax } });
        }
        let d = raw.nrows();
        // Summing logs of the LU pivots avoids under/overflow of the product
        // and keeps relative accuracy for ill-conditioned inputs.
        let lu = raw.clone().lu();
        let u = lu.u();
        let mut log_abs_det = 0.0;
        let mut negative = lu.p().determinant::<f64>() < 0.0;
        for i in 0..d {
            let x = u[(i, i)];
            log_abs_det += x.abs().ln();
            negative ^= x < 0.0;
        }
        let det_sign = if negative { -1 } else { 1 };
        let scale = (-log_abs_det / d as f64).exp();
        Ok(Self { mat: raw * scale, det_sign })
    }

    /// Builds a lift from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        Self::normalize_lift(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: DMatrix::identity(d, d), det_sign: 1 }
    }

    /// Wraps a matrix already known to have unit determinant modulus.
    pub(crate) fn from_parts_unchecked(mat: DMatrix<f64>, det_sign: i8) -> Self {
        Self { mat, det_sign }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.mat[(i, j)]).collect()).collect()
    }

    /// Product of two lifts. The result has unit determinant modulus up to
    /// rounding, so it is not renormalized.
    pub fn mul(&self, rhs: &MatrixD) -> MatrixD {
        MatrixD { mat: &self.mat * &rhs.mat, det_sign: self.det_sign * rhs.det_sign }
    }

    pub fn inverse(&self) -> Result<MatrixD> {
        let inv = self.mat.clone().try_inverse().ok_or(Error::NonInvertible { sigma_min: 0.0 })?;
        Ok(MatrixD { mat: inv, det_sign: self.det_sign })
    }

    pub fn transpose(&self) -> MatrixD {
        MatrixD { mat: self.mat.transpose(), det_sign: self.det_sign }
    }

    /// Re-applies the unit-determinant normalization (after long products).
    pub fn renormalized(&self) -> Result<MatrixD> {
        MatrixD::normalize_lift(self.mat.clone())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.amax()
    }

    /// Max-entry distance between two lifts viewed in `PGL_d`: each matrix is
    /// sign-normalized so its first significant entry is positive.
    pub fn projective_distance_max(&self, other: &MatrixD) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let a = self.sign_normalized();
        let b = other.sign_normalized();
        (&a - &b).amax()
    }

    /// The matrix with sign flipped so that its first entry (row-major) of
    /// modulus above `1e-6 * max` is positive.
    pub fn sign_normalized(&self) -> DMatrix<f64> {
        let thresh = 1e-6 * self.mat.amax();
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                let x = self.mat[(i, j)];
                if x.abs() > thresh {
                    return if x < 0.0 { -&self.mat } else { self.mat.clone() };
                }
            }
        }
        self.mat.clone()
    }
}

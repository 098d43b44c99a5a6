//! Dense real linear algebra on small matrices: spectra, singular values,
//! spectral invariant subspaces and Grassmannian distances.
//!
//! Distances on projective space use the sine of the principal angle,
//! computed as a residual norm so that small distances keep full relative
//! precision.

mod francis;
mod matrix;
mod schur;
mod subspace;

use nalgebra::{DMatrix, DVector};

pub use matrix::MatrixD;
pub use schur::RealSchur;
pub use subspace::Subspace;

use crate::error::{Error, Result};

/// Default relative modulus gap required by [`top_invariant_subspace`].
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

/// Normalizes a raw invertible matrix to unit determinant modulus.
pub fn normalize_lift(raw: DMatrix<f64>) -> Result<MatrixD> {
    MatrixD::normalize_lift(raw)
}

/// Moduli of the complex eigenvalues, sorted descending. Ties keep Schur
/// order.
pub fn eigen_moduli(m: &MatrixD) -> Result<Vec<f64>> {
    eigen_moduli_raw(m.as_matrix())
}

pub(crate) fn eigen_moduli_raw(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let schur = RealSchur::new(m)?;
    let mut mods = schur.moduli();
    mods.sort_by(|a, b| b.total_cmp(a));
    Ok(mods)
}

/// Singular values, sorted descending.
pub fn singular_values(m: &MatrixD) -> Vec<f64> {
    singular_values_raw(m.as_matrix())
}

pub(crate) fn singular_values_raw(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// The `k`-dimensional invariant subspace of `m` spanned by the generalized
/// eigenvectors of its `k` largest eigenvalue moduli, using the default gap
/// tolerance.
pub fn top_invariant_subspace(m: &MatrixD, k: usize) -> Result<Subspace> {
    top_invariant_subspace_with(m.as_matrix(), k, DEFAULT_GAP_TOL)
}

/// [`top_invariant_subspace`] with an explicit relative gap tolerance:
/// requires `λ_k / λ_{k+1} > 1 + gap_tol`.
pub fn top_invariant_subspace_with(m: &DMatrix<f64>, k: usize, gap_tol: f64) -> Result<Subspace> {
    let d = m.nrows();
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("rank {k} outside 1..={d}")));
    }
    let mut schur = RealSchur::new(m)?;
    if k == d {
        return Ok(Subspace::from_orthonormal_unchecked(schur.q().clone()));
    }
    let mut sorted = schur.moduli();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let (hi, lo) = (sorted[k - 1], sorted[k]);
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(ratio > 1.0 + gap_tol) {
        return Err(Error::NoSpectralGap { index: k, ratio });
    }
    let threshold = (hi * lo).sqrt();
    let threshold = if threshold > 0.0 { threshold } else { 0.5 * hi };
    let sizes = schur.block_sizes();
    let select: Vec<bool> = {
        let mods = schur.moduli();
        let mut pos = 0;
        sizes
            .iter()
            .map(|&s| {
                let keep = mods[pos] > threshold;
                pos += s;
                keep
            })
            .collect()
    };
    let picked: usize = sizes.iter().zip(&select).filter(|(_, &s)| s).map(|(&n, _)| n).sum();
    if picked != k {
        return Err(Error::NoSpectralGap { index: k, ratio });
    }
    schur.reorder_to_front(&select)?;
    Ok(Subspace::from_orthonormal_unchecked(schur.leading_columns(k)))
}

/// Sine of the angle between two projective points.
pub fn proj_distance(p: &Subspace, q: &Subspace) -> f64 {
    debug_assert_eq!(p.rank(), 1);
    debug_assert_eq!(q.rank(), 1);
    let u = p.frame().column(0);
    let v = q.frame().column(0).clone_owned();
    let c = u.dot(&v);
    (u - c * v).norm().min(1.0)
}

/// Norm of the component of the unit representative of `p` orthogonal to
/// `v`; zero iff `p ⊂ v`.
pub fn point_subspace_distance(p: &Subspace, v: &Subspace) -> f64 {
    debug_assert_eq!(p.rank(), 1);
    let u: DVector<f64> = p.frame().column(0).clone_owned();
    v.residual(&u).norm().min(1.0)
}

/// Smallest singular value of the concatenated orthonormal frames: positive
/// iff the sum of the subspaces is direct.
pub fn direct_sum_margin(subspaces: &[&Subspace]) -> Result<f64> {
    let Some(first) = subspaces.first() else {
        return Err(Error::InvalidArgument("no subspaces".into()));
    };
    let d = first.ambient_dim();
    let total: usize = subspaces.iter().map(|s| s.rank()).sum();
    if subspaces.iter().any(|s| s.ambient_dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: subspaces.iter().map(|s| s.ambient_dim()).find(|&x| x != d).unwrap_or(d),
        });
    }
    if total > d {
        return Err(Error::RankOverflow { total, dim: d });
    }
    let mut cat = DMatrix::<f64>::zeros(d, total);
    let mut col = 0;
    for s in subspaces {
        cat.columns_mut(col, s.rank()).copy_from(s.frame());
        col += s.rank();
    }
    let sv = cat.singular_values();
    Ok(sv.min().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(v: &[f64]) -> MatrixD {
        MatrixD::normalize_lift(DMatrix::from_diagonal(&DVector::from_row_slice(v))).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn normalize_lift_examples() {
        let m = diag(&[2.0, 2.0]);
        assert!((m.as_matrix() - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert_eq!(m.det_sign(), 1);

        let m = diag(&[3.0, 1.0 / 3.0]);
        assert!((m.as_matrix()[(0, 0)] - 3.0).abs() < 1e-14);

        let m = diag(&[-2.0, 1.0]);
        assert_eq!(m.det_sign(), -1);
        let s = 2f64.sqrt();
        assert!((m.as_matrix()[(0, 0)] + 2.0 / s).abs() < 1e-14);
        assert!((m.as_matrix()[(1, 1)] - 1.0 / s).abs() < 1e-14);
    }

    #[test]
    fn singular_input_is_rejected() {
        let err = MatrixD::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(err.to_string().contains("non-invertible generator"));
    }

    #[test]
    fn eigen_moduli_examples() {
        let m = diag(&[2.0, 1.0, 0.5]);
        assert!(close(&eigen_moduli(&m).unwrap(), &[2.0, 1.0, 0.5], 1e-14));
        let u = MatrixD::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(close(&eigen_moduli(&u).unwrap(), &[1.0, 1.0], 1e-12));
        let t: f64 = 0.7;
        let r = MatrixD::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        assert!(close(&eigen_moduli(&r).unwrap(), &[1.0, 1.0], 1e-12));
    }

    #[test]
    fn singular_value_examples() {
        let m = diag(&[3.0, 1.0 / 3.0]);
        assert!(close(&singular_values(&m), &[3.0, 1.0 / 3.0], 1e-14));
        // Eigenvalues of [[1,1],[1,2]] are (3±√5)/2, whose square roots are φ^{±1}.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let u = MatrixD::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(close(&singular_values(&u), &[phi, 1.0 / phi], 1e-13));
        let t: f64 = 1.1;
        let r = MatrixD::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        assert!(close(&singular_values(&r), &[1.0, 1.0], 1e-13));
    }

    #[test]
    fn top_invariant_subspace_examples() {
        let m = diag(&[2.0, 1.0, 0.5]);
        let v1 = top_invariant_subspace(&m, 1).unwrap();
        assert!(v1.distance(&Subspace::coordinate(3, &[0]).unwrap()) < 1e-12);
        let v2 = top_invariant_subspace(&m, 2).unwrap();
        assert!(v2.distance(&Subspace::coordinate(3, &[0, 1]).unwrap()) < 1e-12);
        let bad = diag(&[2.0, 2.0, 0.25]);
        let err = top_invariant_subspace(&bad, 1).unwrap_err();
        assert!(err.to_string().contains("no spectral gap at index 1"));
    }

    #[test]
    fn top_subspace_keeps_complex_pairs_together() {
        // Modulus-2 rotation block plus a real eigenvalue 1/4.
        let m =
            MatrixD::normalize_lift(DMatrix::from_row_slice(3, 3, &[0.25, 0.4, 0.0, 0.0, 1.2, -1.6, 0.0, 1.6, 1.2]))
                .unwrap();
        let v = top_invariant_subspace(&m, 2).unwrap();
        assert_eq!(v.rank(), 2);
        assert!(v.transform(m.as_matrix()).unwrap().distance(&v) < 1e-12);
        let e1 = Subspace::coordinate(3, &[0]).unwrap();
        assert!(point_subspace_distance(&e1, &v) > 0.1);
        assert!(top_invariant_subspace(&m, 1).is_err());
    }

    #[test]
    fn distance_examples() {
        let e1 = Subspace::coordinate(3, &[0]).unwrap();
        let e2 = Subspace::coordinate(3, &[1]).unwrap();
        let e3 = Subspace::coordinate(3, &[2]).unwrap();
        let s = 0.5f64.sqrt();
        let diag12 = Subspace::line(DVector::from_vec(vec![s, s, 0.0])).unwrap();
        let diag13 = Subspace::line(DVector::from_vec(vec![s, 0.0, s])).unwrap();
        assert_eq!(proj_distance(&e1, &e1), 0.0);
        assert!((proj_distance(&e1, &e2) - 1.0).abs() < 1e-15);
        assert!((proj_distance(&e1, &diag12) - s).abs() < 1e-15);

        let plane = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert_eq!(point_subspace_distance(&e1, &plane), 0.0);
        assert!((point_subspace_distance(&e3, &plane) - 1.0).abs() < 1e-15);
        assert!((point_subspace_distance(&diag13, &plane) - s).abs() < 1e-15);
    }

    #[test]
    fn direct_sum_margin_examples() {
        let e = |i| Subspace::coordinate(3, &[i]).unwrap();
        let m = direct_sum_margin(&[&e(0), &e(1), &e(2)]).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        assert!(direct_sum_margin(&[&e(0), &e(0)]).unwrap() < 1e-14);
        // [e1 | (e1+e2)/√2] has Gram matrix [[1, c], [c, 1]], c = 1/√2, so
        // the smallest singular value is √(1 - c).
        let s = 0.5f64.sqrt();
        let d12 = Subspace::line(DVector::from_vec(vec![s, s, 0.0])).unwrap();
        let m = direct_sum_margin(&[&e(0), &d12]).unwrap();
        assert!((m - (1.0 - s).sqrt()).abs() < 1e-14);
        assert!((m - 0.541).abs() < 1e-3);
        let p = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(matches!(direct_sum_margin(&[&p, &p]), Err(Error::RankOverflow { total: 4, dim: 3 })));
    }

    fn arb_matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-2.0f64..2.0, d * d)
            .prop_map(move |v| DMatrix::from_row_slice(d, d, &v) + DMatrix::identity(d, d) * 0.5)
    }

    fn arb_line(d: usize) -> impl Strategy<Value = Subspace> {
        proptest::collection::vec(-1.0f64..1.0, d)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| Subspace::line(DVector::from_vec(v)).unwrap())
    }

    proptest! {
        #[test]
        fn spectra_are_scale_invariant(m in arb_matrix(4), c in 0.1f64..10.0) {
            prop_assume!(m.clone().determinant().abs() > 1e-3);
            let a = MatrixD::normalize_lift(m.clone()).unwrap();
            let b = MatrixD::normalize_lift(m * c).unwrap();
            let (ea, eb) = (eigen_moduli(&a).unwrap(), eigen_moduli(&b).unwrap());
            let (sa, sb) = (singular_values(&a), singular_values(&b));
            for i in 0..4 {
                prop_assert!((ea[i] - eb[i]).abs() < 1e-8 * ea[0]);
                prop_assert!((sa[i] - sb[i]).abs() < 1e-8 * sa[0]);
            }
        }

        #[test]
        fn singular_values_submultiplicative_and_dual(a in arb_matrix(4), b in arb_matrix(4)) {
            prop_assume!(a.clone().determinant().abs() > 1e-2 && b.clone().determinant().abs() > 1e-2);
            let a = MatrixD::normalize_lift(a).unwrap();
            let b = MatrixD::normalize_lift(b).unwrap();
            let ab = a.mul(&b);
            prop_assert!(singular_values(&ab)[0] <= singular_values(&a)[0] * singular_values(&b)[0] * (1.0 + 1e-8));
            let s = singular_values(&a);
            let si = singular_values(&a.inverse().unwrap());
            for i in 0..4 {
                prop_assert!((s[i] - 1.0 / si[3 - i]).abs() < 1e-8 * s[0]);
            }
        }

        #[test]
        fn top_subspace_is_invariant(m in arb_matrix(5), k in 1usize..5) {
            prop_assume!(m.clone().determinant().abs() > 1e-2);
            let m = MatrixD::normalize_lift(m).unwrap();
            if let Ok(v) = top_invariant_subspace(&m, k) {
                let image = v.transform(m.as_matrix()).unwrap();
                prop_assert!(image.distance(&v) < 1e-8);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn proj_distance_is_a_metric(p in arb_line(4), q in arb_line(4), r in arb_line(4)) {
            let pq = proj_distance(&p, &q);
            prop_assert!((pq - proj_distance(&q, &p)).abs() < 1e-12);
            prop_assert!(proj_distance(&p, &r) <= pq + proj_distance(&q, &r) + 1e-10);
        }

        #[test]
        fn direct_sum_margin_is_symmetric(p in arb_line(4), q in arb_line(4), r in arb_line(4)) {
            let a = direct_sum_margin(&[&p, &q, &r]).unwrap();
            let b = direct_sum_margin(&[&r, &p, &q]).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
            let pq = Subspace::from_spanning(
                DMatrix::from_columns(&[p.frame().column(0) + q.frame().column(0), q.frame().column(0).clone_owned()])
            );
            if let Ok(pq) = pq {
                let plane = Subspace::from_spanning(DMatrix::from_columns(&[p.frame().column(0).clone_owned(), q.frame().column(0).clone_owned()])).unwrap();
                let x = direct_sum_margin(&[&pq, &r]).unwrap();
                let y = direct_sum_margin(&[&plane, &r]).unwrap();
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

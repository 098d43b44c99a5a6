//! Standard generator sets and recipes used by the examples, the CLI and the
//! tests.
//!
//! The base pair is `A = diag(λ, 1/λ)` and `B = C A Cᵀ` with `C` the rotation
//! by 45°. Their axes in the upper half plane cross at `i` at a right angle
//! and the four ping-pong half-disks are disjoint for `λ ≥ 3`, so the pair
//! generates a discrete free group (a Schottky, hence convex cocompact
//! Fuchsian, group).

use nalgebra::DMatrix;

use crate::functors::{Base, Complex3, Functor, Recipe};

/// Translation factor of the standard pair.
pub const FUCHSIAN_LAMBDA: f64 = 5.0;

/// Rows of the standard pair for a given `λ`.
pub fn sl2_pair_rows(lambda: f64) -> Vec<Vec<Vec<f64>>> {
    let a = DMatrix::from_row_slice(2, 2, &[lambda, 0.0, 0.0, 1.0 / lambda]);
    let c = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]) / 2f64.sqrt();
    let b = &c * &a * c.transpose();
    [a, b].iter().map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()).collect()
}

/// Base of the standard pair.
pub fn fuchsian_pair() -> Base {
    Base::Real { generators: sl2_pair_rows(FUCHSIAN_LAMBDA) }
}

/// `τ_d` of the standard pair.
pub fn fuchsian_tau(d: usize) -> Recipe {
    Recipe { base: fuchsian_pair(), chain: vec![Functor::Tau { d }] }
}

/// `τ_a ⊕ τ_b` of the standard pair.
pub fn fuchsian_tau_sum(a: usize, b: usize) -> Recipe {
    Recipe {
        base: fuchsian_pair(),
        chain: vec![Functor::DirectSum { parts: vec![vec![Functor::Tau { d: a }], vec![Functor::Tau { d: b }]] }],
    }
}

/// The standard pair itself, as an `SL_2` recipe.
pub fn schottky_sl2() -> Recipe {
    Recipe { base: fuchsian_pair(), chain: Vec::new() }
}

/// Two loxodromic elements of `SU(2,1)` for the 9-dimensional construction:
/// `diag(λ, 1, 1/λ)` and its conjugate by a quarter turn `k` of the real
/// form `SO(2,1)`. The pair lies in `SO(2,1)` and is the image of the
/// standard `SL_2` pair shape, so it generates a discrete free group.
pub fn su21_pair(lambda: f64) -> Base {
    let z = [0.0, 0.0];
    let r = |x: f64| [x, 0.0];
    let a: Complex3 = [[r(lambda), z, z], [z, r(1.0), z], [z, z, r(1.0 / lambda)]];
    // k = exp(θK) at √2·θ = π/2, where K = [[0,1,0],[-1,0,-1],[0,1,0]]
    // satisfies KᵀJ + JK = 0 and K³ = -2K. k is real orthogonal.
    let s = 2f64.sqrt();
    let k = DMatrix::from_row_slice(3, 3, &[1.0, s, -1.0, -s, 0.0, -s, -1.0, s, 1.0]) / 2.0;
    let ad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![lambda, 1.0, 1.0 / lambda]));
    let b = &k * ad * k.transpose();
    let b: Complex3 = std::array::from_fn(|i| std::array::from_fn(|j| r(b[(i, j)])));
    Base::Su21 { generators: vec![a, b] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::su21_residual;

    #[test]
    fn pair_is_in_sl2() {
        for rows in sl2_pair_rows(FUCHSIAN_LAMBDA) {
            let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
            assert!((det - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn su21_pair_preserves_the_form() {
        let Base::Su21 { generators } = su21_pair(2.0) else { unreachable!() };
        for g in &generators {
            assert!(su21_residual(g) < 1e-12);
        }
        assert!(Recipe { base: su21_pair(2.0), chain: vec![] }.build().is_ok());
    }

    #[test]
    fn recipes_build() {
        assert_eq!(fuchsian_tau(3).build().unwrap().dim(), 3);
        assert_eq!(fuchsian_tau_sum(5, 2).build().unwrap().dim(), 7);
        assert_eq!(schottky_sl2().build().unwrap().dim(), 2);
    }
}

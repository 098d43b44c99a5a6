//! Flags of `∧^k ρ` built from the flags of a Hitchin representation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{combinations, wedge_vectors};
use crate::error::{Error, Result};
use crate::linalg::Subspace;

const NESTING_TOL: f64 = 1e-8;

/// A partial flag in `R^d`, indexed by rank. Rank `0` and rank `d` are
/// implicit.
#[derive(Clone, Debug, Default)]
pub struct PartialFlag {
    d: usize,
    by_rank: BTreeMap<usize, Subspace>,
}

impl PartialFlag {
    pub fn new(d: usize) -> Self {
        Self { d, by_rank: BTreeMap::new() }
    }

    /// Builds a flag from subspaces of any ranks (later entries replace
    /// earlier ones of equal rank).
    pub fn from_subspaces(d: usize, spaces: impl IntoIterator<Item = Subspace>) -> Result<Self> {
        let mut f = Self::new(d);
        for s in spaces {
            f.insert(s)?;
        }
        Ok(f)
    }

    pub fn insert(&mut self, s: Subspace) -> Result<()> {
        if s.ambient_dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: s.ambient_dim() });
        }
        self.by_rank.insert(s.rank(), s);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Frame of the rank-`r` member: `None` for rank 0, the identity for
    /// rank `d`.
    fn frame(&self, r: usize) -> Result<Option<DMatrix<f64>>> {
        if r == 0 {
            return Ok(None);
        }
        if r == self.d {
            return Ok(Some(DMatrix::identity(self.d, self.d)));
        }
        self.by_rank
            .get(&r)
            .map(|s| Some(s.frame().clone()))
            .ok_or_else(|| Error::InvalidArgument(format!("flag has no subspace of rank {r}")))
    }

    /// Checks that consecutive members are nested.
    pub fn check_nesting(&self) -> Result<()> {
        let spaces: Vec<&Subspace> = self.by_rank.values().collect();
        for w in spaces.windows(2) {
            let r = w[1].containment_residual(w[0]);
            if r > NESTING_TOL {
                return Err(Error::NestingViolated(format!(
                    "rank {} not contained in rank {} (residual {r:e})",
                    w[0].rank(),
                    w[1].rank()
                )));
            }
        }
        Ok(())
    }
}

/// Which member of the `∧^k` flag to build; `D = C(d, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaLevel {
    /// Rank 1: `∧^k ξ^(k)`.
    One,
    /// Rank 2: `(∧^{k-1} ξ^(k-1)) ∧ ξ^(k+1)`.
    Two,
    /// Rank `D-2`: `ξ^(d-k-1) ∧ ∧^{k-1}R^d + ξ^(d-k) ∧ ξ^(d-k+1) ∧ ∧^{k-2}R^d`.
    CoTwo,
    /// Rank `D-1`: `ξ^(d-k) ∧ ∧^{k-1}R^d`.
    CoOne,
}

/// Spanning vectors of `∧^{p_1} F_1 ∧ … ∧ ∧^{p_n} F_n`. Any absent factor
/// with positive power makes the product zero.
fn wedge_product(factors: &[(Option<DMatrix<f64>>, usize)]) -> Vec<DVector<f64>> {
    let mut partial: Vec<Vec<DVector<f64>>> = vec![Vec::new()];
    for (frame, power) in factors {
        if *power == 0 {
            continue;
        }
        let Some(frame) = frame else {
            return Vec::new();
        };
        let subsets = combinations(frame.ncols(), *power);
        partial = partial
            .iter()
            .flat_map(|prefix| {
                subsets.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.extend(s.iter().map(|&c| frame.column(c).clone_owned()));
                    v
                })
            })
            .collect();
    }
    partial
        .into_iter()
        .map(
            |cols| {
                if cols.is_empty() {
                    DVector::from_element(1, 1.0)
                } else {
                    wedge_vectors(&DMatrix::from_columns(&cols))
                }
            },
        )
        .filter(|v| v.amax() > 0.0)
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    combinations(n, k).len()
}

/// Member of the flag of `∧^k ρ` at a boundary point, from the flag of `ρ`.
pub fn hitchin_zeta(flag: &PartialFlag, k: usize, level: ZetaLevel) -> Result<Subspace> {
    let d = flag.dim();
    if k == 0 || k >= d {
        return Err(Error::InvalidArgument(format!("wedge index {k} outside 1..{d}")));
    }
    flag.check_nesting()?;
    let big = binomial(d, k);
    let full = Some(DMatrix::<f64>::identity(d, d));
    let (vectors, rank) = match level {
        ZetaLevel::One => (wedge_product(&[(flag.frame(k)?, k)]), 1),
        ZetaLevel::Two => (wedge_product(&[(flag.frame(k - 1)?, k - 1), (flag.frame(k + 1)?, 1)]), 2),
        ZetaLevel::CoTwo => {
            let mut v = wedge_product(&[(flag.frame(d - k - 1)?, 1), (full.clone(), k - 1)]);
            if k >= 2 {
                v.extend(wedge_product(&[(flag.frame(d - k)?, 1), (flag.frame(d - k + 1)?, 1), (full.clone(), k - 2)]));
            }
            (v, big.saturating_sub(2))
        }
        ZetaLevel::CoOne => (wedge_product(&[(flag.frame(d - k)?, 1), (full, k - 1)]), big - 1),
    };
    if rank == 0 || vectors.is_empty() {
        return Err(Error::InvalidArgument(format!("zeta level {level:?} is trivial for d={d}, k={k}")));
    }
    let s = Subspace::span_of(&DMatrix::from_columns(&vectors), 1e-9)?;
    if s.rank() != rank {
        return Err(Error::InvalidArgument(format!("zeta level {level:?} has rank {} instead of {rank}", s.rank())));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::{flag_wedge, wedge_power};
    use crate::linalg::{proj_distance, top_invariant_subspace, MatrixD};

    fn coordinate_flag(d: usize) -> PartialFlag {
        PartialFlag::from_subspaces(d, (1..d).map(|r| Subspace::coordinate(d, &(0..r).collect::<Vec<_>>()).unwrap()))
            .unwrap()
    }

    /// Span of lexicographic basis wedges with the given (0-based) indices.
    fn lex_span(d: usize, k: usize, subsets: &[&[usize]]) -> Subspace {
        let all = combinations(d, k);
        let idx: Vec<usize> = subsets.iter().map(|s| all.iter().position(|c| c == s).unwrap()).collect();
        Subspace::coordinate(all.len(), &idx).unwrap()
    }

    #[test]
    fn k_equal_one_reproduces_the_flag() {
        let f = coordinate_flag(3);
        let z1 = hitchin_zeta(&f, 1, ZetaLevel::One).unwrap();
        assert!(z1.distance(&Subspace::coordinate(3, &[0]).unwrap()) < 1e-14);
        let z2 = hitchin_zeta(&f, 1, ZetaLevel::Two).unwrap();
        assert!(z2.distance(&Subspace::coordinate(3, &[0, 1]).unwrap()) < 1e-14);
        // D = 3: rank D-2 = 1 and rank D-1 = 2.
        let zc2 = hitchin_zeta(&f, 1, ZetaLevel::CoTwo).unwrap();
        assert!(zc2.distance(&Subspace::coordinate(3, &[0]).unwrap()) < 1e-14);
        let zc1 = hitchin_zeta(&f, 1, ZetaLevel::CoOne).unwrap();
        assert!(zc1.distance(&Subspace::coordinate(3, &[0, 1]).unwrap()) < 1e-14);
    }

    #[test]
    fn coordinate_flags_in_dimension_four() {
        let f = coordinate_flag(4);
        let z1 = hitchin_zeta(&f, 2, ZetaLevel::One).unwrap();
        assert!(z1.distance(&lex_span(4, 2, &[&[0, 1]])) < 1e-14);
        let z2 = hitchin_zeta(&f, 2, ZetaLevel::Two).unwrap();
        assert!(z2.distance(&lex_span(4, 2, &[&[0, 1], &[0, 2]])) < 1e-14);
        let zc2 = hitchin_zeta(&f, 2, ZetaLevel::CoTwo).unwrap();
        assert_eq!(zc2.rank(), 4);
        // Everything except e_2∧e_4 and e_3∧e_4 (1-based).
        assert!(zc2.distance(&lex_span(4, 2, &[&[0, 1], &[0, 2], &[0, 3], &[1, 2]])) < 1e-14);
        let zc1 = hitchin_zeta(&f, 2, ZetaLevel::CoOne).unwrap();
        assert_eq!(zc1.rank(), 5);
    }

    #[test]
    fn co_two_has_rank_d_choose_k_minus_two() {
        for d in 3..7 {
            for k in 1..d {
                let f = coordinate_flag(d);
                if binomial(d, k) < 3 {
                    continue;
                }
                let z = hitchin_zeta(&f, k, ZetaLevel::CoTwo).unwrap();
                assert_eq!(z.rank(), binomial(d, k) - 2, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn nesting_is_checked() {
        let f = PartialFlag::from_subspaces(
            3,
            [Subspace::coordinate(3, &[2]).unwrap(), Subspace::coordinate(3, &[0, 1]).unwrap()],
        )
        .unwrap();
        assert!(matches!(hitchin_zeta(&f, 1, ZetaLevel::One), Err(Error::NestingViolated(_))));
    }

    #[test]
    fn zeta_one_is_the_attracting_line_of_the_wedge() {
        let m = MatrixD::normalize_lift(DMatrix::from_row_slice(
            4,
            4,
            &[
                3.0, 0.2, -0.1, 0.4, //
                0.1, 1.6, 0.3, -0.2, //
                0.2, -0.1, 0.7, 0.1, //
                0.3, 0.2, 0.1, 0.3,
            ],
        ))
        .unwrap();
        let flag = PartialFlag::from_subspaces(4, (1..4).map(|r| top_invariant_subspace(&m, r).unwrap())).unwrap();
        let z = hitchin_zeta(&flag, 2, ZetaLevel::One).unwrap();
        let line = top_invariant_subspace(&wedge_power(&m, 2).unwrap(), 1).unwrap();
        assert!(proj_distance(&z, &line) < 1e-10);
        let fw = flag_wedge(&top_invariant_subspace(&m, 2).unwrap()).unwrap();
        assert!(proj_distance(&z, &fw) < 1e-10);
        let z2 = hitchin_zeta(&flag, 2, ZetaLevel::Two).unwrap();
        let top2 = top_invariant_subspace(&wedge_power(&m, 2).unwrap(), 2).unwrap();
        assert!(z2.distance(&top2) < 1e-9);
    }
}

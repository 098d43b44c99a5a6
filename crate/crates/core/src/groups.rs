//! Finitely generated groups given by generator matrices: reduced words,
//! word-metric balls and matrix-value deduplication.
//!
//! Relations are never handled symbolically. Two words whose matrices agree
//! in `PGL_d` (within tolerance) are merged, keeping the shorter word.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{eigen_moduli, MatrixD};
use crate::par;

/// Default max-entry tolerance (relative to `max(1, |M|_max)`) for merging
/// ball elements.
pub const DEFAULT_DEDUP_TOL: f64 = 1e-8;

/// Default cap on the number of reduced words enumerated.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

/// A generator or its formal inverse. Displayed as `a, b, c, …` with the
/// inverse in upper case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator: generator as u16, inverse }
    }

    pub fn inv(self) -> Self {
        Self { generator: self.generator, inverse: !self.inverse }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = b'a' + (self.generator % 26) as u8;
        let c = if self.inverse { base.to_ascii_uppercase() } else { base } as char;
        if self.generator >= 26 {
            write!(f, "{c}{}", self.generator / 26)
        } else {
            write!(f, "{c}")
        }
    }
}

/// A word in the generators. Ordering is length first, then lexicographic
/// in letters (`a < A < b < B < …`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// No adjacent `x x⁻¹` pair.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Writes the reduced word as `u · c · u⁻¹` with `c` cyclically reduced
    /// and returns `c`, which is conjugate to `self`.
    pub fn cyclic_core(&self) -> Word {
        let w = &self.0;
        let (mut i, mut j) = (0, w.len());
        while j >= i + 2 && w[i] == w[j - 1].inv() {
            i += 1;
            j -= 1;
        }
        Word(w[i..j].to_vec())
    }

    /// Free reduction of the concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses words over `a..z` (upper case for inverses); `e` or the empty
    /// string is the identity. Generator indices beyond 26 are not parsed.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        s.chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(Letter::new((c as u8 - b'a') as usize, false))
                } else if c.is_ascii_uppercase() {
                    Ok(Letter::new((c as u8 - b'A') as usize, true))
                } else {
                    Err(Error::InvalidArgument(format!("bad letter {c:?} in word {s:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// A finite symmetric generating set: each generator with its inverse, all
/// normalized lifts of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    forward: Vec<MatrixD>,
    inverse: Vec<MatrixD>,
}

impl GeneratorSet {
    /// Builds the symmetric set, computing inverses.
    pub fn new(generators: Vec<MatrixD>) -> Result<Self> {
        let inverse = generators.iter().map(|g| g.inverse()).collect::<Result<Vec<_>>>()?;
        Self::from_pairs(generators, inverse)
    }

    /// Builds the set from explicit generator/inverse pairs, checking that
    /// they are mutually inverse within `1e-8` (relative).
    pub fn from_pairs(forward: Vec<MatrixD>, inverse: Vec<MatrixD>) -> Result<Self> {
        let Some(first) = forward.first() else {
            return Err(Error::InvalidArgument("at least one generator required".into()));
        };
        let dim = first.dim();
        if forward.len() != inverse.len() {
            return Err(Error::LabelMismatch { left: forward.len(), right: inverse.len() });
        }
        for (g, h) in forward.iter().zip(&inverse) {
            for m in [g, h] {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
                }
            }
            let prod = g.mul(h);
            let err = (prod.as_matrix() - nalgebra::DMatrix::identity(dim, dim)).amax();
            let scale = (g.max_abs() * h.max_abs()).max(1.0);
            if err > 1e-8 * scale {
                return Err(Error::InvalidArgument(format!("generator inverse mismatch (residual {err:e})")));
            }
        }
        Ok(Self { dim, forward, inverse })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators (not counting inverses).
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// All letters in canonical order `a, A, b, B, …`.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.len()).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)]).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.letters().iter().map(|l| l.to_string()).collect()
    }

    pub fn matrix(&self, letter: Letter) -> &MatrixD {
        let g = letter.generator as usize;
        if letter.inverse {
            &self.inverse[g]
        } else {
            &self.forward[g]
        }
    }

    pub fn generators(&self) -> &[MatrixD] {
        &self.forward
    }

    pub fn inverses(&self) -> &[MatrixD] {
        &self.inverse
    }

    /// Applies a map to every generator and inverse, renormalizing.
    pub fn map<F>(&self, f: F) -> Result<GeneratorSet>
    where
        F: Fn(&MatrixD) -> Result<MatrixD>,
    {
        let forward = self.forward.iter().map(&f).collect::<Result<Vec<_>>>()?;
        let inverse = self.inverse.iter().map(&f).collect::<Result<Vec<_>>>()?;
        GeneratorSet::from_pairs(forward, inverse)
    }

    /// Evaluates a word.
    pub fn element(&self, word: &Word) -> GroupElement {
        let mut m = MatrixD::identity(self.dim);
        let mut inv = MatrixD::identity(self.dim);
        for &l in word.letters() {
            m = m.mul(self.matrix(l));
            inv = self.matrix(l.inv()).mul(&inv);
        }
        GroupElement { word: word.clone(), matrix: m, inverse: inv }
    }
}

/// A group element: a reduced word with its matrix and inverse matrix, both
/// computed as ordered products of generator matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: MatrixD,
    pub inverse: MatrixD,
}

impl GroupElement {
    pub fn length(&self) -> usize {
        self.word.len()
    }

    /// The element `g⁻¹` (word and matrices swapped).
    pub fn inv(&self) -> GroupElement {
        GroupElement { word: self.word.inverse(), matrix: self.inverse.clone(), inverse: self.matrix.clone() }
    }
}

/// Enumeration limits for [`enumerate_ball`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallOptions {
    /// Merge tolerance; `None` disables deduplication.
    pub dedup_tol: Option<f64>,
    pub cap: usize,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self { dedup_tol: Some(DEFAULT_DEDUP_TOL), cap: DEFAULT_BALL_CAP }
    }
}

/// Number of freely reduced words of length `≤ radius` on `letters`
/// symmetric letters (saturating).
pub fn free_ball_size(letters: usize, radius: usize) -> usize {
    let mut total: usize = 1;
    let mut level: usize = 1;
    for n in 1..=radius {
        level = if n == 1 { letters } else { level.saturating_mul(letters.saturating_sub(1)) };
        total = total.saturating_add(level);
    }
    total
}

/// All freely reduced words of length `≤ radius` with their matrices,
/// deduplicated in `PGL_d` and ordered by length then lexicographically.
pub fn enumerate_ball(gens: &GeneratorSet, radius: usize, opts: BallOptions) -> Result<Vec<GroupElement>> {
    let letters = gens.letters();
    let size = free_ball_size(letters.len(), radius);
    if size > opts.cap {
        return Err(Error::BallTooLarge { size, cap: opts.cap });
    }
    let mut all = Vec::with_capacity(size);
    let identity = GroupElement {
        word: Word::identity(),
        matrix: MatrixD::identity(gens.dim()),
        inverse: MatrixD::identity(gens.dim()),
    };
    let mut level = vec![identity];
    for _ in 0..radius {
        // Parents are in canonical order and children are appended in letter
        // order, so each level comes out sorted.
        let next = par::flat_map(&level, |parent| {
            let last = parent.word.letters().last().copied();
            letters
                .iter()
                .filter(|&&l| Some(l.inv()) != last)
                .map(|&l| {
                    let mut word = parent.word.0.clone();
                    word.push(l);
                    GroupElement {
                        word: Word(word),
                        matrix: parent.matrix.mul(gens.matrix(l)),
                        inverse: gens.matrix(l.inv()).mul(&parent.inverse),
                    }
                })
                .collect()
        });
        all.append(&mut level);
        level = next;
    }
    all.append(&mut level);
    match opts.dedup_tol {
        Some(tol) => Ok(dedup_elements(all, tol)),
        None => Ok(all),
    }
}

/// Keeps, in canonical order, every element whose matrix differs in `PGL_d`
/// from all previously kept ones. The input order is irrelevant: elements
/// are sorted first, so the result is a function of the input set.
pub fn dedup_elements(mut elems: Vec<GroupElement>, tol: f64) -> Vec<GroupElement> {
    elems.sort_by(|a, b| a.word.cmp(&b.word));
    elems.dedup_by(|a, b| a.word == b.word);
    if elems.is_empty() {
        return elems;
    }
    let d = elems[0].matrix.dim();
    let weights: Vec<f64> = (0..d * d).map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract()).collect();
    let wsum: f64 = weights.iter().sum();
    let normalized: Vec<nalgebra::DMatrix<f64>> = par::map(&elems, |e| e.matrix.sign_normalized());
    let keys: Vec<f64> = normalized.iter().map(|m| m.iter().zip(&weights).map(|(x, w)| x * w).sum()).collect();

    let mut index = NearIndex::default();
    let mut keep = vec![false; elems.len()];
    for i in 0..elems.len() {
        let scale = normalized[i].amax().max(1.0);
        let radius = 2.0 * tol * scale * wsum;
        let dup = index.candidates(keys[i], radius).any(|j| {
            let s = scale.max(normalized[j].amax());
            (&normalized[i] - &normalized[j]).amax() <= tol * s
        });
        if !dup {
            keep[i] = true;
            index.insert(keys[i], i);
        }
    }
    elems.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect()
}

/// Heuristic for infinite order: `λ_1 / λ_d > 1 + tol`. Elliptic and finite
/// order elements have all eigenvalue moduli equal.
pub fn is_infinite_order_proxy(g: &GroupElement, tol: f64) -> bool {
    match eigen_moduli(&g.matrix) {
        Ok(m) => m[0] / m[m.len() - 1] > 1.0 + tol,
        Err(_) => false,
    }
}

/// Ordered-key index used for tolerance-based deduplication: a candidate
/// within tolerance has a scalar key within a known radius.
#[derive(Default)]
pub(crate) struct NearIndex {
    map: BTreeMap<OrdF64, Vec<usize>>,
}

impl NearIndex {
    pub(crate) fn insert(&mut self, key: f64, id: usize) {
        self.map.entry(OrdF64(key)).or_default().push(id);
    }

    pub(crate) fn candidates(&self, key: f64, radius: f64) -> impl Iterator<Item = usize> + '_ {
        self.map.range(OrdF64(key - radius)..=OrdF64(key + radius)).flat_map(|(_, v)| v.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

//! Limit sets and flag maps sampled from attracting data of ball elements,
//! and scans of the boundary axioms on those samples.
//!
//! A boundary point `x = γ⁺` is represented by the attracting flags of
//! `ρ(γ)`; the repelling point `γ⁻` by the attracting flags of `ρ(γ)⁻¹`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functors::{Recipe, Representation};
use crate::groups::{BallOptions, GroupElement, NearIndex, Word};
use crate::linalg::{
    direct_sum_margin, point_subspace_distance, proj_distance, top_invariant_subspace_with, Subspace, DEFAULT_GAP_TOL,
};
use crate::par;
use crate::spectra::{gap_profile_of, BallSpectra, SpectralData, DEFAULT_SLOPE_MIN};

/// Two attracting lines closer than this (sine distance) are one sample.
pub const SAMPLE_DEDUP_TOL: f64 = 1e-9;
/// Default minimum separation of boundary points in pair and triple scans.
pub const DEFAULT_SEP_TOL: f64 = 1e-3;
/// Default cap on evaluated pairs; larger clouds are subsampled.
pub const DEFAULT_MAX_PAIRS: usize = 2_000_000;
/// Controlled-set margins below this count as violations.
pub const VIOLATION_TOL: f64 = 1e-8;

/// Flags at the attracting point `γ⁺` and the repelling point `γ⁻` of a
/// proximal element.
#[derive(Clone, Debug)]
pub struct FlagSample {
    pub witness: GroupElement,
    /// `ξ^(1)(γ⁺)`.
    pub xi1_plus: Subspace,
    /// `ξ^(m)(γ⁺)`.
    pub xim_plus: Subspace,
    /// `ξ^(1)(γ⁻)`, used to decide when two boundary points coincide.
    pub xi1_minus: Subspace,
    /// `ξ^(d-m)(γ⁻)`.
    pub xi_dm_minus: Subspace,
    /// `ξ^(d-1)(γ⁻)`.
    pub xi_d1_minus: Subspace,
    pub spectral: SpectralData,
}

impl FlagSample {
    /// Extracts the flags of `g` at index `m`; fails when `ρ(g)` lacks a
    /// relative modulus gap of `gap_tol` at index 1 or `m`.
    pub fn from_element(g: &GroupElement, m: usize, spectral: SpectralData, gap_tol: f64) -> Result<Self> {
        let d = g.matrix.dim();
        check_index(m, d)?;
        let fwd = g.matrix.as_matrix();
        let bwd = g.inverse.as_matrix();
        Ok(Self {
            witness: g.clone(),
            xi1_plus: top_invariant_subspace_with(fwd, 1, gap_tol)?,
            xim_plus: top_invariant_subspace_with(fwd, m, gap_tol)?,
            xi1_minus: top_invariant_subspace_with(bwd, 1, gap_tol)?,
            xi_dm_minus: top_invariant_subspace_with(bwd, d - m, gap_tol)?,
            xi_d1_minus: top_invariant_subspace_with(bwd, d - 1, gap_tol)?,
            spectral,
        })
    }

    pub fn dim(&self) -> usize {
        self.xi1_plus.ambient_dim()
    }

    pub fn m(&self) -> usize {
        self.xim_plus.rank()
    }
}

fn check_index(m: usize, d: usize) -> Result<()> {
    if m == 0 || m >= d {
        return Err(Error::InvalidArgument(format!("flag index {m} outside 1..{d}")));
    }
    Ok(())
}

/// Samples of the limit set with their flags, in canonical word order of
/// the witnesses.
#[derive(Clone, Debug)]
pub struct LimitCloud {
    pub samples: Vec<FlagSample>,
    pub m: usize,
    pub recipe: Recipe,
    /// Precondition warnings, e.g. a gap profile without linear growth.
    pub warnings: Vec<String>,
}

/// Nearest-neighbour spacing of the sampled `ξ^(1)` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacingStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl LimitCloud {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, FlagSample::dim)
    }

    /// The sampled points `ξ^(1)(γ⁺)`.
    pub fn points(&self) -> Vec<&Subspace> {
        self.samples.iter().map(|s| &s.xi1_plus).collect()
    }

    /// Coverage diagnostic; `None` with fewer than two samples.
    pub fn spacing_stats(&self) -> Option<SpacingStats> {
        let n = self.samples.len();
        if n < 2 {
            return None;
        }
        let mut nearest = par::map_range(n, |i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| proj_distance(&self.samples[i].xi1_plus, &self.samples[j].xi1_plus))
                .fold(f64::INFINITY, f64::min)
        });
        nearest.sort_by(f64::total_cmp);
        Some(SpacingStats { min: nearest[0], median: nearest[n / 2], max: nearest[n - 1] })
    }
}

/// Options for [`limit_samples_with`].
#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    /// Relative modulus gap required at indices 1 and `m`.
    pub gap_tol: f64,
    /// Sine distance under which attracting lines are merged.
    pub dedup_tol: f64,
    pub ball: BallOptions,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { gap_tol: DEFAULT_GAP_TOL, dedup_tol: SAMPLE_DEDUP_TOL, ball: BallOptions::default() }
    }
}

/// Samples the limit set of `rep` from the ball of radius `R`.
pub fn limit_samples(rep: &Representation, m: usize, radius: usize) -> Result<LimitCloud> {
    limit_samples_with(rep, m, radius, SampleOptions::default())
}

pub fn limit_samples_with(rep: &Representation, m: usize, radius: usize, opts: SampleOptions) -> Result<LimitCloud> {
    let ball = BallSpectra::compute(rep, radius, opts.ball)?;
    limit_samples_of(&ball, rep.recipe(), m, opts)
}

/// [`limit_samples`] on a precomputed ball.
pub fn limit_samples_of(ball: &BallSpectra, recipe: &Recipe, m: usize, opts: SampleOptions) -> Result<LimitCloud> {
    check_index(m, ball.dim)?;
    let mut warnings = Vec::new();
    let mut ks = vec![1];
    if m != 1 {
        ks.push(m);
    }
    for k in ks {
        let p = gap_profile_of(ball, k, DEFAULT_SLOPE_MIN)?;
        if !p.is_linear() {
            warnings.push(format!("gap profile at k={k}: {}", p.verdict()));
        }
    }
    let log_gap = opts.gap_tol.ln_1p();
    let extracted = par::map(&ball.items, |e| {
        let l = &e.spectral.lambda;
        if !(l[0] - l[1] > log_gap && l[m - 1] - l[m] > log_gap) {
            return None;
        }
        FlagSample::from_element(&e.element, m, e.spectral.clone(), opts.gap_tol).ok()
    });
    let candidates: Vec<FlagSample> = extracted.into_iter().flatten().collect();
    if candidates.is_empty() {
        return Err(Error::NoProximal);
    }
    Ok(LimitCloud { samples: dedup_lines(candidates, opts.dedup_tol), m, recipe: recipe.clone(), warnings })
}

/// Sign-normalized unit representative: first entry of largest modulus is
/// positive.
fn line_representative(s: &Subspace) -> DVector<f64> {
    let v = s.unit_vector();
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

/// Keeps the first sample (in input order) of every cluster of attracting
/// lines within `tol`.
fn dedup_lines(samples: Vec<FlagSample>, tol: f64) -> Vec<FlagSample> {
    let Some(first) = samples.first() else {
        return samples;
    };
    let d = first.dim();
    let weights: Vec<f64> = (0..d).map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract()).collect();
    let wsum: f64 = weights.iter().sum();
    let reps: Vec<DVector<f64>> = samples.iter().map(|s| line_representative(&s.xi1_plus)).collect();
    let keys: Vec<f64> = reps.iter().map(|v| v.iter().zip(&weights).map(|(x, w)| x * w).sum()).collect();
    let mut index = NearIndex::default();
    let mut keep = vec![false; samples.len()];
    for i in 0..samples.len() {
        // Sign normalization can flip near-ties, so compare lines, and look
        // up both signs of the key.
        let radius = 2.0 * tol * wsum;
        let dup = index
            .candidates(keys[i], radius)
            .chain(index.candidates(-keys[i], radius))
            .any(|j| proj_distance(&samples[i].xi1_plus, &samples[j].xi1_plus) <= tol);
        if !dup {
            keep[i] = true;
            index.insert(keys[i], i);
        }
    }
    samples.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect()
}

/// Options shared by the pair scans.
#[derive(Clone, Copy, Debug)]
pub struct PairScanOptions {
    /// Pairs of points closer than this are treated as equal and skipped.
    pub sep_tol: f64,
    /// Evaluate at most this many pairs; larger sets are sampled.
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for PairScanOptions {
    fn default() -> Self {
        Self { sep_tol: DEFAULT_SEP_TOL, max_pairs: DEFAULT_MAX_PAIRS, seed: 0 }
    }
}

/// Ordered pairs `(i, j)` of sample indices, all of them or a seeded sample.
fn pair_indices(n: usize, opts: &PairScanOptions) -> Vec<(usize, usize)> {
    if n * n <= opts.max_pairs {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.max_pairs).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect()
    }
}

/// Minimum with its argument; ties keep the earliest index, so the result
/// does not depend on evaluation order.
fn argmin<T: Copy>(values: impl Iterator<Item = (f64, T)>) -> Option<(f64, T)> {
    values.fold(None, |best, (v, t)| match best {
        Some((b, _)) if b <= v => best,
        _ => Some((v, t)),
    })
}

/// Smallest direct-sum margin found by a scan, with the witnessing words.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginWitness<const N: usize> {
    pub margin: f64,
    #[serde(serialize_with = "serialize_words")]
    pub words: [Word; N],
}

fn serialize_words<S: serde::Serializer, const N: usize>(w: &[Word; N], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(w.iter().map(|w| w.to_string()))
}

/// Result of [`transversality_scan`]. Pairs are `(x, y) = (γ⁺, η⁻)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransversalityReport {
    /// `ξ^(m)(x) ⊕ ξ^(d-m)(y)`.
    pub flag: Option<MarginWitness<2>>,
    /// `ξ^(1)(x) ⊕ ξ^(d-1)(y)`.
    pub hyperplane: Option<MarginWitness<2>>,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
}

impl TransversalityReport {
    pub fn min_margin(&self) -> f64 {
        let a = self.flag.as_ref().map_or(f64::INFINITY, |w| w.margin);
        let b = self.hyperplane.as_ref().map_or(f64::INFINITY, |w| w.margin);
        a.min(b)
    }
}

/// Minimum transversality margins over distinct sampled pairs.
pub fn transversality_scan(cloud: &LimitCloud, opts: PairScanOptions) -> Result<TransversalityReport> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n, hint: "increase the radius" });
    }
    let pairs = pair_indices(n, &opts);
    let s = &cloud.samples;
    let evaluated = par::map(&pairs, |&(i, j)| {
        if proj_distance(&s[i].xi1_plus, &s[j].xi1_minus) <= opts.sep_tol {
            return Ok(None);
        }
        let flag = direct_sum_margin(&[&s[i].xim_plus, &s[j].xi_dm_minus])?;
        let hyper = direct_sum_margin(&[&s[i].xi1_plus, &s[j].xi_d1_minus])?;
        Ok(Some((flag, hyper)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let words = |k: usize| {
        let (i, j) = pairs[k];
        [s[i].witness.word.clone(), s[j].witness.word.clone()]
    };
    let pick = |sel: fn(&(f64, f64)) -> f64| {
        argmin(evaluated.iter().enumerate().filter_map(|(k, v)| v.as_ref().map(|v| (sel(v), k))))
            .map(|(margin, k)| MarginWitness { margin, words: words(k) })
    };
    let skipped = evaluated.iter().filter(|v| v.is_none()).count();
    Ok(TransversalityReport {
        flag: pick(|v| v.0),
        hyperplane: pick(|v| v.1),
        pairs_evaluated: pairs.len() - skipped,
        pairs_skipped: skipped,
    })
}

/// Result of [`hyperconvexity_scan`]. Triples are `(x, z, y) = (γ⁺, δ⁺, η⁻)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperconvexityReport {
    /// `ξ^(1)(x) ⊕ ξ^(1)(z) ⊕ ξ^(d-m)(y)`.
    pub min: MarginWitness<3>,
    pub triples: usize,
    /// Draws rejected because two points were closer than `sep_tol`.
    pub resampled: usize,
}

/// Draws per requested triple before giving up.
const TRIPLE_ATTEMPTS: usize = 1000;

/// Minimum `m`-hyperconvexity margin over `n_triples` seeded triples of
/// pairwise distinct sampled points.
pub fn hyperconvexity_scan(
    cloud: &LimitCloud,
    m: usize,
    n_triples: usize,
    seed: u64,
    sep_tol: f64,
) -> Result<HyperconvexityReport> {
    if m != cloud.m {
        return Err(Error::InvalidArgument(format!("cloud carries flags for m={}, scan requested m={m}", cloud.m)));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("hyperconvexity needs m ≥ 2".into()));
    }
    let n = cloud.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: n, hint: "increase the radius" });
    }
    if n_triples == 0 {
        return Err(Error::InvalidArgument("n_triples must be positive".into()));
    }
    let s = &cloud.samples;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::with_capacity(n_triples);
    let mut resampled = 0;
    while triples.len() < n_triples {
        if resampled > TRIPLE_ATTEMPTS * n_triples {
            return Err(Error::InvalidArgument(format!(
                "cannot find {n_triples} pairwise distinct triples at sep_tol={sep_tol:e}"
            )));
        }
        let (i, k, j) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let (x, z, y) = (&s[i].xi1_plus, &s[k].xi1_plus, &s[j].xi1_minus);
        if proj_distance(x, z) > sep_tol && proj_distance(x, y) > sep_tol && proj_distance(z, y) > sep_tol {
            triples.push((i, k, j));
        } else {
            resampled += 1;
        }
    }
    let margins =
        par::map(&triples, |&(i, k, j)| direct_sum_margin(&[&s[i].xi1_plus, &s[k].xi1_plus, &s[j].xi_dm_minus]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
    let (margin, t) = argmin(margins.iter().copied().zip(0..)).expect("at least one triple");
    let (i, k, j) = triples[t];
    Ok(HyperconvexityReport {
        min: MarginWitness {
            margin,
            words: [s[i].witness.word.clone(), s[k].witness.word.clone(), s[j].witness.word.clone()],
        },
        triples: n_triples,
        resampled,
    })
}

/// Result of [`controlled_set_check`]. Pairs are `(p, x) = (γ⁺, η⁻)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlledReport {
    /// Smallest distance from a sampled point `p` to `ξ^(d-1)(x)`.
    pub min: Option<MarginWitness<2>>,
    /// Pairs with margin below [`VIOLATION_TOL`].
    pub violations: Vec<MarginWitness<2>>,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
}

/// Checks on samples that `ξ^(d-1)(x)` meets the sampled set only at
/// `ξ^(1)(x)`. Points within `sep_tol` of `ξ^(1)(x)` are skipped.
pub fn controlled_set_check(cloud: &LimitCloud, opts: PairScanOptions) -> Result<ControlledReport> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n, hint: "increase the radius" });
    }
    let pairs = pair_indices(n, &opts);
    let s = &cloud.samples;
    let margins = par::map(&pairs, |&(i, j)| {
        (proj_distance(&s[i].xi1_plus, &s[j].xi1_minus) > opts.sep_tol)
            .then(|| point_subspace_distance(&s[i].xi1_plus, &s[j].xi_d1_minus))
    });
    let witness = |k: usize, margin: f64| {
        let (i, j) = pairs[k];
        MarginWitness { margin, words: [s[i].witness.word.clone(), s[j].witness.word.clone()] }
    };
    let min = argmin(margins.iter().enumerate().filter_map(|(k, v)| v.map(|v| (v, k)))).map(|(v, k)| witness(k, v));
    let violations = margins
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.filter(|&v| v < VIOLATION_TOL).map(|v| witness(k, v)))
        .collect();
    let skipped = margins.iter().filter(|v| v.is_none()).count();
    Ok(ControlledReport { min, violations, pairs_evaluated: pairs.len() - skipped, pairs_skipped: skipped })
}

/// Result of [`irreducibility_proxy`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrreducibilityReport {
    pub irreducible: bool,
    pub dim: usize,
    /// Numerical rank of the sampled `ξ^(1)` points.
    pub span_rank: usize,
    /// Dimension of a proper invariant subspace, if one was found.
    pub invariant_dim: Option<usize>,
}

const SPAN_RTOL: f64 = 1e-8;

/// Numerical rank with threshold `rtol·σ_max`.
fn numerical_rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * top).count()
}

/// Smallest subspace containing `start` and invariant under all
/// `matrices`, by repeated saturation.
fn invariant_closure(start: &DMatrix<f64>, matrices: &[&DMatrix<f64>]) -> Result<Subspace> {
    let mut current = Subspace::span_of(start, SPAN_RTOL)?;
    loop {
        let mut cols = vec![current.frame().clone()];
        cols.extend(matrices.iter().map(|g| *g * current.frame()));
        let stacked = DMatrix::from_columns(
            &cols.iter().flat_map(|c| c.column_iter().map(|v| v.clone_owned()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        );
        let next = Subspace::span_of(&stacked, SPAN_RTOL)?;
        if next.rank() == current.rank() {
            return Ok(next);
        }
        current = next;
    }
}

/// Real eigenvectors and real invariant planes of complex pairs of `g`.
fn eigen_seeds(g: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    let d = g.nrows();
    let schur = crate::linalg::RealSchur::new(g)?;
    let mut seeds = Vec::new();
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for (re, im) in schur.eigenvalues() {
        if im < 0.0 || seen.iter().any(|&(a, b)| (a - re).abs() + (b - im).abs() <= 1e-9 * (1.0 + re.abs())) {
            continue;
        }
        seen.push((re, im));
        let (op, dim) = if im == 0.0 {
            (g - DMatrix::identity(d, d) * re, 1)
        } else {
            (g * g - g * (2.0 * re) + DMatrix::identity(d, d) * (re * re + im * im), 2)
        };
        let svd = op.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        // For a complex pair the kernel of the real quadratic factor is the
        // invariant plane, kept whole.
        let kernel: Vec<DVector<f64>> = order[..dim].iter().map(|&i| vt.row(i).transpose()).collect();
        seeds.push(DMatrix::from_columns(&kernel));
    }
    Ok(seeds)
}

/// Numerical irreducibility check: the sampled `ξ^(1)` points must span
/// `R^d`, and the invariant closure of every eigenline (or complex
/// eigenplane) of every generator must be all of `R^d`.
pub fn irreducibility_proxy(rep: &Representation, radius: usize) -> Result<IrreducibilityReport> {
    let d = rep.dim();
    let span_rank = match limit_samples(rep, 1, radius) {
        Ok(cloud) => {
            let cols: Vec<DVector<f64>> = cloud.samples.iter().map(|s| s.xi1_plus.unit_vector()).collect();
            numerical_rank(&DMatrix::from_columns(&cols), SPAN_RTOL)
        }
        Err(Error::NoProximal) => 0,
        Err(e) => return Err(e),
    };
    let gens = rep.generators();
    let matrices: Vec<&DMatrix<f64>> = gens.generators().iter().chain(gens.inverses()).map(|g| g.as_matrix()).collect();
    let mut invariant_dim = None;
    'outer: for g in gens.generators() {
        for seed in eigen_seeds(g.as_matrix())? {
            let closure = invariant_closure(&seed, &matrices)?;
            if closure.rank() < d {
                invariant_dim = Some(closure.rank());
                break 'outer;
            }
        }
    }
    Ok(IrreducibilityReport {
        irreducible: span_rank == d && invariant_dim.is_none(),
        dim: d,
        span_rank,
        invariant_dim,
    })
}

//! Spectral analytics over word balls: Cartan and Jordan projections, gap
//! profiles, the `α_m` estimator, Gelfand convergence and the cone
//! diagnostic.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functors::{wedge_power, Representation};
use crate::groups::{enumerate_ball, BallOptions, GeneratorSet, GroupElement, Letter, Word};
use crate::linalg::{eigen_moduli_raw, singular_values_raw, MatrixD};
use crate::par;

/// Default lower bound on the fitted slope for a positive gap verdict.
pub const DEFAULT_SLOPE_MIN: f64 = 0.05;
/// Minimum coefficient of determination for a positive gap verdict.
pub const R2_MIN: f64 = 0.9;
/// Default threshold on `log(λ_1/λ_m)` for an element to enter `α_m`.
pub const DEFAULT_ALPHA_TOL: f64 = 1e-9;
/// Per-radius change above which an `α_m` estimate is flagged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Cartan (`mu`) and Jordan (`lambda`) projections: log singular values and
/// log eigenvalue moduli, both non-increasing and summing to zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Merges the top half of a descending spectrum of `M` with the reciprocal
/// top half of `M⁻¹`: large values are accurate from `M`, small ones from
/// `M⁻¹`.
fn split_logs(fwd: &[f64], inv: &[f64]) -> Vec<f64> {
    let d = fwd.len();
    let top = d.div_ceil(2);
    let mut out: Vec<f64> = fwd[..top].iter().map(|x| x.ln()).collect();
    out.extend(inv[..d - top].iter().rev().map(|x| -x.ln()));
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

impl SpectralData {
    /// Spectral data of `M` given `M⁻¹` as well.
    pub fn from_pair(m: &DMatrix<f64>, inv: &DMatrix<f64>) -> Result<Self> {
        Self::checked(Self::cartan(m, inv), Self::jordan(m, inv)?)
    }

    fn cartan(m: &DMatrix<f64>, inv: &DMatrix<f64>) -> Vec<f64> {
        split_logs(&singular_values_raw(m), &singular_values_raw(inv))
    }

    fn jordan(m: &DMatrix<f64>, inv: &DMatrix<f64>) -> Result<Vec<f64>> {
        Ok(split_logs(&eigen_moduli_raw(m)?, &eigen_moduli_raw(inv)?))
    }

    fn checked(mu: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if mu.iter().chain(&lambda).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { mu, lambda })
    }

    pub fn of_matrix(m: &MatrixD) -> Result<Self> {
        Self::from_pair(m.as_matrix(), m.inverse()?.as_matrix())
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `log(μ_k / μ_{k+1})`, 1-based `k`.
    pub fn mu_gap(&self, k: usize) -> f64 {
        self.mu[k - 1] - self.mu[k]
    }

    /// `log(λ_k / λ_{k+1})`, 1-based `k`.
    pub fn lambda_gap(&self, k: usize) -> f64 {
        self.lambda[k - 1] - self.lambda[k]
    }

    /// `log(λ_1/λ_{m+1}) / log(λ_1/λ_m)` when the denominator exceeds `tol`.
    pub fn alpha_ratio(&self, m: usize, tol: f64) -> Option<f64> {
        let den = self.lambda[0] - self.lambda[m - 1];
        (den > tol).then(|| (self.lambda[0] - self.lambda[m]) / den)
    }
}

/// Cartan and Jordan projections of a group element.
pub fn cartan_jordan(g: &GroupElement) -> Result<SpectralData> {
    SpectralData::from_pair(g.matrix.as_matrix(), g.inverse.as_matrix())
}

/// A ball element with its spectral data.
#[derive(Clone, Debug)]
pub struct ElementSpectra {
    pub element: GroupElement,
    pub spectral: SpectralData,
}

/// Default number of exterior levels used to sharpen Jordan projections.
pub const DEFAULT_WEDGE_DEPTH: usize = 3;

/// Exterior powers `∧^2 … ∧^K` of a generator set.
///
/// A dense eigensolver on `M` has absolute error about `ε·‖M‖`, which ruins
/// the relative accuracy of non-dominant eigenvalues of long words. The top
/// modulus of `∧^k M` is `λ_1⋯λ_k` and is accurate in relative terms, so
/// `log λ_k` is recovered as a difference of consecutive levels. `∧^k M` is
/// the product of wedged generators along the word, never minors of `M`.
#[derive(Clone, Debug)]
struct WedgeLadder {
    levels: Vec<GeneratorSet>,
}

impl WedgeLadder {
    fn new(gens: &GeneratorSet, depth: usize) -> Result<Self> {
        let k_max = depth.min(gens.dim() / 2);
        let levels = (2..=k_max).map(|k| gens.map(|g| wedge_power(g, k))).collect::<Result<Vec<_>>>()?;
        Ok(Self { levels })
    }

    /// Jordan projection of `word`, whose matrices under the base
    /// generators are `m` and `inv`.
    fn lambda(&self, word: &Word, m: &DMatrix<f64>, inv: &DMatrix<f64>) -> Result<Vec<f64>> {
        let mut out = SpectralData::jordan(m, inv)?;
        let d = out.len();
        let top = |x: &DMatrix<f64>| -> Result<f64> { Ok(eigen_moduli_raw(x)?[0].ln()) };
        let (mut fwd, mut bwd) = (vec![top(m)?], vec![top(inv)?]);
        for level in &self.levels {
            let e = level.element(word);
            fwd.push(top(e.matrix.as_matrix())?);
            bwd.push(top(e.inverse.as_matrix())?);
        }
        let k_max = fwd.len();
        for k in 0..k_max {
            let prev = |v: &[f64]| if k == 0 { 0.0 } else { v[k - 1] };
            out[k] = fwd[k] - prev(&fwd);
            out[d - 1 - k] = -(bwd[k] - prev(&bwd));
        }
        if d == 2 * k_max + 1 {
            out[k_max] = 0.0;
            out[k_max] = -out.iter().sum::<f64>();
        }
        out.sort_by(|a, b| b.total_cmp(a));
        Ok(out)
    }
}

/// Logarithms of the eigenvalue moduli of `m`, non-increasing, with every
/// entry recovered from the top modulus of an exterior power of `m` or
/// `m⁻¹`. Relative accuracy does not degrade for small moduli, unlike
/// [`eigen_moduli`](crate::linalg::eigen_moduli).
pub fn jordan_projection(m: &MatrixD) -> Result<Vec<f64>> {
    jordan_projection_with_inverse(m, &m.inverse()?)
}

/// [`jordan_projection`] with a caller-supplied inverse. The small moduli
/// are only as accurate as `inv`, so pass an exactly known inverse (such as
/// `τ_d(g⁻¹)`) when the matrix is badly conditioned.
pub fn jordan_projection_with_inverse(m: &MatrixD, inv: &MatrixD) -> Result<Vec<f64>> {
    let gens = GeneratorSet::from_pairs(vec![m.clone()], vec![inv.clone()])?;
    let ladder = WedgeLadder::new(&gens, m.dim() / 2)?;
    let word = Word(vec![Letter::new(0, false)]);
    ladder.lambda(&word, m.as_matrix(), inv.as_matrix())
}

/// The deduplicated ball of radius `R` of a representation, with spectral
/// data for every element, in canonical word order.
///
/// Jordan projections are conjugation invariant, so `lambda` of a word
/// `u c u⁻¹` is computed from its cyclically reduced core `c`, whose matrix
/// is far better conditioned than that of the full word. The outer
/// `wedge_depth` entries at each end come from exterior powers.
#[derive(Clone, Debug)]
pub struct BallSpectra {
    pub dim: usize,
    pub radius: usize,
    pub items: Vec<ElementSpectra>,
}

impl BallSpectra {
    pub fn compute(rep: &Representation, radius: usize, opts: BallOptions) -> Result<Self> {
        Self::compute_with_depth(rep, radius, opts, DEFAULT_WEDGE_DEPTH)
    }

    pub fn compute_with_depth(
        rep: &Representation,
        radius: usize,
        opts: BallOptions,
        wedge_depth: usize,
    ) -> Result<Self> {
        let ball = enumerate_ball(rep.generators(), radius, opts)?;
        Self::from_elements(rep.generators(), radius, ball, wedge_depth)
    }

    pub fn from_elements(
        gens: &GeneratorSet,
        radius: usize,
        elements: Vec<GroupElement>,
        wedge_depth: usize,
    ) -> Result<Self> {
        let ladder = WedgeLadder::new(gens, wedge_depth)?;
        let index: HashMap<&Word, usize> = elements.iter().enumerate().map(|(i, e)| (&e.word, i)).collect();
        let cores: Vec<(Word, Option<usize>)> = elements
            .iter()
            .map(|e| {
                let c = e.word.cyclic_core();
                let i = index.get(&c).copied();
                (c, i)
            })
            .collect();
        let own = par::map_range(elements.len(), |i| {
            let e = &elements[i];
            let mu = SpectralData::cartan(e.matrix.as_matrix(), e.inverse.as_matrix());
            let lambda = match &cores[i] {
                (c, _) if *c == e.word => Some(ladder.lambda(c, e.matrix.as_matrix(), e.inverse.as_matrix())),
                (_, Some(_)) => None,
                (c, None) => {
                    let core = gens.element(c);
                    Some(ladder.lambda(c, core.matrix.as_matrix(), core.inverse.as_matrix()))
                }
            };
            (mu, lambda)
        });
        let mut lambdas: Vec<Option<Vec<f64>>> = Vec::with_capacity(own.len());
        let mut mus = Vec::with_capacity(own.len());
        for (mu, lambda) in own {
            mus.push(mu);
            lambdas.push(lambda.transpose()?);
        }
        let items = elements
            .into_iter()
            .enumerate()
            .zip(mus)
            .map(|((i, element), mu)| {
                let lambda = match &lambdas[i] {
                    Some(l) => l.clone(),
                    None => {
                        let j = cores[i].1.expect("core index present when lambda is shared");
                        lambdas[j].clone().expect("cores are cyclically reduced")
                    }
                };
                Ok(ElementSpectra { element, spectral: SpectralData::checked(mu, lambda)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: gens.dim(), radius, items })
    }

    /// Elements of word length at most `r`.
    pub fn up_to(&self, r: usize) -> impl Iterator<Item = &ElementSpectra> {
        self.items.iter().filter(move |e| e.element.length() <= r)
    }
}

/// Extremes of a gap over words of one length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthGap {
    pub length: usize,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `0` when the data have no spread.
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares with `R² = 0` for constant data.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Some(LinearFit { slope, intercept, r_squared, n })
}

/// Growth of the `k`-th singular value gap with word length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapProfile {
    pub k: usize,
    pub per_length: Vec<LengthGap>,
    /// Fit through the per-length minima; present with at least 3 lengths.
    pub fit: Option<LinearFit>,
    pub slope_min: f64,
}

impl GapProfile {
    /// Linear growth: slope above `slope_min` and `R² > 0.9`.
    pub fn is_linear(&self) -> bool {
        self.fit.is_some_and(|f| f.slope > self.slope_min && f.r_squared > R2_MIN)
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_linear() {
            "gap grows linearly"
        } else {
            "gap growth not established"
        }
    }
}

/// Gap profile of `log(μ_k/μ_{k+1})` over a precomputed ball.
pub fn gap_profile_of(ball: &BallSpectra, k: usize, slope_min: f64) -> Result<GapProfile> {
    if k == 0 || k >= ball.dim {
        return Err(Error::InvalidArgument(format!("gap index {k} outside 1..{}", ball.dim)));
    }
    let mut per_length: Vec<LengthGap> = Vec::new();
    for e in &ball.items {
        let n = e.element.length();
        let g = e.spectral.mu_gap(k);
        match per_length.last_mut() {
            Some(last) if last.length == n => {
                last.min = last.min.min(g);
                last.max = last.max.max(g);
                last.count += 1;
            }
            _ => per_length.push(LengthGap { length: n, min: g, max: g, count: 1 }),
        }
    }
    let fit = if per_length.len() >= 3 {
        let xs: Vec<f64> = per_length.iter().map(|l| l.length as f64).collect();
        let ys: Vec<f64> = per_length.iter().map(|l| l.min).collect();
        linear_fit(&xs, &ys)
    } else {
        None
    };
    Ok(GapProfile { k, per_length, fit, slope_min })
}

/// Gap profile of a representation over the default ball of radius `R`.
pub fn gap_profile(rep: &Representation, k: usize, radius: usize) -> Result<GapProfile> {
    if radius == 0 {
        return Err(Error::InvalidArgument("gap profile needs radius >= 1".into()));
    }
    let ball = BallSpectra::compute(rep, radius, BallOptions::default())?;
    gap_profile_of(&ball, k, DEFAULT_SLOPE_MIN)
}

/// Ball estimate of `α_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub m: usize,
    pub value: f64,
    pub witness: Word,
    /// `(r, inf over length ≤ r)`; `None` while no element qualifies.
    pub per_radius: Vec<(usize, Option<f64>)>,
    /// Number of elements passing the `λ_1 ≠ λ_m` filter.
    pub qualifying: usize,
    /// False when the last two radii differ by more than `1e-6`.
    pub converged: bool,
}

impl AlphaEstimate {
    pub fn note(&self) -> &'static str {
        if self.converged {
            "stable over the last two radii"
        } else {
            "possibly not converged"
        }
    }
}

/// `inf log(λ_1/λ_{m+1}) / log(λ_1/λ_m)` over ball elements with
/// `log(λ_1/λ_m) > tol`. Ties go to the first element in canonical order.
pub fn alpha_m_estimate_of(ball: &BallSpectra, m: usize, tol: f64) -> Result<AlphaEstimate> {
    if m < 2 || m + 1 > ball.dim {
        return Err(Error::InvalidArgument(format!("alpha index {m} outside 2..={}", ball.dim - 1)));
    }
    let ratios: Vec<Option<f64>> = par::map(&ball.items, |e| e.spectral.alpha_ratio(m, tol));
    let mut best: Option<(f64, usize)> = None;
    let mut per_radius: Vec<(usize, Option<f64>)> = (0..=ball.radius).map(|r| (r, None)).collect();
    let mut qualifying = 0;
    for (i, (e, r)) in ball.items.iter().zip(&ratios).enumerate() {
        let Some(r) = *r else { continue };
        qualifying += 1;
        if best.is_none_or(|(v, _)| r < v) {
            best = Some((r, i));
        }
        let len = e.element.length();
        for slot in per_radius.iter_mut().skip(len) {
            slot.1 = Some(slot.1.map_or(r, |v: f64| v.min(r)));
        }
    }
    let Some((value, idx)) = best else {
        return Err(Error::NoWitness);
    };
    per_radius.remove(0);
    let converged = match per_radius.as_slice() {
        [.., (_, Some(a)), (_, Some(b))] => (a - b).abs() <= CONVERGENCE_TOL,
        _ => false,
    };
    Ok(AlphaEstimate { m, value, witness: ball.items[idx].element.word.clone(), per_radius, qualifying, converged })
}

/// [`alpha_m_estimate_of`] over the default ball of radius `R`.
pub fn alpha_m_estimate(rep: &Representation, m: usize, radius: usize, tol: f64) -> Result<AlphaEstimate> {
    let depth = DEFAULT_WEDGE_DEPTH.max(m + 1);
    let ball = BallSpectra::compute_with_depth(rep, radius, BallOptions::default(), depth)?;
    alpha_m_estimate_of(&ball, m, tol)
}

/// `|(1/k) log σ_i(M^k) − log λ_i(M)|` for `k = 1..=K`. Powers are rescaled
/// to unit Frobenius norm every step with the log scale accumulated
/// exactly.
pub fn gelfand_check(m: &MatrixD, i: usize, k_max: usize) -> Result<Vec<f64>> {
    let d = m.dim();
    if i == 0 || i > d || k_max == 0 {
        return Err(Error::InvalidArgument(format!("gelfand index {i} or K={k_max} out of range")));
    }
    let log_lambda = eigen_moduli_raw(m.as_matrix())?[i - 1].ln();
    let a = m.as_matrix();
    let mut p = DMatrix::identity(d, d);
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        p = &p * a;
        let s = p.norm();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Overflow { step: k });
        }
        p /= s;
        log_scale += s.ln();
        let sigma = singular_values_raw(&p)[i - 1];
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Overflow { step: k });
        }
        let log_sigma = sigma.ln() + log_scale;
        out.push((log_sigma / k as f64 - log_lambda).abs());
    }
    Ok(out)
}

/// Summary of angular distances between Cartan directions and the nearest
/// Jordan direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub n_min: usize,
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    /// No nonzero Cartan or Jordan vector was found.
    pub degenerate: bool,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-9).then(|| v.iter().map(|x| x / n).collect())
}

/// Cone diagnostic over a precomputed ball.
pub fn cone_diagnostic_of(ball: &BallSpectra, n_min: usize) -> ConeReport {
    let jordan: Vec<Vec<f64>> = ball.items.iter().filter_map(|e| unit(&e.spectral.lambda)).collect();
    let cartan: Vec<Vec<f64>> =
        ball.items.iter().filter(|e| e.element.length() >= n_min).filter_map(|e| unit(&e.spectral.mu)).collect();
    if jordan.is_empty() || cartan.is_empty() {
        return ConeReport { n_min, count: 0, max: 0.0, mean: 0.0, degenerate: true };
    }
    let dists = par::map(&cartan, |c| {
        jordan
            .iter()
            .map(|j| {
                let dot: f64 = c.iter().zip(j).map(|(a, b)| a * b).sum();
                dot.clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    });
    ConeReport {
        n_min,
        count: dists.len(),
        max: dists.iter().copied().fold(0.0, f64::max),
        mean: dists.iter().sum::<f64>() / dists.len() as f64,
        degenerate: false,
    }
}

/// Cone diagnostic over the default ball of radius `R`.
pub fn cone_diagnostic(rep: &Representation, radius: usize, n_min: usize) -> Result<ConeReport> {
    if radius <= n_min {
        return Err(Error::InvalidArgument("cone diagnostic needs R > n_min".into()));
    }
    let ball = BallSpectra::compute(rep, radius, BallOptions::default())?;
    Ok(cone_diagnostic_of(&ball, n_min))
}

//! Regularity geometry: affine charts adapted to a pair of flags, log-log
//! regression of the Hölder exponent of a limit set, tangency of the limit
//! set to `ξ^(m)`, the Hilbert metric on positive-definite matrices, and the
//! eigenvalue-gap inequality audit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::boundary::{FlagSample, LimitCloud};
use crate::error::{Error, Result};
use crate::functors::Representation;
use crate::groups::{BallOptions, Word};
use crate::linalg::{direct_sum_margin, point_subspace_distance, proj_distance, Subspace};
use crate::spectra::{linear_fit, BallSpectra, LinearFit, DEFAULT_WEDGE_DEPTH};

/// Direct-sum margin required between the four chart flags.
pub const CHART_MARGIN_MIN: f64 = 1e-8;
/// Distances are floored here before taking logarithms.
pub const DISTANCE_FLOOR: f64 = 1e-14;
/// Default regression window on the distance to the anchor.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-5, 1e-1);
/// Minimum number of points in the regression window.
pub const MIN_REGRESSION_POINTS: usize = 20;
/// Minimum eigenvalue for positive definiteness.
pub const PD_MIN_EIG: f64 = 1e-10;
/// Slack on the log form of the eigenvalue-gap inequality.
pub const GAP_INEQUALITY_TOL: f64 = 1e-9;

/// Caveat attached to every Hölder slope.
pub const HOELDER_CAVEAT: &str =
    "slope estimates the exponent only where the pairwise spanning hypothesis holds; it is sampled, not verified";

/// Affine chart adapted to `(ξ^(1)(x), ξ^(m)(x))` and
/// `(ξ^(d-m)(y), ξ^(d-1)(y))`: in the basis given by the columns of
/// `basis_change`, `ξ^(1)(x) = [e_1]`, `ξ^(m)(x) = ⟨e_1..e_m⟩`,
/// `ξ^(d-m)(y) = ⟨e_{m+1}..e_d⟩` and `ξ^(d-1)(y) = ⟨e_2..e_d⟩`.
#[derive(Clone, Debug)]
pub struct ChartFrame {
    pub x_data: (Subspace, Subspace),
    pub y_data: (Subspace, Subspace),
    pub basis_change: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl ChartFrame {
    pub fn dim(&self) -> usize {
        self.basis_change.nrows()
    }

    pub fn m(&self) -> usize {
        self.x_data.1.rank()
    }

    /// Coordinates of `v` in the chart basis.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.inverse * v
    }
}

/// Builds the chart for the flags at `x = γ⁺` of `sx` and `y = η⁻` of `sy`.
pub fn build_chart(sx: &FlagSample, sy: &FlagSample) -> Result<ChartFrame> {
    build_chart_from_flags(&sx.xi1_plus, &sx.xim_plus, &sy.xi_dm_minus, &sy.xi_d1_minus)
}

/// [`build_chart`] from the four subspaces directly.
pub fn build_chart_from_flags(
    xi1_x: &Subspace,
    xim_x: &Subspace,
    xi_dm_y: &Subspace,
    xi_d1_y: &Subspace,
) -> Result<ChartFrame> {
    let d = xi1_x.ambient_dim();
    let m = xim_x.rank();
    if xi1_x.rank() != 1 || m == 0 || m >= d || xi_dm_y.rank() != d - m || xi_d1_y.rank() != d - 1 {
        return Err(Error::InvalidArgument(format!(
            "chart flags have ranks ({}, {}, {}, {}) in dimension {d}",
            xi1_x.rank(),
            m,
            xi_dm_y.rank(),
            xi_d1_y.rank()
        )));
    }
    let checks: [(&str, f64); 4] = [
        ("ξ^(1)(x) ⊕ ξ^(d-1)(y)", direct_sum_margin(&[xi1_x, xi_d1_y])?),
        ("ξ^(m)(x) ⊕ ξ^(d-m)(y)", direct_sum_margin(&[xim_x, xi_dm_y])?),
        ("ξ^(1)(x) ⊂ ξ^(m)(x)", 1.0 - xim_x.containment_residual(xi1_x)),
        ("ξ^(d-m)(y) ⊂ ξ^(d-1)(y)", 1.0 - xi_d1_y.containment_residual(xi_dm_y)),
    ];
    for (name, margin) in checks {
        if !(margin > CHART_MARGIN_MIN) {
            return Err(Error::NotTransverse(format!("{name}: margin {margin:e}")));
        }
    }
    let mut cols: Vec<DVector<f64>> = vec![sign_fixed(xi1_x.unit_vector())];
    if m > 1 {
        let middle = xim_x
            .intersection(xi_d1_y, 1e-8)
            .filter(|s| s.rank() == m - 1)
            .ok_or_else(|| Error::NotTransverse("ξ^(m)(x) ∩ ξ^(d-1)(y) is not of rank m-1".into()))?;
        cols.extend(frame_columns(&middle));
    }
    cols.extend(frame_columns(xi_dm_y));
    let basis_change = DMatrix::from_columns(&cols);
    let inverse =
        basis_change.clone().try_inverse().ok_or_else(|| Error::NotTransverse("chart basis is singular".into()))?;
    Ok(ChartFrame {
        x_data: (xi1_x.clone(), xim_x.clone()),
        y_data: (xi_dm_y.clone(), xi_d1_y.clone()),
        basis_change,
        inverse,
    })
}

/// Deterministic columns: pivoted orthonormal frame, each with its entry of
/// largest modulus positive.
fn frame_columns(s: &Subspace) -> Vec<DVector<f64>> {
    s.canonical_frame().column_iter().map(|c| sign_fixed(c.clone_owned())).collect()
}

fn sign_fixed(v: DVector<f64>) -> DVector<f64> {
    if v[v.iamax()] < 0.0 {
        -v
    } else {
        v
    }
}

/// Affine coordinates `[1 : u : w]` of a point: `u ∈ R^{m-1}`,
/// `w ∈ R^{d-m}`.
pub fn chart_coords(frame: &ChartFrame, p: &Subspace) -> Result<(DVector<f64>, DVector<f64>)> {
    if p.rank() != 1 {
        return Err(Error::InvalidArgument("chart coordinates need a point".into()));
    }
    let c = frame.coordinates(&p.unit_vector());
    if c[0].abs() <= 1e-12 * c.amax() {
        return Err(Error::AtInfinity);
    }
    let m = frame.m();
    let d = frame.dim();
    let u = c.rows(1, m - 1) / c[0];
    let w = c.rows(m, d - m) / c[0];
    Ok((u, w))
}

/// Metric on projective space used by the regression.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Sine of the angle.
    #[default]
    Sine,
    /// `2·sin(θ/2)`, the chordal distance between unit representatives.
    Chordal,
}

impl Metric {
    fn apply(self, sine: f64) -> f64 {
        match self {
            Metric::Sine => sine,
            Metric::Chordal => 2.0 * (0.5 * sine.clamp(0.0, 1.0).asin()).sin(),
        }
    }
}

/// Result of a Hölder regression.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoelderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Points whose distance to `ξ^(m)(x)` was raised to the floor.
    pub floored: usize,
    pub window: (f64, f64),
    pub metric: Metric,
    pub caveat: &'static str,
    /// `(log δ, log distance)` pairs, sorted by `δ`.
    #[serde(skip)]
    pub scatter: Vec<(f64, f64)>,
}

/// Slope of `log dist(p, ξ^(m)(x))` against `log dist(p, ξ^(1)(x))` over
/// cloud points with the latter in `window`.
pub fn hoelder_regression(
    cloud: &LimitCloud,
    anchor: &FlagSample,
    window: (f64, f64),
    metric: Metric,
) -> Result<HoelderFit> {
    let points: Vec<&Subspace> = cloud.points();
    hoelder_regression_raw(&points, &anchor.xi1_plus, &anchor.xim_plus, window, metric)
}

/// [`hoelder_regression`] on arbitrary points and anchor flags.
pub fn hoelder_regression_raw(
    points: &[&Subspace],
    xi1: &Subspace,
    xim: &Subspace,
    window: (f64, f64),
    metric: Metric,
) -> Result<HoelderFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad window [{lo:e}, {hi:e}]")));
    }
    let mut floored = 0;
    let mut scatter: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| {
            let delta = metric.apply(proj_distance(p, xi1));
            if !(delta >= lo && delta <= hi) || delta == 0.0 {
                return None;
            }
            let mut dist = metric.apply(point_subspace_distance(p, xim));
            if dist < DISTANCE_FLOOR {
                dist = DISTANCE_FLOOR;
                floored += 1;
            }
            Some((delta.ln(), dist.ln()))
        })
        .collect();
    if scatter.len() < MIN_REGRESSION_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_REGRESSION_POINTS,
            found: scatter.len(),
            hint: "increase the radius or widen the window",
        });
    }
    scatter.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let xs: Vec<f64> = scatter.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = scatter.iter().map(|p| p.1).collect();
    let LinearFit { slope, intercept, r_squared, n } =
        linear_fit(&xs, &ys).ok_or_else(|| Error::InvalidArgument("degenerate regression data".into()))?;
    Ok(HoelderFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
        floored,
        window,
        metric,
        caveat: HOELDER_CAVEAT,
        scatter,
    })
}

/// Result of [`tangency_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangencyReport {
    /// `(distance to ξ^(1)(x), angle in radians)` for points within `δ`,
    /// nearest first.
    pub angles: Vec<(f64, f64)>,
    /// Largest angle among the `n_nearest` nearest points.
    pub max_nearest: f64,
    /// Log-log slope of angle against distance; positive when the angles
    /// shrink as the points approach the anchor.
    pub trend: Option<f64>,
}

/// Minimum number of points near the anchor.
pub const MIN_TANGENCY_POINTS: usize = 5;

/// Angle between the secant plane `ξ^(1)(x) + p` and `ξ^(m)(x)` for cloud
/// points `p` within `delta` of the anchor.
pub fn tangency_check(cloud: &LimitCloud, anchor: &FlagSample, delta: f64, n_nearest: usize) -> Result<TangencyReport> {
    tangency_check_raw(&cloud.points(), &anchor.xi1_plus, &anchor.xim_plus, delta, n_nearest)
}

/// [`tangency_check`] on arbitrary points and anchor flags.
pub fn tangency_check_raw(
    points: &[&Subspace],
    xi1: &Subspace,
    xim: &Subspace,
    delta: f64,
    n_nearest: usize,
) -> Result<TangencyReport> {
    let e = xi1.unit_vector();
    let mut angles: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| {
            let dist = proj_distance(p, xi1);
            if dist == 0.0 || dist > delta {
                return None;
            }
            // Direction of the secant orthogonal to the anchor line.
            let v = p.unit_vector();
            let q = &v - &e * e.dot(&v);
            let n = q.norm();
            (n > 0.0).then(|| {
                let s = xim.residual(&(q / n)).norm().min(1.0);
                (dist, s.asin())
            })
        })
        .collect();
    if angles.len() < MIN_TANGENCY_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_TANGENCY_POINTS,
            found: angles.len(),
            hint: "increase the radius or delta",
        });
    }
    angles.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let max_nearest = angles.iter().take(n_nearest.max(1)).map(|a| a.1).fold(0.0, f64::max);
    let positive: Vec<(f64, f64)> = angles.iter().filter(|a| a.1 > 0.0).map(|a| (a.0.ln(), a.1.ln())).collect();
    let trend = if positive.len() >= 3 {
        let xs: Vec<f64> = positive.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.1).collect();
        linear_fit(&xs, &ys).map(|f| f.slope)
    } else {
        None
    };
    Ok(TangencyReport { angles, max_nearest, trend })
}

fn check_pd(x: &DMatrix<f64>) -> Result<()> {
    if !x.is_square() || x.nrows() == 0 {
        return Err(Error::InvalidArgument("positive-definite input must be square".into()));
    }
    let asym = (x - x.transpose()).amax();
    if asym > 1e-12 * x.amax().max(1.0) {
        return Err(Error::InvalidArgument(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let min_eig = x.clone().symmetric_eigenvalues().min();
    if !(min_eig > PD_MIN_EIG) {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok(())
}

/// Hilbert distance on the cone of positive-definite matrices:
/// `log(κ_max / κ_min)` over the eigenvalues `κ` of `X⁻¹Y`.
pub fn hilbert_distance_psd(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    check_pd(x)?;
    check_pd(y)?;
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.nrows() });
    }
    // X = L Lᵀ; the spectrum of X⁻¹Y is that of L⁻¹ Y L⁻ᵀ.
    let l = x.clone().cholesky().ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?.unpack();
    let linv_y = l.solve_lower_triangular(y).ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?;
    let c = l.solve_lower_triangular(&linv_y.transpose()).ok_or(Error::NotPositiveDefinite { min_eig: 0.0 })?;
    let c = (&c + c.transpose()) * 0.5;
    let k = SymmetricEigen::new(c).eigenvalues;
    Ok((k.max() / k.min()).ln().max(0.0))
}

/// Result of [`eigen_gap_inequality_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapInequalityReport {
    pub pass: bool,
    pub alpha: f64,
    pub m: usize,
    /// Minimum over the ball of
    /// `(α-1)·log(λ_2/λ_1) - log(λ_{m+1}/λ_m)`; non-negative iff the
    /// inequality holds everywhere.
    pub worst_margin: f64,
    #[serde(serialize_with = "serialize_word")]
    pub witness: Word,
    pub checked: usize,
}

fn serialize_word<S: serde::Serializer>(w: &Word, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(w)
}

/// Checks `λ_{m+1}/λ_m ≤ (λ_2/λ_1)^{α-1}` on every element of the ball.
pub fn eigen_gap_inequality_check(
    rep: &Representation,
    m: usize,
    alpha: f64,
    radius: usize,
) -> Result<GapInequalityReport> {
    let depth = DEFAULT_WEDGE_DEPTH.max(m + 1);
    let ball = BallSpectra::compute_with_depth(rep, radius, BallOptions::default(), depth)?;
    eigen_gap_inequality_of(&ball, m, alpha)
}

/// [`eigen_gap_inequality_check`] on a precomputed ball.
pub fn eigen_gap_inequality_of(ball: &BallSpectra, m: usize, alpha: f64) -> Result<GapInequalityReport> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must exceed 1, got {alpha}")));
    }
    if m < 2 || m >= ball.dim {
        return Err(Error::InvalidArgument(format!("index {m} outside 2..{}", ball.dim)));
    }
    let mut worst: Option<(f64, &Word)> = None;
    for e in &ball.items {
        let l = &e.spectral.lambda;
        let margin = (alpha - 1.0) * (l[1] - l[0]) - (l[m] - l[m - 1]);
        if worst.is_none_or(|(w, _)| margin < w) {
            worst = Some((margin, &e.element.word));
        }
    }
    let (worst_margin, witness) = worst.ok_or(Error::NoWitness)?;
    Ok(GapInequalityReport {
        pass: worst_margin >= -GAP_INEQUALITY_TOL,
        alpha,
        m,
        worst_margin,
        witness: witness.clone(),
        checked: ball.items.len(),
    })
}

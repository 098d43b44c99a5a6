//! CSV writers for spectra, limit clouds, regression scatter and chart
//! projections.
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! inputs give byte-identical files. `mu_i` and `lambda_i` hold logarithms.

use std::io::Write;

use nalgebra::DMatrix;

use crate::boundary::LimitCloud;
use crate::error::{Error, Result};
use crate::geometry::{chart_coords, ChartFrame, HoelderFit};
use crate::groups::Word;
use crate::spectra::{BallSpectra, GapProfile};

/// Shortest round-trip form; scientific outside `[1e-5, 1e15)`, and `-0`
/// written as `0`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

/// Column-major entries of a `d×k` frame, named `{prefix}_{col}_{row}`.
fn frame_header(prefix: &str, d: usize, k: usize) -> Vec<String> {
    (1..=k).flat_map(|c| (1..=d).map(move |r| format!("{prefix}_{c}_{r}"))).collect()
}

fn frame_values(f: &DMatrix<f64>) -> impl Iterator<Item = String> + '_ {
    f.iter().map(|&x| num(x))
}

/// `word, length, mu_1..mu_d, lambda_1..lambda_d, ratio_m`, one row per
/// ball element. `ratio_m` is empty when `log(λ_1/λ_m) ≤ tol`.
pub fn write_spectra_csv<W: Write>(out: W, ball: &BallSpectra, m: usize, tol: f64) -> Result<()> {
    let d = ball.dim;
    if m < 2 || m >= d {
        return Err(Error::InvalidArgument(format!("ratio index {m} outside 2..{d}")));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string(), "length".to_string()];
    header.extend(indexed("mu", d));
    header.extend(indexed("lambda", d));
    header.push(format!("ratio_{m}"));
    w.write_record(&header)?;
    for e in &ball.items {
        let s = &e.spectral;
        let mut row = vec![e.element.word.to_string(), e.element.length().to_string()];
        row.extend(s.mu.iter().map(|&x| num(x)));
        row.extend(s.lambda.iter().map(|&x| num(x)));
        row.push(s.alpha_ratio(m, tol).map(num).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `word, length, xi1_1..xi1_d`, then the canonical frames of
/// `ξ^(m)(γ⁺)`, `ξ^(d-m)(γ⁻)` and `ξ^(d-1)(γ⁻)`, column-major.
pub fn write_cloud_csv<W: Write>(out: W, cloud: &LimitCloud) -> Result<()> {
    let Some(first) = cloud.samples.first() else {
        return Err(Error::NoProximal);
    };
    let (d, m) = (first.dim(), cloud.m);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string(), "length".to_string()];
    header.extend(indexed("xi1", d));
    header.extend(frame_header("xim", d, m));
    header.extend(frame_header("xidm", d, d - m));
    header.extend(frame_header("xid1", d, d - 1));
    w.write_record(&header)?;
    for s in &cloud.samples {
        let mut row = vec![s.witness.word.to_string(), s.witness.length().to_string()];
        let p = s.xi1_plus.unit_vector();
        let p = if p[p.iamax()] < 0.0 { -p } else { p };
        row.extend(p.iter().map(|&x| num(x)));
        for f in [&s.xim_plus, &s.xi_dm_minus, &s.xi_d1_minus] {
            row.extend(frame_values(&f.canonical_frame()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `log_delta, log_distance` pairs of a Hölder fit.
pub fn write_scatter_csv<W: Write>(out: W, fit: &HoelderFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["log_delta", "log_distance"])?;
    for &(x, y) in &fit.scatter {
        w.write_record([num(x), num(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// A numeric table with the given header, one row per item.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), found: row.len() });
        }
        w.write_record(row.into_iter().map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// `length, min, max, count` of a gap profile.
pub fn write_gap_profile_csv<W: Write>(out: W, profile: &GapProfile) -> Result<()> {
    let rows = profile.per_length.iter().map(|l| vec![l.length as f64, l.min, l.max, l.count as f64]);
    write_table(out, &["length", "min", "max", "count"], rows)
}

/// A cloud point in affine chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub word: Word,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

/// Chart coordinates of every cloud point off the hyperplane at infinity.
pub fn chart_points(cloud: &LimitCloud, frame: &ChartFrame) -> Vec<ChartPoint> {
    cloud
        .samples
        .iter()
        .filter_map(|s| {
            chart_coords(frame, &s.xi1_plus).ok().map(|(u, w)| ChartPoint {
                word: s.witness.word.clone(),
                u: u.iter().copied().collect(),
                w: w.iter().copied().collect(),
            })
        })
        .collect()
}

/// `word, u_1..u_{m-1}, w_1..w_{d-m}`.
pub fn write_chart_csv<W: Write>(out: W, points: &[ChartPoint], frame: &ChartFrame) -> Result<()> {
    let (d, m) = (frame.dim(), frame.m());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string()];
    header.extend(indexed("u", m - 1));
    header.extend(indexed("w", d - m));
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![p.word.to_string()];
        row.extend(p.u.iter().chain(&p.w).map(|&x| num(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

//! Experiment execution. Each kind returns a JSON result, a verdict and the
//! artifacts it wrote; `run` wraps them in the versioned summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anosov_core::boundary::{
    controlled_set_check, hyperconvexity_scan, limit_samples_of, transversality_scan, LimitCloud, PairScanOptions,
    SampleOptions, DEFAULT_MAX_PAIRS, SAMPLE_DEDUP_TOL, VIOLATION_TOL,
};
use anosov_core::export;
use anosov_core::functors::{perturb_rep, Representation};
use anosov_core::geometry::{build_chart, hoelder_regression, tangency_check, ChartFrame};
use anosov_core::groups::{BallOptions, Word, DEFAULT_DEDUP_TOL};
use anosov_core::linalg::{proj_distance, DEFAULT_GAP_TOL};
use anosov_core::spectra::{
    alpha_m_estimate_of, cone_diagnostic_of, gap_profile_of, gelfand_check, BallSpectra, DEFAULT_ALPHA_TOL, R2_MIN,
};
use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
use crate::svg;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub positive: bool,
    pub message: String,
}

/// The summary JSON. Field order is fixed; every field except
/// `wall_clock_seconds` is a function of the config and the build.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub name: String,
    pub config_hash: String,
    pub kind: &'static str,
    pub radius: usize,
    pub seed: u64,
    pub dim: usize,
    pub parallel: bool,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub verdict: Verdict,
    pub result: Value,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
}

struct Outcome {
    result: Value,
    verdict: Verdict,
    warnings: Vec<String>,
}

/// Files written under the output directory, in creation order.
struct Artifacts {
    dir: PathBuf,
    names: Vec<String>,
}

impl Artifacts {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.names.push(name.to_string());
        Ok(BufWriter::new(f))
    }
}

pub fn out_dir(config: &ExperimentConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| Path::new("out").join(&config.name))
}

/// Runs a validated config and writes `summary.json` last.
pub fn run(config: &ExperimentConfig, rep: &Representation) -> Result<Summary> {
    let start = Instant::now();
    let dir = out_dir(config);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut art = Artifacts { dir, names: Vec::new() };
    let mut tolerances = BTreeMap::from([("ball_dedup", DEFAULT_DEDUP_TOL), ("proximal_gap", DEFAULT_GAP_TOL)]);
    let outcome = execute(config, rep, &mut art, &mut tolerances)?;
    art.names.push("summary.json".into());
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        name: config.name.clone(),
        config_hash: config.hash(),
        kind: config.experiment.kind(),
        radius: config.radius,
        seed: config.seed,
        dim: rep.dim(),
        parallel: anosov_core::par::is_parallel(),
        tolerances,
        verdict: outcome.verdict,
        result: outcome.result,
        warnings: outcome.warnings,
        artifacts: art.names.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let path = art.dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(summary)
}

fn ball(rep: &Representation, radius: usize) -> Result<BallSpectra> {
    Ok(BallSpectra::compute(rep, radius, BallOptions::default())?)
}

fn cloud(
    ball: &BallSpectra,
    rep: &Representation,
    m: usize,
    tol: &mut BTreeMap<&'static str, f64>,
) -> Result<LimitCloud> {
    tol.insert("sample_dedup", SAMPLE_DEDUP_TOL);
    Ok(limit_samples_of(ball, rep.recipe(), m, SampleOptions::default())?)
}

fn verdict(positive: bool, message: impl Into<String>) -> Verdict {
    Verdict { positive, message: message.into() }
}

/// Index for the `ratio_m` column; `None` when `d = 2` has no such index.
fn ratio_index(m: usize, d: usize) -> Option<usize> {
    (d >= 3).then(|| m.clamp(2, d - 1))
}

fn spectra_csv(art: &mut Artifacts, ball: &BallSpectra, m: usize, tol: f64) -> Result<()> {
    if let Some(m) = ratio_index(m, ball.dim) {
        export::write_spectra_csv(art.create("spectra.csv")?, ball, m, tol)?;
    }
    Ok(())
}

fn execute(
    config: &ExperimentConfig,
    rep: &Representation,
    art: &mut Artifacts,
    tol: &mut BTreeMap<&'static str, f64>,
) -> Result<Outcome> {
    let r = config.radius;
    let seed = config.seed;
    let mut warnings = Vec::new();
    let (result, verdict) = match &config.experiment {
        Experiment::Certify { k, slope_min } => {
            tol.extend([("slope_min", *slope_min), ("r_squared_min", R2_MIN)]);
            let ball = ball(rep, r)?;
            let profile = gap_profile_of(&ball, *k, *slope_min)?;
            spectra_csv(art, &ball, *k, DEFAULT_ALPHA_TOL)?;
            export::write_gap_profile_csv(art.create("gap_profile.csv")?, &profile)?;
            let v = verdict(profile.is_linear(), profile.verdict());
            (json!({ "gap_profile": profile, "ball_size": ball.items.len() }), v)
        }
        Experiment::Alpha { m, tol: alpha_tol, expect } => {
            tol.insert("alpha_tol", *alpha_tol);
            let ball = ball(rep, r)?;
            let est = alpha_m_estimate_of(&ball, *m, *alpha_tol)?;
            spectra_csv(art, &ball, *m, *alpha_tol)?;
            let mut message = format!("alpha_{m} = {} ({})", est.value, est.note());
            let mut positive = est.converged;
            if let Some(e) = expect {
                tol.insert("expect_tol", e.tol);
                let ok = e.holds(est.value);
                positive &= ok;
                message +=
                    &format!("; expected {} ± {:e}: {}", e.value, e.tol, if ok { "matches" } else { "mismatch" });
            }
            (json!({ "alpha": est, "expect": expect }), verdict(positive, message))
        }
        Experiment::Limitset { m, delta, n_nearest } => {
            tol.insert("tangency_delta", *delta);
            let ball = ball(rep, r)?;
            let cloud = cloud(&ball, rep, *m, tol)?;
            warnings.extend(cloud.warnings.iter().cloned());
            export::write_cloud_csv(art.create("cloud.csv")?, &cloud)?;
            let anchor = &cloud.samples[0];
            let frame = chart_for(&cloud, 0)?;
            let points = export::chart_points(&cloud, &frame);
            export::write_chart_csv(art.create("chart.csv")?, &points, &frame)?;
            if frame.dim() == 3 {
                let text = svg::chart_svg(&points, &anchor.witness.word.to_string());
                std::io::Write::write_all(&mut art.create("chart.svg")?, text.as_bytes())?;
            }
            let t = tangency_check(&cloud, anchor, *delta, *n_nearest)?;
            export::write_table(
                art.create("tangency.csv")?,
                &["distance", "angle"],
                t.angles.iter().map(|&(d, a)| vec![d, a]),
            )?;
            let positive = t.trend.is_some_and(|s| s > 0.0);
            let v = verdict(
                positive,
                if positive { "secant angles shrink toward the anchor" } else { "no shrinking trend in secant angles" },
            );
            let result = json!({
                "samples": cloud.len(),
                "spacing": cloud.spacing_stats(),
                "anchor": anchor.witness.word,
                "chart_points": points.len(),
                "tangency": { "points": t.angles.len(), "max_nearest": t.max_nearest, "trend": t.trend },
            });
            (result, v)
        }
        Experiment::Hyperconvex { m, triples, sep_tol } => {
            tol.extend([("sep_tol", *sep_tol), ("violation_tol", VIOLATION_TOL)]);
            let ball = ball(rep, r)?;
            let cloud = cloud(&ball, rep, *m, tol)?;
            warnings.extend(cloud.warnings.iter().cloned());
            let opts = PairScanOptions { sep_tol: *sep_tol, max_pairs: DEFAULT_MAX_PAIRS, seed };
            let trans = transversality_scan(&cloud, opts)?;
            let hyper = hyperconvexity_scan(&cloud, *m, *triples, seed, *sep_tol)?;
            let controlled = controlled_set_check(&cloud, opts)?;
            let (tm, hm) = (trans.min_margin(), hyper.min.margin);
            let positive = tm > VIOLATION_TOL && hm > VIOLATION_TOL && controlled.violations.is_empty();
            let v = verdict(
                positive,
                format!(
                    "min transversality margin {tm:e}, min hyperconvexity margin {hm:e}, {} controlled-set violations",
                    controlled.violations.len()
                ),
            );
            let result = json!({
                "samples": cloud.len(),
                "transversality": trans,
                "hyperconvexity": hyper,
                "controlled_set": controlled,
            });
            (result, v)
        }
        Experiment::Hoelder { m, window, metric, anchor } => {
            let window = (window[0], window[1]);
            tol.extend([("window_lo", window.0), ("window_hi", window.1)]);
            let ball = ball(rep, r)?;
            let cloud = cloud(&ball, rep, *m, tol)?;
            warnings.extend(cloud.warnings.iter().cloned());
            let idx = match anchor {
                None => 0,
                Some(w) => {
                    let w: Word = w.parse()?;
                    cloud
                        .samples
                        .iter()
                        .position(|s| s.witness.word == w)
                        .ok_or_else(|| anyhow!("field `experiment.anchor`: {w} is not a sample witness"))?
                }
            };
            let a = &cloud.samples[idx];
            let fit = hoelder_regression(&cloud, a, window, *metric)?;
            export::write_scatter_csv(art.create("scatter.csv")?, &fit)?;
            let alpha = alpha_m_estimate_of(&ball, *m, DEFAULT_ALPHA_TOL).ok();
            warnings.push(fit.caveat.to_string());
            let v = verdict(true, format!("slope {} (R² {})", fit.slope, fit.r_squared));
            (json!({ "anchor": a.witness.word, "fit": fit, "alpha": alpha }), v)
        }
        Experiment::Cones { n_min } => {
            let ball = ball(rep, r)?;
            let c = cone_diagnostic_of(&ball, *n_min);
            let v = if c.degenerate {
                verdict(false, "no nonzero Cartan or Jordan direction")
            } else {
                verdict(true, format!("max angle {} over {} Cartan directions", c.max, c.count))
            };
            (json!({ "cones": c }), v)
        }
        Experiment::Gelfand { word, i, k_max, tol: gtol } => {
            tol.insert("gelfand_tol", *gtol);
            let w: Word = word.parse()?;
            let g = rep.generators().element(&w);
            let errs = gelfand_check(&g.matrix, *i, *k_max)?;
            export::write_table(
                art.create("gelfand.csv")?,
                &["k", "error"],
                errs.iter().enumerate().map(|(k, &e)| vec![(k + 1) as f64, e]),
            )?;
            let last = *errs.last().expect("k_max > 0");
            let v = verdict(last < *gtol, format!("error {last:e} at k={k_max}"));
            (json!({ "word": w, "i": i, "final_error": last }), v)
        }
        Experiment::PerturbSweep { k, eps, slope_min } => {
            tol.extend([("slope_min", *slope_min), ("r_squared_min", R2_MIN)]);
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for &e in eps {
                let p = perturb_rep(rep, e, seed)?;
                let profile = gap_profile_of(&ball(&p, r)?, *k, *slope_min)?;
                let (slope, r2) = profile.fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.r_squared));
                let linear = profile.is_linear();
                rows.push(vec![e, slope, r2, f64::from(u8::from(linear))]);
                entries.push(json!({ "eps": e, "slope": profile.fit.map(|f| f.slope),
                    "r_squared": profile.fit.map(|f| f.r_squared), "linear": linear }));
            }
            export::write_table(art.create("sweep.csv")?, &["eps", "slope", "r_squared", "linear"], rows)?;
            let failing: Vec<f64> =
                entries.iter().zip(eps).filter(|(e, _)| e["linear"] == false).map(|(_, &x)| x).collect();
            let v = if failing.is_empty() {
                verdict(true, "gap grows linearly at every size")
            } else {
                verdict(false, format!("gap growth not established at eps {failing:?}"))
            };
            (json!({ "sweep": entries }), v)
        }
    };
    Ok(Outcome { result, verdict, warnings })
}

/// Chart centred at sample `i`, paired with the farthest sample that is
/// transverse to it.
fn chart_for(cloud: &LimitCloud, i: usize) -> Result<ChartFrame> {
    let x = &cloud.samples[i];
    let mut order: Vec<(f64, usize)> =
        cloud.samples.iter().enumerate().map(|(j, s)| (proj_distance(&x.xi1_plus, &s.xi1_plus), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut last = None;
    for (_, j) in order {
        match build_chart(x, &cloud.samples[j]) {
            Ok(f) => return Ok(f),
            Err(e) => last = Some(e),
        }
    }
    Err(anyhow!("no sample is transverse to the anchor: {}", last.map_or("empty cloud".into(), |e| e.to_string())))
}

//! Experiment configuration: schema, loading and validation.
//!
//! The schema is documented in `SCHEMA.md` next to this crate. Unknown
//! fields are rejected so that typos surface as errors instead of silently
//! falling back to defaults.

use std::path::{Path, PathBuf};

use anosov_core::functors::{Recipe, Representation};
use anosov_core::geometry::Metric;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version of both the config and the summary schema.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub representation: Recipe,
    pub radius: usize,
    pub seed: u64,
    pub experiment: Experiment,
    /// Output directory; relative paths resolve against the working
    /// directory. Defaults to `out/<name>`.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Expected value of a scalar result, checked after the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub value: f64,
    pub tol: f64,
}

impl Expect {
    pub fn holds(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Singular-value gap growth at index `k`.
    Certify {
        k: usize,
        #[serde(default = "defaults::slope_min")]
        slope_min: f64,
    },
    /// Ball estimate of `α_m`.
    Alpha {
        m: usize,
        #[serde(default = "defaults::alpha_tol")]
        tol: f64,
        #[serde(default)]
        expect: Option<Expect>,
    },
    /// Limit-set sample with chart projection and tangency check.
    Limitset {
        m: usize,
        #[serde(default = "defaults::tangency_delta")]
        delta: f64,
        #[serde(default = "defaults::n_nearest")]
        n_nearest: usize,
    },
    /// Transversality, `m`-hyperconvexity and controlled-set margins.
    Hyperconvex {
        m: usize,
        #[serde(default = "defaults::triples")]
        triples: usize,
        #[serde(default = "defaults::sep_tol")]
        sep_tol: f64,
    },
    /// Log-log regression of distances near an anchor.
    Hoelder {
        m: usize,
        #[serde(default = "defaults::window")]
        window: [f64; 2],
        #[serde(default)]
        metric: Metric,
        /// Witness word of the anchor; the first sample when absent.
        #[serde(default)]
        anchor: Option<String>,
    },
    /// Cartan versus Jordan direction spread.
    Cones {
        #[serde(default = "defaults::n_min")]
        n_min: usize,
    },
    /// Gelfand convergence for the matrix of one word.
    Gelfand {
        word: String,
        #[serde(default = "defaults::index")]
        i: usize,
        k_max: usize,
        #[serde(default = "defaults::gelfand_tol")]
        tol: f64,
    },
    /// Gap certification of seeded perturbations at several sizes.
    PerturbSweep {
        k: usize,
        eps: Vec<f64>,
        #[serde(default = "defaults::slope_min")]
        slope_min: f64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Certify { .. } => "certify",
            Experiment::Alpha { .. } => "alpha",
            Experiment::Limitset { .. } => "limitset",
            Experiment::Hyperconvex { .. } => "hyperconvex",
            Experiment::Hoelder { .. } => "hoelder",
            Experiment::Cones { .. } => "cones",
            Experiment::Gelfand { .. } => "gelfand",
            Experiment::PerturbSweep { .. } => "perturb-sweep",
        }
    }
}

pub mod defaults {
    use anosov_core::{boundary, geometry, spectra};

    pub fn slope_min() -> f64 {
        spectra::DEFAULT_SLOPE_MIN
    }
    pub fn alpha_tol() -> f64 {
        spectra::DEFAULT_ALPHA_TOL
    }
    pub fn tangency_delta() -> f64 {
        1e-2
    }
    pub fn n_nearest() -> usize {
        20
    }
    pub fn triples() -> usize {
        500
    }
    pub fn sep_tol() -> f64 {
        boundary::DEFAULT_SEP_TOL
    }
    pub fn window() -> [f64; 2] {
        [geometry::DEFAULT_WINDOW.0, geometry::DEFAULT_WINDOW.1]
    }
    pub fn n_min() -> usize {
        3
    }
    pub fn index() -> usize {
        1
    }
    pub fn gelfand_tol() -> f64 {
        1e-2
    }
}

/// Parses `text`, reporting schema violations with line, column and the
/// dotted path of the offending field.
pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        let text = inner.to_string();
        let message = text.trim_end_matches(&format!(" at line {line} column {column}"));
        anyhow::anyhow!("{origin}: line {line} column {column}: field `{field}`: {message}")
    })?;
    if config.schema_version != SCHEMA_VERSION {
        bail!(
            "{origin}: field `schema_version`: unsupported version {}, expected {SCHEMA_VERSION}",
            config.schema_version
        );
    }
    Ok(config)
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, &path.display().to_string())
}

impl ExperimentConfig {
    /// Builds the representation and checks kind-specific parameters.
    pub fn validate(&self) -> Result<Representation> {
        let rep = self.representation.build().context("field `representation`")?;
        let d = rep.dim();
        let index = |name: &str, m: usize, lo: usize, hi: usize| -> Result<()> {
            if m < lo || m > hi {
                bail!("field `experiment.{name}`: {m} outside {lo}..={hi} for dimension {d}");
            }
            Ok(())
        };
        if self.radius == 0 {
            bail!("field `radius`: must be at least 1");
        }
        match &self.experiment {
            Experiment::Certify { k, .. } | Experiment::PerturbSweep { k, .. } => index("k", *k, 1, d - 1)?,
            Experiment::Alpha { m, .. } | Experiment::Limitset { m, .. } | Experiment::Hoelder { m, .. } => {
                index("m", *m, 2, d - 1)?
            }
            Experiment::Hyperconvex { m, .. } => index("m", *m, 2, d - 1)?,
            Experiment::Gelfand { word, i, k_max, .. } => {
                index("i", *i, 1, d)?;
                if *k_max == 0 {
                    bail!("field `experiment.k_max`: must be positive");
                }
                let w: anosov_core::groups::Word = word.parse().context("field `experiment.word`")?;
                if let Some(l) = w.letters().iter().find(|l| l.generator as usize >= rep.generators().len()) {
                    bail!("field `experiment.word`: letter {l} has no generator");
                }
            }
            Experiment::Cones { n_min } => {
                if *n_min >= self.radius {
                    bail!("field `experiment.n_min`: must be below the radius {}", self.radius);
                }
            }
        }
        if let Experiment::PerturbSweep { eps, .. } = &self.experiment {
            if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                bail!("field `experiment.eps`: need a non-empty list of non-negative sizes");
            }
        }
        if let Experiment::Hoelder { window, .. } = &self.experiment {
            if !(window[0] > 0.0 && window[0] < window[1]) {
                bail!("field `experiment.window`: need 0 < lo < hi");
            }
        }
        Ok(rep)
    }

    /// SHA-256 of the canonical JSON form without the output directory, so
    /// radius and seed overrides change the hash while formatting and the
    /// destination do not.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&ExperimentConfig { out: None, ..self.clone() }).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "name": "t",
  "representation": {"base": {"real": {"generators": [[[2, 0], [0, 0.5]]]}}},
  "radius": 3,
  "seed": 0,
  "experiment": {"certify": {"k": 1}}
}"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse(MINIMAL, "t.json").unwrap();
        assert_eq!(c.experiment, Experiment::Certify { k: 1, slope_min: 0.05 });
        assert!(c.validate().is_ok());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn schema_errors_name_line_and_field() {
        let bad = MINIMAL.replace(r#""k": 1"#, r#""k": "one""#);
        let e = parse(&bad, "t.json").unwrap_err().to_string();
        assert_eq!(
            e,
            "t.json: line 7 column 39: field `experiment.certify.k`: invalid type: string \"one\", expected usize"
        );
        let bad = MINIMAL.replace(r#""seed": 0,"#, r#""seed": 0, "sede": 1,"#);
        let e = parse(&bad, "t.json").unwrap_err().to_string();
        assert!(e.contains("sede") && e.contains("line 6"), "{e}");
        let bad = MINIMAL.replace(r#""seed": 0,"#, "");
        assert!(parse(&bad, "t.json").unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn validation_checks_indices() {
        let c = parse(&MINIMAL.replace(r#""k": 1"#, r#""k": 2"#), "t").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("experiment.k"));
        let c = parse(&MINIMAL.replace(r#""radius": 3"#, r#""radius": 0"#), "t").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_generator_list_is_rejected() {
        let c = parse(&MINIMAL.replace("[[[2, 0], [0, 0.5]]]", "[]"), "t").unwrap();
        let e = format!("{:#}", c.validate().unwrap_err());
        assert!(e.contains("at least one generator required"), "{e}");
    }

    #[test]
    fn hash_ignores_formatting_but_not_content() {
        let a = parse(MINIMAL, "t").unwrap();
        let b = parse(&MINIMAL.replace('\n', " "), "t").unwrap();
        let c = parse(&MINIMAL.replace(r#""radius": 3"#, r#""radius": 4"#), "t").unwrap();
        let d = ExperimentConfig { out: Some("elsewhere".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash(), d.hash());
        assert_ne!(a.hash(), c.hash());
    }
}

//! JSON run configuration: group presentation, base points, and run
//! parameters, with validation up front so every later stage can assume a
//! well-formed group.
//!
//! The document layout is versioned (`schema/config.v1.json` in the
//! repository root describes it); unknown fields are rejected rather than
//! ignored, so a typo in a field name is a load error, not a silently
//! default-valued run.

use serde::{Deserialize, Serialize};

use crate::hyperbolic::{HPoint, Mobius, Model};
use crate::presentation::{BoundaryPoint, Factor, GroupPresentation};
use crate::{Error, Result};

/// Schema identifier accepted in the optional `schema` field.
pub const CONFIG_SCHEMA: &str = "zonal-config/v1";

/// Default word-length cap: with generator displacements of a few units,
/// matrix entries at length 40 stay far below the binary64 overflow line
/// (entries grow like `e^{d/2}` with `d ≤ length · max displacement`).
pub const DEFAULT_WORD_LENGTH_CAP: u32 = 40;

/// Exponent budget for the overflow guard: `cap · max_disp / 2` must stay
/// below this (`ln(f64::MAX) ≈ 709.8`, kept with margin).
const EXP_BUDGET: f64 = 690.0;

/// A matrix as four `[re, im]` entry pairs, row-major `[a, b, c, d]`.
pub type MatrixEntries = [[f64; 2]; 4];

/// Top-level run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional schema tag; must equal [`CONFIG_SCHEMA`] when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    /// Free-form run label, echoed into report metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub group: GroupConfig,
    /// Observation point `z`: `[x, y]` in H2, `[x, y, t]` in H3.
    /// Defaults to the model base point (`i`, resp. `(0,0,1)`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_z: Option<Vec<f64>>,
    /// Orbit base point `w`, same format and default as `base_z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_w: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub word_length_cap: u32,
    /// Poincaré exponent `s`. Omit together with `estimate_delta = true`
    /// to run at the estimated critical exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Estimate δ̂ from the orbit before summing (mutually exclusive
    /// with `s`).
    #[serde(default)]
    pub estimate_delta: bool,
    /// Critical-exponent override for model predictions, if known exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Default cutoff for `n`-indexed outputs (subcommands may override).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    /// Default output path (stdout when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<std::path::PathBuf>,
    /// Worker thread count (library default: all logical cores).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// RNG seed for property-test harnesses; echoed into metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_cap() -> u32 {
    DEFAULT_WORD_LENGTH_CAP
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub model: Model,
    pub factors: Vec<FactorConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FactorConfig {
    /// Free-abelian parabolic factor: one generator per rank, all sharing
    /// the fixed point.
    Parabolic {
        generators: Vec<MatrixEntries>,
        fixed_point: FixedPointConfig,
    },
    /// Infinite-cyclic loxodromic factor.
    Loxodromic { generator: MatrixEntries },
}

/// `[re, im]` for a finite boundary point, or the string `"inf"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixedPointConfig {
    Finite([f64; 2]),
    Named(String),
}

impl RunConfig {
    /// Parses and validates a configuration document. Parse errors carry
    /// the line/column of the offending token.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Full validation: schema tag, group structure, base points, the
    /// `s`/`estimate_delta` exclusivity, and the overflow guard linking the
    /// word-length cap to the generator displacements.
    pub fn check(&self) -> Result<()> {
        if let Some(tag) = &self.schema {
            if tag != CONFIG_SCHEMA {
                return Err(Error::Config(format!(
                    "unsupported schema tag {tag:?}, this build reads {CONFIG_SCHEMA:?}"
                )));
            }
        }
        if self.s.is_some() && self.estimate_delta {
            return Err(Error::Config(
                "specify either a fixed `s` or `estimate_delta`, not both".into(),
            ));
        }
        if let Some(s) = self.s {
            if !(s > 0.0) {
                return Err(Error::Config(format!("s must be positive, got {s}")));
            }
        }
        if self.word_length_cap == 0 {
            return Err(Error::Config("word_length_cap must be at least 1".into()));
        }
        let gp = self.presentation()?;
        let report = gp.validate();
        if !report.is_ok() {
            return Err(Error::Config(format!("group validation failed: {report}")));
        }
        let (z, w) = self.base_points()?;
        if z.model() != gp.model || w.model() != gp.model {
            return Err(Error::Config(
                "base point dimension does not match the group model".into(),
            ));
        }
        // Overflow guard: entries grow like e^{d/2} along a word, and
        // d ≤ cap · max generator displacement.
        let mut max_disp = 0.0f64;
        for f in &gp.factors {
            for j in 0..f.rank() {
                let img = f.generator(j).apply(&w)?;
                max_disp = max_disp.max(crate::hyperbolic::distance(&z, &img)?);
            }
        }
        let budget = self.word_length_cap as f64 * max_disp / 2.0;
        if budget > EXP_BUDGET {
            return Err(Error::Config(format!(
                "word_length_cap {} × max generator displacement {:.3} / 2 = {:.0} \
                 exceeds the binary64 exponent budget {}; lower the cap",
                self.word_length_cap, max_disp, budget, EXP_BUDGET
            )));
        }
        Ok(())
    }

    /// Builds the validated group presentation.
    pub fn presentation(&self) -> Result<GroupPresentation> {
        let mut factors = Vec::with_capacity(self.group.factors.len());
        for (i, fc) in self.group.factors.iter().enumerate() {
            match fc {
                FactorConfig::Parabolic { generators, fixed_point } => {
                    if generators.is_empty() {
                        return Err(Error::Config(format!(
                            "factor {i}: parabolic factor needs at least one generator"
                        )));
                    }
                    let gens = generators
                        .iter()
                        .map(|m| build_matrix(m))
                        .collect::<Result<Vec<_>>>()?;
                    let fp = match fixed_point {
                        FixedPointConfig::Finite([re, im]) => {
                            BoundaryPoint::Finite(num_complex::Complex64::new(*re, *im))
                        }
                        FixedPointConfig::Named(name) if name == "inf" => {
                            BoundaryPoint::Infinity
                        }
                        FixedPointConfig::Named(name) => {
                            return Err(Error::Config(format!(
                                "factor {i}: unknown fixed point {name:?} (use \"inf\" or [re, im])"
                            )));
                        }
                    };
                    factors.push(Factor::Parabolic { generators: gens, fixed_point: fp });
                }
                FactorConfig::Loxodromic { generator } => {
                    factors.push(Factor::Loxodromic { generator: build_matrix(generator)? });
                }
            }
        }
        Ok(GroupPresentation { model: self.group.model, factors })
    }

    /// Resolves the base points, defaulting to the model base.
    pub fn base_points(&self) -> Result<(HPoint, HPoint)> {
        let z = match &self.base_z {
            None => HPoint::base(self.group.model),
            Some(v) => parse_point(v, self.group.model, "base_z")?,
        };
        let w = match &self.base_w {
            None => HPoint::base(self.group.model),
            Some(v) => parse_point(v, self.group.model, "base_w")?,
        };
        Ok((z, w))
    }
}

fn build_matrix(entries: &MatrixEntries) -> Result<Mobius> {
    let c = |p: [f64; 2]| num_complex::Complex64::new(p[0], p[1]);
    Mobius::new(c(entries[0]), c(entries[1]), c(entries[2]), c(entries[3]))
}

fn parse_point(v: &[f64], model: Model, field: &str) -> Result<HPoint> {
    match (model, v.len()) {
        (Model::H2, 2) => HPoint::h2(v[0], v[1]),
        (Model::H3, 3) => HPoint::h3(v[0], v[1], v[2]),
        (Model::H2, n) => Err(Error::Config(format!(
            "{field}: H2 points are [x, y], got {n} coordinates"
        ))),
        (Model::H3, n) => Err(Error::Config(format!(
            "{field}: H3 points are [x, y, t], got {n} coordinates"
        ))),
    }
}

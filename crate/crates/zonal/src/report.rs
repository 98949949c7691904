//! Report emission: CSV for `n`-indexed series, JSON for regime summaries.
//!
//! Output is designed to be diffed: floats are printed with 17 significant
//! digits (lossless binary64 round-trip), exact rationals as `"p/q"` strings
//! next to a decimal column, and nothing time- or host-dependent is ever
//! written, so identical runs produce identical bytes.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::asymptotics::FitResult;
use crate::sumlevel::rational_to_f64;

/// Formats a float with 17 significant digits — enough that parsing the
/// text recovers the exact bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an exact rational as `p/q`.
pub fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal column companion to [`fmt_rational`].
pub fn fmt_rational_decimal(r: &BigRational) -> String {
    fmt_f64(rational_to_f64(r))
}

/// Line-oriented CSV builder: `#`-prefixed metadata comments, one header,
/// rows. Values never contain commas or quotes by construction (numbers and
/// short model names only), so no quoting layer is needed.
#[derive(Debug, Default)]
pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new() -> Csv {
        Csv::default()
    }

    /// Adds a `# key: value`-style metadata line.
    pub fn comment(&mut self, text: impl AsRef<str>) -> &mut Csv {
        self.lines.push(format!("# {}", text.as_ref()));
        self
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Csv {
        self.lines.push(columns.join(","));
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Csv {
        self.lines.push(cells.join(","));
        self
    }

    /// The assembled document, newline-terminated.
    pub fn finish(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Schema identifier stamped into every regime report.
pub const REGIME_REPORT_SCHEMA: &str = "zonal-regime-report/v1";

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesPoint {
    pub n: u32,
    pub value: f64,
}

/// Fit summary embedded in reports (a flattened, serializable view of
/// [`FitResult`]).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSummary {
    /// Display name of the winning shape.
    pub best_model: String,
    pub scale: f64,
    pub residual: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Free-exponent power-law diagnostic, independent of the candidates.
    pub power_slope: f64,
    pub power_slope_stderr: f64,
    /// Per-candidate residuals as `(name, residual)` pairs.
    pub candidates: Vec<(String, f64)>,
}

impl From<&FitResult> for FitSummary {
    fn from(fit: &FitResult) -> FitSummary {
        FitSummary {
            best_model: fit.best.model.to_string(),
            scale: fit.best.scale,
            residual: fit.best.residual,
            ratio_min: fit.best.ratio_bounds.0,
            ratio_max: fit.best.ratio_bounds.1,
            power_slope: fit.power_slope,
            power_slope_stderr: fit.power_slope_stderr,
            candidates: fit
                .candidates
                .iter()
                .map(|c| (c.model.to_string(), c.residual))
                .collect(),
        }
    }
}

/// The JSON document emitted by the `regime` subcommand: classification,
/// model tables, and the convolution diagnostic for one `(δ, r_max)` pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeReport {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub delta: f64,
    /// Where δ came from: `"config"`, `"flag"`, or `"estimated"`.
    pub delta_source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_stderr: Option<f64>,
    pub r_max: usize,
    pub beta: f64,
    pub regime: String,
    pub boundary_eps: f64,
    /// Wandering-rate model `w_n` on a geometric grid.
    pub wandering_rate: Vec<SeriesPoint>,
    /// Return-sequence model `ν_n` on the same grid.
    pub return_sequence: Vec<SeriesPoint>,
    /// Range of the convolution ratio over `2 ≤ n ≤ n_max`.
    pub convolution_n_max: u32,
    pub convolution_ratio_min: f64,
    pub convolution_ratio_max: f64,
}

/// Geometric `n`-grid `{2, 4, 8, …} ∪ {n_max}` used for model tables.
pub fn geometric_grid(n_max: u32) -> Vec<u32> {
    let mut grid = Vec::new();
    let mut n = 2u32;
    while n <= n_max {
        grid.push(n);
        n = n.saturating_mul(2);
    }
    if grid.last() != Some(&n_max) && n_max >= 2 {
        grid.push(n_max);
    }
    grid
}

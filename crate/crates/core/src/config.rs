//! Declarative experiment configuration: one JSON document per run.
//!
//! Relative file paths are resolved against the directory holding the
//! config. Validation failures are reported with the offending field path.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::{box_grid, StepConfig};
use crate::poly::Polynomial;
use crate::rough_path::{RoughPath, SampledPath};
use crate::tensor::{TensorElement, NORM_CHOICE};
use crate::vector_fields::{PolynomialField, VectorFieldSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub driver: DriverSpec,
    pub fields: FieldSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub step: StepSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSpec {
    PwlLift {
        p: f64,
        #[serde(default)]
        path_file: Option<PathBuf>,
        #[serde(default)]
        samples: Option<Samples>,
    },
    PureArea {
        p: f64,
        #[serde(default = "default_area_dim")]
        dim: usize,
        #[serde(default = "default_area_scale")]
        scale: f64,
    },
    LogLinear {
        p: f64,
        /// Tensor in the `{d, n, coeffs}` format.
        lambda: Value,
    },
}

fn default_area_dim() -> usize {
    2
}

fn default_area_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub state_dim: usize,
    /// Defaults to the truncation level `[p]`.
    #[serde(default)]
    pub max_derivative: Option<usize>,
    /// One entry per driving letter: a matrix for a linear field, or
    /// polynomial terms.
    pub letters: Vec<LetterSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterSpec {
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub terms: Option<Vec<TermSpec>>,
}

/// `coefficient * x^exponents` added to component `output`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub output: usize,
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub delta: Option<f64>,
}

fn default_substeps() -> usize {
    StepConfig::default().substeps
}

fn default_max_depth() -> usize {
    StepConfig::default().max_depth
}

impl Default for StepSpec {
    fn default() -> Self {
        let c = StepConfig::default();
        StepSpec {
            substeps: c.substeps,
            max_depth: c.max_depth,
            delta: c.delta,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Window lengths for defect/davie fits; defaults to `2^-3 .. 2^-7` of
    /// the window.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    /// Dyadic depths for the sewing fit.
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    /// Solve tolerance of the flow used by the Davie check.
    #[serde(default = "default_reference_tol")]
    pub reference_tol: f64,
    /// Largest accepted smooth-limit discrepancy.
    #[serde(default = "default_smooth_threshold")]
    pub smooth_threshold: f64,
}

fn default_depths() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}

fn default_slope_tolerance() -> f64 {
    crate::diagnostics::SLOPE_TOLERANCE
}

fn default_reference_tol() -> f64 {
    1e-11
}

fn default_smooth_threshold() -> f64 {
    1e-6
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            scales: None,
            depths: default_depths(),
            slope_tolerance: default_slope_tolerance(),
            reference_tol: default_reference_tol(),
            smooth_threshold: default_smooth_threshold(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

fn at(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{path}: {msg}"))
}

/// A validated configuration with every object built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub driver: RoughPath,
    /// The control, for `pwl_lift` drivers.
    pub control: Option<SampledPath>,
    pub system: VectorFieldSystem,
    pub grid: Vec<Vec<f64>>,
    pub s: f64,
    pub t: f64,
    pub step: StepConfig,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            at(if path == "." { "config" } else { &path }, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn p(&self) -> f64 {
        match &self.driver {
            DriverSpec::PwlLift { p, .. }
            | DriverSpec::PureArea { p, .. }
            | DriverSpec::LogLinear { p, .. } => *p,
        }
    }

    /// Validates and builds everything; relative paths resolve against `base`.
    pub fn build(self, base: &Path) -> Result<Experiment> {
        let p = self.p();
        if !(p > 2.0) || !p.is_finite() {
            return Err(at("driver.p", format!("must be finite and > 2, got {p}")));
        }
        let resolve = |f: &PathBuf| {
            if f.is_absolute() {
                f.clone()
            } else {
                base.join(f)
            }
        };
        let (driver, control) = match &self.driver {
            DriverSpec::PwlLift {
                path_file, samples, ..
            } => {
                let path = match (path_file, samples) {
                    (Some(f), None) => {
                        let full = resolve(f);
                        let file = fs::File::open(&full).map_err(|source| Error::Io {
                            path: full.display().to_string(),
                            source,
                        })?;
                        SampledPath::from_csv(file).map_err(|e| at("driver.path_file", e))?
                    }
                    (None, Some(s)) => SampledPath::new(s.times.clone(), s.points.clone())
                        .map_err(|e| at("driver.samples", e))?,
                    _ => {
                        return Err(at(
                            "driver",
                            "pwl_lift needs exactly one of `path_file` and `samples`",
                        ))
                    }
                };
                (
                    RoughPath::pwl_lift(path.clone(), p).map_err(|e| at("driver", e))?,
                    Some(path),
                )
            }
            DriverSpec::PureArea { dim, scale, .. } => (
                RoughPath::pure_area(*dim, *scale, p).map_err(|e| at("driver", e))?,
                None,
            ),
            DriverSpec::LogLinear { lambda, .. } => {
                let lambda =
                    TensorElement::from_json(lambda).map_err(|e| at("driver.lambda", e))?;
                (
                    RoughPath::log_linear(lambda, p).map_err(|e| at("driver.lambda", e))?,
                    None,
                )
            }
        };
        let system = self.build_fields(driver.dim(), driver.level())?;
        let grid = self.build_grid(system.state_dim())?;
        let (s, t) = match self.window {
            Some(w) => (w.s, w.t),
            None => (driver.start(), driver.end()),
        };
        if !(s <= t) || s < driver.start() || t > driver.end() {
            return Err(at(
                "window",
                format!(
                    "need {} <= s <= t <= {}, got ({s}, {t})",
                    driver.start(),
                    driver.end()
                ),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(at("tol", "must be positive"));
        }
        let step = StepConfig {
            substeps: self.step.substeps,
            max_depth: self.step.max_depth,
            delta: self.step.delta,
        };
        step.validate().map_err(|e| at("step", e))?;
        self.validate_diagnostics(t - s)?;
        let csv = self.output.csv.as_ref().map(resolve);
        let json = self.output.json.as_ref().map(resolve);
        Ok(Experiment {
            config: self,
            driver,
            control,
            system,
            grid,
            s,
            t,
            step,
            csv,
            json,
        })
    }

    fn build_fields(&self, d: usize, level: usize) -> Result<VectorFieldSystem> {
        let spec = &self.fields;
        let m = spec.state_dim;
        if m == 0 {
            return Err(at("fields.state_dim", "must be positive"));
        }
        if spec.letters.len() != d {
            return Err(at(
                "fields.letters",
                format!(
                    "driver has dimension {d} but {} letters given",
                    spec.letters.len()
                ),
            ));
        }
        let mut fields = Vec::with_capacity(d);
        for (i, letter) in spec.letters.iter().enumerate() {
            let path = format!("fields.letters[{i}]");
            let field = match (&letter.matrix, &letter.terms) {
                (Some(rows), None) => {
                    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                        return Err(at(&format!("{path}.matrix"), format!("must be {m}x{m}")));
                    }
                    PolynomialField::linear(rows).map_err(|e| at(&path, e))?
                }
                (None, Some(terms)) => {
                    let mut comps = vec![Polynomial::zero(m); m];
                    for (j, term) in terms.iter().enumerate() {
                        let tp = format!("{path}.terms[{j}]");
                        if term.output >= m {
                            return Err(at(&format!("{tp}.output"), format!("must be < {m}")));
                        }
                        if term.exponents.len() != m {
                            return Err(at(
                                &format!("{tp}.exponents"),
                                format!("needs {m} entries"),
                            ));
                        }
                        comps[term.output].add_term(term.exponents.clone(), term.coefficient);
                    }
                    PolynomialField::new(comps).map_err(|e| at(&path, e))?
                }
                _ => return Err(at(&path, "needs exactly one of `matrix` and `terms`")),
            };
            fields.push(field);
        }
        let max_derivative = spec.max_derivative.unwrap_or(level);
        if max_derivative + 1 < level {
            return Err(at(
                "fields.max_derivative",
                format!(
                    "must be at least {} for truncation level {level}",
                    level - 1
                ),
            ));
        }
        VectorFieldSystem::polynomial(fields, max_derivative).map_err(|e| at("fields", e))
    }

    fn build_grid(&self, m: usize) -> Result<Vec<Vec<f64>>> {
        let g = &self.grid;
        if g.lower.len() != m || g.upper.len() != m || g.resolution.len() != m {
            return Err(at(
                "grid",
                format!("lower, upper and resolution need {m} entries"),
            ));
        }
        if g.resolution.contains(&0) {
            return Err(at("grid.resolution", "grid must be nonempty"));
        }
        box_grid(&g.lower, &g.upper, &g.resolution).map_err(|e| at("grid", e))
    }

    fn validate_diagnostics(&self, len: f64) -> Result<()> {
        let d = &self.diagnostics;
        if let Some(scales) = &d.scales {
            if scales.iter().any(|h| !(*h > 0.0) || *h > len) {
                return Err(at(
                    "diagnostics.scales",
                    format!("scales must lie in (0, {len}]"),
                ));
            }
        }
        if d.depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(at("diagnostics.depths", "must be strictly increasing"));
        }
        if !(d.slope_tolerance >= 0.0) {
            return Err(at("diagnostics.slope_tolerance", "must be nonnegative"));
        }
        if !(d.reference_tol > 0.0) || !(d.smooth_threshold > 0.0) {
            return Err(at("diagnostics", "tolerances must be positive"));
        }
        Ok(())
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        ExperimentConfig::load(path)?.build(&base)
    }

    pub fn p(&self) -> f64 {
        self.config.p()
    }

    /// Window lengths for the defect and Davie fits.
    pub fn scales(&self) -> Vec<f64> {
        self.config.diagnostics.scales.clone().unwrap_or_else(|| {
            (3..=7)
                .map(|k| (self.t - self.s) * 0.5f64.powi(k))
                .collect()
        })
    }

    /// Reproducibility record embedded in every artifact.
    pub fn metadata(&self) -> Value {
        let g = &self.config.grid;
        json!({
            "norm_choice": NORM_CHOICE,
            "driver": self.driver.kind_tag(),
            "p": self.p(),
            "grid": {"lower": g.lower, "upper": g.upper, "resolution": g.resolution},
            "window": [self.s, self.t],
            "tol": self.config.tol,
            "substeps": self.step.substeps,
            "max_depth": self.step.max_depth,
            "delta": self.step.delta,
            "seed": self.config.seed,
            "slope_tolerance": self.config.diagnostics.slope_tolerance,
            "reference_tol": self.config.diagnostics.reference_tol,
        })
    }

    /// [`Experiment::metadata`] as `key=value` comment lines.
    pub fn header_lines(&self) -> Vec<String> {
        let meta = self.metadata();
        let mut lines = vec!["roughflow".to_string()];
        if let Value::Object(map) = meta {
            // serde_json maps are ordered by key, so this is deterministic
            for (k, v) in map {
                lines.push(format!("{k}={v}"));
            }
        }
        lines
    }
}

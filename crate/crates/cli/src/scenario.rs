//! Scenario files: one JSON object per file, physical parameters explicit,
//! numerical knobs defaulted and echoed back in the report.

use std::path::{Path, PathBuf};

use nls_virial_core::{EvolveOptions, Grid, LocalizationConstants, Normalization, ProblemParams, Scheme, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::Failure;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub params: ParamsSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub initial_data: Option<InitialData>,
    pub experiment: Experiment,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_len: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `c · Q`.
    ScaledGroundState { c: f64 },
    /// `a e^{−|x−x₀|²/w²} e^{i v·x}`.
    Gaussian { amplitude: f64, width: f64, center: Vec<f64>, phase_velocity: Vec<f64> },
    /// Field file, relative to the scenario's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Groundstate,
    Classify,
    Evolve,
    TbBounds,
    Modulation,
    FullPipeline,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Groundstate => "groundstate",
            Experiment::Classify => "classify",
            Experiment::Evolve => "evolve",
            Experiment::TbBounds => "tb_bounds",
            Experiment::Modulation => "modulation",
            Experiment::FullPipeline => "full_pipeline",
        }
    }

    fn evolves(self) -> bool {
        matches!(self, Experiment::Evolve | Experiment::FullPipeline)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationSpec {
    #[default]
    CriticalIndex,
    Unit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub tolerance: f64,
    pub step_tolerance: f64,
    pub max_iterations: usize,
    pub min_points_across: f64,
    pub normalization: NormalizationSpec,
    pub scheme: Scheme,
    pub dt0: f64,
    pub dt_min: f64,
    pub cfl_nl: f64,
    pub record_every: usize,
    pub t_max: Option<f64>,
    pub blowup_factor: f64,
    pub track_variance: bool,
    pub cutoff_radius: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C_gamma")]
    pub c_gamma: f64,
    #[serde(rename = "C_Q")]
    pub c_q: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Scale of the modulation template.
    pub lambda: f64,
    /// Closeness tolerance of the modulation hypotheses.
    pub rho: f64,
}

impl Default for Options {
    fn default() -> Self {
        let s = SolverOptions::<f64>::default();
        let e = EvolveOptions::<f64>::default();
        let k = LocalizationConstants::<f64>::default();
        Self {
            tolerance: s.tolerance,
            step_tolerance: s.step_tolerance,
            max_iterations: s.max_iterations,
            min_points_across: s.min_points_across,
            normalization: NormalizationSpec::CriticalIndex,
            scheme: e.scheme,
            dt0: e.dt0,
            dt_min: e.dt_min,
            cfl_nl: e.cfl_nl,
            record_every: e.record_every,
            t_max: None,
            blowup_factor: e.blowup_factor,
            track_variance: e.track_variance,
            cutoff_radius: None,
            gamma: None,
            radius: None,
            c1: k.c1,
            c2: k.c2,
            c_gamma: k.c_gamma,
            c_q: k.c_q,
            c: k.c,
            lambda: 1.0,
            rho: 0.1,
        }
    }
}

impl Options {
    pub fn solver(&self) -> SolverOptions<f64> {
        SolverOptions {
            normalization: match self.normalization {
                NormalizationSpec::CriticalIndex => Normalization::CriticalIndex,
                NormalizationSpec::Unit => Normalization::Unit,
            },
            tolerance: self.tolerance,
            step_tolerance: self.step_tolerance,
            max_iterations: self.max_iterations,
            min_points_across: self.min_points_across,
        }
    }

    /// Evolution options; `t_max` is checked during validation.
    pub fn evolve(&self) -> EvolveOptions<f64> {
        EvolveOptions {
            scheme: self.scheme,
            dt0: self.dt0,
            dt_min: self.dt_min,
            cfl_nl: self.cfl_nl,
            record_every: self.record_every,
            t_max: self.t_max.unwrap_or(f64::NAN),
            blowup_factor: self.blowup_factor,
            track_variance: self.track_variance,
            cutoff_radius: self.cutoff_radius,
        }
    }

    pub fn constants(&self) -> LocalizationConstants<f64> {
        LocalizationConstants { c1: self.c1, c2: self.c2, c_gamma: self.c_gamma, c_q: self.c_q, c: self.c }
    }
}

/// Scenario checked against its own invariants, with core types built.
#[derive(Debug, Clone)]
pub struct Validated {
    pub scenario: Scenario,
    pub params: ProblemParams<f64>,
    pub grid: Grid<f64>,
    /// Directory relative paths in the scenario resolve against.
    pub base_dir: PathBuf,
}

/// 1-based line and column of the first `"key"` in `text`, or the start.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    match text.find(&needle) {
        Some(at) => {
            let before = &text[..at];
            let line = before.matches('\n').count() + 1;
            let col = at - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, col)
        }
        None => (1, 1),
    }
}

/// Parses and validates a scenario; messages are `path:line:col: message`.
pub fn parse(text: &str, path: &Path) -> Result<Validated, Failure> {
    let shown = path.display();
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
        let mut msg = e.to_string();
        if let Some(i) = msg.rfind(" at line ") {
            msg.truncate(i);
        }
        Failure::Validation(format!("{shown}:{}:{}: {msg}", e.line(), e.column()))
    })?;

    let mut problems: Vec<(&str, String)> = Vec::new();
    let o = &scenario.options;
    if scenario.schema != SCHEMA {
        problems.push(("schema", format!("unsupported schema {} (expected {SCHEMA})", scenario.schema)));
    }
    let params = ProblemParams::new(scenario.params.dim, scenario.params.p);
    if let Err(e) = &params {
        problems.push(("params", e.to_string()));
    }
    let grid = Grid::new(scenario.params.dim, scenario.grid.half_len, scenario.grid.points);
    if let Err(e) = &grid {
        problems.push(("grid", e.to_string()));
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();

    match (&scenario.initial_data, scenario.experiment) {
        (None, Experiment::Groundstate) => {}
        (None, ex) => problems.push(("experiment", format!("experiment {} needs initial_data", ex.name()))),
        (Some(InitialData::ScaledGroundState { c }), _) => {
            if !c.is_finite() {
                problems.push(("c", "c must be finite".into()));
            }
        }
        (Some(InitialData::Gaussian { amplitude, width, center, phase_velocity }), _) => {
            let n = scenario.params.dim;
            if !amplitude.is_finite() {
                problems.push(("amplitude", "amplitude must be finite".into()));
            }
            if !(*width > 0.0 && width.is_finite()) {
                problems.push(("width", "width must be positive".into()));
            }
            if center.len() != n {
                problems.push(("center", format!("center needs {n} components")));
            }
            if phase_velocity.len() != n {
                problems.push(("phase_velocity", format!("phase_velocity needs {n} components")));
            }
        }
        (Some(InitialData::File { path: p }), _) => {
            if !base_dir.join(p).is_file() {
                problems.push(("path", format!("file {} does not exist", base_dir.join(p).display())));
            }
        }
    }

    if !(o.tolerance > 0.0 && o.step_tolerance > 0.0) {
        problems.push(("tolerance", "solver tolerances must be positive".into()));
    }
    if scenario.experiment.evolves() {
        if o.t_max.is_none() {
            problems.push(("experiment", format!("experiment {} needs options.t_max", scenario.experiment.name())));
        } else if let Err(e) = o.evolve().validate() {
            problems.push(("options", e.to_string()));
        }
    }
    if o.gamma.is_some() != o.radius.is_some() {
        problems.push(("options", "gamma and R must be given together".into()));
    }
    if !(o.lambda > 0.0) {
        problems.push(("lambda", "lambda must be positive".into()));
    }
    if !(o.rho >= 0.0) {
        problems.push(("rho", "rho must be nonnegative".into()));
    }

    if !problems.is_empty() {
        let lines: Vec<String> = problems
            .into_iter()
            .map(|(key, msg)| {
                let (l, c) = locate(text, key);
                format!("{shown}:{l}:{c}: {msg}")
            })
            .collect();
        return Err(Failure::Validation(lines.join("\n")));
    }
    Ok(Validated { scenario, params: params.unwrap(), grid: grid.unwrap(), base_dir })
}

pub fn load(path: &Path) -> Result<Validated, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(&path.display().to_string(), e))?;
    parse(&text, path)
}

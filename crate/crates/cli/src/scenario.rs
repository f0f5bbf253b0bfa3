//! Scenario files and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use qphase_core::states::{default_grid, realize};
use qphase_core::{Grid, PhysicsParams, Potential, StateKind, StateSpec, WaveField};
use serde::{Deserialize, Serialize};

use crate::tasks::Task;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub state: StateKind,
    /// Falls back to the state's default grid.
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub physics: PhysicsParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub analysis: Vec<Task>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qphase-out")
}

/// A bound on one named output of a task. `expect` needs `tol`; `min` and
/// `max` may be combined with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Check {
    pub fn validate(&self) -> Result<(), String> {
        if self.expect.is_some() != self.tol.is_some() {
            return Err(format!("check `{}`: `expect` and `tol` go together", self.key));
        }
        if self.expect.is_none() && self.min.is_none() && self.max.is_none() {
            return Err(format!("check `{}` declares no bound", self.key));
        }
        if self.tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(format!("check `{}`: tol must be non-negative", self.key));
        }
        Ok(())
    }

    pub fn accepts(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        if let (Some(e), Some(t)) = (self.expect, self.tol) {
            if (value - e).abs() > t {
                return false;
            }
        }
        self.min.is_none_or(|m| value >= m) && self.max.is_none_or(|m| value <= m)
    }
}

/// A scenario that could not be read; carries the source position when
/// the JSON parser reported one.
#[derive(Debug)]
pub struct SchemaError {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}:{}: {}", self.file.display(), self.line, self.column, self.message)
        } else {
            write!(f, "{}: {}", self.file.display(), self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

impl SchemaError {
    fn at(file: &Path, message: impl Into<String>) -> Self {
        Self { file: file.to_path_buf(), line: 0, column: 0, message: message.into() }
    }
}

pub fn load(path: &Path) -> Result<Scenario, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError::at(path, e.to_string()))?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<Scenario, SchemaError> {
    let sc: Scenario = serde_json::from_str(text).map_err(|e| {
        // serde_json appends " at line L column C" to the message
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        SchemaError { file: path.to_path_buf(), line: e.line(), column: e.column(), message: msg }
    })?;
    for task in &sc.analysis {
        for c in task.checks() {
            c.validate().map_err(|m| SchemaError::at(path, m))?;
        }
    }
    Ok(sc)
}

/// Values given on the command line that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<String>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub omega: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Applies the overrides, logging each one, and returns their
    /// descriptions for the summary.
    pub fn apply(&self, sc: &mut Scenario) -> Result<Vec<String>, String> {
        let mut notes = Vec::new();
        if let Some(g) = &self.grid {
            let dim = StateSpec::new(sc.state, sc.physics).map_err(|e| e.to_string())?.natural_dim();
            let dim = sc.grid.as_ref().map_or(dim, |g| g.dim());
            sc.grid = Some(parse_grid(g, dim)?);
            notes.push(format!("grid := {g}"));
        }
        if let Some(h) = self.hbar {
            sc.physics.hbar = h;
            notes.push(format!("physics.hbar := {h}"));
        }
        if let Some(m) = self.mass {
            sc.physics.mass = m;
            notes.push(format!("physics.mass := {m}"));
        }
        if let Some(w) = self.omega {
            match &mut sc.state {
                StateKind::Coherent3d { omega } | StateKind::Oscillator1d { omega, .. } => *omega = w,
                _ => return Err("--omega only applies to oscillator states".into()),
            }
            notes.push(format!("state.omega := {w}"));
        }
        if let Some(s) = self.seed {
            sc.seed = s;
            notes.push(format!("seed := {s}"));
        }
        if let Some(o) = &self.out {
            sc.output_dir = o.clone();
            notes.push(format!("output_dir := {}", o.display()));
        }
        for n in &notes {
            log::info!("override: {n}");
        }
        Ok(notes)
    }
}

/// Parses a grid given as JSON or as `N:LO:HI[:walls]` (a cube in `dim`
/// dimensions, periodic unless `walls` is given).
pub fn parse_grid(s: &str, dim: usize) -> Result<Grid, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("--grid-override: {e}"));
    }
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(format!("--grid-override: expected N:LO:HI[:walls], got `{s}`"));
    }
    let n: usize = parts[0].parse().map_err(|_| format!("--grid-override: bad point count `{}`", parts[0]))?;
    let lo: f64 = parts[1].parse().map_err(|_| format!("--grid-override: bad bound `{}`", parts[1]))?;
    let hi: f64 = parts[2].parse().map_err(|_| format!("--grid-override: bad bound `{}`", parts[2]))?;
    let periodic = match parts.get(3) {
        None => true,
        Some(&"walls") => false,
        Some(other) => return Err(format!("--grid-override: unknown boundary `{other}`")),
    };
    Grid::cube(dim, n, lo, hi, periodic).map_err(|e| format!("--grid-override: {e}"))
}

/// Everything a run needs, checked before any task executes.
pub struct Prepared {
    pub spec: StateSpec,
    pub grid: Grid,
    pub wf: WaveField,
    pub potential: Potential,
}

pub fn prepare(sc: &Scenario) -> Result<Prepared, String> {
    let spec = StateSpec::new(sc.state, sc.physics).map_err(|e| e.to_string())?;
    let grid = match &sc.grid {
        Some(g) => g.clone(),
        None => default_grid(&spec).map_err(|e| e.to_string())?,
    };
    let wf = realize(&spec, &grid).map_err(|e| format!("state does not fit the grid: {e}"))?;
    let potential = qphase_core::states::exact_potential(&spec);
    for task in &sc.analysis {
        task.validate(&spec, &grid)?;
    }
    Ok(Prepared { spec, grid, wf, potential })
}

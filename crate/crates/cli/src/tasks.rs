//! Analysis tasks a scenario can request.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qphase_core::dynamics::{
    propagate_observed, Dynamics, FrameObserver, HjForm, MadelungMonitor, PathStatus, PropagationConfig, QBehaviour,
    QRefresh, Recorder, TrajectoryOptions, TrajectoryTracker,
};
use qphase_core::fermi::{
    build_fermi_hamiltonian, energy_decomposition, fermi_operator_residual, fermi_set_quadratic, sample_fermi_surface,
    stationary_identity_check,
};
use qphase_core::interp::InterpMethod;
use qphase_core::io;
use qphase_core::states::exact_energy;
use qphase_core::symplectic::{capacity_quadratic, conjugate_section_area, quantum_blob_contained, rs_check};
use qphase_core::wavefield::{covariance_matrix, default_eps_node, default_interior, polar_decompose, quantum_potential};
use qphase_core::{Grid, Potential, StateSpec, WaveField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::Check;

/// Options shared by tasks that only take checks.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plain {
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceOpts {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOpts {
    pub dt: f64,
    pub steps: usize,
    /// Steps between saved frames; 0 saves only the final frame as CSV.
    #[serde(default)]
    pub save_every: usize,
    /// Defaults to the potential the state is an eigenstate of.
    #[serde(default)]
    pub potential: Option<Potential>,
    #[serde(default = "half_step")]
    pub q_refresh: QRefresh,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    #[default]
    Schrodinger,
    Classical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualOpts {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub equation: Equation,
    #[serde(default = "both_forms")]
    pub forms: Vec<HjForm>,
    #[serde(default)]
    pub potential: Option<Potential>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryOpts {
    #[serde(default = "default_count")]
    pub count: usize,
    pub dt: f64,
    pub steps: usize,
    /// Use every n-th frame for the integration.
    #[serde(default = "one")]
    pub every: usize,
    #[serde(default = "four")]
    pub substeps: usize,
    #[serde(default)]
    pub method: InterpMethod,
    #[serde(default)]
    pub potential: Option<Potential>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeOpts {
    #[serde(default)]
    pub eps_node: Option<f64>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

fn default_count() -> usize {
    100
}
fn default_samples() -> usize {
    10
}
fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn half_step() -> QRefresh {
    QRefresh::HalfStep
}
fn both_forms() -> Vec<HjForm> {
    vec![HjForm::Quantum, HjForm::Classical]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum Task {
    Decompose(Plain),
    Qpot(Plain),
    Energy(Plain),
    FermiResidual(Plain),
    FermiSurface(SurfaceOpts),
    Capacity(Plain),
    BlobCheck(Plain),
    RsCheck(Plain),
    Evolve(EvolveOpts),
    EvolveClassical(EvolveOpts),
    Residuals(ResidualOpts),
    Trajectories(TrajectoryOpts),
    Nodes(NodeOpts),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Decompose(_) => "decompose",
            Task::Qpot(_) => "qpot",
            Task::Energy(_) => "energy",
            Task::FermiResidual(_) => "fermi-residual",
            Task::FermiSurface(_) => "fermi-surface",
            Task::Capacity(_) => "capacity",
            Task::BlobCheck(_) => "blob-check",
            Task::RsCheck(_) => "rs-check",
            Task::Evolve(_) => "evolve",
            Task::EvolveClassical(_) => "evolve-classical",
            Task::Residuals(_) => "residuals",
            Task::Trajectories(_) => "trajectories",
            Task::Nodes(_) => "nodes",
        }
    }

    pub fn checks(&self) -> &[Check] {
        match self {
            Task::Decompose(o)
            | Task::Qpot(o)
            | Task::Energy(o)
            | Task::FermiResidual(o)
            | Task::Capacity(o)
            | Task::BlobCheck(o)
            | Task::RsCheck(o) => &o.checks,
            Task::FermiSurface(o) => &o.checks,
            Task::Evolve(o) | Task::EvolveClassical(o) => &o.checks,
            Task::Residuals(o) => &o.checks,
            Task::Trajectories(o) => &o.checks,
            Task::Nodes(o) => &o.checks,
        }
    }

    /// Option checks that need the state and grid.
    pub fn validate(&self, spec: &StateSpec, grid: &Grid) -> Result<(), String> {
        let name = self.name();
        let positive_run = |dt: f64, steps: usize| {
            if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
                Err(format!("task `{name}`: need dt > 0 and steps >= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            Task::Evolve(o) | Task::EvolveClassical(o) => positive_run(o.dt, o.steps),
            Task::Residuals(o) => {
                positive_run(o.dt, o.steps)?;
                if o.steps < 3 || o.samples == 0 || o.forms.is_empty() {
                    return Err(format!("task `{name}`: need steps >= 3, samples >= 1 and at least one form"));
                }
                Ok(())
            }
            Task::Trajectories(o) => {
                positive_run(o.dt, o.steps)?;
                if o.count == 0 || o.substeps == 0 || o.every == 0 {
                    return Err(format!("task `{name}`: count, every and substeps must be positive"));
                }
                if o.method == InterpMethod::Spectral && !grid.is_periodic() {
                    return Err(format!("task `{name}`: spectral interpolation needs a periodic grid"));
                }
                Ok(())
            }
            Task::Nodes(_) if grid.dim() != 1 => Err(format!("task `{name}`: node diagnostics need a 1D grid")),
            Task::Capacity(_) | Task::BlobCheck(_) => fermi_set_quadratic(spec)
                .map(|_| ())
                .map_err(|e| format!("task `{name}`: {e}")),
            Task::FermiSurface(o) if o.count == 0 => Err(format!("task `{name}`: count must be positive")),
            _ => Ok(()),
        }
    }
}

/// Outcome of one declared check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    #[serde(flatten)]
    pub check: Check,
    pub value: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: &'static str,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<PathBuf>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TaskReport {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

/// What every task sees.
pub struct Context<'a> {
    pub spec: &'a StateSpec,
    pub wf: &'a WaveField,
    pub potential: Potential,
    pub seed: u64,
    pub out_dir: &'a Path,
}

#[derive(Default)]
struct Output {
    values: BTreeMap<String, f64>,
    artifacts: Vec<PathBuf>,
}

impl Output {
    fn set(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }
}

type TaskResult = Result<(), Box<dyn std::error::Error>>;

pub fn run_task(index: usize, task: &Task, ctx: &Context) -> TaskReport {
    let start = Instant::now();
    let mut out = Output::default();
    let prefix = format!("{:02}_{}", index, task.name());
    let result = execute(task, ctx, &prefix, &mut out);
    let error = result.err().map(|e| e.to_string());
    let checks = task
        .checks()
        .iter()
        .map(|c| {
            let value = out.values.get(&c.key).copied();
            CheckResult { check: c.clone(), value, pass: error.is_none() && value.is_some_and(|v| c.accepts(v)) }
        })
        .collect();
    TaskReport {
        index,
        task: task.name(),
        values: out.values,
        checks,
        artifacts: out.artifacts,
        seconds: start.elapsed().as_secs_f64(),
        error,
    }
}

fn create(ctx: &Context, out: &mut Output, name: String) -> std::io::Result<BufWriter<File>> {
    let path = ctx.out_dir.join(&name);
    out.artifacts.push(PathBuf::from(name));
    Ok(BufWriter::new(File::create(path)?))
}

fn execute(task: &Task, ctx: &Context, prefix: &str, out: &mut Output) -> TaskResult {
    let wf = ctx.wf;
    let grid = wf.grid();
    match task {
        Task::Decompose(_) => {
            let eps = default_eps_node(wf);
            let polar = polar_decompose(wf, eps)?;
            let masked: Vec<f64> = polar.node_mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
            let w = create(ctx, out, format!("{prefix}.csv"))?;
            io::fields_csv(w, grid, &["amplitude", "action", "masked"], &[&polar.amplitude, &polar.action, &masked])?;
            out.set("norm", wf.norm_sq());
            out.set("max_amplitude", wf.max_amplitude());
            out.set("eps_node", eps);
            out.set("masked_points", polar.node_mask.iter().filter(|&&m| m).count() as f64);
        }
        Task::Qpot(_) => {
            let q = quantum_potential(wf)?;
            io::scalar_csv(create(ctx, out, format!("{prefix}.csv"))?, &q, "q")?;
            let interior = default_interior(wf);
            let vals = (0..grid.len()).filter(|&i| interior[i]).map(|i| q.values()[i]);
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            out.set("q_interior_min", lo);
            out.set("q_interior_max", hi);
            if let Some(i) = origin_index(grid) {
                if !q.is_masked(i) {
                    out.set("q_origin", q.values()[i]);
                }
            }
        }
        Task::Energy(_) => {
            let v = ctx.potential.sample(grid);
            let e = energy_decomposition(wf, &v)?;
            let w = create(ctx, out, format!("{prefix}.csv"))?;
            io::fields_csv(
                w,
                grid,
                &["kinetic", "quantum", "potential", "total"],
                &[e.kinetic.values(), e.quantum.values(), e.potential.values(), e.total.values()],
            )?;
            // ρ-weighted mean over the points where every term is defined
            let weights = grid.quadrature_weights();
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..grid.len() {
                if !e.total.is_masked(i) {
                    let w = wf.psi()[i].norm_sqr() * weights[i];
                    num += w * e.total.values()[i];
                    den += w;
                }
            }
            out.set("mean_energy", num / den);
            if ctx.spec.is_eigenstate() {
                let exact = exact_energy(ctx.spec)?;
                out.set("exact_energy", exact);
                out.set("identity_residual", stationary_identity_check(wf, &v, exact)?);
            }
        }
        Task::FermiResidual(_) => out.set("residual", fermi_operator_residual(wf)?),
        Task::FermiSurface(o) => {
            let fh = build_fermi_hamiltonian(wf)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let pts = sample_fermi_surface(&fh, o.count, &mut rng)?;
            io::surface_csv(create(ctx, out, format!("{prefix}.csv"))?, &pts, grid.dim())?;
            out.set("points", pts.len() as f64);
            out.set("max_abs_h", pts.iter().map(|p| p.h.abs()).fold(0.0, f64::max));
        }
        Task::Capacity(_) => {
            let set = fermi_set_quadratic(ctx.spec)?;
            let c = capacity_quadratic(&set.form)?;
            let h = ctx.spec.params.planck();
            out.set("capacity", c);
            out.set("capacity_over_h", c / h);
            for axis in 0..set.form.degrees_of_freedom() {
                out.set(format!("section_area_{axis}"), conjugate_section_area(&set.form, axis)?);
            }
        }
        Task::BlobCheck(_) => {
            let set = fermi_set_quadratic(ctx.spec)?;
            let r = quantum_blob_contained(&set.form, ctx.spec.params.hbar)?;
            out.set("ratio", r.ratio);
            out.set("capacity", r.capacity);
            out.set("contained", f64::from(u8::from(r.pass)));
        }
        Task::RsCheck(_) => {
            let sigma = covariance_matrix(wf)?;
            let r = rs_check(&sigma, ctx.spec.params.hbar)?;
            out.set("margin", r.margin);
            out.set("min_nu", r.min_nu);
            out.set("satisfied", f64::from(u8::from(r.pass)));
        }
        Task::Evolve(o) | Task::EvolveClassical(o) => {
            let dynamics = match task {
                Task::Evolve(_) => Dynamics::Schrodinger,
                _ => Dynamics::Classical(o.q_refresh),
            };
            let pot = o.potential.unwrap_or(ctx.potential);
            let cfg = PropagationConfig::new(o.dt, o.steps, pot).q_refresh(o.q_refresh);
            let mut rec = Recorder::new(o.save_every.max(1));
            let last = if o.save_every > 0 {
                propagate_observed(wf, &cfg, dynamics, &mut rec)?
            } else {
                propagate_observed(wf, &cfg, dynamics, &mut Nothing)?
            };
            if o.save_every > 0 {
                let name = format!("{prefix}_frames");
                io::save_timeseries(&ctx.out_dir.join(&name), &rec.series, &cfg)?;
                out.artifacts.push(PathBuf::from(name));
            }
            io::wavefield_csv(create(ctx, out, format!("{prefix}_final.csv"))?, &last)?;
            let sigma = covariance_matrix(&last)?;
            out.set("final_time", o.steps as f64 * o.dt);
            out.set("norm_drift", (last.norm_sq() - wf.norm_sq()).abs());
            for axis in 0..grid.dim() {
                out.set(format!("var_x_{axis}"), sigma.var_x(axis));
                out.set(format!("var_p_{axis}"), sigma.var_p(axis));
            }
        }
        Task::Residuals(o) => {
            let pot = o.potential.unwrap_or(ctx.potential);
            let every = (o.steps / o.samples).max(2);
            let mut mon = MadelungMonitor::new(every, pot.sample(grid), &o.forms);
            let dynamics = match o.equation {
                Equation::Schrodinger => Dynamics::Schrodinger,
                Equation::Classical => Dynamics::Classical(QRefresh::HalfStep),
            };
            let cfg = PropagationConfig::new(o.dt, o.steps, pot).q_refresh(QRefresh::HalfStep);
            propagate_observed(wf, &cfg, dynamics, &mut mon)?;
            let mut w = csv::Writer::from_writer(create(ctx, out, format!("{prefix}.csv"))?);
            w.write_record(["form", "t", "hj_max", "hj_offset", "continuity_max"])?;
            for (form, samples) in o.forms.iter().zip(&mon.samples) {
                let tag = form_name(*form);
                for s in samples {
                    w.write_record([
                        tag.to_string(),
                        io::fmt_f64(s.time),
                        io::fmt_f64(s.hj_max),
                        io::fmt_f64(s.hj_offset),
                        io::fmt_f64(s.continuity_max),
                    ])?;
                }
            }
            w.flush()?;
            for (k, form) in o.forms.iter().enumerate() {
                out.set(format!("hj_max_{}", form_name(*form)), mon.max_hj(k));
            }
            out.set("continuity_max", mon.max_continuity());
            out.set("samples", mon.samples[0].len() as f64);
        }
        Task::Trajectories(o) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let seeds = qphase_core::dynamics::sample_seeds(wf, o.count, &mut rng);
            let opts = TrajectoryOptions { substeps: o.substeps, method: o.method };
            let mut tracker = TrajectoryTracker::new(seeds, opts, o.every);
            let pot = o.potential.unwrap_or(ctx.potential);
            let cfg = PropagationConfig::new(o.dt, o.steps, pot);
            propagate_observed(wf, &cfg, Dynamics::Schrodinger, &mut tracker)?;
            let ens = tracker.finish()?;
            io::trajectories_csv(create(ctx, out, format!("{prefix}.csv"))?, &ens)?;
            let count = |s: PathStatus| ens.paths.iter().filter(|p| p.status == s).count() as f64;
            out.set("max_displacement", ens.max_displacement());
            out.set("max_excursion", ens.max_excursion());
            out.set("active", count(PathStatus::Active));
            out.set("exited", count(PathStatus::Exited));
            out.set("node_collisions", count(PathStatus::NodeCollision));
        }
        Task::Nodes(o) => {
            let rep = qphase_core::dynamics::node_diagnostics(wf, o.eps_node)?;
            let w = create(ctx, out, format!("{prefix}.json"))?;
            serde_json::to_writer_pretty(w, &rep)?;
            out.set("count", rep.nodes.len() as f64);
            for (k, n) in rep.nodes.iter().enumerate() {
                out.set(format!("position_{k}"), n.position);
                if let QBehaviour::Constant { value, .. } = n.behaviour {
                    out.set(format!("q_constant_{k}"), value);
                }
            }
        }
    }
    Ok(())
}

fn form_name(f: HjForm) -> &'static str {
    match f {
        HjForm::Quantum => "quantum",
        HjForm::Classical => "classical",
    }
}

/// Flat index of the origin when it is a grid point.
fn origin_index(g: &Grid) -> Option<usize> {
    let mut idx = [0usize; 3];
    for a in 0..g.dim() {
        let h = g.spacing(a);
        let k = (-g.lower()[a] / h).round();
        if k < 0.0 || k >= g.n_points()[a] as f64 || (g.lower()[a] + k * h).abs() > 1e-9 * h {
            return None;
        }
        idx[a] = k as usize;
    }
    Some(g.flat_index(&idx[..g.dim()]))
}

struct Nothing;

impl FrameObserver for Nothing {
    fn observe(&mut self, _: usize, _: f64, _: &WaveField) -> qphase_core::Result<()> {
        Ok(())
    }

    fn wants(&self, _: usize) -> bool {
        false
    }
}

//! Built-in acceptance checks with fixed scenarios and tolerances.
//!
//! Each criterion produces one [`Verdict`]. Numbers that explain a verdict
//! but are not themselves judged go into its `detail` string.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::madelung::{HjForm, MadelungMonitor};
use crate::dynamics::propagate::{
    propagate_observed, propagate_schrodinger, Dynamics, Fanout, FrameObserver, PropagationConfig, Propagator, QRefresh,
};
use crate::dynamics::trajectories::{sample_seeds, PathStatus, TrajectoryOptions, TrajectoryTracker};
use crate::error::{Error, Result};
use crate::fermi::{fermi_operator_residual, fermi_set_quadratic, force_balance_field, stationary_identity_check};
use crate::field::WaveField;
use crate::grid::Grid;
use crate::states::{default_grid, exact_energy, exact_potential, realize, Potential, StateKind, StateSpec};
use crate::symplectic::{
    capacity_quadratic, conjugate_section_area, quantum_blob_contained, random_positive_definite, random_symplectic,
    rs_check, williamson_spectrum, QuadraticForm,
};
use crate::wavefield::{covariance_matrix, default_interior, quantum_potential};
use crate::Complex64;

/// Runtime budget for the whole suite, in seconds.
pub const SUITE_BUDGET_SECONDS: f64 = 600.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oscillator,
    Well,
    Dynamics,
    Symplectic,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["oscillator", "well", "dynamics", "symplectic", "all"];

    /// Criterion numbers run by the suite, in order.
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Oscillator => &[1, 2, 3, 6],
            Suite::Well => &[3],
            Suite::Dynamics => &[7, 8, 9, 10],
            Suite::Symplectic => &[4, 5, 11],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oscillator" => Ok(Suite::Oscillator),
            "well" => Ok(Suite::Well),
            "dynamics" => Ok(Suite::Dynamics),
            "symplectic" => Ok(Suite::Symplectic),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite `{other}` (expected one of {})",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [Suite::Oscillator, Suite::Well, Suite::Dynamics, Suite::Symplectic, Suite::All]
            .iter()
            .position(|s| s == self)
            .unwrap();
        f.write_str(Suite::NAMES[i])
    }
}

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    /// The judged number (the worst case when several are combined).
    pub value: f64,
    /// Bound the value was held to, described in `detail`.
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {}: value {:.3e} (tol {:.1e}) {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.value,
            self.tolerance,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub verdicts: Vec<Verdict>,
    pub seconds: f64,
    pub all_pass: bool,
}

struct Outcome {
    pass: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

const TITLES: [&str; 12] = [
    "oscillator quantum potential",
    "force balance",
    "energy identity",
    "Fermi-set capacity",
    "quantum-blob ratios",
    "Fermi operator identity",
    "Schrodinger/Madelung equivalence",
    "stationarity of real bound states",
    "free-packet spreading",
    "classical nonlinear equation",
    "symplectic invariance",
    "suite runtime",
];

/// Runs one criterion; 12 needs the others' verdicts and is only
/// meaningful inside [`run_suite`].
pub fn run_criterion(id: u32) -> Verdict {
    let start = Instant::now();
    let out = match id {
        1 => c1_oscillator_q(),
        2 => c2_force_balance(),
        3 => c3_energy_identity(),
        4 => c4_capacity(),
        5 => c5_blob(),
        6 => c6_fermi_operator(),
        7 => c7_madelung(),
        8 => c8_stationarity(),
        9 => c9_free_packet(),
        10 => c10_classical(),
        11 => c11_symplectic(),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    };
    let out = out.unwrap_or_else(|e| Outcome {
        pass: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    });
    Verdict {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown").to_string(),
        pass: out.pass,
        value: out.value,
        tolerance: out.tolerance,
        detail: out.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs a suite, calling `progress` after each verdict.
pub fn run_suite_with(suite: Suite, mut progress: impl FnMut(&Verdict)) -> SuiteReport {
    let start = Instant::now();
    let mut verdicts = Vec::new();
    for &id in suite.criteria() {
        let v = if id == 12 {
            let elapsed = start.elapsed().as_secs_f64();
            let failed: Vec<String> = verdicts.iter().filter(|v: &&Verdict| !v.pass).map(|v| v.id.to_string()).collect();
            Verdict {
                id,
                title: TITLES[11].to_string(),
                pass: failed.is_empty() && elapsed < SUITE_BUDGET_SECONDS,
                value: elapsed,
                tolerance: SUITE_BUDGET_SECONDS,
                detail: if failed.is_empty() {
                    "seconds for criteria 1-11, all passing".to_string()
                } else {
                    format!("seconds for criteria 1-11; failing: {}", failed.join(", "))
                },
                seconds: 0.0,
            }
        } else {
            run_criterion(id)
        };
        progress(&v);
        verdicts.push(v);
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    SuiteReport { suite, verdicts, seconds: start.elapsed().as_secs_f64(), all_pass }
}

pub fn run_suite(suite: Suite) -> SuiteReport {
    run_suite_with(suite, |_| {})
}

fn coherent() -> Result<(StateSpec, WaveField)> {
    let spec = StateSpec::coherent3d(1.0);
    let wf = realize(&spec, &default_grid(&spec)?)?;
    Ok((spec, wf))
}

/// Largest interior `|Q(r) − (3/2 − |r|²/2)|`.
fn oscillator_q_error(grid: &Grid) -> Result<f64> {
    let spec = StateSpec::coherent3d(1.0);
    let wf = realize(&spec, grid)?;
    let q = quantum_potential(&wf)?;
    let interior = default_interior(&wf);
    let exact = |r: [f64; 3]| 1.5 - 0.5 * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    Ok((0..grid.len())
        .filter(|&i| interior[i])
        .map(|i| (q.values()[i] - exact(grid.point(i))).abs())
        .fold(0.0, f64::max))
}

fn c1_oscillator_q() -> Result<Outcome> {
    let t = Instant::now();
    let err = oscillator_q_error(&Grid::cube(3, 64, -6.0, 6.0, true)?)?;
    let secs = t.elapsed().as_secs_f64();
    let wide = oscillator_q_error(&Grid::cube(3, 64, -8.0, 8.0, true)?)?;
    let tol = 1e-6;
    Ok(Outcome {
        pass: err < tol && secs < 10.0,
        value: err,
        tolerance: tol,
        detail: format!(
            "64^3 on (-6,6)^3 in {secs:.2} s (limit 10 s); same grid on (-8,8)^3: {wide:.2e}. The narrow box \
             cuts psi at 1.5e-8 of its peak, and the periodic seam pollutes Q where R is near the node threshold"
        ),
    })
}

fn c2_force_balance() -> Result<Outcome> {
    let (spec, wf) = coherent()?;
    let v = exact_potential(&spec).sample(wf.grid());
    let f = force_balance_field(&wf, &v)?;
    let value = f.max_norm_over(&default_interior(&wf));
    let tol = 1e-5;
    Ok(Outcome { pass: value < tol, value, tolerance: tol, detail: "max interior |F_Q + F_C|, coherent state".into() })
}

fn c3_energy_identity() -> Result<Outcome> {
    let tol = 1e-5;
    let specs = [
        StateSpec::coherent3d(1.0),
        StateSpec::well1d(1, 1.0),
        StateSpec::well1d(2, 1.0),
        StateSpec::well1d(3, 1.0),
    ];
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for spec in &specs {
        let wf = realize(spec, &default_grid(spec)?)?;
        let v = exact_potential(spec).sample(wf.grid());
        let e = stationary_identity_check(&wf, &v, exact_energy(spec)?)?;
        worst = worst.max(e);
        parts.push(format!("{}: {e:.1e}", label(spec)));
    }
    Ok(Outcome {
        pass: worst < tol,
        value: worst,
        tolerance: tol,
        detail: format!("max interior |V + Q - E| ({})", parts.join(", ")),
    })
}

fn label(spec: &StateSpec) -> String {
    match spec.kind {
        StateKind::Coherent3d { .. } => "coherent3d".into(),
        StateKind::Oscillator1d { n, .. } => format!("oscillator1d(n={n})"),
        StateKind::Well1d { n, .. } => format!("well1d(n={n})"),
        StateKind::GaussianPacket { .. } => "gaussian_packet".into(),
        StateKind::PlaneModulated { .. } => "plane_modulated".into(),
    }
}

fn c4_capacity() -> Result<Outcome> {
    let spec = StateSpec::coherent3d(1.0);
    let h = spec.params.planck();
    let target = 1.5 * h;
    let t = Instant::now();
    let set = fermi_set_quadratic(&spec)?;
    let c = capacity_quadratic(&set.form)?;
    let micros = t.elapsed().as_secs_f64() * 1e6;
    let mut worst = ((c - target) / target).abs();
    for axis in 0..3 {
        let a = conjugate_section_area(&set.form, axis)?;
        worst = worst.max(((a - target) / target).abs());
    }
    let tol = 1e-12;
    Ok(Outcome {
        pass: worst <= tol && micros < 1000.0,
        value: worst,
        tolerance: tol,
        detail: format!(
            "relative error of c and of the three conjugate sections vs 3h/2; c = {:.15} (h/2) in {micros:.0} us (limit 1 ms)",
            c / (h / 2.0)
        ),
    })
}

fn c5_blob() -> Result<Outcome> {
    let tol = 1e-12;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (spec, expect) in [(StateSpec::coherent3d(1.0), 3.0), (StateSpec::oscillator1d(0, 1.0), 1.0)] {
        let set = fermi_set_quadratic(&spec)?;
        let r = quantum_blob_contained(&set.form, spec.params.hbar)?;
        let err = (r.ratio - expect).abs();
        worst = worst.max(if r.pass { err } else { f64::INFINITY });
        parts.push(format!("{}: ratio {:.15}", label(&spec), r.ratio));
    }
    Ok(Outcome { pass: worst <= tol, value: worst, tolerance: tol, detail: parts.join(", ") })
}

fn c6_fermi_operator() -> Result<Outcome> {
    let tol = 1e-7;
    let specs = [
        StateSpec::coherent3d(1.0),
        StateSpec::gaussian_packet(0.5, 1.0, 1.0),
        StateSpec::plane_modulated(1.0, 3.0),
    ];
    let mut worst: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    let mut parts = Vec::new();
    for spec in &specs {
        let g = default_grid(spec)?;
        let res = fermi_operator_residual(&realize(spec, &g)?)?;
        worst = worst.max(res);
        // grids with a quarter and half the default points per axis
        let mut seq = Vec::new();
        for div in [4, 2] {
            let n: Vec<usize> = g.n_points().iter().map(|n| n / div).collect();
            let coarse = Grid::new(n, g.lower().to_vec(), g.upper().to_vec(), true)?;
            seq.push(fermi_operator_residual(&realize(spec, &coarse)?)?);
        }
        seq.push(res);
        for w in seq.windows(2) {
            min_ratio = min_ratio.min(w[0] / w[1]);
        }
        parts.push(format!(
            "{}: {}",
            label(spec),
            seq.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>().join(" -> ")
        ));
    }
    Ok(Outcome {
        pass: worst < tol && min_ratio >= 4.0,
        value: worst,
        tolerance: tol,
        detail: format!(
            "residual on n/4, n/2, n points per axis ({}); smallest reduction per doubling {min_ratio:.2e} (need >= 4)",
            parts.join("; ")
        ),
    })
}

/// Largest `|ρ(t) − ρ(0)|` over the frames it sees.
struct DensityDrift {
    rho0: Vec<f64>,
    every: usize,
    max: f64,
}

impl DensityDrift {
    fn new(wf: &WaveField, every: usize) -> Self {
        Self { rho0: wf.psi().iter().map(|z| z.norm_sqr()).collect(), every, max: 0.0 }
    }
}

impl FrameObserver for DensityDrift {
    fn observe(&mut self, _step: usize, _time: f64, frame: &WaveField) -> Result<()> {
        let d = frame.psi().iter().zip(&self.rho0).map(|(z, r)| (z.norm_sqr() - r).abs()).fold(0.0, f64::max);
        self.max = self.max.max(d);
        Ok(())
    }

    fn wants(&self, step: usize) -> bool {
        step % self.every == 0
    }
}

/// A step count that is a multiple of `multiple` and covers `period` with
/// steps close to `dt`, and the exact step.
fn period_steps(period: f64, dt: f64, multiple: usize) -> (usize, f64) {
    let n = ((period / dt / multiple as f64).round() as usize).max(1) * multiple;
    (n, period / n as f64)
}

/// Max HJ and continuity residual of the coherent state over `[0, t_end]`.
fn coherent_residuals(wf: &WaveField, pot: Potential, dt: f64, t_end: f64, samples: usize) -> Result<(f64, f64)> {
    let n = (t_end / dt).round() as usize;
    let every = (n / samples).max(2);
    let mut mon = MadelungMonitor::new(every, pot.sample(wf.grid()), &[HjForm::Quantum]);
    propagate_observed(wf, &PropagationConfig::new(dt, n + 1, pot), Dynamics::Schrodinger, &mut mon)?;
    Ok((mon.max_hj(0), mon.max_continuity()))
}

/// Madelung residuals of the coherent state over one period at dt ≈ 1e-3.
fn coherent_period() -> Result<(f64, f64)> {
    let (spec, wf) = coherent()?;
    let pot = exact_potential(&spec);
    let (n, dt) = period_steps(2.0 * PI, 1e-3, 12);
    let mut mon = MadelungMonitor::new(n / 12, pot.sample(wf.grid()), &[HjForm::Quantum]);
    propagate_observed(&wf, &PropagationConfig::new(dt, n, pot), Dynamics::Schrodinger, &mut mon)?;
    Ok((mon.max_hj(0), mon.max_continuity()))
}

/// Bohm paths and density over one period of an eigenstate.
struct Stillness {
    excursion: f64,
    end: f64,
    drift: f64,
    stopped: usize,
}

fn still(spec: &StateSpec, grid: &Grid, dt: f64, frames: usize, seed: u64) -> Result<Stillness> {
    let wf = realize(spec, grid)?;
    let (n, dt) = period_steps(2.0 * PI * spec.params.hbar / exact_energy(spec)?, dt, frames);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = TrajectoryTracker::new(sample_seeds(&wf, 100, &mut rng), TrajectoryOptions::default(), n / frames);
    let mut dd = DensityDrift::new(&wf, n / frames);
    let mut fan = Fanout(vec![&mut tracker, &mut dd]);
    propagate_observed(&wf, &PropagationConfig::new(dt, n, exact_potential(spec)), Dynamics::Schrodinger, &mut fan)?;
    let ens = tracker.finish()?;
    Ok(Stillness {
        excursion: ens.max_excursion(),
        end: ens.max_displacement(),
        drift: dd.max,
        stopped: ens.paths.iter().filter(|p| p.status != PathStatus::Active).count(),
    })
}

fn c7_madelung() -> Result<Outcome> {
    let (hj, continuity) = coherent_period()?;
    let (spec, wf) = coherent()?;
    let pot = exact_potential(&spec);
    // halving study over a shorter window at the same sample times
    let (hj1, c1) = coherent_residuals(&wf, pot, 1e-3, 0.4, 4)?;
    let (hj2, c2) = coherent_residuals(&wf, pot, 5e-4, 0.4, 4)?;
    let (r_hj, r_c) = (hj1 / hj2, c1 / c2);
    let ok = hj < 1e-4 && continuity < 1e-6 && r_hj >= 4.0 && r_c >= 4.0;
    Ok(Outcome {
        pass: ok,
        value: hj,
        tolerance: 1e-4,
        detail: format!(
            "one period at dt=1e-3: max HJ {:.2e} (< 1e-4), continuity {:.2e} (< 1e-6); halving dt on t <= 0.4: \
             HJ {hj1:.3e} -> {hj2:.3e} (x{r_hj:.4}), continuity {c1:.1e} -> {c2:.1e} (x{r_c:.2}); need x >= 4 for both",
            hj, continuity
        ),
    })
}

fn c8_stationarity() -> Result<Outcome> {
    let tol_disp = 1e-8;
    let tol_drift = 1e-7;
    // the split-step density breathes at O(dt²) and returns after half a
    // period, so paths are judged by their largest excursion, not their end
    let c3 = still(&StateSpec::coherent3d(1.0), &Grid::cube(3, 32, -8.0, 8.0, true)?, 1.25e-4, 120, 8)?;
    let spec = StateSpec::oscillator1d(0, 1.0);
    let c1 = still(&spec, &default_grid(&spec)?, 1e-4, 600, 1)?;
    let mut parts = Vec::new();
    for (name, r) in [("coherent3d on 32^3 over (-8,8)^3", &c3), ("oscillator1d(n=0)", &c1)] {
        parts.push(format!("{name}: excursion {:.1e} (end {:.1e}), drift {:.1e}", r.excursion, r.end, r.drift));
    }
    let disp = c3.excursion.max(c1.excursion);
    let mut drift = c3.drift.max(c1.drift);
    let stopped = c3.stopped + c1.stopped;

    // remaining eigenstates: density over one period of their own phase
    for spec in [
        StateSpec::oscillator1d(1, 1.0),
        StateSpec::oscillator1d(2, 1.0),
        StateSpec::oscillator1d(3, 1.0),
        StateSpec::well1d(1, 1.0),
        StateSpec::well1d(2, 1.0),
        StateSpec::well1d(3, 1.0),
    ] {
        let wf = realize(&spec, &default_grid(&spec)?)?;
        let period = 2.0 * PI * spec.params.hbar / exact_energy(&spec)?;
        let (n, dt) = period_steps(period, period / 20000.0, 100);
        let mut dd = DensityDrift::new(&wf, 100);
        propagate_observed(&wf, &PropagationConfig::new(dt, n, exact_potential(&spec)), Dynamics::Schrodinger, &mut dd)?;
        drift = drift.max(dd.max);
        parts.push(format!("{}: drift {:.1e}", label(&spec), dd.max));
    }
    Ok(Outcome {
        pass: disp < tol_disp && drift < tol_drift && stopped == 0,
        value: disp,
        tolerance: tol_disp,
        detail: format!(
            "max Bohm excursion over one period, 100 seeds each (< 1e-8) and max density drift (< 1e-7); {}; \
             {stopped} paths stopped",
            parts.join("; ")
        ),
    })
}

fn c9_free_packet() -> Result<Outcome> {
    let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
    let wf = realize(&spec, &Grid::cube(1, 256, -30.0, 30.0, true)?)?;
    let ts = propagate_schrodinger(&wf, &PropagationConfig::new(0.01, 200, Potential::Zero).record_every(200))?;
    let last = ts.frames.last().unwrap();
    let t = *ts.times.last().unwrap();
    let var = covariance_matrix(last)?.var_x(0);
    let exact = 1.0 + (t / 2.0).powi(2);
    let rel = ((var - exact) / exact).abs();
    let tol = 1e-6;
    Ok(Outcome {
        pass: rel < tol,
        value: rel,
        tolerance: tol,
        detail: format!("relative error of dx^2 at t = {t}: {var:.12} vs {exact}"),
    })
}

fn c10_classical() -> Result<Outcome> {
    let (spec, wf) = coherent()?;
    let pot = exact_potential(&spec);
    let dt = 5e-4;
    let n = 200;
    let mut mon = MadelungMonitor::new(n / 2, pot.sample(wf.grid()), &[HjForm::Classical, HjForm::Quantum]);
    let cfg = PropagationConfig::new(dt, n + 1, pot).q_refresh(QRefresh::HalfStep);
    propagate_observed(&wf, &cfg, Dynamics::Classical(QRefresh::HalfStep), &mut mon)?;
    let (free, with_q) = (mon.max_hj(0), mon.max_hj(1));

    // plane wave: R is constant, Q vanishes and both equations coincide
    let g = Grid::cube(1, 64, 0.0, 2.0 * PI, true)?;
    let plane = WaveField::from_fn(g.clone(), Default::default(), |r| {
        Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), 3.0 * r[0])
    })?;
    let harmonic = Potential::Harmonic { mass: 1.0, omega: 1.0 };
    let mut a = plane.psi().to_vec();
    let mut b = a.clone();
    Propagator::new(&g, plane.params(), &harmonic, Dynamics::Schrodinger)?.step(&mut a, 1e-2)?;
    Propagator::new(&g, plane.params(), &harmonic, Dynamics::Classical(QRefresh::PerStep))?.step(&mut b, 1e-2)?;
    let step_diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);

    let pass = free < 1e-4 && with_q > 1e-2 && step_diff < 1e-10;
    Ok(Outcome {
        pass,
        value: free,
        tolerance: 1e-4,
        detail: format!(
            "coherent state, half-step Q refresh, dt={dt}, t <= {}: Q-free HJ {free:.2e} (< 1e-4), with Q {with_q:.2e} \
             (> 1e-2); single step where Q = 0 differs by {step_diff:.1e} (< 1e-10)",
            dt * n as f64
        ),
    })
}

fn c11_symplectic() -> Result<Outcome> {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let form = QuadraticForm::new(random_positive_definite(2 * n, 0.5, &mut rng), 1.0)?;
        let nu0 = williamson_spectrum(&form)?;
        let c0 = capacity_quadratic(&form)?;
        for _ in 0..200 {
            let s = random_symplectic(n, 0.3, &mut rng);
            let img = form.conjugated(&s)?;
            let nu = williamson_spectrum(&img)?;
            for (a, b) in nu.nu.iter().zip(&nu0.nu) {
                worst = worst.max(((a - b) / b).abs());
            }
            worst = worst.max(((capacity_quadratic(&img)? - c0) / c0).abs());
        }
    }
    let (spec, wf) = coherent()?;
    let rs = rs_check(&covariance_matrix(&wf)?, spec.params.hbar)?;
    let rs_tol = 1e-10;
    Ok(Outcome {
        pass: worst <= tol && rs.margin.abs() <= rs_tol && rs.pass,
        value: worst,
        tolerance: tol,
        detail: format!(
            "max relative change of spectrum and capacity over 3 x 200 conjugations (n = 1, 2, 3); RS margin of the \
             coherent state {:.1e} (|margin| <= 1e-10)",
            rs.margin
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            let s: Suite = name.parse().unwrap();
            assert_eq!(s.to_string(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [4, 5] {
            let v = run_criterion(id);
            assert!(v.pass, "{v}");
        }
    }
}

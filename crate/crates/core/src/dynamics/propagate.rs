//! Strang split-step propagation.
//!
//! One step of length `dt` is `e^{−iW dt/2ħ} e^{−iT dt/ħ} e^{−iW dt/2ħ}`.
//! The kinetic factor is diagonal in the Fourier basis on periodic grids and
//! in the sine basis on wall-bounded grids, where `ψ` vanishes on the
//! boundary. `W = V` for the Schrödinger equation and `W = V − Q[ψ]` for
//! the classical nonlinear equation, whose kinetic pressure `Q` is removed.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::Differentiator;
use crate::error::{Error, Result};
use crate::fft::{DstNd, FftNd};
use crate::field::WaveField;
use crate::grid::{Grid, PhysicsParams};
use crate::states::Potential;
use crate::wavefield::{default_eps_node, node_mask, raw_bohm_fields, Derivatives, NORMALIZATION_TOLERANCE};

/// Norm drift that aborts a run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScheme {
    #[default]
    StrangSplit,
}

/// When the classical solver recomputes `Q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QRefresh {
    /// Once per step from the pre-step frame (first order in the
    /// nonlinearity).
    #[default]
    PerStep,
    /// Again after the kinetic sub-step for the closing half step, which
    /// makes the step symmetric and second order.
    HalfStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub scheme: SplitScheme,
    pub potential: Potential,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub q_refresh: QRefresh,
}

fn one() -> usize {
    1
}

impl PropagationConfig {
    pub fn new(dt: f64, n_steps: usize, potential: Potential) -> Self {
        Self { dt, n_steps, scheme: SplitScheme::StrangSplit, potential, record_every: 1, q_refresh: QRefresh::PerStep }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn q_refresh(mut self, refresh: QRefresh) -> Self {
        self.q_refresh = refresh;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// `dt·E_max/ħ` with `E_max = ħ²|k_max|²/2m`; splitting error grows
    /// once this approaches one. Advisory only: the scheme is unitary for
    /// every `dt`.
    pub fn stability_number(&self, grid: &Grid, params: PhysicsParams) -> f64 {
        let k2: f64 = (0..grid.dim()).map(|a| (std::f64::consts::PI / grid.spacing(a)).powi(2)).sum();
        self.dt * params.hbar * k2 / (2.0 * params.mass)
    }
}

/// Frames of a run, recorded every `record_every` steps.
#[derive(Clone, Debug)]
pub struct Timeseries {
    pub times: Vec<f64>,
    pub frames: Vec<WaveField>,
}

impl Timeseries {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    /// Common spacing of the recorded times.
    pub fn uniform_spacing(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::TooFewFrames { needed: 2, got: self.times.len() });
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            let d = w[1] - w[0];
            if !(d > 0.0) || (d - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
                return Err(Error::NonUniformTimes);
            }
        }
        Ok(dt)
    }
}

/// Receives every frame of a run, including the initial one at step 0.
pub trait FrameObserver {
    fn observe(&mut self, step: usize, time: f64, frame: &WaveField) -> Result<()>;

    /// Whether `observe` needs the frame after `step`; frames nobody wants
    /// are not materialized.
    fn wants(&self, _step: usize) -> bool {
        true
    }
}

/// Records every `every`-th frame.
pub struct Recorder {
    every: usize,
    pub series: Timeseries,
}

impl Recorder {
    pub fn new(every: usize) -> Self {
        Self { every, series: Timeseries { times: Vec::new(), frames: Vec::new() } }
    }
}

impl FrameObserver for Recorder {
    fn observe(&mut self, step: usize, time: f64, frame: &WaveField) -> Result<()> {
        if step % self.every == 0 {
            self.series.times.push(time);
            self.series.frames.push(frame.clone());
        }
        Ok(())
    }

    fn wants(&self, step: usize) -> bool {
        step % self.every == 0
    }
}

/// Forwards frames to several observers in order.
pub struct Fanout<'a>(pub Vec<&'a mut dyn FrameObserver>);

impl FrameObserver for Fanout<'_> {
    fn observe(&mut self, step: usize, time: f64, frame: &WaveField) -> Result<()> {
        for o in self.0.iter_mut() {
            if o.wants(step) {
                o.observe(step, time, frame)?;
            }
        }
        Ok(())
    }

    fn wants(&self, step: usize) -> bool {
        self.0.iter().any(|o| o.wants(step))
    }
}

/// Keeps the last three frames, for centred time differences.
#[derive(Default)]
pub(crate) struct Window {
    pub frames: VecDeque<(usize, f64, WaveField)>,
}

impl Window {
    pub fn push(&mut self, step: usize, time: f64, frame: &WaveField) {
        if self.frames.len() == 3 {
            self.frames.pop_front();
        }
        self.frames.push_back((step, time, frame.clone()));
    }
}

/// Which equation a [`Propagator`] integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dynamics {
    Schrodinger,
    Classical(QRefresh),
}

enum Kinetic {
    Fourier { fft: FftNd, k2: Vec<f64> },
    Sine { dst: DstNd, k2: Vec<f64> },
}

/// A reusable split-step integrator on one grid.
pub struct Propagator {
    grid: Grid,
    params: PhysicsParams,
    v: Vec<f64>,
    dynamics: Dynamics,
    kinetic: Kinetic,
    diff: Option<Differentiator>,
    /// Phase factors cached for the last `dt` used.
    cache: Option<(f64, Vec<Complex64>, Vec<Complex64>)>,
    /// Samples left by the last half-step-refresh step and their `Q`.
    q_carry: Option<(Vec<Complex64>, Vec<f64>)>,
}

impl Propagator {
    pub fn new(grid: &Grid, params: PhysicsParams, potential: &Potential, dynamics: Dynamics) -> Result<Self> {
        params.validate()?;
        if potential.has_walls() && grid.is_periodic() {
            return Err(Error::InvalidGrid("a well potential needs a wall-bounded grid".into()));
        }
        let kinetic = if grid.is_periodic() {
            let d = Differentiator::new(grid);
            Kinetic::Fourier { fft: FftNd::new(grid), k2: d.k_squared() }
        } else {
            // sine mode j on an axis of length L has wavenumber πj/L
            let k2 = (0..grid.len())
                .map(|flat| {
                    let idx = grid.multi_index(flat);
                    (0..grid.dim())
                        .map(|a| (std::f64::consts::PI * idx[a] as f64 / grid.length(a)).powi(2))
                        .sum()
                })
                .collect();
            Kinetic::Sine { dst: DstNd::new(grid), k2 }
        };
        let diff = match dynamics {
            Dynamics::Classical(_) => Some(Differentiator::new(grid)),
            Dynamics::Schrodinger => None,
        };
        Ok(Self {
            grid: grid.clone(),
            params,
            v: potential.sample(grid).values().to_vec(),
            dynamics,
            kinetic,
            diff,
            cache: None,
            q_carry: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn factors(&mut self, dt: f64) -> (&[Complex64], &[Complex64]) {
        let stale = !matches!(&self.cache, Some((d, _, _)) if *d == dt);
        if stale {
            let hbar = self.params.hbar;
            let m = self.params.mass;
            let k2 = match &self.kinetic {
                Kinetic::Fourier { k2, .. } | Kinetic::Sine { k2, .. } => k2,
            };
            let kin = k2.iter().map(|&kk| Complex64::from_polar(1.0, -hbar * kk * dt / (2.0 * m))).collect();
            let pot = self.v.iter().map(|&v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar))).collect();
            self.cache = Some((dt, kin, pot));
        }
        let (_, kin, pot) = self.cache.as_ref().unwrap();
        (kin, pot)
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64], dt: f64) {
        let (kin, _) = self.factors(dt);
        let kin = kin.to_vec();
        match &self.kinetic {
            Kinetic::Fourier { fft, .. } => {
                fft.forward(psi);
                psi.par_iter_mut().zip(kin.par_iter()).for_each(|(z, f)| *z *= f);
                fft.inverse(psi);
            }
            Kinetic::Sine { dst, .. } => {
                dst.forward(psi);
                psi.par_iter_mut().zip(kin.par_iter()).for_each(|(z, f)| *z *= f);
                dst.inverse(psi);
            }
        }
    }

    /// `Q` of the current samples with nodes and tails set to zero.
    fn q_of(&self, psi: &[Complex64]) -> Result<Vec<f64>> {
        let wf = WaveField::new(self.grid.clone(), psi.to_vec(), self.params)?;
        let (gradient, laplacian) = self.diff.as_ref().unwrap().gradient_and_laplacian(psi);
        let (_, q) = raw_bohm_fields(&wf, &Derivatives { gradient, laplacian });
        let mask = node_mask(&wf, default_eps_node(&wf));
        Ok(q.into_iter().zip(mask).map(|(q, m)| if m || q.is_nan() { 0.0 } else { q }).collect())
    }

    fn potential_half_step(&mut self, psi: &mut [Complex64], dt: f64, q: Option<&[f64]>) {
        let hbar = self.params.hbar;
        match q {
            None => {
                let (_, pot) = self.factors(dt);
                let pot = pot.to_vec();
                psi.par_iter_mut().zip(pot.par_iter()).for_each(|(z, f)| *z *= f);
            }
            Some(q) => {
                let v = &self.v;
                psi.par_iter_mut().enumerate().for_each(|(i, z)| {
                    *z *= Complex64::from_polar(1.0, -(v[i] - q[i]) * dt / (2.0 * hbar));
                });
            }
        }
    }

    /// Advances `psi` by `dt`; a negative `dt` undoes a step exactly for
    /// the linear equation.
    pub fn step(&mut self, psi: &mut [Complex64], dt: f64) -> Result<()> {
        match self.dynamics {
            Dynamics::Schrodinger => {
                self.potential_half_step(psi, dt, None);
                self.kinetic_step(psi, dt);
                self.potential_half_step(psi, dt, None);
            }
            Dynamics::Classical(refresh) => {
                // a potential half-step only rotates phases, so Q after the
                // previous kinetic step is still the Q of this frame
                let q = match self.q_carry.take() {
                    Some((prev, q)) if prev == psi => q,
                    _ => self.q_of(psi)?,
                };
                self.potential_half_step(psi, dt, Some(&q));
                self.kinetic_step(psi, dt);
                let q = match refresh {
                    QRefresh::PerStep => q,
                    QRefresh::HalfStep => self.q_of(psi)?,
                };
                self.potential_half_step(psi, dt, Some(&q));
                if refresh == QRefresh::HalfStep {
                    self.q_carry = Some((psi.to_vec(), q));
                }
            }
        }
        Ok(())
    }
}

/// Masked points that cannot reach the grid boundary through masked face
/// neighbours: genuine nodes, as opposed to the masked far tail.
pub fn enclosed_nodes(grid: &Grid, mask: &[bool]) -> Vec<bool> {
    let mut reached = vec![false; mask.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for i in 0..grid.len() {
        if mask[i] && grid.edge_distance(i) == 0 {
            reached[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let idx = grid.multi_index(i);
        for axis in 0..grid.dim() {
            let n = grid.n_points()[axis];
            let stride = grid.stride(axis);
            let mut nbrs = Vec::with_capacity(2);
            if idx[axis] > 0 {
                nbrs.push(i - stride);
            }
            if idx[axis] + 1 < n {
                nbrs.push(i + stride);
            }
            for j in nbrs {
                if mask[j] && !reached[j] {
                    reached[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    mask.iter().zip(&reached).map(|(&m, &r)| m && !r).collect()
}

fn has_enclosed_nodes(wf: &WaveField) -> bool {
    let mask = node_mask(wf, default_eps_node(wf));
    enclosed_nodes(wf.grid(), &mask).iter().any(|&e| e)
}

/// Runs `cfg.n_steps` steps, passing every frame to `observer`, and returns
/// the final frame.
pub fn propagate_observed(
    wf0: &WaveField,
    cfg: &PropagationConfig,
    dynamics: Dynamics,
    observer: &mut dyn FrameObserver,
) -> Result<WaveField> {
    cfg.validate()?;
    let norm0 = wf0.norm_sq();
    if (norm0 - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(norm0));
    }
    let classical = matches!(dynamics, Dynamics::Classical(_));
    if classical && has_enclosed_nodes(wf0) {
        return Err(Error::Precondition("the classical equation needs a nodeless initial state".into()));
    }
    let s = cfg.stability_number(wf0.grid(), wf0.params());
    if s >= 0.5 {
        log::warn!("dt·E_max/ħ = {s:.3} exceeds 0.5; splitting error may be large");
    }
    let mut prop = Propagator::new(wf0.grid(), wf0.params(), &cfg.potential, dynamics)?;
    let weights = wf0.grid().quadrature_weights();
    let mut psi = wf0.psi().to_vec();
    observer.observe(0, 0.0, wf0)?;
    for step in 1..=cfg.n_steps {
        prop.step(&mut psi, cfg.dt)?;
        let time = step as f64 * cfg.dt;
        let norm: f64 = psi.par_iter().zip(&weights).map(|(z, w)| z.norm_sqr() * w).sum();
        let drift = (norm - norm0).abs();
        if !(drift <= NORM_DRIFT_LIMIT) {
            return Err(Error::PropagationAborted { step, time, drift });
        }
        let need = observer.wants(step) || step == cfg.n_steps;
        if !(classical || need) {
            continue;
        }
        let frame = WaveField::new(wf0.grid().clone(), psi.clone(), wf0.params())?;
        if classical && has_enclosed_nodes(&frame) {
            return Err(Error::NodeFormation { step, time });
        }
        if observer.wants(step) {
            observer.observe(step, time, &frame)?;
        }
        if step == cfg.n_steps {
            return Ok(frame);
        }
    }
    Ok(wf0.clone())
}

pub fn propagate_schrodinger(wf0: &WaveField, cfg: &PropagationConfig) -> Result<Timeseries> {
    let mut rec = Recorder::new(cfg.record_every);
    propagate_observed(wf0, cfg, Dynamics::Schrodinger, &mut rec)?;
    Ok(rec.series)
}

pub fn propagate_classical_nonlinear(wf0: &WaveField, cfg: &PropagationConfig) -> Result<Timeseries> {
    let mut rec = Recorder::new(cfg.record_every);
    propagate_observed(wf0, cfg, Dynamics::Classical(cfg.q_refresh), &mut rec)?;
    Ok(rec.series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{default_grid, realize, StateSpec};
    use crate::wavefield::covariance_matrix;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_rotates_exactly() {
        let g = Grid::cube(1, 32, 0.0, 2.0 * PI, true).unwrap();
        let k = 3.0;
        let psi: Vec<Complex64> =
            g.axis_coords(0).iter().map(|x| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), k * x)).collect();
        let wf = WaveField::new(g.clone(), psi, PhysicsParams::default()).unwrap();
        let cfg = PropagationConfig::new(0.01, 100, Potential::Zero).record_every(100);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let last = ts.frames.last().unwrap();
        let phase = Complex64::from_polar(1.0, -k * k / 2.0 * 1.0);
        for (a, b) in last.psi().iter().zip(wf.psi()) {
            assert!((a - b * phase).norm() < 1e-10);
        }
        assert_eq!(ts.times, vec![0.0, 1.0]);
    }

    #[test]
    fn norm_is_preserved() {
        let spec = StateSpec::gaussian_packet(-2.0, 1.0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let cfg = PropagationConfig::new(0.002, 1000, Potential::Harmonic { mass: 1.0, omega: 0.5 }).record_every(1000);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        assert!((ts.frames[1].norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn time_reversal() {
        let spec = StateSpec::gaussian_packet(0.5, 1.0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let mut prop =
            Propagator::new(wf.grid(), wf.params(), &Potential::Harmonic { mass: 1.0, omega: 1.0 }, Dynamics::Schrodinger)
                .unwrap();
        let mut psi = wf.psi().to_vec();
        for _ in 0..50 {
            prop.step(&mut psi, 0.01).unwrap();
        }
        for _ in 0..50 {
            prop.step(&mut psi, -0.01).unwrap();
        }
        let err = psi.iter().zip(wf.psi()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn well_eigenstate_evolves_by_phase() {
        let spec = StateSpec::well1d(2, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let e = 2.0 * PI * PI;
        let cfg = PropagationConfig::new(1e-3, 200, Potential::Well { length: 1.0 }).record_every(200);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let phase = Complex64::from_polar(1.0, -e * 0.2);
        let err = ts.frames[1].psi().iter().zip(wf.psi()).map(|(a, b)| (a - b * phase).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn free_packet_spreads() {
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let g = Grid::cube(1, 256, -30.0, 30.0, true).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(0.01, 200, Potential::Zero).record_every(200);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let var = covariance_matrix(&ts.frames[1]).unwrap().var_x(0);
        assert!((var - 2.0).abs() < 1e-6 * 2.0, "{var}");
    }

    #[test]
    fn enclosed_node_detection() {
        let g = Grid::cube(2, 8, 0.0, 1.0, false).unwrap();
        let mut mask = vec![false; 64];
        mask[0] = true; // corner, touches the edge
        mask[g.flat_index(&[3, 3])] = true;
        let e = enclosed_nodes(&g, &mask);
        assert!(!e[0]);
        assert!(e[g.flat_index(&[3, 3])]);
    }

    #[test]
    fn classical_rejects_state_with_nodes() {
        let spec = StateSpec::oscillator1d(1, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let cfg = PropagationConfig::new(1e-3, 10, Potential::Harmonic { mass: 1.0, omega: 1.0 });
        // the odd state vanishes exactly at the centre grid point
        assert!(matches!(propagate_classical_nonlinear(&wf, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap().scaled(Complex64::new(2.0, 0.0));
        let cfg = PropagationConfig::new(1e-3, 1, Potential::Zero);
        assert!(matches!(propagate_schrodinger(&wf, &cfg), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn config_json() {
        let cfg: PropagationConfig =
            serde_json::from_str(r#"{"dt":0.01,"n_steps":5,"potential":{"kind":"harmonic","mass":1.0,"omega":2.0}}"#)
                .unwrap();
        assert_eq!(cfg.record_every, 1);
        assert_eq!(cfg.q_refresh, QRefresh::PerStep);
        assert!(PropagationConfig::new(0.0, 1, Potential::Zero).validate().is_err());
    }
}

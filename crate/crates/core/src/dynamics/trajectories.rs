//! Bohmian trajectories `dr/dt = ∇S(r, t)/m`.
//!
//! The velocity field of each frame is interpolated in space (cubic, or
//! spectrally through `ψ` and `∇ψ` on periodic grids) and linearly in time
//! between frames; positions advance with classical fourth-order
//! Runge–Kutta. Particles are independent and integrated in parallel.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagate::{FrameObserver, Timeseries};
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::fft::FftNd;
use crate::grid::Grid;
use num_complex::Complex64;
use crate::interp::{self, InterpMethod, SpectralInterpolator};
use crate::wavefield::{bohm_momentum_field_masked, default_eps_node, node_mask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum PathStatus {
    Active,
    /// Left a wall-bounded box.
    Exited,
    /// Ran into the node mask.
    NodeCollision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// `(t, r)` samples at every frame time reached.
    pub samples: Vec<(f64, [f64; 3])>,
    pub status: PathStatus,
}

impl Path {
    pub fn last(&self) -> [f64; 3] {
        self.samples.last().unwrap().1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub dim: usize,
    pub seeds: Vec<[f64; 3]>,
    pub paths: Vec<Path>,
}

impl TrajectoryEnsemble {
    /// Largest distance between a path's first and last sample.
    pub fn max_displacement(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| {
                let (a, b) = (p.samples[0].1, p.last());
                (0..self.dim).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest distance any path reaches from its own start.
    pub fn max_excursion(&self) -> f64 {
        self.paths
            .iter()
            .flat_map(|p| {
                let a = p.samples[0].1;
                p.samples.iter().map(move |(_, b)| (0..self.dim).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt())
            })
            .fold(0.0, f64::max)
    }

    pub fn final_positions(&self) -> Vec<[f64; 3]> {
        self.paths.iter().map(Path::last).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    /// RK4 steps per frame interval.
    pub substeps: usize,
    #[serde(default)]
    pub method: InterpMethod,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { substeps: 4, method: InterpMethod::Cubic }
    }
}

/// Velocity field of one frame, ready for off-grid evaluation.
enum Sampler {
    Cubic { grid: Grid, comps: Vec<Vec<f64>>, mask: Vec<bool> },
    Spectral { interp: SpectralInterpolator, eps: f64, coef: f64, dim: usize },
}

enum Stop {
    Exit,
    Node,
}

impl Sampler {
    fn new(frame: &WaveField, method: InterpMethod) -> Result<Self> {
        let p = frame.params();
        match method {
            InterpMethod::Cubic => {
                let mask = node_mask(frame, default_eps_node(frame));
                let v = bohm_momentum_field_masked(frame, &mask);
                let comps = v.components().iter().map(|c| c.iter().map(|x| x / p.mass).collect()).collect();
                Ok(Sampler::Cubic { grid: frame.grid().clone(), comps, mask })
            }
            InterpMethod::Spectral => Ok(Sampler::Spectral {
                interp: SpectralInterpolator::new(frame.grid(), frame.psi())?,
                eps: default_eps_node(frame),
                coef: p.hbar / p.mass,
                dim: frame.grid().dim(),
            }),
        }
    }

    fn velocity(&self, r: &[f64; 3]) -> std::result::Result<[f64; 3], Stop> {
        match self {
            Sampler::Cubic { grid, comps, mask } => {
                let mut v = [0.0; 3];
                for (a, c) in comps.iter().enumerate() {
                    v[a] = interp::cubic(grid, c, Some(mask), r).map_err(|e| match e {
                        Error::OutOfDomain => Stop::Exit,
                        _ => Stop::Node,
                    })?;
                }
                Ok(v)
            }
            Sampler::Spectral { interp, eps, coef, dim } => {
                let (psi, grad) = interp.eval(r);
                if psi.norm() < *eps {
                    return Err(Stop::Node);
                }
                let mut v = [0.0; 3];
                for a in 0..*dim {
                    v[a] = coef * (grad[a] / psi).im;
                }
                Ok(v)
            }
        }
    }

    fn usable(&self, r: &[f64; 3]) -> bool {
        self.velocity(r).is_ok()
    }
}

/// Particle state carried between frames.
#[derive(Clone)]
struct Particle {
    r: [f64; 3],
    status: PathStatus,
}

fn wrap(grid: &Grid, r: &mut [f64; 3]) {
    if grid.is_periodic() {
        for a in 0..grid.dim() {
            let lo = grid.lower()[a];
            r[a] = lo + (r[a] - lo).rem_euclid(grid.length(a));
        }
    }
}

/// RK4 from `t0` to `t1` through velocity fields linearly blended between
/// `s0` (at `t0`) and `s1` (at `t1`).
fn advance(grid: &Grid, p: &mut Particle, s0: &Sampler, s1: &Sampler, t0: f64, t1: f64, substeps: usize) {
    if p.status != PathStatus::Active {
        return;
    }
    let dim = grid.dim();
    let h = (t1 - t0) / substeps as f64;
    let vel = |r: &[f64; 3], alpha: f64| -> std::result::Result<[f64; 3], Stop> {
        let a = s0.velocity(r)?;
        let b = s1.velocity(r)?;
        let mut v = [0.0; 3];
        for k in 0..dim {
            v[k] = (1.0 - alpha) * a[k] + alpha * b[k];
        }
        Ok(v)
    };
    let shifted = |r: &[f64; 3], k: &[f64; 3], f: f64| {
        let mut out = *r;
        for a in 0..dim {
            out[a] += f * k[a];
        }
        out
    };
    for s in 0..substeps {
        let a0 = s as f64 / substeps as f64;
        let a1 = (s as f64 + 0.5) / substeps as f64;
        let a2 = (s as f64 + 1.0) / substeps as f64;
        let step = (|| {
            let k1 = vel(&p.r, a0)?;
            let k2 = vel(&shifted(&p.r, &k1, h / 2.0), a1)?;
            let k3 = vel(&shifted(&p.r, &k2, h / 2.0), a1)?;
            let k4 = vel(&shifted(&p.r, &k3, h), a2)?;
            let mut r = p.r;
            for a in 0..dim {
                r[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
            wrap(grid, &mut r);
            // the end point must itself be admissible
            vel(&r, a2)?;
            Ok(r)
        })();
        match step {
            Ok(r) => p.r = r,
            Err(Stop::Exit) => {
                p.status = PathStatus::Exited;
                return;
            }
            Err(Stop::Node) => {
                p.status = PathStatus::NodeCollision;
                return;
            }
        }
    }
}

/// Moves seeds whose interpolation stencil touches the node mask to the
/// nearest admissible grid point.
fn snap_seeds(frame: &WaveField, sampler: &Sampler, seeds: &[[f64; 3]]) -> Result<Vec<[f64; 3]>> {
    let g = frame.grid();
    let mut out = Vec::with_capacity(seeds.len());
    for (k, s) in seeds.iter().enumerate() {
        if !g.contains(s) {
            return Err(Error::OutOfDomain);
        }
        if sampler.usable(s) {
            out.push(*s);
            continue;
        }
        let best = (0..g.len())
            .map(|i| g.point(i))
            .filter(|r| sampler.usable(r))
            .min_by(|a, b| dist2(a, s).total_cmp(&dist2(b, s)))
            .ok_or_else(|| Error::Precondition("no admissible seed position on the grid".into()))?;
        log::warn!("seed {k} at {:?} touches the node mask; moved to {:?}", &s[..g.dim()], &best[..g.dim()]);
        out.push(best);
    }
    Ok(out)
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Integrates trajectories through a stored timeseries.
pub fn integrate_bohm_trajectories(ts: &Timeseries, seeds: &[[f64; 3]], substeps: usize) -> Result<TrajectoryEnsemble> {
    integrate_with(ts, seeds, TrajectoryOptions { substeps, ..Default::default() })
}

pub fn integrate_with(ts: &Timeseries, seeds: &[[f64; 3]], opts: TrajectoryOptions) -> Result<TrajectoryEnsemble> {
    if ts.len() < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: ts.len() });
    }
    let mut tracker = TrajectoryTracker::new(seeds.to_vec(), opts, 1);
    for (k, (t, f)) in ts.times.iter().zip(&ts.frames).enumerate() {
        tracker.observe(k, *t, f)?;
    }
    tracker.finish()
}

/// Integrates trajectories frame by frame during a run, so long runs need
/// not keep their frames. Uses every `every`-th frame.
pub struct TrajectoryTracker {
    opts: TrajectoryOptions,
    every: usize,
    seeds: Vec<[f64; 3]>,
    particles: Vec<Particle>,
    paths: Vec<Path>,
    prev: Option<(f64, Sampler)>,
    grid: Option<Grid>,
}

impl TrajectoryTracker {
    pub fn new(seeds: Vec<[f64; 3]>, opts: TrajectoryOptions, every: usize) -> Self {
        Self {
            opts,
            every: every.max(1),
            seeds,
            particles: Vec::new(),
            paths: Vec::new(),
            prev: None,
            grid: None,
        }
    }

    pub fn finish(self) -> Result<TrajectoryEnsemble> {
        let grid = self.grid.ok_or(Error::TooFewFrames { needed: 1, got: 0 })?;
        Ok(TrajectoryEnsemble { dim: grid.dim(), seeds: self.seeds, paths: self.paths })
    }
}

impl FrameObserver for TrajectoryTracker {
    fn observe(&mut self, step: usize, time: f64, frame: &WaveField) -> Result<()> {
        if step % self.every != 0 {
            return Ok(());
        }
        if self.opts.substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be at least 1".into()));
        }
        let sampler = Sampler::new(frame, self.opts.method)?;
        match self.prev.take() {
            None => {
                let snapped = snap_seeds(frame, &sampler, &self.seeds)?;
                self.particles = snapped.iter().map(|&r| Particle { r, status: PathStatus::Active }).collect();
                self.paths = snapped
                    .iter()
                    .map(|&r| Path { samples: vec![(time, r)], status: PathStatus::Active })
                    .collect();
                self.seeds = snapped;
                self.grid = Some(frame.grid().clone());
            }
            Some((t0, s0)) => {
                let grid = self.grid.as_ref().unwrap();
                let substeps = self.opts.substeps;
                self.particles
                    .par_iter_mut()
                    .for_each(|p| advance(grid, p, &s0, &sampler, t0, time, substeps));
                for (path, p) in self.paths.iter_mut().zip(&self.particles) {
                    if path.status == PathStatus::Active {
                        path.status = p.status;
                        if p.status == PathStatus::Active {
                            path.samples.push((time, p.r));
                        }
                    }
                }
            }
        }
        self.prev = Some((time, sampler));
        Ok(())
    }

    fn wants(&self, step: usize) -> bool {
        step % self.every == 0
    }
}

/// Refinement used for 1D densities; the grid density is interpolated
/// before it is integrated so the sampling law is accurate on coarse grids.
const REFINE: usize = 8;

/// `|ψ|²` of a 1D state on a grid refined `REFINE` times, returned as
/// `(first node, spacing, values)`. Periodic grids are refined by zero
/// padding in Fourier space, wall grids by cubic interpolation of `ψ`.
fn fine_density_1d(wf: &WaveField) -> (f64, f64, Vec<f64>) {
    let g = wf.grid();
    let n = g.len();
    let h = g.spacing(0) / REFINE as f64;
    if g.is_periodic() {
        let m = n * REFINE;
        let mut hat = wf.psi().to_vec();
        FftNd::with_shape(vec![n]).forward(&mut hat);
        let mut pad = vec![Complex64::default(); m];
        let half = n / 2;
        for k in 0..half {
            pad[k] = hat[k];
        }
        for k in half + 1..n {
            pad[m - n + k] = hat[k];
        }
        // split the Nyquist mode symmetrically
        pad[half] = hat[half] * 0.5;
        pad[m - half] = hat[half] * 0.5;
        FftNd::with_shape(vec![m]).inverse(&mut pad);
        let scale = m as f64 / n as f64;
        // close the period so the CDF runs over the whole box
        let mut rho: Vec<f64> = pad.iter().map(|z| (z * scale).norm_sqr()).collect();
        rho.push(rho[0]);
        (g.lower()[0], h, rho)
    } else {
        let m = (n - 1) * REFINE + 1;
        let rho = (0..m)
            .map(|i| {
                let x = g.lower()[0] + i as f64 * h;
                interp::cubic(g, wf.psi(), None, &[x]).map(|z: Complex64| z.norm_sqr()).unwrap_or(0.0)
            })
            .collect();
        (g.lower()[0], h, rho)
    }
}

/// Cumulative distribution on the nodes of a uniform partition
/// (trapezoid rule), normalized to end at one.
fn cdf_nodes(h: f64, rho: &[f64]) -> Vec<f64> {
    let mut cdf = vec![0.0; rho.len()];
    for i in 1..rho.len() {
        cdf[i] = cdf[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
    }
    let total = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

/// Draws positions distributed as `|ψ|²`.
///
/// In one dimension the density is refined, integrated with the trapezoid
/// rule and the cumulative distribution inverted linearly. In
/// more dimensions a cell is picked with probability `ρ_i w_i` and the
/// point is placed uniformly within half a spacing of its node.
pub fn sample_seeds<R: Rng + ?Sized>(wf: &WaveField, count: usize, rng: &mut R) -> Vec<[f64; 3]> {
    let g = wf.grid();
    let rho: Vec<f64> = wf.psi().iter().map(|z| z.norm_sqr()).collect();
    if g.dim() == 1 {
        let (x0, h, fine) = fine_density_1d(wf);
        let cdf = cdf_nodes(h, &fine);
        return (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                let j = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                let mut r = [x0 + (j as f64 - 1.0 + frac) * h, 0.0, 0.0];
                wrap(g, &mut r);
                r
            })
            .collect();
    }
    let w = g.quadrature_weights();
    let mut acc = 0.0;
    let cum: Vec<f64> = rho
        .iter()
        .zip(&w)
        .map(|(r, w)| {
            acc += r * w;
            acc
        })
        .collect();
    (0..count)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let i = cum.partition_point(|&c| c < u).min(g.len() - 1);
            let mut r = g.point(i);
            for (a, x) in r.iter_mut().enumerate().take(g.dim()) {
                let h = g.spacing(a);
                let lo = if !g.is_periodic() && g.multi_index(i)[a] == 0 { 0.0 } else { -0.5 * h };
                let hi = if !g.is_periodic() && g.multi_index(i)[a] == g.n_points()[a] - 1 { 0.0 } else { 0.5 * h };
                *x += rng.gen_range(lo..=hi);
            }
            wrap(g, &mut r);
            r
        })
        .collect()
}

/// 1-Wasserstein distance between the empirical law of `samples` and the
/// density `|ψ|²` of a 1D state, `∫|F_emp − F| dx`.
pub fn wasserstein1_1d(wf: &WaveField, samples: &[f64]) -> Result<f64> {
    let g = wf.grid();
    if g.dim() != 1 {
        return Err(Error::InvalidGrid("Wasserstein distance is implemented for 1D states".into()));
    }
    let (x0, h, fine) = fine_density_1d(wf);
    let cdf = cdf_nodes(h, &fine);
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    // integrate piecewise between the merged breakpoints of both CDFs
    let nodes: Vec<f64> = (0..cdf.len()).map(|i| x0 + i as f64 * h).collect();
    let f_at = |x: f64| -> f64 {
        let u = ((x - x0) / h).clamp(0.0, (nodes.len() - 1) as f64);
        let j = (u.floor() as usize).min(nodes.len() - 2);
        let t = u - j as f64;
        cdf[j] * (1.0 - t) + cdf[j + 1] * t
    };
    let mut points: Vec<f64> = nodes.clone();
    points.extend(xs.iter().copied());
    points.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut k = 0usize;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        while k < xs.len() && xs[k] <= a {
            k += 1;
        }
        let fe = k as f64 / n;
        // F is linear on [a, b]; integrate |F − fe| exactly
        let (fa, fb) = (f_at(a) - fe, f_at(b) - fe);
        total += if fa * fb >= 0.0 {
            0.5 * (fa.abs() + fb.abs()) * (b - a)
        } else {
            let c = fa.abs() / (fa.abs() + fb.abs());
            0.5 * (fa.abs() * c + fb.abs() * (1.0 - c)) * (b - a)
        };
    }
    Ok(total)
}

/// Expected 1-Wasserstein distance of `n` independent samples from the
/// density of `wf`, `√(2/π n) ∫√(F(1−F)) dx` to leading order.
pub fn wasserstein1_sampling_error(wf: &WaveField, n: usize) -> f64 {
    let (_, h, fine) = fine_density_1d(wf);
    let cdf = cdf_nodes(h, &fine);
    let integral: f64 = cdf.iter().map(|f| (f * (1.0 - f)).max(0.0).sqrt() * h).sum();
    (2.0 / (std::f64::consts::PI * n as f64)).sqrt() * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate::{propagate_schrodinger, PropagationConfig};
    use crate::states::{default_grid, realize, Potential, StateSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_drift_of_plane_modulated_packet() {
        let spec = StateSpec::plane_modulated(1.0, 3.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(0.01, 50, Potential::Zero).record_every(5);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let ens = integrate_bohm_trajectories(&ts, &[[0.0; 3], [1.0, 0.0, 0.0]], 4).unwrap();
        // broad packet: velocity 1 plus a small spreading correction
        for p in &ens.paths {
            assert_eq!(p.status, PathStatus::Active);
            let d = p.last()[0] - p.samples[0].1[0];
            assert!((d - 0.5).abs() < 1e-2, "{d}");
        }
        // the centre moves with exactly p0/m
        assert!((ens.paths[0].last()[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn centre_of_free_packet_stays_put() {
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(0.01, 100, Potential::Zero).record_every(10);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        for method in [InterpMethod::Cubic, InterpMethod::Spectral] {
            let ens = integrate_with(&ts, &[[0.0; 3]], TrajectoryOptions { substeps: 4, method }).unwrap();
            assert!(ens.max_displacement() < 1e-8, "{method:?}");
        }
    }

    #[test]
    fn spreading_trajectory_matches_closed_form() {
        // a free Gaussian's Bohm paths scale with the width: x(t) = x0 σ(t)/σ
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let g = Grid::cube(1, 256, -30.0, 30.0, true).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(0.01, 100, Potential::Zero);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        for method in [InterpMethod::Cubic, InterpMethod::Spectral] {
            let ens = integrate_with(&ts, &[[1.0, 0.0, 0.0]], TrajectoryOptions { substeps: 4, method }).unwrap();
            let expect = (1.0f64 + 0.25).sqrt();
            assert!((ens.paths[0].last()[0] - expect).abs() < 1e-5, "{method:?}: {}", ens.paths[0].last()[0]);
        }
    }

    #[test]
    fn exit_flag_on_wall_grid() {
        let g = Grid::cube(1, 64, -10.0, 10.0, false).unwrap();
        let spec = StateSpec::plane_modulated(2.0, 1.5);
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(0.01, 20, Potential::Zero).record_every(1);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let ens = integrate_bohm_trajectories(&ts, &[[g.upper()[0] - 0.35, 0.0, 0.0]], 2).unwrap();
        assert_ne!(ens.paths[0].status, PathStatus::Active);
    }

    #[test]
    fn seeds_are_snapped_off_the_mask() {
        let spec = StateSpec::oscillator1d(1, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let ts = Timeseries { times: vec![0.0, 1.0], frames: vec![wf.clone(), wf] };
        let ens = integrate_bohm_trajectories(&ts, &[[0.0; 3]], 1).unwrap();
        assert!(ens.seeds[0][0].abs() > 0.0);
        assert_eq!(ens.paths[0].status, PathStatus::Active);
    }

    #[test]
    fn seeds_follow_the_density() {
        let spec = StateSpec::gaussian_packet(0.5, 0.0, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 20_000;
        let xs: Vec<f64> = sample_seeds(&wf, n, &mut rng).iter().map(|r| r[0]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05, "{mean} {var}");
        let w = wasserstein1_1d(&wf, &xs).unwrap();
        assert!(w < 3.0 * wasserstein1_sampling_error(&wf, n), "{w}");
    }

    #[test]
    fn wasserstein_of_shift() {
        // W1 between a law and its translate is the shift
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<f64> = sample_seeds(&wf, 50_000, &mut rng).iter().map(|r| r[0] + 0.3).collect();
        let w = wasserstein1_1d(&wf, &xs).unwrap();
        assert!((w - 0.3).abs() < 0.02, "{w}");
    }

    #[test]
    fn multi_dimensional_seeds_stay_in_box() {
        let g = Grid::cube(2, 32, -8.0, 8.0, true).unwrap();
        let wf = WaveField::from_fn(g.clone(), Default::default(), |r| {
            num_complex::Complex64::new((-(r[0] * r[0] + r[1] * r[1]) / 2.0).exp(), 0.0)
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in sample_seeds(&wf, 500, &mut rng) {
            assert!(s[0] >= -8.0 && s[0] < 8.0 && s[1] >= -8.0 && s[1] < 8.0);
        }
    }
}

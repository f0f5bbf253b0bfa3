//! Residuals of the Madelung system on propagated frames.
//!
//! ```text
//! HJ:          ∂S/∂t + |∇S|²/2m + V (+ Q) = 0
//! continuity:  ∂ρ/∂t + ∇·j = 0
//! ```
//!
//! `∂S/∂t = ħ Im(ψ̇ ψ*)/|ψ|²` with a centred difference for `ψ̇`, so the
//! residual never sees the branch of `arg ψ`. `S` is only defined up to a
//! constant, so the HJ residual is reported after removing its
//! density-weighted mean over the interior.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::propagate::{FrameObserver, Timeseries, Window};
use crate::diff::Differentiator;
use crate::error::{Error, Result};
use crate::field::{ScalarField, WaveField};
use crate::wavefield::{default_interior, raw_bohm_fields, Derivatives};

/// Which Hamilton–Jacobi equation to test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HjForm {
    /// With the quantum potential; satisfied by Schrödinger evolution.
    #[default]
    Quantum,
    /// Without it; satisfied by the classical nonlinear evolution.
    Classical,
}

/// Residual fields at one interior frame.
#[derive(Clone, Debug)]
pub struct ResidualFrame {
    pub time: f64,
    /// HJ residual with the constant offset removed.
    pub hj: ScalarField,
    /// The removed offset (the gauge constant `∂S/∂t` absorbs).
    pub hj_offset: f64,
    pub continuity: ScalarField,
    pub hj_max: f64,
    pub continuity_max: f64,
}

/// Summary numbers of a [`ResidualFrame`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub time: f64,
    pub hj_max: f64,
    pub hj_offset: f64,
    pub continuity_max: f64,
}

impl From<&ResidualFrame> for ResidualSample {
    fn from(f: &ResidualFrame) -> Self {
        Self { time: f.time, hj_max: f.hj_max, hj_offset: f.hj_offset, continuity_max: f.continuity_max }
    }
}

/// Residuals at `cur` from its neighbours `prev` and `next`, `tau` apart.
pub fn residual_at(
    prev: &WaveField,
    cur: &WaveField,
    next: &WaveField,
    tau: f64,
    time: f64,
    v: &ScalarField,
    form: HjForm,
) -> Result<ResidualFrame> {
    let g = cur.grid();
    if prev.grid() != g || next.grid() != g || v.grid() != g {
        return Err(Error::GridMismatch);
    }
    let p = cur.params();
    let psi = cur.psi();
    let diff = Differentiator::new(g);
    let d = Derivatives::compute(cur, &diff);
    let (grad_s, q) = raw_bohm_fields(cur, &d);
    let interior = default_interior(cur);
    let n = g.len();
    let mut hj = vec![0.0; n];
    let mut cont = vec![0.0; n];
    for i in 0..n {
        let rho = psi[i].norm_sqr();
        let dpsi = (next.psi()[i] - prev.psi()[i]) / (2.0 * tau);
        let drho = (next.psi()[i].norm_sqr() - prev.psi()[i].norm_sqr()) / (2.0 * tau);
        // ∇·j = (ħ/m) Im(ψ* ∇²ψ)
        let div_j = p.hbar / p.mass * (psi[i].conj() * d.laplacian[i]).im;
        cont[i] = drho + div_j;
        if rho > f64::MIN_POSITIVE {
            let ds_dt = p.hbar * (dpsi * psi[i].conj()).im / rho;
            let kin: f64 = grad_s.iter().map(|c| c[i] * c[i]).sum::<f64>() / (2.0 * p.mass);
            let extra = if form == HjForm::Quantum { q[i] } else { 0.0 };
            hj[i] = ds_dt + kin + v.values()[i] + extra;
        } else {
            hj[i] = f64::NAN;
        }
    }
    let mask: Vec<bool> = interior.iter().map(|&x| !x).collect();
    let (num, den) = (0..n)
        .filter(|&i| interior[i])
        .fold((0.0, 0.0), |(a, b), i| (a + hj[i] * psi[i].norm_sqr(), b + psi[i].norm_sqr()));
    let offset = if den > 0.0 { num / den } else { 0.0 };
    hj.iter_mut().for_each(|x| *x -= offset);
    let hj = ScalarField::with_mask(g.clone(), hj, mask.clone());
    let continuity = ScalarField::with_mask(g.clone(), cont, mask);
    let all = vec![true; n];
    Ok(ResidualFrame {
        time,
        hj_max: hj.max_abs_over(&all),
        continuity_max: continuity.max_abs_over(&all),
        hj,
        hj_offset: offset,
        continuity,
    })
}

/// Residuals at every frame that has a neighbour on each side.
pub fn madelung_residuals(ts: &Timeseries, v: &ScalarField, form: HjForm) -> Result<Vec<ResidualFrame>> {
    if ts.len() < 3 {
        return Err(Error::TooFewFrames { needed: 3, got: ts.len() });
    }
    let tau = ts.uniform_spacing()?;
    (1..ts.len() - 1)
        .map(|k| residual_at(&ts.frames[k - 1], &ts.frames[k], &ts.frames[k + 1], tau, ts.times[k], v, form))
        .collect()
}

/// Evaluates residuals during a run without storing frames: every
/// `sample_every` steps, using the frames one step before and after.
pub struct MadelungMonitor {
    sample_every: usize,
    v: ScalarField,
    forms: Vec<HjForm>,
    window: Window,
    /// One list of samples per requested form.
    pub samples: Vec<Vec<ResidualSample>>,
}

impl MadelungMonitor {
    pub fn new(sample_every: usize, v: ScalarField, forms: &[HjForm]) -> Self {
        Self {
            sample_every: sample_every.max(1),
            v,
            forms: forms.to_vec(),
            window: Window::default(),
            samples: vec![Vec::new(); forms.len()],
        }
    }

    pub fn max_hj(&self, form_index: usize) -> f64 {
        self.samples[form_index].iter().map(|s| s.hj_max).fold(0.0, f64::max)
    }

    pub fn max_continuity(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.iter().map(|s| s.continuity_max).fold(0.0, f64::max))
    }
}

impl FrameObserver for MadelungMonitor {
    fn observe(&mut self, step: usize, time: f64, frame: &WaveField) -> Result<()> {
        self.window.push(step, time, frame);
        if self.window.frames.len() < 3 {
            return Ok(());
        }
        let (s0, t0, f0) = &self.window.frames[0];
        let (s1, t1, f1) = &self.window.frames[1];
        let (s2, t2, f2) = &self.window.frames[2];
        if *s1 == 0 || s1 % self.sample_every != 0 || *s0 + 1 != *s1 || *s1 + 1 != *s2 {
            return Ok(());
        }
        let tau = 0.5 * (t2 - t0);
        for (k, form) in self.forms.iter().enumerate() {
            let r = residual_at(f0, f1, f2, tau, *t1, &self.v, *form)?;
            self.samples[k].push((&r).into());
        }
        Ok(())
    }

    fn wants(&self, step: usize) -> bool {
        let r = step % self.sample_every;
        r == 0 || r == 1 || r + 1 == self.sample_every
    }
}

/// `ψ` multiplied by `e^{iθ}`, for gauge tests.
pub fn rephased(wf: &WaveField, theta: f64) -> WaveField {
    wf.scaled(Complex64::from_polar(1.0, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate::{propagate_observed, propagate_schrodinger, Dynamics, PropagationConfig};
    use crate::states::{default_grid, exact_potential, realize, Potential, StateSpec};

    #[test]
    fn eigenstate_residuals_vanish() {
        let spec = StateSpec::oscillator1d(0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let pot = exact_potential(&spec);
        let cfg = PropagationConfig::new(1e-3, 4, pot);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let res = madelung_residuals(&ts, &pot.sample(wf.grid()), HjForm::Quantum).unwrap();
        assert_eq!(res.len(), 3);
        for r in &res {
            // Strang splitting makes the eigenstate breathe at O(dt²)
            assert!(r.hj_max < 1e-5, "{}", r.hj_max);
            assert!(r.continuity_max < 1e-8, "{}", r.continuity_max);
            assert!(r.hj_offset.abs() < 1e-6, "{}", r.hj_offset);
        }
    }

    #[test]
    fn moving_packet_residuals_are_small_and_second_order() {
        let spec = StateSpec::gaussian_packet(-1.0, 1.0, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let pot = Potential::Harmonic { mass: 1.0, omega: 0.7 };
        let mut maxes = Vec::new();
        for dt in [4e-3, 2e-3] {
            let steps = (0.4 / dt) as usize;
            let cfg = PropagationConfig::new(dt, steps, pot);
            let mut mon = MadelungMonitor::new(steps / 4, pot.sample(&g), &[HjForm::Quantum]);
            propagate_observed(&wf, &cfg, Dynamics::Schrodinger, &mut mon).unwrap();
            maxes.push((mon.max_hj(0), mon.max_continuity()));
        }
        assert!(maxes[0].0 / maxes[1].0 > 3.5, "{maxes:?}");
        assert!(maxes[0].1 / maxes[1].1 > 3.5, "{maxes:?}");
    }

    #[test]
    fn monitor_matches_stored_series() {
        let spec = StateSpec::gaussian_packet(0.0, 0.5, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(1e-2, 6, Potential::Zero);
        let v = Potential::Zero.sample(&g);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let stored = madelung_residuals(&ts, &v, HjForm::Quantum).unwrap();
        let mut mon = MadelungMonitor::new(2, v, &[HjForm::Quantum]);
        propagate_observed(&wf, &cfg, Dynamics::Schrodinger, &mut mon).unwrap();
        assert_eq!(mon.samples[0].len(), 2);
        // the residual cancels O(1) terms, so rounding in τ shows up at 1e-12
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        assert!(close(mon.samples[0][0].hj_max, stored[1].hj_max));
        assert!(close(mon.samples[0][1].continuity_max, stored[3].continuity_max));
    }

    #[test]
    fn rejects_short_or_uneven_series() {
        let spec = StateSpec::gaussian_packet(0.0, 0.5, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let v = Potential::Zero.sample(&g);
        let ts = Timeseries { times: vec![0.0, 1.0], frames: vec![wf.clone(), wf.clone()] };
        assert!(matches!(madelung_residuals(&ts, &v, HjForm::Quantum), Err(Error::TooFewFrames { .. })));
        let ts = Timeseries { times: vec![0.0, 1.0, 3.0], frames: vec![wf.clone(), wf.clone(), wf] };
        assert!(matches!(madelung_residuals(&ts, &v, HjForm::Quantum), Err(Error::NonUniformTimes)));
    }

    #[test]
    fn residual_is_gauge_invariant() {
        let spec = StateSpec::gaussian_packet(0.0, 0.5, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let cfg = PropagationConfig::new(1e-2, 2, Potential::Zero);
        let ts = propagate_schrodinger(&wf, &cfg).unwrap();
        let v = Potential::Zero.sample(&g);
        let a = residual_at(&ts.frames[0], &ts.frames[1], &ts.frames[2], 1e-2, 1e-2, &v, HjForm::Quantum).unwrap();
        let b = residual_at(
            &rephased(&ts.frames[0], 1.3),
            &rephased(&ts.frames[1], 1.3),
            &rephased(&ts.frames[2], 1.3),
            1e-2,
            1e-2,
            &v,
            HjForm::Quantum,
        )
        .unwrap();
        assert!((a.hj_max - b.hj_max).abs() < 1e-9);
    }
}

//! Fermi operator, Fermi Hamiltonian and Fermi sets.
//!
//! For a state `ψ = R e^{iS/ħ}` the Fermi Hamiltonian is
//! `H_F(r, p) = |p − ∇S(r)|²/2m − Q(r)`; its zero set is the Fermi
//! hypersurface and `{H_F ≤ 0}` the Fermi set. The operator
//! `Ĥ_F = (−iħ∇ − ∇S)²/2m − Q` annihilates `ψ` identically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{masked_gradient, Differentiator};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField, WaveField};
use crate::grid::{Grid, PhysicsParams};
use crate::interp;
use crate::states::{StateKind, StateSpec};
use crate::symplectic::QuadraticForm;
use crate::wavefield::{
    bohm_momentum_field_masked, default_eps_node, default_interior, node_mask, quantum_potential_with,
    raw_bohm_fields, Derivatives,
};

/// Largest `|∇S|` tolerated by the real-state precondition.
pub const REAL_STATE_TOLERANCE: f64 = 1e-8;

/// `∇S₀` and `Q₀` of a state, sharing one grid and node mask.
#[derive(Clone, Debug)]
pub struct FermiHamiltonian {
    grad_s: VectorField,
    q: ScalarField,
    params: PhysicsParams,
    /// The grid points viewed as a closed box, so off-grid evaluation never
    /// wraps across a periodic seam (the fields are not periodic).
    nodes: Grid,
}

impl FermiHamiltonian {
    pub fn grad_s(&self) -> &VectorField {
        &self.grad_s
    }

    pub fn q(&self) -> &ScalarField {
        &self.q
    }

    pub fn params(&self) -> PhysicsParams {
        self.params
    }

    pub fn grid(&self) -> &Grid {
        self.q.grid()
    }

    pub fn dim(&self) -> usize {
        self.q.grid().dim()
    }

    /// Cubic interpolation of `∇S₀` and `Q₀` at `r`.
    pub fn fields_at(&self, r: &[f64]) -> Result<([f64; 3], f64)> {
        let mask = Some(self.q.mask());
        let q = interp::cubic(&self.nodes, self.q.values(), mask, r)?;
        let mut g = [0.0; 3];
        for (axis, ga) in g.iter_mut().enumerate().take(self.dim()) {
            *ga = interp::cubic(&self.nodes, self.grad_s.component(axis), mask, r)?;
        }
        Ok((g, q))
    }

    /// `H_F(r, p)`.
    pub fn eval(&self, r: &[f64], p: &[f64]) -> Result<f64> {
        let (g, q) = self.fields_at(r)?;
        let k: f64 = (0..self.dim()).map(|a| (p[a] - g[a]).powi(2)).sum();
        Ok(k / (2.0 * self.params.mass) - q)
    }
}

fn node_box(grid: &Grid) -> Result<Grid> {
    let upper = (0..grid.dim()).map(|a| grid.coord(a, grid.n_points()[a] - 1)).collect();
    Grid::new(grid.n_points().to_vec(), grid.lower().to_vec(), upper, false)
}

pub fn build_fermi_hamiltonian(wf: &WaveField) -> Result<FermiHamiltonian> {
    let eps = default_eps_node(wf);
    let q = quantum_potential_with(wf, eps)?;
    let grad_s = bohm_momentum_field_masked(wf, q.mask());
    Ok(FermiHamiltonian { grad_s, q, params: wf.params(), nodes: node_box(wf.grid())? })
}

pub fn eval_fermi(fh: &FermiHamiltonian, r: &[f64], p: &[f64]) -> Result<f64> {
    fh.eval(r, p)
}

/// `‖Ĥ_F ψ‖ / ‖ψ‖` over off-mask points.
///
/// With `A = ∇S` the operator is applied as
/// `Ĥ_F ψ = (−iħ∇ − A)·u / 2m − Qψ` where `u = (−iħ∇ − A)ψ`. Every factor
/// carries a power of `ψ`, so `u` stays smooth into the tails and through
/// zeros of `ψ` and can be differentiated with the same scheme as `ψ`.
pub fn fermi_operator_residual(wf: &WaveField) -> Result<f64> {
    let g = wf.grid();
    let p = wf.params();
    let psi = wf.psi();
    let diff = Differentiator::new(g);
    let d = Derivatives::compute(wf, &diff);
    let (grad_s, q) = raw_bohm_fields(wf, &d);
    let hbar = p.hbar;
    let minus_i_hbar = Complex64::new(0.0, -hbar);
    let u: Vec<Vec<Complex64>> = (0..g.dim())
        .map(|a| {
            (0..g.len())
                .map(|i| {
                    // where ψ vanishes, Aψ → 0 for bounded A
                    let a_psi = if grad_s[a][i].is_nan() { Complex64::default() } else { psi[i] * grad_s[a][i] };
                    minus_i_hbar * d.gradient[a][i] - a_psi
                })
                .collect()
        })
        .collect();
    let div_u = diff.divergence(&u);
    let mask = node_mask(wf, default_eps_node(wf));
    let w = g.quadrature_weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in (0..g.len()).filter(|&i| !mask[i]) {
        let a_dot_u: Complex64 = (0..g.dim()).map(|a| u[a][i] * grad_s[a][i]).sum();
        let h = (minus_i_hbar * div_u[i] - a_dot_u) / (2.0 * p.mass) - psi[i] * q[i];
        num += h.norm_sqr() * w[i];
        den += psi[i].norm_sqr() * w[i];
    }
    Ok((num / den).sqrt())
}

/// Pointwise energy bookkeeping `E = E_kin + Q + V`.
#[derive(Clone, Debug)]
pub struct EnergyDecomposition {
    /// `|∇S|²/2m`.
    pub kinetic: ScalarField,
    pub quantum: ScalarField,
    pub potential: ScalarField,
    pub total: ScalarField,
}

pub fn energy_decomposition(wf: &WaveField, v: &ScalarField) -> Result<EnergyDecomposition> {
    if v.grid() != wf.grid() {
        return Err(Error::GridMismatch);
    }
    let q = quantum_potential_with(wf, default_eps_node(wf))?;
    let grad_s = bohm_momentum_field_masked(wf, q.mask());
    let m = wf.params().mass;
    let kin: Vec<f64> = (0..wf.grid().len())
        .map(|i| grad_s.components().iter().map(|c| c[i] * c[i]).sum::<f64>() / (2.0 * m))
        .collect();
    let kinetic = ScalarField::with_mask(wf.grid().clone(), kin, q.mask().to_vec());
    let potential = v.with_extra_mask(q.mask());
    let total = kinetic.add(&q)?.add(&potential)?;
    Ok(EnergyDecomposition { kinetic, quantum: q, potential, total })
}

/// Largest `|∇S|` over the interior, for the real-state precondition.
fn max_phase_gradient(wf: &WaveField, interior: &[bool]) -> f64 {
    let mask = node_mask(wf, default_eps_node(wf));
    bohm_momentum_field_masked(wf, &mask).max_norm_over(interior)
}

fn require_real(wf: &WaveField, interior: &[bool]) -> Result<()> {
    let gs = max_phase_gradient(wf, interior);
    if gs >= REAL_STATE_TOLERANCE {
        return Err(Error::Precondition(format!(
            "state is not real up to a constant phase: max |∇S| = {gs:.3e}"
        )));
    }
    Ok(())
}

/// Largest `|V + Q − E|` over the interior (away from edges and nodes).
pub fn stationary_identity_check(wf: &WaveField, v: &ScalarField, energy: f64) -> Result<f64> {
    if v.grid() != wf.grid() {
        return Err(Error::GridMismatch);
    }
    let interior = default_interior(wf);
    require_real(wf, &interior)?;
    let q = quantum_potential_with(wf, default_eps_node(wf))?;
    let sum = q.add(v)?;
    Ok(sum.map(|x| x - energy).max_abs_over(&interior))
}

/// `F_c + F_Q = −∇V − ∇Q` on fourth-order local stencils.
pub fn force_balance_field(wf: &WaveField, v: &ScalarField) -> Result<VectorField> {
    if v.grid() != wf.grid() {
        return Err(Error::GridMismatch);
    }
    let interior = default_interior(wf);
    require_real(wf, &interior)?;
    let q = quantum_potential_with(wf, default_eps_node(wf))?;
    let (gq, mq) = masked_gradient(wf.grid(), q.values(), q.mask());
    let (gv, mv) = masked_gradient(wf.grid(), v.values(), v.mask());
    let mask: Vec<bool> = mq.iter().zip(&mv).map(|(a, b)| *a || *b).collect();
    let comps = gq.iter().zip(&gv).map(|(a, b)| a.iter().zip(b).map(|(x, y)| -x - y).collect()).collect();
    Ok(VectorField::with_mask(wf.grid().clone(), comps, mask))
}

/// Closed-form Fermi set of an oscillator ground state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermiSetQuadratic {
    pub form: QuadraticForm,
    /// Units the matrix and level are expressed in.
    pub units: PhysicsParams,
}

/// `A = diag(mω² I, I/m)` and `E` equal to the ground energy.
pub fn fermi_set_quadratic(spec: &StateSpec) -> Result<FermiSetQuadratic> {
    spec.validate()?;
    let PhysicsParams { mass, hbar } = spec.params;
    let (n, omega) = match spec.kind {
        StateKind::Coherent3d { omega } => (3, omega),
        StateKind::Oscillator1d { n: 0, omega } => (1, omega),
        _ => {
            return Err(Error::NoClosedForm(format!(
                "{:?}: only oscillator ground states have a quadratic Fermi set",
                spec.kind
            )))
        }
    };
    let mut a = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        a[(k, k)] = mass * omega * omega;
        a[(k + n, k + n)] = 1.0 / mass;
    }
    let energy = n as f64 * hbar * omega / 2.0;
    Ok(FermiSetQuadratic { form: QuadraticForm::new(a, energy)?, units: spec.params })
}

/// Monte-Carlo estimate of the Fermi-set volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Volume of `{H_F ≤ 0}` by uniform sampling.
///
/// Positions are drawn uniformly over the sampled box and momenta from the
/// cube of half-width `√(2m max Q)` around `∇S(r)`, which contains every
/// momentum with `H_F ≤ 0`. Positions whose interpolation stencil touches
/// the node mask count as outside.
pub fn fermi_volume_mc<R: Rng + ?Sized>(fh: &FermiHamiltonian, samples: usize, rng: &mut R) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let dim = fh.dim();
    let all = vec![true; fh.grid().len()];
    let q_max = fh.q.map(|x| x.max(0.0)).max_abs_over(&all);
    if q_max == 0.0 {
        return Ok(VolumeEstimate { volume: 0.0, std_error: 0.0, samples });
    }
    let half = (2.0 * fh.params.mass * q_max).sqrt();
    let lo = fh.nodes.lower();
    let hi = fh.nodes.upper();
    let box_volume: f64 = (0..dim).map(|a| (hi[a] - lo[a]) * 2.0 * half).product();
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut r = [0.0; 3];
        for a in 0..dim {
            r[a] = rng.gen_range(lo[a]..=hi[a]);
        }
        let Ok((g, q)) = fh.fields_at(&r) else { continue };
        let mut k = 0.0;
        for ga in g.iter().take(dim) {
            let dp = rng.gen_range(-half..=half);
            k += dp * dp;
            let _ = ga;
        }
        if k / (2.0 * fh.params.mass) - q <= 0.0 {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        volume: box_volume * f,
        std_error: box_volume * (f * (1.0 - f) / samples as f64).sqrt(),
        samples,
    })
}

/// A sampled point of the Fermi hypersurface and the value of `H_F` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub r: [f64; 3],
    pub p: [f64; 3],
    pub h: f64,
}

/// Points on `H_F = 0`: `r` uniform over the region where `Q > 0`,
/// `p = ∇S(r) + √(2mQ(r))·n` with `n` uniform on the unit sphere.
pub fn sample_fermi_surface<R: Rng + ?Sized>(
    fh: &FermiHamiltonian,
    count: usize,
    rng: &mut R,
) -> Result<Vec<SurfacePoint>> {
    let dim = fh.dim();
    let lo = fh.nodes.lower().to_vec();
    let hi = fh.nodes.upper().to_vec();
    let mut out = Vec::with_capacity(count);
    let max_tries = count.saturating_mul(10_000).max(10_000);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > max_tries {
            return Err(Error::Precondition("no region with Q > 0 found for surface sampling".into()));
        }
        let mut r = [0.0; 3];
        for a in 0..dim {
            r[a] = rng.gen_range(lo[a]..=hi[a]);
        }
        let Ok((g, q)) = fh.fields_at(&r) else { continue };
        if q <= 0.0 {
            continue;
        }
        let dir = unit_vector(dim, rng);
        let radius = (2.0 * fh.params.mass * q).sqrt();
        let mut p = [0.0; 3];
        for a in 0..dim {
            p[a] = g[a] + radius * dir[a];
        }
        let h = fh.eval(&r, &p)?;
        out.push(SurfacePoint { r, p, h });
    }
    Ok(out)
}

/// Uniform direction by normalizing a Gaussian vector (Box–Muller).
fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> [f64; 3] {
    loop {
        let mut v = [0.0; 3];
        for x in v.iter_mut().take(dim) {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            *x = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{default_grid, exact_energy, exact_potential, realize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn osc1d() -> WaveField {
        let spec = StateSpec::oscillator1d(0, 1.0);
        realize(&spec, &default_grid(&spec).unwrap()).unwrap()
    }

    #[test]
    fn fermi_hamiltonian_of_ground_state() {
        let wf = osc1d();
        let fh = build_fermi_hamiltonian(&wf).unwrap();
        // E = 1/2 in one dimension, so (0, ±1) lies on the surface
        assert!(eval_fermi(&fh, &[0.0], &[1.0]).unwrap().abs() < 1e-9);
        assert!((eval_fermi(&fh, &[0.0], &[0.0]).unwrap() + 0.5).abs() < 1e-9);
        assert!((eval_fermi(&fh, &[0.3], &[0.2]).unwrap() - (0.02 - 0.5 + 0.045)).abs() < 1e-9);
        assert!(matches!(eval_fermi(&fh, &[100.0], &[0.0]), Err(Error::OutOfDomain)));
    }

    #[test]
    fn plane_modulated_momentum() {
        let spec = StateSpec::plane_modulated(1.5, 2.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let fh = build_fermi_hamiltonian(&wf).unwrap();
        let (g, _) = fh.fields_at(&[0.37]).unwrap();
        assert!((g[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn residual_small_for_smooth_states() {
        for spec in [
            StateSpec::oscillator1d(0, 1.0),
            StateSpec::oscillator1d(2, 1.0),
            StateSpec::gaussian_packet(0.5, 2.0, 1.0),
            StateSpec::plane_modulated(1.0, 1.5),
            StateSpec::well1d(2, 1.0),
        ] {
            let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
            let r = fermi_operator_residual(&wf).unwrap();
            assert!(r < 1e-7, "{spec:?}: {r:e}");
        }
    }

    #[test]
    fn real_state_operator_reduces_to_laplacian_minus_q() {
        // for real ψ the Fermi operator is −(ħ²/2m)∇² − Q₀
        let wf = osc1d();
        let g = wf.grid();
        let diff = Differentiator::new(g);
        let d = Derivatives::compute(&wf, &diff);
        let (_, q) = raw_bohm_fields(&wf, &d);
        let grad = diff.gradient(wf.psi());
        let divgrad = diff.divergence(&grad);
        let mask = node_mask(&wf, default_eps_node(&wf));
        let direct: f64 = (0..g.len())
            .filter(|&i| !mask[i])
            .map(|i| (divgrad[i] * -0.5 - wf.psi()[i] * q[i]).norm_sqr() * g.spacing(0))
            .sum::<f64>()
            .sqrt();
        let via_operator = fermi_operator_residual(&wf).unwrap();
        assert!((direct - via_operator).abs() < 1e-8);
    }

    #[test]
    fn energy_bookkeeping() {
        let spec = StateSpec::well1d(2, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let v = exact_potential(&spec).sample(wf.grid());
        let e = energy_decomposition(&wf, &v).unwrap();
        let inner = default_interior(&wf);
        let e2 = exact_energy(&spec).unwrap();
        assert!(e.kinetic.max_abs_over(&inner) == 0.0);
        assert!(e.total.map(|x| x - e2).max_abs_over(&inner) < 1e-6);
        assert!(e.quantum.map(|x| x - 2.0 * PI * PI).max_abs_over(&inner) < 1e-6);
    }

    #[test]
    fn broad_packet_kinetic_energy() {
        let spec = StateSpec::plane_modulated(1.0, 20.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let v = ScalarField::new(wf.grid().clone(), vec![0.0; wf.grid().len()]);
        let e = energy_decomposition(&wf, &v).unwrap();
        // bulk: within one width of the centre
        let bulk: Vec<bool> = (0..wf.grid().len()).map(|i| wf.grid().coord(0, i).abs() < 20.0).collect();
        assert!(e.kinetic.map(|x| x - 0.5).max_abs_over(&bulk) < 1e-3);
        assert!(e.quantum.max_abs_over(&bulk) < 1e-3);
    }

    #[test]
    fn stationary_identity_rejects_moving_packet() {
        let spec = StateSpec::gaussian_packet(0.0, 1.0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let v = ScalarField::new(wf.grid().clone(), vec![0.0; wf.grid().len()]);
        assert!(matches!(stationary_identity_check(&wf, &v, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn force_balance_nonzero_off_eigenstate() {
        // ground-state shape with the wrong width is not an eigenstate of V
        let spec = StateSpec::gaussian_packet(0.0, 0.0, 1.0);
        let wf = realize(&spec, &default_grid(&spec).unwrap()).unwrap();
        let v = crate::states::Potential::Harmonic { mass: 1.0, omega: 1.0 }.sample(wf.grid());
        let f = force_balance_field(&wf, &v).unwrap();
        assert!(f.max_norm_over(&default_interior(&wf)) > 0.1);
    }

    #[test]
    fn quadratic_sets() {
        let s = fermi_set_quadratic(&StateSpec::coherent3d(1.0)).unwrap();
        assert_eq!(s.form.matrix(), &nalgebra::DMatrix::identity(6, 6));
        assert_eq!(s.form.energy(), 1.5);
        let s = fermi_set_quadratic(&StateSpec::oscillator1d(0, 1.0)).unwrap();
        assert_eq!(s.form.matrix(), &nalgebra::DMatrix::identity(2, 2));
        assert_eq!(s.form.energy(), 0.5);
        let spec = StateSpec::coherent3d(3.0).with_params(PhysicsParams::new(2.0, 1.0).unwrap());
        let s = fermi_set_quadratic(&spec).unwrap();
        let d: Vec<f64> = s.form.matrix().diagonal().iter().copied().collect();
        assert_eq!(d, vec![18.0, 18.0, 18.0, 0.5, 0.5, 0.5]);
        assert_eq!(s.form.energy(), 4.5);
        assert!(matches!(
            fermi_set_quadratic(&StateSpec::well1d(1, 1.0)),
            Err(Error::NoClosedForm(_))
        ));
        assert!(fermi_set_quadratic(&StateSpec::oscillator1d(1, 1.0)).is_err());
    }

    #[test]
    fn monte_carlo_volume_matches_quadrature() {
        let wf = osc1d();
        let fh = build_fermi_hamiltonian(&wf).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let est = fermi_volume_mc(&fh, 200_000, &mut rng).unwrap();
        // quadrature over r of the momentum interval length 2√(2mQ⁺)
        let g = wf.grid();
        let quad: f64 = (0..g.len())
            .filter(|&i| !fh.q().is_masked(i))
            .map(|i| 2.0 * (2.0 * fh.q().values()[i].max(0.0)).sqrt() * g.spacing(0))
            .sum();
        // the 1D ground Fermi set is the disc of radius 1
        assert!((quad - PI).abs() < 1e-2);
        assert!((est.volume - quad).abs() < 4.0 * est.std_error, "{est:?} vs {quad}");
    }

    #[test]
    fn surface_points_have_zero_energy() {
        let wf = osc1d();
        let fh = build_fermi_hamiltonian(&wf).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for pt in sample_fermi_surface(&fh, 200, &mut rng).unwrap() {
            assert!(pt.h.abs() < 1e-12);
            assert!((pt.p[0].powi(2) / 2.0 + pt.r[0].powi(2) / 2.0 - 0.5).abs() < 1e-8);
        }
    }
}

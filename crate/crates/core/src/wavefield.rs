//! Polar decomposition and the pointwise Bohm observables of a wavefunction.
//!
//! Every quantity involving the phase goes through `ψ` and its derivatives,
//! never through an unwrapped `arg ψ`:
//!
//! ```text
//! ∇S       = ħ Im(ψ* ∇ψ) / |ψ|²
//! ∇²R / R  = Re(∇²ψ / ψ) + |∇S / ħ|²
//! Q        = -(ħ² / 2m) ∇²R / R
//! j        = (ħ / m) Im(ψ* ∇ψ)          (= ρ ∇S / m)
//! ```
//!
//! The second line follows from expanding `∇²(R e^{iS/ħ})`. It keeps `Q`
//! smooth through sign changes of a real wavefunction, where `R = |ψ|` has
//! a kink.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::diff::{masked_gradient, Differentiator, Scheme};
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::{weighted_sum, ScalarField, VectorField, WaveField};
use crate::grid::Grid;

/// Node threshold relative to `max R`.
pub const DEFAULT_NODE_THRESHOLD: f64 = 1e-6;

/// Cells excluded next to grid edges and masked regions in error metrics.
pub const DEFAULT_INTERIOR_MARGIN: usize = 3;

/// Tolerance on `∫|ψ|² = 1` for operations that require a normalized state.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Amplitude, action and node mask of a wavefunction.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarField {
    pub grid: Grid,
    pub amplitude: Vec<f64>,
    /// `ħ·arg ψ` on the principal branch; defined modulo `2πħ` and only up
    /// to the global gauge.
    pub action: Vec<f64>,
    pub node_mask: Vec<bool>,
    pub hbar: f64,
}

impl PolarField {
    /// `R e^{iS/ħ}` at every point.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        self.amplitude
            .iter()
            .zip(&self.action)
            .map(|(&r, &s)| Complex64::from_polar(r, s / self.hbar))
            .collect()
    }
}

/// Absolute node threshold `1e-6 · max R`.
pub fn default_eps_node(wf: &WaveField) -> f64 {
    DEFAULT_NODE_THRESHOLD * wf.max_amplitude()
}

pub fn node_mask(wf: &WaveField, eps_node: f64) -> Vec<bool> {
    wf.psi().iter().map(|z| z.norm() < eps_node).collect()
}

/// Points at least `margin` cells from every grid edge and from every
/// masked point (Chebyshev distance).
pub fn interior_mask(grid: &Grid, mask: &[bool], margin: usize) -> Vec<bool> {
    let mut blocked = mask.to_vec();
    // separable max filter grows the mask into a cube of half-width `margin`
    for axis in 0..grid.dim() {
        let n = grid.n_points()[axis];
        let stride = grid.stride(axis);
        let src = blocked.clone();
        for flat in 0..grid.len() {
            if !src[flat] {
                continue;
            }
            let i = (flat / stride) % n;
            let lo = i.saturating_sub(margin);
            let hi = (i + margin).min(n - 1);
            for j in lo..=hi {
                blocked[flat - i * stride + j * stride] = true;
            }
        }
    }
    (0..grid.len()).map(|i| !blocked[i] && grid.edge_distance(i) >= margin).collect()
}

/// Node mask plus both endpoints of every grid edge across which `ψ`
/// changes sign: the phase jumps between neighbours by `π` to within
/// 0.1 rad. Catches nodes of real states that fall between grid points
/// without flagging resolved travelling waves.
pub fn nodal_set(wf: &WaveField, eps_node: f64) -> Vec<bool> {
    let g = wf.grid();
    let psi = wf.psi();
    let mut out = node_mask(wf, eps_node);
    for axis in 0..g.dim() {
        let n = g.n_points()[axis];
        let stride = g.stride(axis);
        for i in 0..g.len() {
            let k = (i / stride) % n;
            let j = if k + 1 < n {
                i + stride
            } else if g.is_periodic() {
                i + stride - n * stride
            } else {
                continue;
            };
            let z = psi[i].conj() * psi[j];
            if z.re < 0.0 && z.im.abs() <= 0.1 * z.re.abs() {
                out[i] = true;
                out[j] = true;
            }
        }
    }
    out
}

/// Interior of a wavefunction: default node threshold, sign-change nodes
/// and the default margin.
pub fn default_interior(wf: &WaveField) -> Vec<bool> {
    interior_mask(wf.grid(), &nodal_set(wf, default_eps_node(wf)), DEFAULT_INTERIOR_MARGIN)
}

pub fn polar_decompose(wf: &WaveField, eps_node: f64) -> Result<PolarField> {
    if !(eps_node > 0.0) {
        return Err(Error::InvalidParameter("eps_node must be positive".into()));
    }
    if wf.max_amplitude() == 0.0 {
        return Err(Error::DegenerateState);
    }
    let hbar = wf.params().hbar;
    let amplitude: Vec<f64> = wf.psi().iter().map(|z| z.norm()).collect();
    let action = wf.psi().iter().map(|z| hbar * z.arg()).collect();
    let node_mask = amplitude.iter().map(|&r| r < eps_node).collect();
    Ok(PolarField { grid: wf.grid().clone(), amplitude, action, node_mask, hbar })
}

/// `ρ = |ψ|²`.
pub fn density(wf: &WaveField) -> ScalarField {
    ScalarField::new(wf.grid().clone(), wf.psi().iter().map(|z| z.norm_sqr()).collect())
}

/// First and second derivatives of `ψ` needed by the Bohm observables.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub gradient: Vec<Vec<Complex64>>,
    pub laplacian: Vec<Complex64>,
}

impl Derivatives {
    pub fn compute(wf: &WaveField, diff: &Differentiator) -> Self {
        Self { gradient: diff.gradient_componentwise(wf.psi()), laplacian: diff.laplacian(wf.psi()) }
    }
}

/// `∇S` and `Q` at every point where `|ψ|² > 0`, NaN elsewhere. No mask is
/// applied; callers decide which points to trust.
pub fn raw_bohm_fields(wf: &WaveField, d: &Derivatives) -> (Vec<Vec<f64>>, Vec<f64>) {
    let p = wf.params();
    let dim = wf.grid().dim();
    let psi = wf.psi();
    let mut grad_s = vec![vec![0.0; psi.len()]; dim];
    for (axis, comp) in grad_s.iter_mut().enumerate() {
        comp.par_iter_mut().enumerate().for_each(|(i, out)| {
            let rho = psi[i].norm_sqr();
            *out = if rho > f64::MIN_POSITIVE {
                p.hbar * (psi[i].conj() * d.gradient[axis][i]).im / rho
            } else {
                f64::NAN
            };
        });
    }
    let q = (0..psi.len())
        .into_par_iter()
        .map(|i| {
            let rho = psi[i].norm_sqr();
            if rho <= f64::MIN_POSITIVE {
                return f64::NAN;
            }
            let lap_ratio = (psi[i].conj() * d.laplacian[i]).re / rho;
            let phase_sq: f64 = (0..dim).map(|a| (grad_s[a][i] / p.hbar).powi(2)).sum();
            -(p.hbar * p.hbar / (2.0 * p.mass)) * (lap_ratio + phase_sq)
        })
        .collect();
    (grad_s, q)
}

/// `∇S`, masked at nodes (default threshold).
pub fn bohm_momentum_field(wf: &WaveField) -> VectorField {
    let mask = node_mask(wf, default_eps_node(wf));
    bohm_momentum_field_masked(wf, &mask)
}

pub fn bohm_momentum_field_masked(wf: &WaveField, mask: &[bool]) -> VectorField {
    let diff = Differentiator::new(wf.grid());
    let grad = diff.gradient_componentwise(wf.psi());
    let p = wf.params();
    let comps = grad
        .iter()
        .map(|g| {
            wf.psi()
                .iter()
                .zip(g)
                .map(|(z, dz)| {
                    let rho = z.norm_sqr();
                    if rho > f64::MIN_POSITIVE {
                        p.hbar * (z.conj() * dz).im / rho
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();
    VectorField::with_mask(wf.grid().clone(), comps, mask.to_vec())
}

/// `j = ρ∇S/m`, evaluated as `(ħ/m) Im(ψ*∇ψ)` so it is defined everywhere
/// and vanishes with the density at nodes.
pub fn probability_current(wf: &WaveField) -> VectorField {
    let diff = Differentiator::new(wf.grid());
    let grad = diff.gradient_componentwise(wf.psi());
    let p = wf.params();
    let comps = grad
        .iter()
        .map(|g| wf.psi().iter().zip(g).map(|(z, dz)| p.hbar / p.mass * (z.conj() * dz).im).collect())
        .collect();
    VectorField::new(wf.grid().clone(), comps)
}

/// Bohm quantum potential `Q = -(ħ²/2m) ∇²R/R`, masked at nodes.
pub fn quantum_potential(wf: &WaveField) -> Result<ScalarField> {
    let eps = default_eps_node(wf);
    quantum_potential_with(wf, eps)
}

pub fn quantum_potential_with(wf: &WaveField, eps_node: f64) -> Result<ScalarField> {
    if wf.max_amplitude() == 0.0 {
        return Err(Error::DegenerateState);
    }
    if let Some(frac) = high_frequency_fraction(wf) {
        if frac > 1e-8 {
            log::warn!("wavefunction looks under-resolved: {frac:.2e} of spectral power in the top third of modes");
        }
    }
    let diff = Differentiator::new(wf.grid());
    let d = Derivatives::compute(wf, &diff);
    let (_, q) = raw_bohm_fields(wf, &d);
    let mask = node_mask(wf, eps_node);
    Ok(ScalarField::with_mask(wf.grid().clone(), q, mask))
}

/// Fraction of spectral power in modes above two thirds of Nyquist on any
/// axis; `None` on non-periodic grids.
pub fn high_frequency_fraction(wf: &WaveField) -> Option<f64> {
    let g = wf.grid();
    if !g.is_periodic() {
        return None;
    }
    let mut hat = wf.psi().to_vec();
    FftNd::new(g).forward(&mut hat);
    let total: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return None;
    }
    let high: f64 = hat
        .iter()
        .enumerate()
        .filter(|(flat, _)| {
            let idx = g.multi_index(*flat);
            (0..g.dim()).any(|a| {
                let n = g.n_points()[a];
                let j = idx[a].min(n - idx[a]);
                3 * j > n
            })
        })
        .map(|(_, z)| z.norm_sqr())
        .sum();
    Some(high / total)
}

/// `F_Q = -∇Q` via fourth-order local stencils; points whose stencil
/// touches a masked value are masked.
pub fn quantum_force(q: &ScalarField) -> VectorField {
    negative_gradient(q)
}

/// `-∇f` of a masked scalar field.
pub fn negative_gradient(f: &ScalarField) -> VectorField {
    let (comps, mask) = masked_gradient(f.grid(), f.values(), f.mask());
    let comps = comps.into_iter().map(|c| c.into_iter().map(|v| -v).collect()).collect();
    VectorField::with_mask(f.grid().clone(), comps, mask)
}

/// Symmetric phase-space second-moment matrix, ordered `(x…, p…)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        let m = sigma.nrows();
        if m == 0 || m % 2 != 0 || sigma.ncols() != m {
            return Err(Error::InvalidParameter("covariance must be 2n x 2n".into()));
        }
        let scale = sigma.amax().max(1.0);
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let n = m / 2;
        for start in [0, n] {
            let block = sigma.view((start, start), (n, n)).clone_owned();
            if block.cholesky().is_none() {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(Self { sigma })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn var_x(&self, axis: usize) -> f64 {
        self.sigma[(axis, axis)]
    }

    pub fn var_p(&self, axis: usize) -> f64 {
        let n = self.degrees_of_freedom();
        self.sigma[(axis + n, axis + n)]
    }

    pub fn cov_xp(&self, axis: usize) -> f64 {
        let n = self.degrees_of_freedom();
        self.sigma[(axis, axis + n)]
    }
}

/// Position and momentum second moments of a normalized state.
///
/// Position moments use grid quadrature over `ρ`. On periodic grids the
/// momentum moments come from the discrete Fourier density and `p̂ψ` is
/// applied spectrally; on wall-bounded grids `p̂ = -iħ∇` uses the stencils
/// and `⟨p_a p_b⟩ = ħ² Re∫ ∂_aψ* ∂_bψ`, which assumes `ψ` vanishes at the
/// walls.
pub fn covariance_matrix(wf: &WaveField) -> Result<CovarianceMatrix> {
    let norm = wf.norm_sq();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    let g = wf.grid();
    let n = g.dim();
    let hbar = wf.params().hbar;
    let psi = wf.psi();
    let w = g.quadrature_weights();
    let points: Vec<[f64; 3]> = (0..g.len()).map(|i| g.point(i)).collect();

    let mean_x: Vec<f64> = (0..n)
        .map(|a| weighted_sum(g, psi.iter().zip(&points).map(|(z, r)| z.norm_sqr() * r[a])))
        .collect();

    let diff = Differentiator::new(g);
    let grad = diff.gradient(psi);
    // p̂_a ψ = -iħ ∂_a ψ
    let p_psi: Vec<Vec<Complex64>> =
        grad.iter().map(|d| d.iter().map(|v| Complex64::new(0.0, -hbar) * v).collect()).collect();

    let (mean_p, pp) = if diff.scheme() == Scheme::Spectral {
        let mut hat = psi.to_vec();
        FftNd::new(g).forward(&mut hat);
        let total: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
        let ks: Vec<Vec<f64>> = (0..n).map(|a| g.wavenumbers(a)).collect();
        let mut mean_p = vec![0.0; n];
        let mut pp = vec![vec![0.0; n]; n];
        for (flat, z) in hat.iter().enumerate() {
            let idx = g.multi_index(flat);
            let prob = z.norm_sqr() / total;
            for a in 0..n {
                let pa = hbar * ks[a][idx[a]];
                mean_p[a] += prob * pa;
                for b in 0..n {
                    pp[a][b] += prob * pa * hbar * ks[b][idx[b]];
                }
            }
        }
        (mean_p, pp)
    } else {
        let mean_p: Vec<f64> = (0..n)
            .map(|a| weighted_sum(g, psi.iter().zip(&p_psi[a]).map(|(z, pz)| (z.conj() * pz).re)))
            .collect();
        let pp = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| weighted_sum(g, p_psi[a].iter().zip(&p_psi[b]).map(|(u, v)| (u.conj() * v).re)))
                    .collect()
            })
            .collect();
        (mean_p, pp)
    };

    let mut sigma = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let xx = weighted_sum(g, psi.iter().zip(&points).map(|(z, r)| z.norm_sqr() * r[a] * r[b]));
            sigma[(a, b)] = xx - mean_x[a] * mean_x[b];
            sigma[(a + n, b + n)] = pp[a][b] - mean_p[a] * mean_p[b];
            // Re⟨ψ| x_a p̂_b |ψ⟩ is the symmetrized moment for a = b and the
            // plain product otherwise
            let xp = psi
                .iter()
                .zip(&p_psi[b])
                .zip(&points)
                .zip(&w)
                .map(|(((z, pz), r), w)| (z.conj() * pz).re * r[a] * w)
                .sum::<f64>();
            sigma[(a, b + n)] = xp - mean_x[a] * mean_p[b];
        }
    }
    for a in 0..n {
        for b in 0..n {
            sigma[(b + n, a)] = sigma[(a, b + n)];
        }
    }
    // remove rounding asymmetry in the diagonal blocks
    let sym = (&sigma + sigma.transpose()) * 0.5;
    CovarianceMatrix::new(sym)
}

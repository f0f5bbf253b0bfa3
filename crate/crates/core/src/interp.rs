//! Off-grid evaluation of sampled fields.
//!
//! Local interpolation is tensor-product cubic Lagrange on the four nearest
//! nodes per axis; it reproduces polynomials up to degree three exactly and
//! shifts to one-sided stencils next to non-periodic edges. Spectral
//! interpolation sums the discrete Fourier series and is only meaningful for
//! smooth periodic functions such as `ψ` on a periodic grid.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpMethod {
    /// Tensor-product cubic Lagrange.
    #[default]
    Cubic,
    /// Trigonometric interpolation of `ψ` (periodic grids only).
    Spectral,
}

/// Per-axis node indices and weights of the cubic stencil around `x`.
fn axis_stencil(grid: &Grid, axis: usize, x: f64) -> Result<([usize; 4], [f64; 4])> {
    let n = grid.n_points()[axis];
    let h = grid.spacing(axis);
    let lo = grid.lower()[axis];
    let mut u = (x - lo) / h;
    if grid.is_periodic() {
        u = u.rem_euclid(n as f64);
    } else {
        let top = (n - 1) as f64;
        // tolerate rounding at the far wall
        if !(u >= -1e-12 && u <= top + 1e-12) {
            return Err(Error::OutOfDomain);
        }
        u = u.clamp(0.0, top);
    }
    let base = u.floor() as isize;
    let start = if grid.is_periodic() { base - 1 } else { (base - 1).clamp(0, n as isize - 4) };
    let t = u - start as f64;
    let mut w = [0.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut prod = 1.0;
        for m in 0..4 {
            if m != k {
                prod *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
        *wk = prod;
    }
    let mut idx = [0usize; 4];
    for (k, ik) in idx.iter_mut().enumerate() {
        *ik = (start + k as isize).rem_euclid(n as isize) as usize;
    }
    Ok((idx, w))
}

/// Cubic interpolation of grid samples at `r`.
///
/// Fails with [`Error::OutOfDomain`] outside a non-periodic box and with
/// [`Error::Masked`] when any stencil node is masked.
pub fn cubic<T>(grid: &Grid, values: &[T], mask: Option<&[bool]>, r: &[f64]) -> Result<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let dim = grid.dim();
    let mut stencils = [([0usize; 4], [0.0; 4]); 3];
    for axis in 0..dim {
        stencils[axis] = axis_stencil(grid, axis, r[axis])?;
    }
    let mut acc = T::default();
    let count = 4usize.pow(dim as u32);
    for c in 0..count {
        let mut flat = 0;
        let mut weight = 1.0;
        let mut rem = c;
        for (axis, (idx, w)) in stencils.iter().enumerate().take(dim) {
            let k = rem % 4;
            rem /= 4;
            flat += idx[k] * grid.stride(axis);
            weight *= w[k];
        }
        if let Some(m) = mask {
            if m[flat] {
                return Err(Error::Masked(flat));
            }
        }
        acc = acc + values[flat] * weight;
    }
    Ok(acc)
}

/// Trigonometric interpolant of a periodic complex field and its gradient.
#[derive(Clone, Debug)]
pub struct SpectralInterpolator {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolator {
    pub fn new(grid: &Grid, values: &[Complex64]) -> Result<Self> {
        if !grid.is_periodic() {
            return Err(Error::Precondition("spectral interpolation needs a periodic grid".into()));
        }
        let mut coeffs = values.to_vec();
        FftNd::new(grid).forward(&mut coeffs);
        let inv = 1.0 / grid.len() as f64;
        coeffs.iter_mut().for_each(|z| *z *= inv);
        Ok(Self { grid: grid.clone(), coeffs })
    }

    /// Value and gradient at `r`. The Nyquist mode enters as a cosine so
    /// real data interpolate to real values; its derivative is dropped, as
    /// in spectral differentiation.
    pub fn eval(&self, r: &[f64]) -> (Complex64, [Complex64; 3]) {
        let g = &self.grid;
        let dim = g.dim();
        let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        let mut dphases: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for axis in 0..dim {
            let n = g.n_points()[axis];
            let x = r[axis] - g.lower()[axis];
            let ks = g.wavenumbers(axis);
            let (p, d): (Vec<_>, Vec<_>) = ks
                .iter()
                .enumerate()
                .map(|(j, &k)| {
                    if j == n / 2 {
                        (Complex64::new((k * x).cos(), 0.0), Complex64::default())
                    } else {
                        let e = Complex64::from_polar(1.0, k * x);
                        (e, e * Complex64::new(0.0, k))
                    }
                })
                .unzip();
            phases.push(p);
            dphases.push(d);
        }
        let mut val = Complex64::default();
        let mut grad = [Complex64::default(); 3];
        for (flat, c) in self.coeffs.iter().enumerate() {
            let idx = g.multi_index(flat);
            let mut term = *c;
            for axis in 0..dim {
                term *= phases[axis][idx[axis]];
            }
            val += term;
            for (a, ga) in grad.iter_mut().enumerate().take(dim) {
                let mut t = *c;
                for axis in 0..dim {
                    t *= if axis == a { dphases[axis][idx[axis]] } else { phases[axis][idx[axis]] };
                }
                *ga += t;
            }
        }
        (val, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cubic_reproduces_cubics_in_3d() {
        let g = Grid::new(vec![8, 10, 12], vec![-1.0, 0.0, 2.0], vec![1.0, 3.0, 5.0], false).unwrap();
        let f = |r: [f64; 3]| 1.0 + r[0].powi(3) - 2.0 * r[1] * r[2] + r[2].powi(2) * r[0];
        let vals: Vec<f64> = (0..g.len()).map(|i| f(g.point(i))).collect();
        for r in [[0.13, 1.7, 2.2], [-1.0, 0.0, 2.0], [0.99, 2.99, 4.99], [1.0, 3.0, 5.0]] {
            let got = cubic(&g, &vals, None, &r).unwrap();
            assert!((got - f(r)).abs() < 1e-12, "{r:?}: {got} vs {}", f(r));
        }
        assert!(matches!(cubic(&g, &vals, None, &[1.1, 1.0, 3.0]), Err(Error::OutOfDomain)));
    }

    #[test]
    fn cubic_wraps_on_periodic_grids() {
        let g = Grid::cube(1, 64, 0.0, 2.0 * PI, true).unwrap();
        let vals: Vec<f64> = g.axis_coords(0).iter().map(|x| x.sin()).collect();
        let a = cubic(&g, &vals, None, &[0.05]).unwrap();
        let b = cubic(&g, &vals, None, &[0.05 + 2.0 * PI]).unwrap();
        let c = cubic(&g, &vals, None, &[2.0 * PI - 0.01]).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!((a - 0.05f64.sin()).abs() < 1e-5);
        assert!((c + 0.01f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn cubic_reports_masked_nodes() {
        let g = Grid::cube(1, 16, 0.0, 1.0, false).unwrap();
        let vals = vec![1.0; 16];
        let mut mask = vec![false; 16];
        mask[8] = true;
        assert!(matches!(cubic(&g, &vals, Some(&mask), &[0.5]), Err(Error::Masked(8))));
        assert!(cubic(&g, &vals, Some(&mask), &[0.1]).is_ok());
    }

    #[test]
    fn spectral_is_exact_for_trig_polynomials() {
        let g = Grid::new(vec![16, 8], vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI], true).unwrap();
        let f = |x: f64, y: f64| Complex64::from_polar(1.0, 3.0 * x - 2.0 * y) + (x + y).cos();
        let vals: Vec<Complex64> = (0..g.len()).map(|i| { let r = g.point(i); f(r[0], r[1]) }).collect();
        let s = SpectralInterpolator::new(&g, &vals).unwrap();
        let (x, y) = (1.234, 5.1);
        let (v, grad) = s.eval(&[x, y]);
        assert!((v - f(x, y)).norm() < 1e-13);
        let dx = Complex64::new(0.0, 3.0) * Complex64::from_polar(1.0, 3.0 * x - 2.0 * y) - (x + y).sin();
        assert!((grad[0] - dx).norm() < 1e-12);
    }
}

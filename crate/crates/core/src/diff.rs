//! Spatial differentiation on grids.
//!
//! Wavefunctions are differentiated spectrally on periodic grids and with
//! fourth-order finite differences otherwise (one-sided fourth-order
//! stencils at the two points nearest each edge). Real-valued derived
//! fields such as `Q` or `V` are generally not periodic even when `ψ` is,
//! so they always go through the local stencils, which also respect masks.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fft::FftNd;
use crate::grid::Grid;

const D1_CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_CENTRAL: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

/// Which scheme a [`Differentiator`] uses for wavefunction derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Spectral,
    FiniteDifference,
}

/// Derivative operators for complex grid functions.
#[derive(Clone, Debug)]
pub struct Differentiator {
    grid: Grid,
    scheme: Scheme,
    fft: Option<FftNd>,
    k: Vec<Vec<f64>>,
}

impl Differentiator {
    /// Spectral on periodic grids, finite differences otherwise.
    pub fn new(grid: &Grid) -> Self {
        if grid.is_periodic() {
            Self::with_scheme(grid, Scheme::Spectral)
        } else {
            Self::with_scheme(grid, Scheme::FiniteDifference)
        }
    }

    pub fn with_scheme(grid: &Grid, scheme: Scheme) -> Self {
        let (fft, k) = match scheme {
            Scheme::Spectral => {
                assert!(grid.is_periodic(), "spectral differentiation needs a periodic grid");
                (Some(FftNd::new(grid)), (0..grid.dim()).map(|a| grid.wavenumbers(a)).collect())
            }
            Scheme::FiniteDifference => (None, Vec::new()),
        };
        Self { grid: grid.clone(), scheme, fft, k }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn gradient(&self, f: &[Complex64]) -> Vec<Vec<Complex64>> {
        match self.scheme {
            Scheme::Spectral => {
                let fft = self.fft.as_ref().unwrap();
                let mut hat = f.to_vec();
                fft.forward(&mut hat);
                (0..self.grid.dim())
                    .map(|axis| {
                        let mut d = hat.clone();
                        self.multiply_axis(&mut d, axis, |k, nyq| {
                            if nyq {
                                Complex64::default()
                            } else {
                                Complex64::new(0.0, k)
                            }
                        });
                        fft.inverse(&mut d);
                        d
                    })
                    .collect()
            }
            Scheme::FiniteDifference => (0..self.grid.dim())
                .map(|axis| fd_apply(f, None, &self.grid, axis, 1).0)
                .collect(),
        }
    }

    /// Gradient and Laplacian together; on periodic grids both share one
    /// forward transform.
    pub fn gradient_and_laplacian(&self, f: &[Complex64]) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
        match self.scheme {
            Scheme::Spectral => {
                let fft = self.fft.as_ref().unwrap();
                let mut hat = f.to_vec();
                fft.forward(&mut hat);
                let grad = (0..self.grid.dim())
                    .map(|axis| {
                        let mut d = hat.clone();
                        self.multiply_axis(&mut d, axis, |k, nyq| {
                            if nyq {
                                Complex64::default()
                            } else {
                                Complex64::new(0.0, k)
                            }
                        });
                        fft.inverse(&mut d);
                        d
                    })
                    .collect();
                let k2 = self.k_squared();
                hat.par_iter_mut().zip(k2.par_iter()).for_each(|(z, k)| *z *= -k);
                fft.inverse(&mut hat);
                (grad, hat)
            }
            Scheme::FiniteDifference => (self.gradient(f), self.laplacian(f)),
        }
    }

    /// Gradient with the real and imaginary parts differentiated separately,
    /// so a part that is identically zero has an exactly zero derivative.
    /// Spectral transforms otherwise leak rounding noise from one part into
    /// the other.
    pub fn gradient_componentwise(&self, f: &[Complex64]) -> Vec<Vec<Complex64>> {
        if self.scheme == Scheme::FiniteDifference {
            return self.gradient(f);
        }
        let part = |pick: fn(&Complex64) -> f64| -> Option<Vec<Vec<f64>>> {
            let vals: Vec<Complex64> = f.iter().map(|z| Complex64::new(pick(z), 0.0)).collect();
            if vals.iter().all(|z| z.re == 0.0) {
                return None;
            }
            Some(self.gradient(&vals).into_iter().map(|d| d.into_iter().map(|z| z.re).collect()).collect())
        };
        let re = part(|z| z.re);
        let im = part(|z| z.im);
        (0..self.grid.dim())
            .map(|axis| {
                (0..f.len())
                    .map(|i| {
                        Complex64::new(
                            re.as_ref().map_or(0.0, |d| d[axis][i]),
                            im.as_ref().map_or(0.0, |d| d[axis][i]),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    pub fn derivative(&self, f: &[Complex64], axis: usize) -> Vec<Complex64> {
        match self.scheme {
            Scheme::Spectral => {
                let fft = self.fft.as_ref().unwrap();
                let mut d = f.to_vec();
                fft.forward(&mut d);
                self.multiply_axis(&mut d, axis, |k, nyq| {
                    if nyq {
                        Complex64::default()
                    } else {
                        Complex64::new(0.0, k)
                    }
                });
                fft.inverse(&mut d);
                d
            }
            Scheme::FiniteDifference => fd_apply(f, None, &self.grid, axis, 1).0,
        }
    }

    pub fn laplacian(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.scheme {
            Scheme::Spectral => {
                let fft = self.fft.as_ref().unwrap();
                let mut d = f.to_vec();
                fft.forward(&mut d);
                let k2 = self.k_squared();
                d.par_iter_mut().zip(k2.par_iter()).for_each(|(z, &kk)| *z *= -kk);
                fft.inverse(&mut d);
                d
            }
            Scheme::FiniteDifference => {
                let mut out = vec![Complex64::default(); f.len()];
                for axis in 0..self.grid.dim() {
                    let (d2, _) = fd_apply(f, None, &self.grid, axis, 2);
                    out.iter_mut().zip(d2).for_each(|(o, v)| *o += v);
                }
                out
            }
        }
    }

    /// Divergence of a vector of complex component fields.
    pub fn divergence(&self, comps: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.grid.len()];
        for (axis, c) in comps.iter().enumerate() {
            let d = self.derivative(c, axis);
            out.iter_mut().zip(d).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// `|k|²` in FFT layout (spectral scheme only).
    pub fn k_squared(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.len())
            .map(|flat| {
                let idx = g.multi_index(flat);
                (0..g.dim()).map(|a| self.k[a][idx[a]].powi(2)).sum()
            })
            .collect()
    }

    fn multiply_axis<F>(&self, data: &mut [Complex64], axis: usize, factor: F)
    where
        F: Fn(f64, bool) -> Complex64 + Sync,
    {
        let n = self.grid.n_points()[axis];
        let stride = self.grid.stride(axis);
        let k = &self.k[axis];
        data.par_iter_mut().enumerate().for_each(|(flat, z)| {
            let j = (flat / stride) % n;
            *z *= factor(k[j], j == n / 2);
        });
    }
}

/// Applies a fourth-order first (`order = 1`) or second (`order = 2`)
/// derivative stencil along `axis`, using one-sided stencils at the edges.
///
/// When `mask` is given, any output whose stencil touches a masked input is
/// itself masked (value left at default). Returns the derivative and the
/// output mask.
pub fn fd_apply<T>(data: &[T], mask: Option<&[bool]>, grid: &Grid, axis: usize, order: u8) -> (Vec<T>, Vec<bool>)
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n_points()[axis];
    let stride = grid.stride(axis);
    let h = grid.spacing(axis);
    let scale = match order {
        1 => 1.0 / (12.0 * h),
        2 => 1.0 / (12.0 * h * h),
        _ => panic!("only first and second derivatives are supported"),
    };
    let mut out = vec![T::default(); data.len()];
    let mut out_mask = vec![false; data.len()];
    let lines = data.len() / n;
    for l in 0..lines {
        let base = (l / stride) * n * stride + l % stride;
        for i in 0..n {
            let (start, coeffs, sign): (isize, &[f64], f64) = stencil(i, n, order);
            let mut acc = T::default();
            let mut hit = false;
            for (c_idx, &c) in coeffs.iter().enumerate() {
                let j = (i as isize + start + c_idx as isize) as usize;
                let flat = base + j * stride;
                if let Some(m) = mask {
                    if m[flat] {
                        hit = true;
                        break;
                    }
                }
                if c != 0.0 {
                    acc = acc + data[flat] * (c * sign * scale);
                }
            }
            let o = base + i * stride;
            if hit {
                out_mask[o] = true;
            } else {
                out[o] = acc;
            }
        }
    }
    (out, out_mask)
}

/// Stencil start offset, coefficients and sign for point `i` of `n`.
fn stencil(i: usize, n: usize, order: u8) -> (isize, &'static [f64], f64) {
    match order {
        1 => {
            if i == 0 {
                (0, &D1_EDGE0, 1.0)
            } else if i == 1 {
                (-1, &D1_EDGE1, 1.0)
            } else if i == n - 1 {
                (-4, &D1_EDGE0_REV, -1.0)
            } else if i == n - 2 {
                (-3, &D1_EDGE1_REV, -1.0)
            } else {
                (-2, &D1_CENTRAL, 1.0)
            }
        }
        _ => {
            if i == 0 {
                (0, &D2_EDGE0, 1.0)
            } else if i == 1 {
                (-1, &D2_EDGE1, 1.0)
            } else if i == n - 1 {
                (-5, &D2_EDGE0_REV, 1.0)
            } else if i == n - 2 {
                (-4, &D2_EDGE1_REV, 1.0)
            } else {
                (-2, &D2_CENTRAL, 1.0)
            }
        }
    }
}

const D1_EDGE0_REV: [f64; 5] = rev5(D1_EDGE0);
const D1_EDGE1_REV: [f64; 5] = rev5(D1_EDGE1);
const D2_EDGE0_REV: [f64; 6] = rev6(D2_EDGE0);
const D2_EDGE1_REV: [f64; 6] = rev6(D2_EDGE1);

const fn rev5(a: [f64; 5]) -> [f64; 5] {
    [a[4], a[3], a[2], a[1], a[0]]
}

const fn rev6(a: [f64; 6]) -> [f64; 6] {
    [a[5], a[4], a[3], a[2], a[1], a[0]]
}

/// Gradient of a masked real field via the local stencils.
pub fn masked_gradient(grid: &Grid, values: &[f64], mask: &[bool]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut out_mask = mask.to_vec();
    let comps = (0..grid.dim())
        .map(|axis| {
            let (d, m) = fd_apply(values, Some(mask), grid, axis, 1);
            out_mask.iter_mut().zip(m).for_each(|(o, mm)| *o |= mm);
            d
        })
        .collect();
    (comps, out_mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(x: f64, deg: i32) -> f64 {
        (0..=deg).map(|p| (0.3 + p as f64 * 0.7) * x.powi(p)).sum()
    }
    fn dpoly(x: f64, deg: i32) -> f64 {
        (1..=deg).map(|p| (0.3 + p as f64 * 0.7) * p as f64 * x.powi(p - 1)).sum()
    }
    fn d2poly(x: f64, deg: i32) -> f64 {
        (2..=deg).map(|p| (0.3 + p as f64 * 0.7) * (p * (p - 1)) as f64 * x.powi(p - 2)).sum()
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        let g = Grid::cube(1, 12, -1.0, 1.5, false).unwrap();
        let x = g.axis_coords(0);
        let f: Vec<f64> = x.iter().map(|&x| poly(x, 4)).collect();
        let (d1, _) = fd_apply(&f, None, &g, 0, 1);
        let (d2, _) = fd_apply(&f, None, &g, 0, 2);
        for i in 0..12 {
            assert!((d1[i] - dpoly(x[i], 4)).abs() < 1e-9, "d1 at {i}");
            assert!((d2[i] - d2poly(x[i], 4)).abs() < 1e-8, "d2 at {i}");
        }
    }

    #[test]
    fn second_derivative_edge_stencils_exact_on_quintics() {
        let g = Grid::cube(1, 10, 0.0, 1.0, false).unwrap();
        let x = g.axis_coords(0);
        let f: Vec<f64> = x.iter().map(|&x| poly(x, 5)).collect();
        let (d2, _) = fd_apply(&f, None, &g, 0, 2);
        for i in [0, 1, 8, 9] {
            assert!((d2[i] - d2poly(x[i], 5)).abs() < 1e-7, "d2 at {i}: {} vs {}", d2[i], d2poly(x[i], 5));
        }
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        let err = |n: usize| {
            let g = Grid::cube(1, n, 0.0, 1.0, false).unwrap();
            let f: Vec<f64> = g.axis_coords(0).iter().map(|x| (2.0 * x).sin()).collect();
            let (d2, _) = fd_apply(&f, None, &g, 0, 2);
            g.axis_coords(0)
                .iter()
                .zip(&d2)
                .map(|(x, d)| (d + 4.0 * (2.0 * x).sin()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn spectral_derivatives_of_trig_polynomial() {
        let g = Grid::cube(2, 16, 0.0, std::f64::consts::TAU, true).unwrap();
        let f: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let r = g.point(i);
                Complex64::new((3.0 * r[0]).sin() * (2.0 * r[1]).cos(), 0.0)
            })
            .collect();
        let d = Differentiator::new(&g);
        let grad = d.gradient(&f);
        let lap = d.laplacian(&f);
        for i in 0..g.len() {
            let r = g.point(i);
            let gx = 3.0 * (3.0 * r[0]).cos() * (2.0 * r[1]).cos();
            let gy = -2.0 * (3.0 * r[0]).sin() * (2.0 * r[1]).sin();
            assert!((grad[0][i].re - gx).abs() < 1e-12);
            assert!((grad[1][i].re - gy).abs() < 1e-12);
            assert!((lap[i].re + 13.0 * f[i].re).abs() < 1e-11);
        }
    }

    #[test]
    fn mask_propagates_through_stencil() {
        let g = Grid::cube(1, 12, 0.0, 1.0, false).unwrap();
        let f = vec![1.0; 12];
        let mut mask = vec![false; 12];
        mask[6] = true;
        let (_, m) = fd_apply(&f, Some(&mask), &g, 0, 1);
        assert_eq!(m, vec![false, false, false, false, true, true, true, true, true, false, false, false]);
    }
}

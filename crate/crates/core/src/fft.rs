//! Multi-dimensional FFT and Dirichlet sine transforms over grid storage.
//!
//! Lines along an axis are gathered into a contiguous buffer, transformed in
//! parallel and scattered back. Each line is transformed independently, so
//! results do not depend on the thread schedule.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Forward/inverse FFT over every axis of a grid-shaped array.
#[derive(Clone)]
pub struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("shape", &self.shape).finish()
    }
}

impl FftNd {
    pub fn new(grid: &Grid) -> Self {
        Self::with_shape(grid.n_points().to_vec())
    }

    pub fn with_shape(shape: Vec<usize>) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { shape, forward, inverse }
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            apply_lines(data, &self.shape, axis, |line, scratch| {
                self.forward[axis].process_with_scratch(line, scratch)
            }, self.forward[axis].get_inplace_scratch_len());
        }
    }

    /// In-place inverse transform, normalized so that `inverse(forward(x)) = x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            apply_lines(data, &self.shape, axis, |line, scratch| {
                self.inverse[axis].process_with_scratch(line, scratch)
            }, self.inverse[axis].get_inplace_scratch_len());
        }
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }
}

/// Runs `op` on every line along `axis`.
pub(crate) fn apply_lines<F>(data: &mut [Complex64], shape: &[usize], axis: usize, op: F, scratch_len: usize)
where
    F: Fn(&mut [Complex64], &mut [Complex64]) + Sync,
{
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    if stride == 1 {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, line| op(line, scratch),
        );
        return;
    }
    let mut lines = vec![Complex64::default(); data.len()];
    {
        let src: &[Complex64] = data;
        lines.par_chunks_mut(n).enumerate().for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, (l, line)| {
                let base = (l / stride) * n * stride + l % stride;
                for (j, z) in line.iter_mut().enumerate() {
                    *z = src[base + j * stride];
                }
                op(line, scratch);
            },
        );
    }
    for (l, line) in lines.chunks(n).enumerate() {
        let base = (l / stride) * n * stride + l % stride;
        for (j, z) in line.iter().enumerate() {
            data[base + j * stride] = *z;
        }
    }
}

/// Type-I discrete sine transform on the interior points of a wall-bounded
/// grid (endpoints are the Dirichlet walls and stay zero).
///
/// With `m = n - 2` interior samples along an axis, the forward transform is
/// `X_k = Σ_j x_j sin(π j k / (m + 1))` and `inverse` rescales by
/// `2 / (m + 1)` so the pair round-trips.
#[derive(Clone)]
pub struct DstNd {
    shape: Vec<usize>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for DstNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DstNd").field("shape", &self.shape).finish()
    }
}

impl DstNd {
    pub fn new(grid: &Grid) -> Self {
        let shape = grid.n_points().to_vec();
        let mut planner = FftPlanner::new();
        // odd extension of m interior points has length 2 (m + 1) = 2 (n - 1)
        let ffts = shape.iter().map(|&n| planner.plan_fft_forward(2 * (n - 1))).collect();
        Self { shape, ffts }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        for axis in 0..self.shape.len() {
            let n = self.shape[axis];
            let m = n - 2;
            let fft = &self.ffts[axis];
            let ext_len = 2 * (n - 1);
            let scale = if inverse { 2.0 / (m + 1) as f64 } else { 1.0 };
            apply_lines(
                data,
                &self.shape,
                axis,
                |line, scratch| {
                    let (ext, rest) = scratch.split_at_mut(ext_len);
                    ext[0] = Complex64::default();
                    ext[m + 1] = Complex64::default();
                    for j in 1..=m {
                        ext[j] = line[j];
                        ext[ext_len - j] = -line[j];
                    }
                    fft.process_with_scratch(ext, rest);
                    // FFT of the odd extension is -2i times the sine sum
                    for k in 1..=m {
                        line[k] = ext[k] * Complex64::new(0.0, 0.5) * scale;
                    }
                    line[0] = Complex64::default();
                    line[n - 1] = Complex64::default();
                },
                ext_len + fft.get_inplace_scratch_len(),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft_1d(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| x[j] * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_along_each_axis() {
        let shape = vec![8, 10, 12];
        let len: usize = shape.iter().product();
        let data: Vec<Complex64> =
            (0..len).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut fast = data.clone();
        FftNd::with_shape(shape.clone()).forward(&mut fast);

        // separable naive transform
        let mut slow = data;
        for axis in 0..3 {
            let n = shape[axis];
            let stride: usize = shape[axis + 1..].iter().product();
            let outer = len / (n * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    let line: Vec<_> = (0..n).map(|j| slow[base + j * stride]).collect();
                    let t = naive_dft_1d(&line);
                    for j in 0..n {
                        slow[base + j * stride] = t[j];
                    }
                }
            }
        }
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn round_trip() {
        let shape = vec![16, 8];
        let data: Vec<Complex64> = (0..128).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let plan = FftNd::with_shape(shape);
        let mut x = data.clone();
        plan.forward(&mut x);
        plan.inverse(&mut x);
        let err = x.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn sine_transform_diagonalizes_modes() {
        let grid = Grid::cube(1, 16, 0.0, 1.0, false).unwrap();
        let dst = DstNd::new(&grid);
        let m = 14;
        let mut x: Vec<Complex64> =
            (0..16).map(|j| Complex64::new((3.0 * PI * grid.coord(0, j)).sin(), 0.0)).collect();
        x[15] = Complex64::default();
        dst.forward(&mut x);
        for k in 1..=m {
            let expect = if k == 3 { (m + 1) as f64 / 2.0 } else { 0.0 };
            assert!((x[k].re - expect).abs() < 1e-12 && x[k].im.abs() < 1e-12, "k={k}: {}", x[k]);
        }
        dst.inverse(&mut x);
        for j in 0..16 {
            let expect = (3.0 * PI * grid.coord(0, j)).sin();
            assert!((x[j].re - expect).abs() < 1e-12);
        }
    }
}

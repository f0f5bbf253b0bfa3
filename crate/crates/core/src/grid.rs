//! Rectangular sampling grids and physical constants.
//!
//! Storage is row-major with axis 0 varying slowest. Periodic grids sample
//! `[lower, upper)` with spacing `(upper - lower) / n`; non-periodic grids
//! include both endpoints with spacing `(upper - lower) / (n - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on points per axis for three-dimensional grids.
pub const MAX_POINTS_PER_AXIS_3D: usize = 128;

/// Mass and reduced Planck constant. Both default to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0 }
    }
}

impl PhysicsParams {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        let p = Self { mass, hbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {}", self.mass)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {}", self.hbar)));
        }
        Ok(())
    }

    /// Planck's constant `h = 2π ħ`.
    pub fn planck(&self) -> f64 {
        std::f64::consts::TAU * self.hbar
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    n_points: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    periodic: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    n_points: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    periodic: bool,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.n_points, r.lower, r.upper, r.periodic)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr { n_points: g.n_points, lower: g.lower, upper: g.upper, periodic: g.periodic }
    }
}

impl Grid {
    pub fn new(n_points: Vec<usize>, lower: Vec<f64>, upper: Vec<f64>, periodic: bool) -> Result<Self> {
        let dim = n_points.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidGrid("extent arrays must match the dimension".into()));
        }
        for k in 0..dim {
            let n = n_points[k];
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("axis {k}: need an even point count >= 8, got {n}")));
            }
            if dim == 3 && n > MAX_POINTS_PER_AXIS_3D {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: 3D grids are capped at {MAX_POINTS_PER_AXIS_3D} points per axis"
                )));
            }
            if !(lower[k].is_finite() && upper[k].is_finite() && upper[k] > lower[k]) {
                return Err(Error::InvalidGrid(format!("axis {k}: need upper > lower")));
            }
        }
        Ok(Self { n_points, lower, upper, periodic })
    }

    /// Same point count and extent on every axis.
    pub fn cube(dim: usize, n: usize, lower: f64, upper: f64, periodic: bool) -> Result<Self> {
        Self::new(vec![n; dim], vec![lower; dim], vec![upper; dim], periodic)
    }

    pub fn dim(&self) -> usize {
        self.n_points.len()
    }

    pub fn n_points(&self) -> &[usize] {
        &self.n_points
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn len(&self) -> usize {
        self.n_points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let n = self.n_points[axis] as f64;
        let span = self.upper[axis] - self.lower[axis];
        if self.periodic {
            span / n
        } else {
            span / (n - 1.0)
        }
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.spacing(axis)
    }

    /// Coordinates along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.n_points[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Distance between consecutive entries along `axis` in flat storage.
    pub fn stride(&self, axis: usize) -> usize {
        self.n_points[axis + 1..].iter().product()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().enumerate().fold(0, |acc, (k, &i)| acc * self.n_points[k] + i)
    }

    /// Multi-index of a flat offset; unused trailing axes are zero.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.n_points[k];
            flat /= self.n_points[k];
        }
        out
    }

    /// Physical position of a flat offset; unused trailing axes are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut r = [0.0; 3];
        for k in 0..self.dim() {
            r[k] = self.coord(k, idx[k]);
        }
        r
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    /// Quadrature weights: rectangle rule on periodic grids, tensor
    /// trapezoid rule otherwise.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let dv = self.cell_volume();
        (0..self.len())
            .map(|flat| {
                if self.periodic {
                    return dv;
                }
                let idx = self.multi_index(flat);
                let mut w = dv;
                for k in 0..self.dim() {
                    if idx[k] == 0 || idx[k] == self.n_points[k] - 1 {
                        w *= 0.5;
                    }
                }
                w
            })
            .collect()
    }

    /// Cells between a point and the nearest grid edge, minimised over axes.
    pub fn edge_distance(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        (0..self.dim())
            .map(|k| idx[k].min(self.n_points[k] - 1 - idx[k]))
            .min()
            .unwrap_or(0)
    }

    /// Whether a position lies inside the sampled box.
    pub fn contains(&self, r: &[f64]) -> bool {
        (0..self.dim()).all(|k| {
            if self.periodic {
                r[k].is_finite()
            } else {
                r[k] >= self.lower[k] && r[k] <= self.upper[k]
            }
        })
    }

    /// Grid with every axis point count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.n_points.iter().map(|n| n * factor).collect(),
            self.lower.clone(),
            self.upper.clone(),
            self.periodic,
        )
    }

    /// Angular wavenumbers of the discrete Fourier modes along `axis`,
    /// in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.n_points[axis];
        let dk = std::f64::consts::TAU / (n as f64 * self.spacing(axis));
        (0..n)
            .map(|j| if j <= n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_point_counts() {
        assert!(Grid::cube(1, 7, 0.0, 1.0, true).is_err());
        assert!(Grid::cube(1, 6, 0.0, 1.0, true).is_err());
        assert!(Grid::cube(1, 9, 0.0, 1.0, true).is_err());
        assert!(Grid::cube(1, 8, 1.0, 1.0, true).is_err());
        assert!(Grid::cube(4, 8, 0.0, 1.0, true).is_err());
        assert!(Grid::cube(3, 256, 0.0, 1.0, true).is_err());
        assert!(Grid::cube(1, 256, 0.0, 1.0, true).is_ok());
    }

    #[test]
    fn spacing_conventions() {
        let p = Grid::cube(1, 8, 0.0, 8.0, true).unwrap();
        assert_eq!(p.spacing(0), 1.0);
        assert_eq!(p.coord(0, 7), 7.0);
        let w = Grid::cube(1, 8, 0.0, 7.0, false).unwrap();
        assert_eq!(w.spacing(0), 1.0);
        assert_eq!(w.coord(0, 7), 7.0);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(vec![8, 10, 12], vec![0.0; 3], vec![1.0; 3], true).unwrap();
        for flat in [0, 1, 17, 400, g.len() - 1] {
            let idx = g.multi_index(flat);
            assert_eq!(g.flat_index(&idx), flat);
        }
        assert_eq!(g.stride(0), 120);
        assert_eq!(g.stride(2), 1);
    }

    #[test]
    fn trapezoid_weights_integrate_linear_exactly() {
        let g = Grid::cube(2, 10, 0.0, 3.0, false).unwrap();
        let w = g.quadrature_weights();
        let s: f64 = (0..g.len()).map(|i| w[i] * (1.0 + g.point(i)[0])).sum();
        assert!((s - (3.0 * 3.0 + 4.5 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::cube(1, 8, 0.0, std::f64::consts::TAU, true).unwrap();
        assert_eq!(g.wavenumbers(0), vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"n_points":[7],"lower":[0.0],"upper":[1.0],"periodic":true}"#;
        assert!(serde_json::from_str::<Grid>(bad).is_err());
        let good = r#"{"n_points":[8],"lower":[0.0],"upper":[1.0],"periodic":false}"#;
        assert!(serde_json::from_str::<Grid>(good).is_ok());
    }
}

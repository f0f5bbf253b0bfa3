//! Sampled wavefunctions and derived real fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, PhysicsParams};

/// Complex wavefunction samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    grid: Grid,
    psi: Vec<Complex64>,
    params: PhysicsParams,
}

impl WaveField {
    pub fn new(grid: Grid, psi: Vec<Complex64>, params: PhysicsParams) -> Result<Self> {
        params.validate()?;
        if psi.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                psi.len()
            )));
        }
        if let Some(i) = psi.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, psi, params })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: Grid, params: PhysicsParams, f: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> Complex64 + Sync,
    {
        let psi = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self::new(grid, psi, params)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn params(&self) -> PhysicsParams {
        self.params
    }

    pub fn into_parts(self) -> (Grid, Vec<Complex64>, PhysicsParams) {
        (self.grid, self.psi, self.params)
    }

    pub fn with_params(mut self, params: PhysicsParams) -> Result<Self> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    /// `∫ |ψ|² dV` by the grid quadrature rule.
    pub fn norm_sq(&self) -> f64 {
        weighted_sum(&self.grid, self.psi.iter().map(|z| z.norm_sqr()))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if !(n > 0.0) {
            return Err(Error::DegenerateState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self { grid: self.grid.clone(), psi: self.psi.iter().map(|z| z * lambda).collect(), params: self.params }
    }

    pub fn max_amplitude(&self) -> f64 {
        self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `⟨self|other⟩` by grid quadrature.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let w = self.grid.quadrature_weights();
        Ok(self.psi.iter().zip(&other.psi).zip(&w).map(|((a, b), w)| a.conj() * b * *w).sum())
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &WaveField, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let psi = self.psi.iter().zip(&other.psi).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.grid.clone(), psi, self.params)
    }

    /// Real and imaginary parts as two scalar fields.
    pub fn to_components(&self) -> (ScalarField, ScalarField) {
        (
            ScalarField::new(self.grid.clone(), self.psi.iter().map(|z| z.re).collect()),
            ScalarField::new(self.grid.clone(), self.psi.iter().map(|z| z.im).collect()),
        )
    }

    pub fn from_components(re: &ScalarField, im: &ScalarField, params: PhysicsParams) -> Result<Self> {
        if re.grid() != im.grid() {
            return Err(Error::GridMismatch);
        }
        let psi = re.values().iter().zip(im.values()).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Self::new(re.grid().clone(), psi, params)
    }
}

/// Sums `values` against the grid quadrature weights, in index order.
pub(crate) fn weighted_sum<I: Iterator<Item = f64>>(grid: &Grid, values: I) -> f64 {
    let w = grid.quadrature_weights();
    values.zip(w).map(|(v, w)| v * w).sum()
}

/// A real value per grid point, with masked points carrying no value.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        let mask = vec![false; values.len()];
        Self::with_mask(grid, values, mask)
    }

    /// Masked entries are stored as NaN.
    pub fn with_mask(grid: Grid, mut values: Vec<f64>, mask: Vec<bool>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(mask.len(), grid.len());
        for (v, &m) in values.iter_mut().zip(&mask) {
            if m {
                *v = f64::NAN;
            }
        }
        Self { grid, values, mask }
    }

    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Raw storage; NaN at masked points.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        if self.mask[i] {
            Err(Error::Masked(i))
        } else {
            Ok(self.values[i])
        }
    }

    /// Pointwise map over unmasked values.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let values = self.values.iter().zip(&self.mask).map(|(&v, &m)| if m { v } else { f(v) }).collect();
        Self::with_mask(self.grid.clone(), values, self.mask.clone())
    }

    /// Pointwise sum; the result is masked wherever either input is.
    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mask: Vec<bool> = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::with_mask(self.grid.clone(), values, mask))
    }

    /// Maximum of `|v|` over points where `select` is true and the field is
    /// unmasked. Returns 0 for an empty selection.
    pub fn max_abs_over(&self, select: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .zip(select)
            .filter(|((_, &m), &s)| s && !m)
            .map(|((v, _), _)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn with_extra_mask(&self, extra: &[bool]) -> Self {
        let mask = self.mask.iter().zip(extra).map(|(a, b)| *a || *b).collect();
        Self::with_mask(self.grid.clone(), self.values.clone(), mask)
    }
}

/// `dim` real components per grid point with a shared mask.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
    mask: Vec<bool>,
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>) -> Self {
        let mask = vec![false; grid.len()];
        Self::with_mask(grid, components, mask)
    }

    pub fn with_mask(grid: Grid, mut components: Vec<Vec<f64>>, mask: Vec<bool>) -> Self {
        assert_eq!(components.len(), grid.dim());
        for c in &mut components {
            assert_eq!(c.len(), grid.len());
            for (v, &m) in c.iter_mut().zip(&mask) {
                if m {
                    *v = f64::NAN;
                }
            }
        }
        Self { grid, components, mask }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Components at a point; unused trailing entries are zero.
    pub fn get(&self, i: usize) -> Result<[f64; 3]> {
        if self.mask[i] {
            return Err(Error::Masked(i));
        }
        let mut out = [0.0; 3];
        for (k, c) in self.components.iter().enumerate() {
            out[k] = c[i];
        }
        Ok(out)
    }

    pub fn norm_at(&self, i: usize) -> Result<f64> {
        Ok(self.get(i)?.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mask: Vec<bool> = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self::with_mask(self.grid.clone(), comps, mask))
    }

    /// Maximum Euclidean norm over selected unmasked points.
    pub fn max_norm_over(&self, select: &[bool]) -> f64 {
        (0..self.grid.len())
            .filter(|&i| select[i] && !self.mask[i])
            .map(|i| self.norm_at(i).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid) -> WaveField {
        WaveField::from_fn(grid.clone(), PhysicsParams::default(), |r| {
            Complex64::new((-(r[0] * r[0]) / 2.0).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn normalization() {
        let g = Grid::cube(1, 64, -8.0, 8.0, true).unwrap();
        let wf = gaussian(&g);
        assert!((wf.norm_sq() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let n = wf.normalized().unwrap();
        assert!((n.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_is_degenerate() {
        let g = Grid::cube(1, 8, 0.0, 1.0, true).unwrap();
        let wf = WaveField::new(g, vec![Complex64::default(); 8], PhysicsParams::default()).unwrap();
        assert!(matches!(wf.normalized(), Err(Error::DegenerateState)));
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::cube(1, 8, 0.0, 1.0, true).unwrap();
        let mut psi = vec![Complex64::new(1.0, 0.0); 8];
        psi[3] = Complex64::new(f64::NAN, 0.0);
        assert!(WaveField::new(g, psi, PhysicsParams::default()).is_err());
    }

    #[test]
    fn masked_access_is_an_error_not_a_panic() {
        let g = Grid::cube(1, 8, 0.0, 1.0, true).unwrap();
        let mut mask = vec![false; 8];
        mask[2] = true;
        let f = ScalarField::with_mask(g, vec![1.0; 8], mask);
        assert!(matches!(f.get(2), Err(Error::Masked(2))));
        assert_eq!(f.get(1).unwrap(), 1.0);
    }
}

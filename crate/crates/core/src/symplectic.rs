//! Linear symplectic geometry of quadratic phase-space sets.
//!
//! Phase-space vectors are ordered `(x_1…x_n, p_1…p_n)`. The symplectic
//! eigenvalues of a positive-definite `A` are the moduli `ν_j` of the
//! eigenvalues `±iν_j` of `J·A`. The ellipsoid `{½zᵀAz ≤ E}` has linear
//! symplectic capacity (Gromov width) `2πE / ν_max`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavefield::CovarianceMatrix;

/// Tolerance on the `±iν` pairing of the spectrum of `J·A`, relative to
/// the largest eigenvalue modulus.
pub const PAIRING_TOLERANCE: f64 = 1e-10;

/// Absolute slack on the uncertainty bound and the blob ratio so that
/// exactly saturating inputs pass.
pub const SATURATION_SLACK: f64 = 1e-12;

/// Tolerance on entries coupling a conjugate plane to other coordinates.
pub const COUPLING_TOLERANCE: f64 = 1e-12;

/// Symmetric positive-definite `A` and level `E` describing `{½zᵀAz ≤ E}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct QuadraticForm {
    a: DMatrix<f64>,
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    /// Row-major.
    a: Vec<Vec<f64>>,
    energy: f64,
}

impl TryFrom<FormRepr> for QuadraticForm {
    type Error = Error;
    fn try_from(r: FormRepr) -> Result<Self> {
        QuadraticForm::new(matrix_from_rows(&r.a)?, r.energy)
    }
}

impl From<QuadraticForm> for FormRepr {
    fn from(q: QuadraticForm) -> Self {
        FormRepr { a: matrix_to_rows(&q.a), energy: q.energy }
    }
}

/// Row-major nested vectors to a matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::InvalidParameter("matrix rows must be non-empty and of equal length".into()));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl QuadraticForm {
    pub fn new(a: DMatrix<f64>, energy: f64) -> Result<Self> {
        let m = a.nrows();
        if m == 0 || m % 2 != 0 || a.ncols() != m {
            return Err(Error::InvalidParameter(format!("A must be 2n x 2n, got {}x{}", m, a.ncols())));
        }
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidParameter(format!("E must be positive, got {energy}")));
        }
        let asym = (&a - a.transpose()).amax();
        if asym > 1e-12 * a.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        if a.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { a, energy })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        Self::new(self.a.clone(), energy)
    }

    /// `SᵀAS` at the same level; the image of the set under `S⁻¹`.
    pub fn conjugated(&self, s: &DMatrix<f64>) -> Result<Self> {
        let b = s.transpose() * &self.a * s;
        Self::new((&b + b.transpose()) * 0.5, self.energy)
    }

    /// `½zᵀAz`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(z);
        0.5 * v.dot(&(&self.a * &v))
    }
}

/// Symplectic eigenvalues, sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub nu: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn max(&self) -> f64 {
        self.nu[0]
    }

    pub fn min(&self) -> f64 {
        *self.nu.last().unwrap()
    }
}

/// `J = [[0, I], [-I, 0]]`.
pub fn standard_symplectic_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 1, "need at least one degree of freedom");
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, k + n)] = 1.0;
        j[(k + n, k)] = -1.0;
    }
    j
}

/// Symplectic eigenvalues of a symmetric positive-definite `2n×2n` matrix
/// from the eigenvalues of `J·A`.
pub fn symplectic_eigenvalues(a: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let m = a.nrows();
    if m == 0 || m % 2 != 0 || a.ncols() != m {
        return Err(Error::InvalidParameter("matrix must be 2n x 2n".into()));
    }
    if a.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let n = m / 2;
    let ja = standard_symplectic_matrix(n) * a;
    let schur = Schur::try_new(ja, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::UnpairedSpectrum(f64::NAN))?;
    let eig = schur.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pos: Vec<f64> = eig.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
    let mut neg: Vec<f64> = eig.iter().filter(|z| z.im < 0.0).map(|z| -z.im).collect();
    let max_re = eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if pos.len() != n || neg.len() != n {
        return Err(Error::UnpairedSpectrum(max_re / scale));
    }
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let mismatch = pos.iter().zip(&neg).map(|(p, q)| (p - q).abs()).fold(max_re, f64::max);
    if mismatch > PAIRING_TOLERANCE * scale {
        return Err(Error::UnpairedSpectrum(mismatch / scale));
    }
    let nu = pos.iter().zip(&neg).map(|(p, q)| 0.5 * (p + q)).collect();
    Ok(SymplecticSpectrum { nu })
}

pub fn williamson_spectrum(q: &QuadraticForm) -> Result<SymplecticSpectrum> {
    symplectic_eigenvalues(q.matrix())
}

/// `2πE / ν_max`, in action units.
pub fn capacity_quadratic(q: &QuadraticForm) -> Result<f64> {
    Ok(2.0 * PI * q.energy() / williamson_spectrum(q)?.max())
}

/// Area of the section of the set by the conjugate plane `(x_k, p_k)`,
/// `axis` counted from zero. The plane must not be coupled to any other
/// coordinate; a cross term `x_k p_k` inside the plane is allowed and the
/// area is `2πE / √det` of the in-plane block.
pub fn conjugate_section_area(q: &QuadraticForm, axis: usize) -> Result<f64> {
    let n = q.degrees_of_freedom();
    if axis >= n {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for n = {n}")));
    }
    let a = q.matrix();
    let plane = [axis, axis + n];
    let tol = COUPLING_TOLERANCE * a.amax().max(1.0);
    for &i in &plane {
        for j in (0..2 * n).filter(|j| !plane.contains(j)) {
            let v = a[(i, j)].abs().max(a[(j, i)].abs());
            if v > tol {
                return Err(Error::NotSeparable { axis, value: v });
            }
        }
    }
    let det = a[(axis, axis)] * a[(axis + n, axis + n)] - a[(axis, axis + n)] * a[(axis + n, axis)];
    Ok(2.0 * PI * q.energy() / det.sqrt())
}

/// Outcome of the Robertson–Schrödinger test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsReport {
    pub pass: bool,
    /// `min ν(Σ) − ħ/2`.
    pub margin: f64,
    pub min_nu: f64,
}

/// Passes iff every symplectic eigenvalue of `Σ` is at least `ħ/2`. For one
/// degree of freedom this is `Δx²Δp² − Cov² ≥ ħ²/4`.
pub fn rs_check(sigma: &CovarianceMatrix, hbar: f64) -> Result<RsReport> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter("hbar must be positive".into()));
    }
    let min_nu = symplectic_eigenvalues(sigma.matrix())?.min();
    let margin = min_nu - hbar / 2.0;
    Ok(RsReport { pass: margin >= -SATURATION_SLACK, margin, min_nu })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobReport {
    pub pass: bool,
    /// `c / (h/2)`.
    pub ratio: f64,
    pub capacity: f64,
}

/// Whether the set has capacity at least `h/2 = πħ`.
pub fn quantum_blob_contained(q: &QuadraticForm, hbar: f64) -> Result<BlobReport> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter("hbar must be positive".into()));
    }
    let capacity = capacity_quadratic(q)?;
    let ratio = capacity / (PI * hbar);
    Ok(BlobReport { pass: ratio >= 1.0 - SATURATION_SLACK, ratio, capacity })
}

/// Wigner ellipsoid `{½zᵀΣ⁻¹z ≤ 1}` of a Gaussian with covariance `Σ`. Its
/// capacity is `2π·ν_min(Σ)`, so it holds a quantum blob exactly when `Σ`
/// satisfies the uncertainty principle.
pub fn wigner_ellipsoid(sigma: &CovarianceMatrix) -> Result<QuadraticForm> {
    let inv = sigma.matrix().clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    QuadraticForm::new((&inv + inv.transpose()) * 0.5, 1.0)
}

/// `Mᵀ J M = J` within `tol` (max-entry norm).
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows() / 2;
    let j = standard_symplectic_matrix(n);
    (m.transpose() * &j * m - j).amax() <= tol
}

/// `exp(J·K)` for a random symmetric `K` with entries uniform in
/// `[-scale, scale]`; `J·K` is Hamiltonian so the exponential is symplectic.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let m = 2 * n;
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = rng.gen_range(-scale..=scale);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    (standard_symplectic_matrix(n) * k).exp()
}

/// `BᵀB + shift·I` for random `B` with entries uniform in `[-1, 1]`.
pub fn random_positive_definite<R: Rng + ?Sized>(m: usize, shift: f64, rng: &mut R) -> DMatrix<f64> {
    let b = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..=1.0));
    let a = b.transpose() * b + DMatrix::identity(m, m) * shift;
    (&a + a.transpose()) * 0.5
}

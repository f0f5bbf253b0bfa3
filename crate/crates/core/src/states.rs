//! Closed-form reference states, their energies and external potentials.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diff::Differentiator;
use crate::error::{Error, Result};
use crate::field::{ScalarField, WaveField};
use crate::grid::{Grid, PhysicsParams};

/// Probability allowed outside the sampled domain.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;

/// Largest oscillator quantum number accepted.
pub const MAX_OSCILLATOR_LEVEL: u32 = 200;

fn default_omega() -> f64 {
    1.0
}

fn default_length() -> f64 {
    1.0
}

/// Which closed-form state to sample.
///
/// Packets have amplitude `exp(-(x - x0)²/4σ²)` along axis 0, so that
/// `Δx = σ`; on grids with more axes the remaining factors are centred
/// Gaussians of the same width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateKind {
    /// Isotropic three-dimensional oscillator ground state.
    Coherent3d {
        #[serde(default = "default_omega")]
        omega: f64,
    },
    /// One-dimensional oscillator eigenstate `n ≥ 0`.
    Oscillator1d {
        n: u32,
        #[serde(default = "default_omega")]
        omega: f64,
    },
    /// Infinite square well on `(0, length)`, `n ≥ 1`.
    Well1d {
        n: u32,
        #[serde(default = "default_length")]
        length: f64,
    },
    GaussianPacket { x0: f64, p0: f64, sigma: f64 },
    /// Centred Gaussian carrying a plane-wave phase `p0·x/ħ`.
    PlaneModulated { p0: f64, sigma: f64 },
}

/// Serialized as one flat object: the kind's fields plus `mass` and `hbar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateSpec {
    #[serde(flatten)]
    pub kind: StateKind,
    #[serde(flatten)]
    pub params: PhysicsParams,
}

// By hand because serde cannot combine `flatten` with strict field checks.
impl<'de> Deserialize<'de> for StateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut map = serde_json::Map::deserialize(d)?;
        let mut params = serde_json::Map::new();
        for key in ["mass", "hbar"] {
            if let Some(v) = map.remove(key) {
                params.insert(key.into(), v);
            }
        }
        let kind = StateKind::deserialize(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
        let params = PhysicsParams::deserialize(serde_json::Value::Object(params)).map_err(D::Error::custom)?;
        Ok(Self { kind, params })
    }
}

impl StateSpec {
    pub fn new(kind: StateKind, params: PhysicsParams) -> Result<Self> {
        let s = Self { kind, params };
        s.validate()?;
        Ok(s)
    }

    pub fn coherent3d(omega: f64) -> Self {
        Self { kind: StateKind::Coherent3d { omega }, params: PhysicsParams::default() }
    }

    pub fn oscillator1d(n: u32, omega: f64) -> Self {
        Self { kind: StateKind::Oscillator1d { n, omega }, params: PhysicsParams::default() }
    }

    pub fn well1d(n: u32, length: f64) -> Self {
        Self { kind: StateKind::Well1d { n, length }, params: PhysicsParams::default() }
    }

    pub fn gaussian_packet(x0: f64, p0: f64, sigma: f64) -> Self {
        Self { kind: StateKind::GaussianPacket { x0, p0, sigma }, params: PhysicsParams::default() }
    }

    pub fn plane_modulated(p0: f64, sigma: f64) -> Self {
        Self { kind: StateKind::PlaneModulated { p0, sigma }, params: PhysicsParams::default() }
    }

    pub fn with_params(mut self, params: PhysicsParams) -> Self {
        self.params = params;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match self.kind {
            StateKind::Coherent3d { omega } => positive("omega", omega),
            StateKind::Oscillator1d { n, omega } => {
                if n > MAX_OSCILLATOR_LEVEL {
                    return Err(Error::InvalidParameter(format!("n must be <= {MAX_OSCILLATOR_LEVEL}")));
                }
                positive("omega", omega)
            }
            StateKind::Well1d { n, length } => {
                if n == 0 {
                    return Err(Error::InvalidParameter("well quantum number starts at 1".into()));
                }
                positive("length", length)
            }
            StateKind::GaussianPacket { x0, p0, sigma } => {
                finite("x0", x0)?;
                finite("p0", p0)?;
                positive("sigma", sigma)
            }
            StateKind::PlaneModulated { p0, sigma } => {
                finite("p0", p0)?;
                positive("sigma", sigma)
            }
        }
    }

    /// Spatial dimension the state is defined in; packets default to 1 but
    /// can be sampled on grids of any dimension.
    pub fn natural_dim(&self) -> usize {
        match self.kind {
            StateKind::Coherent3d { .. } => 3,
            _ => 1,
        }
    }

    pub fn is_eigenstate(&self) -> bool {
        matches!(
            self.kind,
            StateKind::Coherent3d { .. } | StateKind::Oscillator1d { .. } | StateKind::Well1d { .. }
        )
    }

    /// Oscillator length `√(ħ/mω)`, if the state has one.
    pub fn oscillator_length(&self) -> Option<f64> {
        match self.kind {
            StateKind::Coherent3d { omega } | StateKind::Oscillator1d { omega, .. } => {
                Some((self.params.hbar / (self.params.mass * omega)).sqrt())
            }
            _ => None,
        }
    }

    /// Unnormalized closed-form amplitude at `r`.
    fn amplitude(&self, r: [f64; 3], dim: usize) -> Complex64 {
        let hbar = self.params.hbar;
        match self.kind {
            StateKind::Coherent3d { .. } => {
                let l = self.oscillator_length().unwrap();
                let r2: f64 = r[..dim].iter().map(|x| x * x).sum();
                Complex64::new((-r2 / (2.0 * l * l)).exp(), 0.0)
            }
            StateKind::Oscillator1d { n, .. } => {
                let l = self.oscillator_length().unwrap();
                Complex64::new(hermite_function(n, r[0] / l), 0.0)
            }
            StateKind::Well1d { n, length } => Complex64::new((n as f64 * PI * r[0] / length).sin(), 0.0),
            StateKind::GaussianPacket { x0, p0, sigma } => packet(r, dim, x0, p0, sigma, hbar),
            StateKind::PlaneModulated { p0, sigma } => packet(r, dim, 0.0, p0, sigma, hbar),
        }
    }

    /// Probability outside `[lo, hi]` of the one-dimensional marginal along
    /// `axis`, integrated numerically from the closed form.
    fn marginal_tail_mass(&self, axis: usize, lo: f64, hi: f64) -> f64 {
        let (centre, scale, density): (f64, f64, Box<dyn Fn(f64) -> f64>) = match self.kind {
            StateKind::Coherent3d { .. } => {
                let l = self.oscillator_length().unwrap();
                (0.0, l, Box::new(move |x: f64| (-(x * x) / (l * l)).exp() / (PI.sqrt() * l)))
            }
            StateKind::Oscillator1d { n, .. } => {
                let l = self.oscillator_length().unwrap();
                let reach = ((2 * n + 1) as f64).sqrt() * l;
                (0.0, reach.max(l), Box::new(move |x: f64| hermite_function(n, x / l).powi(2) / l))
            }
            StateKind::Well1d { .. } => return 0.0,
            StateKind::GaussianPacket { x0, sigma, .. } => {
                let c = if axis == 0 { x0 } else { 0.0 };
                (c, sigma, Box::new(move |x: f64| gaussian_density(x - c, sigma)))
            }
            StateKind::PlaneModulated { sigma, .. } => {
                (0.0, sigma, Box::new(move |x: f64| gaussian_density(x, sigma)))
            }
        };
        let far = centre.abs() + lo.abs().max(hi.abs()) + 40.0 * scale;
        integrate(&density, -far, lo) + integrate(&density, hi, far)
    }
}

fn packet(r: [f64; 3], dim: usize, x0: f64, p0: f64, sigma: f64, hbar: f64) -> Complex64 {
    let mut e = -(r[0] - x0).powi(2);
    for x in &r[1..dim] {
        e -= x * x;
    }
    Complex64::from_polar((e / (4.0 * sigma * sigma)).exp(), p0 * r[0] / hbar)
}

fn gaussian_density(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Composite Simpson rule on a fixed fine partition; the densities here are
/// smooth and decay monotonically in the tails.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = 4000;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Normalized Hermite function `ψ_n(ξ)` with `∫ψ_n² dξ = 1`, by the stable
/// three-term recurrence.
pub fn hermite_function(n: u32, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Samples the state on `grid` and normalizes by grid quadrature.
pub fn realize(spec: &StateSpec, grid: &Grid) -> Result<WaveField> {
    spec.validate()?;
    let dim = grid.dim();
    match spec.kind {
        StateKind::Coherent3d { .. } if dim != 3 => {
            return Err(Error::InvalidGrid("coherent3d needs a three-dimensional grid".into()));
        }
        StateKind::Oscillator1d { .. } if dim != 1 => {
            return Err(Error::InvalidGrid("oscillator1d needs a one-dimensional grid".into()));
        }
        StateKind::Well1d { length, .. } => {
            let tol = 1e-12 * length;
            if dim != 1
                || grid.is_periodic()
                || grid.lower()[0].abs() > tol
                || (grid.upper()[0] - length).abs() > tol
            {
                return Err(Error::InvalidGrid(format!(
                    "well states need a non-periodic 1D grid spanning exactly (0, {length})"
                )));
            }
        }
        _ => {}
    }
    let mut inside = 1.0;
    for axis in 0..dim {
        let tail = spec.marginal_tail_mass(axis, grid.lower()[axis], grid.upper()[axis]);
        inside *= 1.0 - tail;
    }
    let outside = 1.0 - inside;
    if outside > TRUNCATION_TOLERANCE {
        return Err(Error::Truncation(format!(
            "{outside:.3e} of the probability lies outside the grid (limit {TRUNCATION_TOLERANCE:e})"
        )));
    }
    let wf = WaveField::from_fn(grid.clone(), spec.params, |r| spec.amplitude(r, dim))?;
    let wf = if let StateKind::Well1d { .. } = spec.kind {
        // walls are exact zeros, not sin(nπ) rounding
        let (g, mut psi, p) = wf.into_parts();
        let last = psi.len() - 1;
        psi[0] = Complex64::default();
        psi[last] = Complex64::default();
        WaveField::new(g, psi, p)?
    } else {
        wf
    };
    wf.normalized()
}

/// Exact energy of an eigenstate kind.
pub fn exact_energy(spec: &StateSpec) -> Result<f64> {
    let PhysicsParams { mass, hbar } = spec.params;
    match spec.kind {
        StateKind::Coherent3d { omega } => Ok(1.5 * omega * hbar),
        StateKind::Oscillator1d { n, omega } => Ok((n as f64 + 0.5) * omega * hbar),
        StateKind::Well1d { n, length } => Ok((hbar * n as f64 * PI / length).powi(2) / (2.0 * mass)),
        _ => Err(Error::NotEigenstate(format!("{:?} is not an energy eigenstate", spec.kind))),
    }
}

/// Static external potential, evaluated on demand on any grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    /// `½ m ω² |r|²`.
    Harmonic { mass: f64, omega: f64 },
    /// Zero inside `(0, length)`; the walls are imposed as boundary
    /// conditions, not sampled.
    Well { length: f64 },
}

impl Potential {
    pub fn eval(&self, r: [f64; 3], dim: usize) -> f64 {
        match *self {
            Potential::Zero | Potential::Well { .. } => 0.0,
            Potential::Harmonic { mass, omega } => {
                0.5 * mass * omega * omega * r[..dim].iter().map(|x| x * x).sum::<f64>()
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        let dim = grid.dim();
        ScalarField::from_fn(grid.clone(), |r| self.eval(r, dim))
    }

    /// Whether the potential expects a wall-bounded grid.
    pub fn has_walls(&self) -> bool {
        matches!(self, Potential::Well { .. })
    }
}

/// External potential the state is an eigenstate of; free packets get
/// [`Potential::Zero`].
pub fn exact_potential(spec: &StateSpec) -> Potential {
    match spec.kind {
        StateKind::Coherent3d { omega } | StateKind::Oscillator1d { omega, .. } => {
            Potential::Harmonic { mass: spec.params.mass, omega }
        }
        StateKind::Well1d { length, .. } => Potential::Well { length },
        _ => Potential::Zero,
    }
}

/// Grid on which the state is resolved well beyond the verification
/// tolerances.
pub fn default_grid(spec: &StateSpec) -> Result<Grid> {
    spec.validate()?;
    match spec.kind {
        StateKind::Coherent3d { .. } => {
            let l = spec.oscillator_length().unwrap();
            Grid::cube(3, 64, -8.0 * l, 8.0 * l, true)
        }
        StateKind::Oscillator1d { n, .. } => {
            let l = spec.oscillator_length().unwrap();
            let half = l * (((2 * n + 1) as f64).sqrt() + 8.0);
            let n_points = if n <= 16 { 256 } else { 512 };
            Grid::cube(1, n_points, -half, half, true)
        }
        StateKind::Well1d { length, .. } => Grid::cube(1, 1024, 0.0, length, false),
        StateKind::GaussianPacket { x0, p0, sigma } => packet_grid(x0, p0, sigma, spec.params.hbar),
        StateKind::PlaneModulated { p0, sigma } => packet_grid(0.0, p0, sigma, spec.params.hbar),
    }
}

fn packet_grid(x0: f64, p0: f64, sigma: f64, hbar: f64) -> Result<Grid> {
    let half = 12.0 * sigma;
    let h = PI / (p0.abs() / hbar + 6.0 / sigma);
    let n = ((2.0 * half / h).ceil() as usize).next_power_of_two().max(64);
    Grid::cube(1, n, x0 - half, x0 + half, true)
}

/// `‖(-ħ²/2m ∇² + V - E)ψ‖ / ‖ψ‖` over the points selected by `select`.
pub fn eigen_residual(wf: &WaveField, potential: &Potential, energy: f64, select: &[bool]) -> f64 {
    let g = wf.grid();
    let p = wf.params();
    let lap = Differentiator::new(g).laplacian(wf.psi());
    let dim = g.dim();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in (0..g.len()).filter(|&i| select[i]) {
        let v = potential.eval(g.point(i), dim);
        let h_psi = lap[i] * (-p.hbar * p.hbar / (2.0 * p.mass)) + wf.psi()[i] * (v - energy);
        num += h_psi.norm_sqr();
        den += wf.psi()[i].norm_sqr();
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

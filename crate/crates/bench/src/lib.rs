//! Fixtures shared by the kernel benchmarks.

use qphase_core::states::{realize, StateSpec};
use qphase_core::{Grid, WaveField};

/// Coherent state on an `n³` periodic grid over ±8.
pub fn coherent(n: usize) -> WaveField {
    let g = Grid::cube(3, n, -8.0, 8.0, true).expect("valid grid");
    realize(&StateSpec::coherent3d(1.0), &g).expect("state fits")
}

/// One-dimensional oscillator eigenstate on 256 periodic points.
pub fn oscillator(n: u32) -> WaveField {
    let g = Grid::cube(1, 256, -12.0, 12.0, true).expect("valid grid");
    realize(&StateSpec::oscillator1d(n, 1.0), &g).expect("state fits")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_normalized() {
        assert!((super::coherent(16).norm_sq() - 1.0).abs() < 1e-12);
        assert!((super::oscillator(2).norm_sq() - 1.0).abs() < 1e-12);
    }
}

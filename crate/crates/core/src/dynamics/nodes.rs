//! Behaviour of the quantum potential next to nodes of a 1D state.

use serde::{Deserialize, Serialize};

use super::propagate::enclosed_nodes;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::wavefield::{default_eps_node, node_mask, quantum_potential_with};

/// Number of shells sampled on each side of a node.
pub const SHELL_COUNT: usize = 10;
/// Relative spread below which `Q` counts as constant across the shells.
pub const CONSTANT_SPREAD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QBehaviour {
    Constant { value: f64, rel_spread: f64 },
    /// `|Q|` grows towards the node roughly as `distance^exponent`.
    Divergent { exponent: f64, rel_spread: f64 },
    Varying { exponent: f64, rel_spread: f64 },
    /// Fewer than two usable shells.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    /// Shell number, counted in cells from the node region.
    pub index: usize,
    pub distance: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub position: f64,
    pub shells: Vec<Shell>,
    pub behaviour: QBehaviour,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub eps_node: f64,
    pub nodes: Vec<NodeInfo>,
}

/// Locates the interior nodes of a 1D state and samples `Q` on shells at
/// increasing distance.
///
/// A node is either a run of masked points not connected to the grid edge
/// or a sign change of `ψ` between two unmasked neighbours. Wall points and
/// the masked far tail are never reported.
pub fn node_diagnostics(wf: &WaveField, eps_node: Option<f64>) -> Result<NodeReport> {
    let g = wf.grid();
    if g.dim() != 1 {
        return Err(Error::InvalidGrid("node diagnostics are implemented for 1D states".into()));
    }
    let eps = eps_node.unwrap_or_else(|| default_eps_node(wf));
    let q = quantum_potential_with(wf, eps)?;
    let mask = node_mask(wf, eps);
    let enclosed = enclosed_nodes(g, &mask);
    let psi = wf.psi();
    let n = g.len();
    let h = g.spacing(0);

    // (first masked index, last masked index, position); an empty run is
    // encoded as first = last + 1
    let mut regions: Vec<(isize, isize, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        if enclosed[i] {
            let start = i;
            while i + 1 < n && enclosed[i + 1] {
                i += 1;
            }
            let mid = 0.5 * (g.coord(0, start) + g.coord(0, i));
            regions.push((start as isize, i as isize, mid));
        }
        i += 1;
    }
    let pairs = if g.is_periodic() { n } else { n - 1 };
    for i in 0..pairs {
        let j = (i + 1) % n;
        if mask[i] || mask[j] {
            continue;
        }
        if (psi[i].conj() * psi[j]).re < 0.0 {
            let (a, b) = (psi[i].norm(), psi[j].norm());
            let x = g.coord(0, i) + h * a / (a + b);
            regions.push((i as isize + 1, i as isize, x));
        }
    }
    regions.sort_by(|a, b| a.2.total_cmp(&b.2));

    let at = |k: isize| -> Option<usize> {
        if g.is_periodic() {
            Some(k.rem_euclid(n as isize) as usize)
        } else if k >= 0 && (k as usize) < n {
            Some(k as usize)
        } else {
            None
        }
    };
    let nodes = regions
        .into_iter()
        .map(|(first, last, x)| {
            let mut shells = Vec::new();
            for d in 1..=SHELL_COUNT {
                let mut acc = (0.0, 0.0, 0usize);
                for kk in [first - d as isize, last + d as isize] {
                    if let Some(k) = at(kk) {
                        if !q.is_masked(k) {
                            acc.0 += q.values()[k];
                            acc.1 += (g.lower()[0] + kk as f64 * h - x).abs();
                            acc.2 += 1;
                        }
                    }
                }
                if acc.2 > 0 {
                    let c = acc.2 as f64;
                    shells.push(Shell { index: d, distance: acc.1 / c, q: acc.0 / c });
                }
            }
            let behaviour = classify(&shells);
            NodeInfo { position: x, shells, behaviour }
        })
        .collect();
    Ok(NodeReport { eps_node: eps, nodes })
}

fn classify(shells: &[Shell]) -> QBehaviour {
    if shells.len() < 2 {
        return QBehaviour::Undetermined;
    }
    let qs: Vec<f64> = shells.iter().map(|s| s.q).collect();
    let max = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = qs.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = qs.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let rel_spread = (max - min) / scale;
    if rel_spread < CONSTANT_SPREAD {
        let value = qs.iter().sum::<f64>() / qs.len() as f64;
        return QBehaviour::Constant { value, rel_spread };
    }
    // least-squares slope of log|Q| against log distance
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.q != 0.0 && s.distance > 0.0)
        .map(|s| (s.distance.ln(), s.q.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return QBehaviour::Undetermined;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let exponent = if den > 0.0 { num / den } else { 0.0 };
    if qs[0].abs() > qs[qs.len() - 1].abs() {
        QBehaviour::Divergent { exponent, rel_spread }
    } else {
        QBehaviour::Varying { exponent, rel_spread }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::states::{default_grid, exact_energy, realize, StateSpec};

    #[test]
    fn well_state_has_constant_q_at_its_node() {
        let spec = StateSpec::well1d(2, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let rep = node_diagnostics(&wf, None).unwrap();
        assert_eq!(rep.nodes.len(), 1);
        let node = &rep.nodes[0];
        assert!((node.position - 0.5).abs() < 1e-9);
        let e = exact_energy(&spec).unwrap();
        match node.behaviour {
            QBehaviour::Constant { value, .. } => assert!((value - e).abs() / e < 1e-4, "{value} vs {e}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oscillator_nodes_are_found_between_points() {
        let spec = StateSpec::oscillator1d(3, 1.0);
        let g = Grid::cube(1, 256, -10.0, 10.0, true).unwrap();
        let wf = realize(&spec, &g).unwrap();
        let rep = node_diagnostics(&wf, None).unwrap();
        // H_3 roots: 0, ±√(3/2)
        let expect = [-(1.5f64).sqrt(), 0.0, (1.5f64).sqrt()];
        assert_eq!(rep.nodes.len(), 3);
        for (n, x) in rep.nodes.iter().zip(expect) {
            assert!((n.position - x).abs() < 2e-2, "{} vs {x}", n.position);
        }
    }

    #[test]
    fn nodeless_state_reports_nothing() {
        let spec = StateSpec::oscillator1d(0, 1.0);
        let g = default_grid(&spec).unwrap();
        let wf = realize(&spec, &g).unwrap();
        assert!(node_diagnostics(&wf, None).unwrap().nodes.is_empty());
    }

    #[test]
    fn divergence_is_classified() {
        let shells: Vec<Shell> = (1..=10)
            .map(|d| {
                let r = d as f64 * 0.01;
                Shell { index: d, distance: r, q: -1.0 / (r * r) }
            })
            .collect();
        match classify(&shells) {
            QBehaviour::Divergent { exponent, .. } => assert!((exponent + 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}

//! Time evolution and the diagnostics that live on timeseries.

pub mod madelung;
pub mod nodes;
pub mod propagate;
pub mod trajectories;

pub use madelung::{madelung_residuals, HjForm, MadelungMonitor, ResidualFrame};
pub use nodes::{node_diagnostics, NodeReport, QBehaviour};
pub use propagate::{
    propagate_classical_nonlinear, propagate_observed, propagate_schrodinger, Dynamics, FrameObserver,
    PropagationConfig, Propagator, QRefresh, Recorder, SplitScheme, Timeseries,
};
pub use trajectories::{
    integrate_bohm_trajectories, sample_seeds, wasserstein1_1d, PathStatus, TrajectoryEnsemble, TrajectoryOptions,
    TrajectoryTracker,
};

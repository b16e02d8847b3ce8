//! Equilibrium analysis for planar ODEs `x′ = Jx + g(x)`.
//!
//! Classification follows the eigenvalues of `J` when they decide the shape,
//! and otherwise integrates in log-polar coordinates and watches the angle.
//! The [`bounds`] module checks decay and angle estimates along trajectories.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classifier;
pub mod error;
pub mod integrator;
pub mod linalg2;
pub mod suite;
pub mod system;

pub use bounds::{
    check_counterexample_winding, check_envelope, check_theta_tail, counterexample_theta_lower,
    identity_eq20, monitor_h, BoundCase, BoundParams, BoundReport, Eq20, HBranch, HReport,
    MarginTracker,
};
pub use classifier::{
    empirical_classify, empirical_run, spectral_classify, Classification, EmpiricalRun,
    EmpiricalThresholds, Evidence, RegularityClass, Shape, Stability,
};
pub use error::{Error, Result};
pub use integrator::{
    integrate, streamline, IntegratorConfig, Sample, Sampling, StreamlineLimits, TerminalEvent,
    Trajectory,
};
pub use linalg2::{
    eigen, normal_form, Eigenvalue, Mat2, NormalForm, NormalFormKind, SpectralStructure, Spectrum,
    Vec2,
};
pub use suite::{report_json, run_suite, Suite};
pub use system::{HolderEstimate, HolderGrid, PlanarSystem, Remainder, SystemConfig};

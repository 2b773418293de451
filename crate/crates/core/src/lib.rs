//! Dynamics of a two-neuron ReLU classifier trained on two points.
//!
//! The crate simulates gradient descent and gradient flow for the model
//! `relu(w1 x + b1) - relu(w2 x + b2)` on the dataset `{(-1, -1), (1, 1)}`
//! under exponential loss, tracks the decision boundary and robustness
//! margin along trajectories, checks analytic growth and margin bounds
//! against logged runs, searches for KKT points of the margin-maximization
//! problem, and replicates a Monte-Carlo convergence experiment.

pub mod bounds;
pub mod error;
pub mod flow;
pub mod kkt;
pub mod model;
pub mod montecarlo;
pub mod pattern;
pub mod rng;
pub mod special;
pub mod trajectory;

pub use bounds::{
    audit_trajectory, bias_gap_lower, equilibrium_target, exp_recursion_bounds,
    margin_bound_onset, nonasymptotic_margin_bound, rate_fit, w1_bounds, w2_bounds,
    weight_gap_upper, BoundEntry, BoundReport, GrowthConstants, RateFit,
};
pub use error::{Error, Result};
pub use flow::{
    directional_distance, gf_integrate, gf_integrate_until, FlowConfig, FlowLog, FlowMethod,
    FlowRecord, FlowStatus, FlowTransition,
};
pub use kkt::{
    find_certificate, is_kkt_point, kkt_residuals, scan_kkt_directions, scan_kkt_hits,
    scan_to_json, KKTCertificate, KKTResiduals, ScanHit,
};
pub use model::{
    decision_boundary, eval_network, loss, robustness_margin, margin_gap, BoundarySet,
    DerivedQuantities, Parameters, EXP_GUARD, THETA_STAR, TRAINING_SET,
};
pub use montecarlo::{
    compare_to_theory, he_init, ks_lower_cut, run_montecarlo, run_trial, AggregateStats,
    GapSample, HistogramBin, TrialConfig, TrialOutcome,
};
pub use rng::SplitMix64;
pub use special::{erf, erfc, gap_cdf, gap_pdf, ks_critical_value, ks_statistic};
pub use pattern::{
    classify_pattern, closed_form_step, excluded_by_loss_bound, gd_step, subgradient,
    ActivationPattern, PatternTag,
};
pub use trajectory::{
    allowed_transition, detect_phase_transitions, equilibrium_residual, run_trajectory,
    validate_transitions, PhaseTransition, StepRecord, StopCriteria, TerminalStatus,
    TrajectoryLog,
};

//! Gradient-descent trajectories with thinned logging.
//!
//! A trajectory iterates [`gd_step`] from a start point and logs parameters,
//! loss, decision boundary, margin, and activation pattern. Long runs are
//! thinned geometrically past the first thousand steps; pattern-transition
//! steps and the final step are always recorded, so the logged tags carry
//! the full transition history.

use crate::error::{Error, Result};
use crate::model::{decision_boundary, robustness_margin, Parameters};
use crate::pattern::{eval_step, PatternTag};
use serde::{Deserialize, Serialize};

/// Stopping rules for [`run_trajectory`] beyond the iteration cap.
///
/// A run that never reaches loss below 0.5 within `classify_cap` steps stops
/// as [`TerminalStatus::NeverClassified`]. Once the loss has dropped below
/// 0.5, the run stops as soon as the equilibrium residual
/// `|w1 + w2 + b1 - b2|` falls to `equilibrium_tol` (when set).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StopCriteria {
    pub classify_cap: u64,
    pub equilibrium_tol: Option<f64>,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            classify_cap: 10_000,
            equilibrium_tol: Some(1e-3),
        }
    }
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum TerminalStatus {
    ReachedIterationCap,
    ReachedEquilibriumTol { at_step: u64 },
    Diverged { at_step: u64, exponent: f64 },
    NeverClassified { cap: u64 },
}

/// One logged step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    #[serde(flatten)]
    pub theta: Parameters,
    pub loss: f64,
    /// The decision boundary when it is a single point, as in the slow-rate
    /// analysis; `None` when the boundary is empty, multi-point, or
    /// degenerate.
    pub x_star: Option<f64>,
    pub margin: f64,
    pub pattern: PatternTag,
}

/// A pattern change observed between consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTransition {
    pub t: u64,
    pub from: PatternTag,
    pub to: PatternTag,
}

/// The full log of one gradient-descent run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub eta: f64,
    pub theta0: Parameters,
    pub stop: StopCriteria,
    pub max_steps: u64,
    pub steps: Vec<StepRecord>,
    pub transitions: Vec<PhaseTransition>,
    pub terminal_status: TerminalStatus,
    pub final_theta: Parameters,
    pub final_step: u64,
}

impl TrajectoryLog {
    /// JSON document with an explicit schema version.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("trajectory log serializes");
        v.as_object_mut()
            .expect("log serializes to an object")
            .insert("schema_version".into(), "1".into());
        v
    }
}

/// Residual of the equilibrium condition `b2 - b1 = w1 + w2`.
pub fn equilibrium_residual(theta: &Parameters) -> f64 {
    (theta.w1 + theta.w2 + theta.b1 - theta.b2).abs()
}

fn make_record(t: u64, theta: &Parameters, loss: f64, pattern: PatternTag) -> Result<StepRecord> {
    let boundary = decision_boundary(theta)?;
    Ok(StepRecord {
        t,
        theta: *theta,
        loss,
        x_star: boundary.unique_point(),
        margin: robustness_margin(theta)?,
        pattern,
    })
}

fn kahan_add(x: &mut f64, comp: &mut f64, delta: f64) {
    let y = delta - *comp;
    let s = *x + y;
    *comp = (s - *x) - y;
    *x = s;
}

/// Runs gradient descent from `theta0` and logs the trajectory.
///
/// Every step below t = 1000 is recorded; beyond that, records follow a
/// geometric schedule of ratio about 1.1, with pattern transitions and the
/// stopping step always included. Parameter accumulation is compensated per
/// coordinate so that exactly-cancelling updates stay cancelled over
/// million-step runs. Divergence truncates the log and is reported through
/// `terminal_status` rather than as an error.
pub fn run_trajectory(
    theta0: &Parameters,
    eta: f64,
    max_steps: u64,
    stop: StopCriteria,
) -> Result<TrajectoryLog> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    theta0.check_finite("trajectory start")?;

    let mut theta = *theta0;
    let mut comp = [0.0f64; 4];
    let mut t: u64 = 0;
    let mut classified = false;
    let mut prev_tag: Option<PatternTag> = None;
    let mut next_geo: u64 = 1000;
    let mut steps = Vec::new();
    let mut transitions = Vec::new();

    let terminal_status = loop {
        let eval = match eval_step(&theta) {
            Ok(e) => e,
            Err(Error::Diverged { exponent }) => {
                break TerminalStatus::Diverged {
                    at_step: t,
                    exponent,
                };
            }
            Err(e) => return Err(e),
        };
        if eval.loss < 0.5 {
            classified = true;
        }
        let tag = eval.pattern.tag;
        let is_transition = prev_tag.is_some_and(|p| p != tag);
        if let (true, Some(from)) = (is_transition, prev_tag) {
            transitions.push(PhaseTransition { t, from, to: tag });
        }
        prev_tag = Some(tag);

        let at_equilibrium = classified
            && stop
                .equilibrium_tol
                .is_some_and(|tol| equilibrium_residual(&theta) <= tol);
        let never_classified = !classified && t >= stop.classify_cap;
        let at_cap = t >= max_steps;
        let stopping = at_equilibrium || never_classified || at_cap;

        if t < 1000 || t == next_geo || is_transition || stopping {
            steps.push(make_record(t, &theta, eval.loss, tag)?);
        }
        if t == next_geo {
            next_geo = t + (t / 10).max(1);
        }

        if at_equilibrium {
            break TerminalStatus::ReachedEquilibriumTol { at_step: t };
        }
        if never_classified {
            break TerminalStatus::NeverClassified {
                cap: stop.classify_cap,
            };
        }
        if at_cap {
            break TerminalStatus::ReachedIterationCap;
        }

        kahan_add(&mut theta.w1, &mut comp[0], -eta * eval.grad[0]);
        kahan_add(&mut theta.b1, &mut comp[1], -eta * eval.grad[1]);
        kahan_add(&mut theta.w2, &mut comp[2], -eta * eval.grad[2]);
        kahan_add(&mut theta.b2, &mut comp[3], -eta * eval.grad[3]);
        t += 1;
    };

    Ok(TrajectoryLog {
        eta,
        theta0: *theta0,
        stop,
        max_steps,
        steps,
        transitions,
        terminal_status,
        final_theta: theta,
        final_step: t,
    })
}

/// Recovers the pattern-transition list from the recorded steps.
///
/// Because transition steps are never thinned away, consecutive records with
/// different tags pin the change to the later record's step, and the result
/// equals the log's own transition list.
pub fn detect_phase_transitions(log: &TrajectoryLog) -> Vec<PhaseTransition> {
    log.steps
        .windows(2)
        .filter(|w| w[0].pattern != w[1].pattern)
        .map(|w| PhaseTransition {
            t: w[1].t,
            from: w[0].pattern,
            to: w[1].pattern,
        })
        .collect()
}

/// True iff the phase graph permits a direct `from → to` step once the loss
/// is below 0.5.
pub fn allowed_transition(from: PatternTag, to: PatternTag) -> bool {
    use PatternTag::*;
    match (from, to) {
        (LinearBothActive, _) => to != LinearBothActive && to != Degenerate,
        (
            Case1RightBothLeftSpec | Case2LeftBothRightSpec,
            SpecializedOverlap | SpecializedDeadInterval,
        ) => true,
        // A both-right-active start can hand the left instance over to
        // neuron 2 before specializing, and symmetrically for both-left.
        (Case3BothRightActive, SpecializedOverlap | SpecializedDeadInterval | Case2LeftBothRightSpec) => true,
        (Case4BothLeftActive, SpecializedOverlap | SpecializedDeadInterval | Case1RightBothLeftSpec) => true,
        (SpecializedDeadInterval, SpecializedOverlap) => true,
        _ => false,
    }
}

/// Checks every recorded transition after the loss first drops below 0.5
/// against the allowed phase graph.
pub fn validate_transitions(log: &TrajectoryLog) -> Result<()> {
    let mut classified = false;
    for w in log.steps.windows(2) {
        classified = classified || w[0].loss < 0.5;
        if classified && w[0].pattern != w[1].pattern && !allowed_transition(w[0].pattern, w[1].pattern)
        {
            return Err(Error::DisallowedTransition {
                t: w[1].t,
                from: w[0].pattern,
                to: w[1].pattern,
            });
        }
    }
    Ok(())
}

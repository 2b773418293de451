//! Gradient-flow integration.
//!
//! The flow `dθ/dτ = −∇L(θ)` is integrated with fixed-step Euler or
//! classical Runge-Kutta, using the same subgradient convention as the
//! discrete dynamics; one Euler step with `dt = η` is bit-identical to
//! [`crate::pattern::gd_step`]. Kinks get no event detection: the field is
//! piecewise smooth and trajectories cross them transversally, so step
//! halving bounds the discretization error empirically.

use crate::error::{Error, Result};
use crate::model::{decision_boundary, robustness_margin, Parameters};
use crate::pattern::{apply_step, eval_step, PatternTag, StepEval};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMethod {
    Euler,
    Rk4,
}

/// Integration setup: step size, virtual-time horizon, scheme.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub duration: f64,
    pub method: FlowMethod,
}

impl FlowConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "flow step must be positive and finite, got {}",
                self.dt
            )));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "flow duration must be finite and at least one step, got {}",
                self.duration
            )));
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum FlowStatus {
    ReachedDurationCap,
    ReachedLossTarget { at_tau: f64 },
    Diverged { at_tau: f64, exponent: f64 },
}

/// One logged point of the flow, indexed by virtual time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowRecord {
    pub tau: f64,
    #[serde(flatten)]
    pub theta: Parameters,
    pub loss: f64,
    pub x_star: Option<f64>,
    pub margin: f64,
    pub pattern: PatternTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTransition {
    pub tau: f64,
    pub from: PatternTag,
    pub to: PatternTag,
}

/// The full log of one integration, mirroring the gradient-descent log with
/// virtual time in place of the iteration index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowLog {
    pub config: FlowConfig,
    pub theta0: Parameters,
    pub steps: Vec<FlowRecord>,
    pub transitions: Vec<FlowTransition>,
    pub terminal_status: FlowStatus,
    pub final_theta: Parameters,
    pub final_tau: f64,
}

impl FlowLog {
    /// JSON document with an explicit schema version.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("flow log serializes");
        v.as_object_mut()
            .expect("log serializes to an object")
            .insert("schema_version".into(), "1".into());
        v
    }
}

/// Euclidean distance between the unit vectors along `theta` and `target`.
pub fn directional_distance(theta: &Parameters, target: &Parameters) -> Result<f64> {
    theta.check_finite("directional_distance input")?;
    target.check_finite("directional_distance target")?;
    let (na, nb) = (theta.norm(), target.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let a = theta.as_array();
    let b = target.as_array();
    let mut s = 0.0;
    for i in 0..4 {
        let d = a[i] / na - b[i] / nb;
        s += d * d;
    }
    Ok(s.sqrt())
}

fn rk4_step(theta: &Parameters, dt: f64, k1: [f64; 4]) -> Result<Parameters> {
    let half = 0.5 * dt;
    let k2 = eval_step(&apply_step(theta, half, k1))?.grad;
    let k3 = eval_step(&apply_step(theta, half, k2))?.grad;
    let k4 = eval_step(&apply_step(theta, dt, k3))?.grad;
    let mut combined = [0.0; 4];
    for i in 0..4 {
        combined[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    Ok(apply_step(theta, dt, combined))
}

struct FlowRun {
    steps: Vec<FlowRecord>,
    transitions: Vec<FlowTransition>,
    status: FlowStatus,
    theta: Parameters,
    tau: f64,
}

fn integrate(
    theta0: &Parameters,
    dt: f64,
    method: FlowMethod,
    n_steps: u64,
    loss_target: Option<f64>,
) -> Result<FlowRun> {
    let mut theta = *theta0;
    let mut n: u64 = 0;
    let mut prev_tag: Option<PatternTag> = None;
    let mut next_geo: u64 = 1000;
    let mut steps = Vec::new();
    let mut transitions = Vec::new();

    let record = |steps: &mut Vec<FlowRecord>, tau: f64, th: &Parameters, e: &StepEval| -> Result<()> {
        let boundary = decision_boundary(th)?;
        steps.push(FlowRecord {
            tau,
            theta: *th,
            loss: e.loss,
            x_star: boundary.unique_point(),
            margin: robustness_margin(th)?,
            pattern: e.pattern.tag,
        });
        Ok(())
    };

    let status = loop {
        let tau = n as f64 * dt;
        let eval = match eval_step(&theta) {
            Ok(e) => e,
            Err(Error::Diverged { exponent }) => {
                break FlowStatus::Diverged { at_tau: tau, exponent };
            }
            Err(e) => return Err(e),
        };
        let tag = eval.pattern.tag;
        let is_transition = prev_tag.is_some_and(|p| p != tag);
        if let (true, Some(from)) = (is_transition, prev_tag) {
            transitions.push(FlowTransition { tau, from, to: tag });
        }
        prev_tag = Some(tag);

        let hit_target = loss_target.is_some_and(|target| eval.loss <= target);
        let at_cap = n >= n_steps;
        if n < 1000 || n == next_geo || is_transition || hit_target || at_cap {
            record(&mut steps, tau, &theta, &eval)?;
        }
        if n == next_geo {
            next_geo = n + (n / 10).max(1);
        }
        if hit_target {
            break FlowStatus::ReachedLossTarget { at_tau: tau };
        }
        if at_cap {
            break FlowStatus::ReachedDurationCap;
        }

        theta = match method {
            FlowMethod::Euler => apply_step(&theta, dt, eval.grad),
            FlowMethod::Rk4 => match rk4_step(&theta, dt, eval.grad) {
                Ok(next) => next,
                Err(Error::Diverged { exponent }) => {
                    break FlowStatus::Diverged { at_tau: tau, exponent };
                }
                Err(e) => return Err(e),
            },
        };
        if !theta.is_finite() {
            break FlowStatus::Diverged {
                at_tau: (n + 1) as f64 * dt,
                exponent: f64::INFINITY,
            };
        }
        n += 1;
    };

    Ok(FlowRun {
        steps,
        transitions,
        status,
        theta,
        tau: n as f64 * dt,
    })
}

/// Integrates the flow from `theta0` over `cfg.duration`, rounded to a whole
/// number of steps.
pub fn gf_integrate(theta0: &Parameters, cfg: FlowConfig) -> Result<FlowLog> {
    cfg.validate()?;
    theta0.check_finite("flow start")?;
    let n_steps = (cfg.duration / cfg.dt).round().max(1.0) as u64;
    let run = integrate(theta0, cfg.dt, cfg.method, n_steps, None)?;
    Ok(FlowLog {
        config: cfg,
        theta0: *theta0,
        steps: run.steps,
        transitions: run.transitions,
        terminal_status: run.status,
        final_theta: run.theta,
        final_tau: run.tau,
    })
}

/// Integrates until the loss first reaches `loss_target`, up to
/// `max_duration` of virtual time.
pub fn gf_integrate_until(
    theta0: &Parameters,
    dt: f64,
    method: FlowMethod,
    loss_target: f64,
    max_duration: f64,
) -> Result<FlowLog> {
    let cfg = FlowConfig {
        dt,
        duration: max_duration,
        method,
    };
    cfg.validate()?;
    if !(loss_target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "loss target must be positive, got {loss_target}"
        )));
    }
    theta0.check_finite("flow start")?;
    let n_steps = (max_duration / dt).round().max(1.0) as u64;
    let run = integrate(theta0, dt, method, n_steps, Some(loss_target))?;
    Ok(FlowLog {
        config: cfg,
        theta0: *theta0,
        steps: run.steps,
        transitions: run.transitions,
        terminal_status: run.status,
        final_theta: run.theta,
        final_tau: run.tau,
    })
}

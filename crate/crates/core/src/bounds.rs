//! Closed-form growth bounds, equilibrium limits, and trajectory audits.
//!
//! The specialized dynamics reduce each weight to a scalar recursion
//! `a_{t+1} = a_t + c1 exp(∓c2 a_t)` whose growth admits a two-sided
//! logarithmic sandwich. This module evaluates those sandwiches, the
//! equilibrium target of the bias gap, the logarithmic weight-gap and
//! linear bias-gap bounds, and the nonasymptotic floor on the decision
//! boundary, and audits recorded trajectories against all of them. Bound
//! arguments are handled in log space so evaluation stays total far past
//! the exponential overflow range.

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::pattern::classify_pattern;
use crate::trajectory::{StepRecord, TrajectoryLog};
use serde::{Deserialize, Serialize};

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Constants controlling the specialized-phase growth rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// Upper-sandwich constant for the growth of w1.
    pub c1: f64,
    /// Upper-sandwich constant for the decay of w2.
    pub c2: f64,
    /// Equilibrium value of the bias gap.
    pub s_star: f64,
    /// Onset step of the linear bias-gap bound, when its hypotheses hold.
    pub t0: Option<u64>,
}

impl GrowthConstants {
    pub fn from_start(theta0: &Parameters, eta: f64) -> Self {
        let d = theta0.derived();
        GrowthConstants {
            c1: (eta * (d.v1 - 2.0 * theta0.w1).exp()).exp(),
            c2: (eta * (2.0 * theta0.w2 - d.u2).exp()).exp(),
            s_star: equilibrium_target(theta0),
            t0: bias_gap_lower(theta0, eta).ok().map(|(t0, _)| t0),
        }
    }
}

/// Two-sided bounds for the scalar recursion behind the specialized weight
/// dynamics.
///
/// For `c1 > 0` the recursion is `a_{t+1} = a_t + c1 exp(-c2 a_t)`
/// (logarithmic growth); for `c1 < 0` it is the mirrored decay
/// `a_{t+1} = a_t + c1 exp(c2 a_t)`, bounded by negating the growth case.
pub fn exp_recursion_bounds(a0: f64, c1: f64, c2: f64, t: u64) -> Result<(f64, f64)> {
    if c1 == 0.0 || !c1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "recursion coefficient must be finite and nonzero, got {c1}"
        )));
    }
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay rate must be positive and finite, got {c2}"
        )));
    }
    if !a0.is_finite() {
        return Err(Error::NonFinite("recursion start"));
    }
    if t == 0 {
        return Ok((a0, a0));
    }
    let m = c1.abs();
    let ln_drive = (t as f64).ln() + (c2 * m).ln();
    if c1 > 0.0 {
        let base = c2 * a0;
        let lower = log_add_exp(base, ln_drive) / c2;
        let upper = log_add_exp(base, ln_drive + c2 * m * (-base).exp()) / c2;
        Ok((lower, upper))
    } else {
        let base = -c2 * a0;
        let lower = -log_add_exp(base, ln_drive + c2 * m * (-base).exp()) / c2;
        let upper = -log_add_exp(base, ln_drive) / c2;
        Ok((lower, upper))
    }
}

fn require_specialized(theta0: &Parameters, eta: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    let tag = classify_pattern(theta0)?.tag;
    if !tag.is_specialized() {
        return Err(Error::NotApplicable(format!(
            "start classifies as {tag}, not a specialized regime"
        )));
    }
    Ok(())
}

/// Sandwich on w1(t) from a specialized start.
pub fn w1_bounds(theta0: &Parameters, eta: f64, t: u64) -> Result<(f64, f64)> {
    require_specialized(theta0, eta)?;
    if t == 0 {
        return Ok((theta0.w1, theta0.w1));
    }
    let v1 = theta0.derived().v1;
    let base = 2.0 * theta0.w1;
    let lt = (t as f64).ln();
    let lower = 0.5 * log_add_exp(base, eta.ln() + v1 + lt);
    let ln_c1 = eta * (v1 - base).exp();
    let upper = 0.5 * log_add_exp(base, (2.0 * eta).ln() + ln_c1 + v1 + lt);
    Ok((lower, upper))
}

/// Sandwich on w2(t) from a specialized start; w2 decreases without bound.
pub fn w2_bounds(theta0: &Parameters, eta: f64, t: u64) -> Result<(f64, f64)> {
    require_specialized(theta0, eta)?;
    if t == 0 {
        return Ok((theta0.w2, theta0.w2));
    }
    let u2 = theta0.derived().u2;
    let base = -2.0 * theta0.w2;
    let lt = (t as f64).ln();
    let ln_c2 = eta * (-u2 - base).exp();
    let lower = -0.5 * log_add_exp(base, (2.0 * eta).ln() + ln_c2 - u2 + lt);
    let upper = -0.5 * log_add_exp(base, eta.ln() - u2 + lt);
    Ok((lower, upper))
}

/// The common limit of the bias gap `b2 - b1` and the weight sum `w1 + w2`:
/// half the conserved quantity `w1 - b1 + w2 + b2`.
pub fn equilibrium_target(theta0: &Parameters) -> f64 {
    0.5 * (theta0.w1 - theta0.b1 + theta0.w2 + theta0.b2)
}

/// Logarithmic upper bound on the weight gap `w1(t) - w2(t)` under zero-bias
/// initialization in the convergent box.
pub fn weight_gap_upper(theta0: &Parameters, eta: f64, t: u64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if theta0.b1 != 0.0 || theta0.b2 != 0.0 {
        return Err(Error::NotApplicable("biases must start at zero".into()));
    }
    if !(theta0.w1 > 0.0 && theta0.w1 < 3.0) {
        return Err(Error::NotApplicable(format!(
            "w1(0) = {} outside (0, 3)",
            theta0.w1
        )));
    }
    if !(theta0.w2 > -2.0 && theta0.w2 < 0.0) {
        return Err(Error::NotApplicable(format!(
            "w2(0) = {} outside (-2, 0)",
            theta0.w2
        )));
    }
    Ok(5.0 + (2.0 * eta.exp() * eta * t as f64).ln_1p())
}

/// Linear-onset lower bound on the bias gap: from step `t0` on,
/// `b2 - b1` stays at or above the returned constant.
pub fn bias_gap_lower(theta0: &Parameters, eta: f64) -> Result<(u64, f64)> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if eta > 0.3 {
        return Err(Error::NotApplicable(format!(
            "step size {eta} exceeds 0.3"
        )));
    }
    if theta0.b1 != 0.0 || theta0.b2 != 0.0 {
        return Err(Error::NotApplicable("biases must start at zero".into()));
    }
    if !(theta0.w2 < 0.0 && 0.0 < theta0.w1) {
        return Err(Error::NotApplicable(format!(
            "weights ({}, {}) not in the convergent quadrant",
            theta0.w1, theta0.w2
        )));
    }
    let s = theta0.w1 + theta0.w2;
    if !(s > 1.0) {
        return Err(Error::NotApplicable(format!(
            "weight sum {s} not above 1"
        )));
    }
    let t0 = (s / (2.0 * eta * (0.5 * (-theta0.w1 + theta0.w2)).exp())).floor() as u64;
    Ok((t0, s / 11.0 - 0.1))
}

/// First step at which the nonasymptotic boundary floor applies.
pub fn margin_bound_onset(eta: f64) -> Result<u64> {
    if !(eta > 0.0 && eta <= 0.3) {
        return Err(Error::NotApplicable(format!(
            "step size {eta} outside (0, 0.3]"
        )));
    }
    Ok((7.0 / eta).ceil() as u64)
}

/// Nonasymptotic lower bound on the boundary point x*(t), valid from
/// [`margin_bound_onset`] steps on.
pub fn nonasymptotic_margin_bound(eta: f64, t: u64) -> Result<f64> {
    let onset = margin_bound_onset(eta)?;
    if t < onset {
        return Err(Error::NotApplicable(format!(
            "step {t} below the bound's onset {onset}"
        )));
    }
    Ok(1.0 / (25.0 + 5.0 * (4.0 * eta * t as f64).ln_1p()))
}

/// Least-squares fit of the slow boundary decay, with the direct
/// equilibrium checks evaluated at the window's top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Fitted constant of x*(t) = c / ln t.
    pub c_hat: f64,
    /// Root-mean-square misfit relative to the sample norm.
    pub relative_residual: f64,
    /// b2 - b1 at the last record in the window.
    pub bias_gap_at_hi: f64,
    /// x* (w1 - w2) at the last record in the window.
    pub boundary_product_at_hi: f64,
    /// The limit both checks approach.
    pub equilibrium_target: f64,
}

/// Fits `x*(t) = c / ln t` over the recorded steps in `[t_lo, t_hi]`.
///
/// The log must have entered the overlap regime by `t_lo` and the boundary
/// point must be defined on every record in the window; records below t = 2
/// cannot enter the fit.
pub fn rate_fit(log: &TrajectoryLog, window: (u64, u64)) -> Result<RateFit> {
    let (t_lo, t_hi) = window;
    if t_lo > t_hi {
        return Err(Error::InvalidArgument(format!(
            "window [{t_lo}, {t_hi}] is reversed"
        )));
    }
    let first_overlap = log
        .steps
        .iter()
        .find(|r| r.pattern == crate::pattern::PatternTag::SpecializedOverlap)
        .map(|r| r.t);
    match first_overlap {
        Some(t) if t <= t_lo => {}
        Some(t) => {
            return Err(Error::InvalidArgument(format!(
                "overlap regime starts at step {t}, after the window opens at {t_lo}"
            )));
        }
        None => {
            return Err(Error::InvalidArgument(
                "trajectory never reaches the overlap regime".into(),
            ));
        }
    }

    let mut num = 0.0;
    let mut den = 0.0;
    let mut ys = Vec::new();
    let mut last: Option<&StepRecord> = None;
    for r in &log.steps {
        if r.t < t_lo || r.t > t_hi {
            continue;
        }
        let Some(x) = r.x_star else {
            return Err(Error::InvalidArgument(format!(
                "boundary point undefined at recorded step {}",
                r.t
            )));
        };
        last = Some(r);
        if r.t < 2 {
            continue;
        }
        let u = 1.0 / (r.t as f64).ln();
        num += x * u;
        den += u * u;
        ys.push((x, u));
    }
    if ys.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let c_hat = num / den;
    let mut sq = 0.0;
    let mut norm = 0.0;
    for (x, u) in &ys {
        let e = x - c_hat * u;
        sq += e * e;
        norm += x * x;
    }
    let relative_residual = if norm > 0.0 { (sq / norm).sqrt() } else { 0.0 };
    let last = last.expect("window is nonempty");
    Ok(RateFit {
        c_hat,
        relative_residual,
        bias_gap_at_hi: last.theta.b2 - last.theta.b1,
        boundary_product_at_hi: last.x_star.expect("checked above")
            * (last.theta.w1 - last.theta.w2),
        equilibrium_target: equilibrium_target(&log.theta0),
    })
}

/// One audited bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub id: String,
    pub applicable: bool,
    /// Why the entry is not applicable, or what was checked.
    pub reason: String,
    pub checked_steps: u64,
    pub passed_steps: u64,
    pub first_violation: Option<u64>,
    /// Signed margin to failure: the smallest observed slack, negative on a
    /// violation. None when nothing was checked.
    pub worst_slack: Option<f64>,
}

impl BoundEntry {
    fn not_applicable(id: &str, reason: String) -> Self {
        BoundEntry {
            id: id.into(),
            applicable: false,
            reason,
            checked_steps: 0,
            passed_steps: 0,
            first_violation: None,
            worst_slack: None,
        }
    }

    fn applicable(id: &str, reason: String) -> Self {
        BoundEntry {
            id: id.into(),
            applicable: true,
            reason,
            checked_steps: 0,
            passed_steps: 0,
            first_violation: None,
            worst_slack: None,
        }
    }

    fn observe(&mut self, t: u64, slack: f64) {
        self.checked_steps += 1;
        if slack >= 0.0 {
            self.passed_steps += 1;
        } else if self.first_violation.is_none() {
            self.first_violation = Some(t);
        }
        self.worst_slack = Some(match self.worst_slack {
            Some(w) => w.min(slack),
            None => slack,
        });
    }

    pub fn violated(&self) -> bool {
        self.applicable && self.checked_steps > self.passed_steps
    }
}

/// The audit result: one entry per bound family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theta0: Parameters,
    pub eta: f64,
    /// Step of the first record in a specialized regime, if any: the
    /// regime bounds treat it as their time origin.
    pub base_step: Option<u64>,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn has_violation(&self) -> bool {
        self.entries.iter().any(BoundEntry::violated)
    }

    /// JSON document with an explicit schema version.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("bound report serializes");
        v.as_object_mut()
            .expect("report serializes to an object")
            .insert("schema_version".into(), "1".into());
        v
    }

    /// Fixed-width text table, one line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "audit of eta={} from ({}, {}, {}, {})\n",
            self.eta, self.theta0.w1, self.theta0.b1, self.theta0.w2, self.theta0.b2
        ));
        match self.base_step {
            Some(t) => out.push_str(&format!("specialized regime entered at step {t}\n")),
            None => out.push_str("specialized regime never entered\n"),
        }
        out.push_str(&format!(
            "{:<32} {:>8} {:>10} {:>10} {:>14} {:>13}  reason\n",
            "bound", "verdict", "checked", "passed", "first_viol", "worst_slack"
        ));
        for e in &self.entries {
            let verdict = if !e.applicable {
                "n/a"
            } else if e.violated() {
                "FAIL"
            } else {
                "pass"
            };
            let first = e
                .first_violation
                .map_or("-".to_string(), |t| t.to_string());
            let slack = e
                .worst_slack
                .map_or("-".to_string(), |s| format!("{s:.3e}"));
            out.push_str(&format!(
                "{:<32} {:>8} {:>10} {:>10} {:>14} {:>13}  {}\n",
                e.id, verdict, e.checked_steps, e.passed_steps, first, slack, e.reason
            ));
        }
        out
    }
}

const V1_U2_DRIFT_TOL: f64 = 1e-12;
const BALANCE_DRIFT_TOL: f64 = 1e-9;
const IDENTITY_REL_TOL: f64 = 1e-12;
const MONOTONE_APPROACH_TOL: f64 = 1e-12;
const EQUILIBRIUM_HORIZON: u64 = 1_000_000;

fn beta_pair(theta: &Parameters) -> (f64, f64) {
    (-theta.b1 / theta.w1, -theta.b2 / theta.w2)
}

/// Audits a recorded trajectory against every bound whose hypotheses hold.
///
/// Growth sandwiches and the equilibrium limit are re-based at the first
/// specialized record, treating it as the bounds' time origin; the zero-bias
/// bounds are evaluated against the original start. A log that never
/// classifies (loss stays at or above 0.5) gets a fully not-applicable
/// report. Violations are report content, never errors.
pub fn audit_trajectory(log: &TrajectoryLog, theta0: &Parameters, eta: f64) -> BoundReport {
    let classified = log.steps.iter().any(|r| r.loss < 0.5);
    let base = log.steps.iter().find(|r| r.pattern.is_specialized());
    let base_step = base.map(|r| r.t);
    let specialized: Vec<&StepRecord> = match base {
        Some(b) => log
            .steps
            .iter()
            .filter(|r| r.t >= b.t && r.pattern.is_specialized())
            .collect(),
        None => Vec::new(),
    };

    let mut entries = Vec::new();
    let unclassified_reason = || "loss never dropped below 0.5".to_string();
    let no_regime_reason = || "no specialized records".to_string();

    // Growth sandwiches, re-based at the first specialized record.
    for (id, pick, bound_fn) in [
        (
            "w1_growth_sandwich",
            (|t: &Parameters| t.w1) as fn(&Parameters) -> f64,
            w1_bounds as fn(&Parameters, f64, u64) -> Result<(f64, f64)>,
        ),
        ("w2_decay_sandwich", |t: &Parameters| t.w2, w2_bounds),
    ] {
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if let Some(b) = base {
            let mut e = BoundEntry::applicable(id, format!("re-based at step {}", b.t));
            for r in &specialized {
                match bound_fn(&b.theta, eta, r.t - b.t) {
                    Ok((lo, hi)) => {
                        let x = pick(&r.theta);
                        e.observe(r.t, (x - lo).min(hi - x));
                    }
                    Err(_) => {
                        e.reason = "bound unavailable at the base record".into();
                        break;
                    }
                }
            }
            e
        } else {
            BoundEntry::not_applicable(id, no_regime_reason())
        };
        entries.push(entry);
    }

    // Conservation of v1 and u2 across the specialized segment.
    {
        let id = "v1_u2_conservation";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if let Some(b) = base {
            let d0 = b.theta.derived();
            let mut e =
                BoundEntry::applicable(id, format!("drift tolerance {V1_U2_DRIFT_TOL:.0e}"));
            for r in &specialized {
                let d = r.theta.derived();
                let drift = (d.v1 - d0.v1).abs().max((d.u2 - d0.u2).abs());
                e.observe(r.t, V1_U2_DRIFT_TOL - drift);
            }
            e
        } else {
            BoundEntry::not_applicable(id, no_regime_reason())
        };
        entries.push(entry);
    }

    // Conservation of the balance sum w1 - b1 + w2 + b2.
    {
        let id = "balance_sum_conservation";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if let Some(b) = base {
            let s0 = 2.0 * equilibrium_target(&b.theta);
            let mut e =
                BoundEntry::applicable(id, format!("drift tolerance {BALANCE_DRIFT_TOL:.0e}"));
            for r in &specialized {
                let drift = (2.0 * equilibrium_target(&r.theta) - s0).abs();
                e.observe(r.t, BALANCE_DRIFT_TOL - drift);
            }
            e
        } else {
            BoundEntry::not_applicable(id, no_regime_reason())
        };
        entries.push(entry);
    }

    // Strict coordinate monotonicity and breakpoint confinement.
    {
        let id = "specialized_monotonicity";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if specialized.len() >= 2 {
            let mut e = BoundEntry::applicable(
                id,
                "w1, b1, b2 strictly up; w2 strictly down; breakpoints pinched".into(),
            );
            for w in specialized.windows(2) {
                let (a, b) = (&w[0].theta, &w[1].theta);
                let (ba1, ba2) = beta_pair(a);
                let (bb1, bb2) = beta_pair(b);
                let step_margin = [
                    b.w1 - a.w1,
                    b.b1 - a.b1,
                    a.w2 - b.w2,
                    b.b2 - a.b2,
                    ba1 - bb1,
                    bb2 - ba2,
                    bb1 + 1.0,
                    1.0 - bb2,
                ]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
                e.observe(w[1].t, step_margin);
            }
            e
        } else if base.is_some() {
            BoundEntry::not_applicable(id, "fewer than two specialized records".into())
        } else {
            BoundEntry::not_applicable(id, no_regime_reason())
        };
        entries.push(entry);
    }

    // Equilibrium limit of the bias gap, needing a long horizon.
    {
        let id = "bias_gap_equilibrium";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if let Some(b) = base {
            let horizon = log.final_step.saturating_sub(b.t);
            if horizon >= EQUILIBRIUM_HORIZON {
                let s_star = equilibrium_target(&b.theta);
                let tol = 0.02 * s_star.abs() + 1e-4;
                let mut e = BoundEntry::applicable(
                    id,
                    format!("checked beyond step {}", b.t + EQUILIBRIUM_HORIZON),
                );
                for r in &specialized {
                    if r.t - b.t < EQUILIBRIUM_HORIZON {
                        continue;
                    }
                    let gap = r.theta.b2 - r.theta.b1;
                    e.observe(r.t, tol - (gap - s_star).abs());
                }
                e
            } else {
                BoundEntry::not_applicable(
                    id,
                    format!("horizon {horizon} shorter than {EQUILIBRIUM_HORIZON}"),
                )
            }
        } else {
            BoundEntry::not_applicable(id, no_regime_reason())
        };
        entries.push(entry);
    }

    // Logarithmic weight-gap bound, from the original start.
    {
        let id = "weight_gap_log_bound";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else {
            match weight_gap_upper(theta0, eta, 0) {
                Ok(_) => {
                    let mut e = BoundEntry::applicable(id, "zero-bias box hypotheses hold".into());
                    for r in &log.steps {
                        let bound =
                            weight_gap_upper(theta0, eta, r.t).expect("hypotheses checked");
                        e.observe(r.t, bound - (r.theta.w1 - r.theta.w2));
                    }
                    e
                }
                Err(Error::NotApplicable(reason)) => BoundEntry::not_applicable(id, reason),
                Err(e) => BoundEntry::not_applicable(id, e.to_string()),
            }
        };
        entries.push(entry);
    }

    // Linear-onset bias-gap bound, from the original start.
    {
        let id = "bias_gap_linear_onset";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else {
            match bias_gap_lower(theta0, eta) {
                Ok((t0, bound)) => {
                    let mut e =
                        BoundEntry::applicable(id, format!("gap >= {bound:.6} from step {t0}"));
                    for r in log.steps.iter().filter(|r| r.t >= t0) {
                        e.observe(r.t, (r.theta.b2 - r.theta.b1) - bound);
                    }
                    e
                }
                Err(Error::NotApplicable(reason)) => BoundEntry::not_applicable(id, reason),
                Err(e) => BoundEntry::not_applicable(id, e.to_string()),
            }
        };
        entries.push(entry);
    }

    // Monotone approach of the weight sum to its equilibrium value.
    {
        let id = "monotone_equilibrium_approach";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if theta0.b1 != 0.0 || theta0.b2 != 0.0 {
            BoundEntry::not_applicable(id, "biases must start at zero".into())
        } else if eta > 0.5 {
            BoundEntry::not_applicable(id, format!("step size {eta} exceeds 0.5"))
        } else {
            let s_star = equilibrium_target(theta0);
            let mut e = BoundEntry::applicable(id, "weight-sum distance non-increasing".into());
            for w in log.steps.windows(2) {
                let d0 = (w[0].theta.w1 + w[0].theta.w2 - s_star).abs();
                let d1 = (w[1].theta.w1 + w[1].theta.w2 - s_star).abs();
                e.observe(w[1].t, d0 - d1 + MONOTONE_APPROACH_TOL);
            }
            e
        };
        entries.push(entry);
    }

    // Nonasymptotic floor under the boundary point.
    {
        let id = "margin_floor";
        let in_box = theta0.b1 == 0.0
            && theta0.b2 == 0.0
            && theta0.w1 > 2.7
            && theta0.w1 < 3.0
            && theta0.w2 > -0.5
            && theta0.w2 < 0.0;
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else if !in_box {
            BoundEntry::not_applicable(
                id,
                "start outside the zero-bias box w1 in (2.7,3), w2 in (-0.5,0)".into(),
            )
        } else {
            match margin_bound_onset(eta) {
                Ok(onset) => {
                    let mut e =
                        BoundEntry::applicable(id, format!("x* floored from step {onset}"));
                    for r in log.steps.iter().filter(|r| r.t >= onset) {
                        let bound =
                            nonasymptotic_margin_bound(eta, r.t).expect("onset checked");
                        match r.x_star {
                            Some(x) => e.observe(r.t, x - bound),
                            None => e.observe(r.t, f64::NEG_INFINITY),
                        }
                    }
                    e
                }
                Err(Error::NotApplicable(reason)) => BoundEntry::not_applicable(id, reason),
                Err(e) => BoundEntry::not_applicable(id, e.to_string()),
            }
        };
        entries.push(entry);
    }

    // Exact rearrangement of the boundary-point formula.
    {
        let id = "crossing_identity";
        let entry = if !classified {
            BoundEntry::not_applicable(id, unclassified_reason())
        } else {
            let mut e = BoundEntry::applicable(
                id,
                "x* (w1 - w2) = b2 - b1 on two-neuron crossings".into(),
            );
            for r in &log.steps {
                let two_active = r.pattern.is_specialized()
                    || r.pattern == crate::pattern::PatternTag::LinearBothActive;
                if !two_active {
                    continue;
                }
                if let Some(x) = r.x_star {
                    let gap = r.theta.b2 - r.theta.b1;
                    let err = (x * (r.theta.w1 - r.theta.w2) - gap).abs();
                    e.observe(r.t, IDENTITY_REL_TOL * gap.abs().max(1.0) - err);
                }
            }
            e
        };
        entries.push(entry);
    }

    BoundReport {
        theta0: *theta0,
        eta,
        base_step,
        entries,
    }
}

//! Activation patterns and the gradient-descent step.
//!
//! With two neurons and two instances there are four strict-activity bits,
//! and together with the weight signs they determine which explicit update
//! system drives the dynamics. This module classifies that regime, computes
//! the generic loss subgradient (with the `relu'(0) = 0` convention), and
//! provides the per-regime closed-form steps, which agree with the generic
//! step bitwise wherever both apply.

use crate::error::{Error, Result};
use crate::model::{guard_exponents, loss_exponents, Parameters, Preacts};
use serde::{Deserialize, Serialize};

/// The activation regime of a parameter point.
///
/// `Case1`..`Case4` are the half-specialized regimes where one neuron is
/// active on both instances and the other on exactly one; the two
/// `Specialized*` tags are the absorbing regimes where each neuron is active
/// only on the instance whose label matches its output sign, distinguished
/// by the breakpoint order (overlapping active intervals versus a dead
/// interval where neither neuron fires). Zero weights or zero preactivations
/// that match no regime's strict-activity signature fall into `Degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternTag {
    LinearBothActive,
    Case1RightBothLeftSpec,
    Case2LeftBothRightSpec,
    Case3BothRightActive,
    Case4BothLeftActive,
    SpecializedOverlap,
    SpecializedDeadInterval,
    Degenerate,
}

impl PatternTag {
    pub fn is_specialized(self) -> bool {
        matches!(
            self,
            PatternTag::SpecializedOverlap | PatternTag::SpecializedDeadInterval
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternTag::LinearBothActive => "LinearBothActive",
            PatternTag::Case1RightBothLeftSpec => "Case1_RightBothLeftSpec",
            PatternTag::Case2LeftBothRightSpec => "Case2_LeftBothRightSpec",
            PatternTag::Case3BothRightActive => "Case3_BothRightActive",
            PatternTag::Case4BothLeftActive => "Case4_BothLeftActive",
            PatternTag::SpecializedOverlap => "SpecializedOverlap",
            PatternTag::SpecializedDeadInterval => "SpecializedDeadInterval",
            PatternTag::Degenerate => "Degenerate",
        }
    }

    pub fn from_str_tag(s: &str) -> Option<Self> {
        Some(match s {
            "LinearBothActive" => PatternTag::LinearBothActive,
            "Case1_RightBothLeftSpec" => PatternTag::Case1RightBothLeftSpec,
            "Case2_LeftBothRightSpec" => PatternTag::Case2LeftBothRightSpec,
            "Case3_BothRightActive" => PatternTag::Case3BothRightActive,
            "Case4_BothLeftActive" => PatternTag::Case4BothLeftActive,
            "SpecializedOverlap" => PatternTag::SpecializedOverlap,
            "SpecializedDeadInterval" => PatternTag::SpecializedDeadInterval,
            "Degenerate" => PatternTag::Degenerate,
            _ => return None,
        })
    }
}

impl std::fmt::Display for PatternTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pattern tag together with the strict-activity matrix that produced it.
///
/// `activity[j][i]` is true iff neuron `j` has a strictly positive
/// preactivation on instance `i` (instance 0 is x = -1, instance 1 is
/// x = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationPattern {
    pub tag: PatternTag,
    pub activity: [[bool; 2]; 2],
}

fn activity_of(p: &Preacts) -> [[bool; 2]; 2] {
    [[p.p10 > 0.0, p.p11 > 0.0], [p.p20 > 0.0, p.p21 > 0.0]]
}

fn tag_of(theta: &Parameters, activity: [[bool; 2]; 2]) -> PatternTag {
    match activity {
        [[true, true], [true, true]] => PatternTag::LinearBothActive,
        // Neuron 1 active on both, neuron 2 only on the left instance: the
        // sign of w1 separates the right-pointing regime from the
        // both-left-active one.
        [[true, true], [true, false]] => {
            if theta.w1 > 0.0 {
                PatternTag::Case1RightBothLeftSpec
            } else if theta.w1 < 0.0 {
                PatternTag::Case4BothLeftActive
            } else {
                PatternTag::Degenerate
            }
        }
        // Neuron 2 active on both, neuron 1 only on the right instance.
        [[false, true], [true, true]] => {
            if theta.w2 < 0.0 {
                PatternTag::Case2LeftBothRightSpec
            } else if theta.w2 > 0.0 {
                PatternTag::Case3BothRightActive
            } else {
                PatternTag::Degenerate
            }
        }
        // Each neuron active exactly on its own instance. This signature
        // forces w1 > 0 and w2 < 0, so both breakpoints exist; their order
        // decides between overlapping active intervals and a dead interval
        // (a breakpoint tie counts as a width-zero dead interval).
        [[false, true], [true, false]] => {
            let beta1 = -theta.b1 / theta.w1;
            let beta2 = -theta.b2 / theta.w2;
            if beta1 < beta2 {
                PatternTag::SpecializedOverlap
            } else {
                PatternTag::SpecializedDeadInterval
            }
        }
        _ => PatternTag::Degenerate,
    }
}

/// Classifies the activation regime of `theta`.
///
/// The tag is a pure function of the four strict-activity bits and the
/// weight signs: a zero preactivation simply reads as "inactive", and only
/// signatures matching no regime (or a weight-sign dispatch on a zero
/// weight) produce [`PatternTag::Degenerate`].
pub fn classify_pattern(theta: &Parameters) -> Result<ActivationPattern> {
    theta.check_finite("classify_pattern parameters")?;
    let activity = activity_of(&theta.preacts());
    Ok(ActivationPattern {
        tag: tag_of(theta, activity),
        activity,
    })
}

/// One fused loss/gradient/pattern evaluation, shared by every stepping
/// loop so that all consumers see identical floating-point values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepEval {
    pub pattern: ActivationPattern,
    pub loss: f64,
    pub grad: [f64; 4],
}

pub(crate) fn eval_step(theta: &Parameters) -> Result<StepEval> {
    theta.check_finite("step parameters")?;
    let p = theta.preacts();
    let (z1, z2) = loss_exponents(&p);
    guard_exponents(z1, z2)?;
    let l1 = z1.exp();
    let l2 = z2.exp();
    let activity = activity_of(&p);
    let a11 = activity[0][0] as u8 as f64;
    let a12 = activity[0][1] as u8 as f64;
    let a21 = activity[1][0] as u8 as f64;
    let a22 = activity[1][1] as u8 as f64;
    let grad = [
        -0.5 * (l1 * a11 + l2 * a12),
        0.5 * (l1 * a11 - l2 * a12),
        0.5 * (l1 * a21 + l2 * a22),
        0.5 * (l2 * a22 - l1 * a21),
    ];
    Ok(StepEval {
        pattern: ActivationPattern {
            tag: tag_of(theta, activity),
            activity,
        },
        loss: 0.5 * (l1 + l2),
        grad,
    })
}

/// Exact subgradient of the loss under the `relu'(0) = 0` convention.
///
/// Wherever no preactivation is zero this is the ordinary gradient and
/// matches central finite differences; at a kink it selects the one-sided
/// derivative of the inactive branch.
pub fn subgradient(theta: &Parameters) -> Result<[f64; 4]> {
    Ok(eval_step(theta)?.grad)
}

pub(crate) fn apply_step(theta: &Parameters, eta: f64, grad: [f64; 4]) -> Parameters {
    Parameters::new(
        theta.w1 - eta * grad[0],
        theta.b1 - eta * grad[1],
        theta.w2 - eta * grad[2],
        theta.b2 - eta * grad[3],
    )
}

/// One gradient-descent step `theta - eta * subgradient(theta)`.
pub fn gd_step(theta: &Parameters, eta: f64) -> Result<Parameters> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    let eval = eval_step(theta)?;
    let next = apply_step(theta, eta, eval.grad);
    next.check_finite("gd_step result")?;
    Ok(next)
}

/// The explicit per-regime update, equal to [`gd_step`] bitwise.
///
/// In each regime the activity bits freeze which exponential terms appear,
/// so the step reduces to a closed form; the expressions below reuse the
/// exact subexpressions of the generic path, making the agreement exact
/// rather than approximate. Asking for a regime other than the one `theta`
/// classifies into is a contract violation.
pub fn closed_form_step(theta: &Parameters, eta: f64, pattern: PatternTag) -> Result<Parameters> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {eta}"
        )));
    }
    if pattern == PatternTag::Degenerate {
        return Err(Error::DegeneratePattern);
    }
    let actual = classify_pattern(theta)?.tag;
    if actual != pattern {
        return Err(Error::PatternMismatch {
            requested: pattern,
            actual,
        });
    }
    let p = theta.preacts();
    let (z1, z2) = loss_exponents(&p);
    guard_exponents(z1, z2)?;

    let grad = match pattern {
        // All four units active: z1 = p10 - p20, z2 = p21 - p11.
        PatternTag::LinearBothActive => {
            let l1 = (p.p10 - p.p20).exp();
            let l2 = (p.p21 - p.p11).exp();
            [
                -0.5 * (l1 + l2),
                0.5 * (l1 - l2),
                0.5 * (l1 + l2),
                0.5 * (l2 - l1),
            ]
        }
        // Neuron 1 active on both, neuron 2 only on the left: the z2 term
        // loses its relu(p21) contribution.
        PatternTag::Case1RightBothLeftSpec | PatternTag::Case4BothLeftActive => {
            let l1 = (p.p10 - p.p20).exp();
            let l2 = (-p.p11).exp();
            [-0.5 * (l1 + l2), 0.5 * (l1 - l2), 0.5 * l1, -0.5 * l1]
        }
        // Neuron 2 active on both, neuron 1 only on the right.
        PatternTag::Case2LeftBothRightSpec | PatternTag::Case3BothRightActive => {
            let l1 = (-p.p20).exp();
            let l2 = (p.p21 - p.p11).exp();
            [-0.5 * l2, -0.5 * l2, 0.5 * (l1 + l2), 0.5 * (l2 - l1)]
        }
        // Each neuron on its own instance: w1 and b1 share one increment,
        // w2 and b2 the other, so v1 = w1-b1 and u2 = w2+b2 are conserved.
        PatternTag::SpecializedOverlap | PatternTag::SpecializedDeadInterval => {
            let l1 = (-p.p20).exp();
            let l2 = (-p.p11).exp();
            [-0.5 * l2, -0.5 * l2, 0.5 * l1, -0.5 * l1]
        }
        PatternTag::Degenerate => unreachable!("rejected above"),
    };
    let next = apply_step(theta, eta, grad);
    next.check_finite("closed_form_step result")?;
    Ok(next)
}

/// True iff `theta` matches one of the configurations that force a training
/// loss of at least 0.5:
///
/// - a right-pointing neuron 1 with breakpoint at or right of the positive
///   instance, or a left-pointing neuron 2 with breakpoint at or left of the
///   negative one;
/// - a left-pointing neuron 1 with breakpoint at or left of the positive
///   instance, or a right-pointing neuron 2 with breakpoint at or right of
///   the negative one;
/// - weight signs `w1 <= 0 <= w2` (the output is then non-increasing);
/// - a constant neuron that never fires (`w = 0` with non-positive bias).
pub fn excluded_by_loss_bound(theta: &Parameters) -> Result<bool> {
    theta.check_finite("excluded_by_loss_bound parameters")?;
    let d = theta.derived();
    let b1 = d.beta1;
    let b2 = d.beta2;

    let cond1 = (theta.w1 > 0.0 && b1.is_some_and(|b| b >= 1.0))
        || (theta.w2 < 0.0 && b2.is_some_and(|b| b <= -1.0));
    let cond2 = (theta.w1 < 0.0 && b1.is_some_and(|b| b <= 1.0))
        || (theta.w2 > 0.0 && b2.is_some_and(|b| b >= -1.0));
    let cond3 = theta.w1 <= 0.0 && theta.w2 >= 0.0;
    let cond4 =
        (theta.w1 == 0.0 && theta.b1 <= 0.0) || (theta.w2 == 0.0 && theta.b2 <= 0.0);

    Ok(cond1 || cond2 || cond3 || cond4)
}

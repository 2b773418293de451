//! The network, its loss, and margin geometry.
//!
//! The model is a width-2 ReLU difference network on scalar inputs,
//! `phi(x) = relu(w1*x + b1) - relu(w2*x + b2)`, trained on the fixed
//! two-point set {(-1,-1), (1,1)} with the exponential loss
//! `L = (exp(phi(-1)) + exp(-phi(1))) / 2`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The two training pairs `(x, y)`. Immutable by construction; every formula
/// in the crate is specialized to this set.
pub const TRAINING_SET: [(f64, f64); 2] = [(-1.0, -1.0), (1.0, 1.0)];

/// The unit-margin optimum: both instances at signed distance exactly 1 from
/// the decision threshold at the origin.
pub const THETA_STAR: Parameters = Parameters {
    w1: 0.5,
    b1: 0.5,
    w2: -0.5,
    b2: 0.5,
};

/// Per-instance loss exponents above this threshold raise
/// [`Error::Diverged`] instead of silently overflowing to infinity.
pub const EXP_GUARD: f64 = 700.0;

/// The four trainable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub w1: f64,
    pub b1: f64,
    pub w2: f64,
    pub b2: f64,
}

/// Sum/difference coordinates and breakpoints derived from [`Parameters`].
///
/// `v1` and `u2` are conserved by the update rules of the specialized
/// regimes; `beta1, beta2` are the inputs where each neuron's ReLU switches,
/// absent when the corresponding slope is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub v1: f64,
    pub u1: f64,
    pub v2: f64,
    pub u2: f64,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
}

/// Preactivations of neuron `j` on instance `i`; `p[j][i]` convention with
/// `i = 0` the left instance (x = -1) and `i = 1` the right one (x = 1).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Preacts {
    /// Neuron 1 at x = -1: `b1 - w1`.
    pub p10: f64,
    /// Neuron 1 at x = 1: `w1 + b1`.
    pub p11: f64,
    /// Neuron 2 at x = -1: `b2 - w2`.
    pub p20: f64,
    /// Neuron 2 at x = 1: `w2 + b2`.
    pub p21: f64,
}

impl Parameters {
    pub fn new(w1: f64, b1: f64, w2: f64, b2: f64) -> Self {
        Self { w1, b1, w2, b2 }
    }

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.b1.is_finite() && self.w2.is_finite() && self.b2.is_finite()
    }

    pub(crate) fn check_finite(&self, context: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(context))
        }
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities {
            v1: self.w1 - self.b1,
            u1: self.w1 + self.b1,
            v2: self.w2 - self.b2,
            u2: self.w2 + self.b2,
            beta1: (self.w1 != 0.0).then(|| -self.b1 / self.w1),
            beta2: (self.w2 != 0.0).then(|| -self.b2 / self.w2),
        }
    }

    pub(crate) fn preacts(&self) -> Preacts {
        Preacts {
            p10: self.b1 - self.w1,
            p11: self.w1 + self.b1,
            p20: self.b2 - self.w2,
            p21: self.w2 + self.b2,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.w1 * self.w1 + self.b1 * self.b1 + self.w2 * self.w2 + self.b2 * self.b2).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.w1, c * self.b1, c * self.w2, c * self.b2)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w1, self.b1, self.w2, self.b2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Network output `relu(w1*x + b1) - relu(w2*x + b2)`.
///
/// # Examples
///
/// ```
/// use margindyn::{eval_network, THETA_STAR};
/// assert_eq!(eval_network(&THETA_STAR, 1.0).unwrap(), 1.0);
/// assert_eq!(eval_network(&THETA_STAR, 0.0).unwrap(), 0.0);
/// assert_eq!(eval_network(&THETA_STAR, -1.0).unwrap(), -1.0);
/// ```
pub fn eval_network(theta: &Parameters, x: f64) -> Result<f64> {
    theta.check_finite("eval_network parameters")?;
    if !x.is_finite() {
        return Err(Error::NonFinite("eval_network input"));
    }
    Ok(relu(theta.w1 * x + theta.b1) - relu(theta.w2 * x + theta.b2))
}

/// The two per-instance loss exponents: `z1 = phi(-1)` and `z2 = -phi(1)`,
/// so that `L = (exp(z1) + exp(z2)) / 2`.
pub(crate) fn loss_exponents(p: &Preacts) -> (f64, f64) {
    let z1 = relu(p.p10) - relu(p.p20);
    let z2 = relu(p.p21) - relu(p.p11);
    (z1, z2)
}

pub(crate) fn guard_exponents(z1: f64, z2: f64) -> Result<()> {
    let worst = z1.max(z2);
    if worst > EXP_GUARD {
        Err(Error::Diverged { exponent: worst })
    } else {
        Ok(())
    }
}

/// Training loss `(exp(phi(-1)) + exp(-phi(1))) / 2`.
///
/// Exponents beyond [`EXP_GUARD`] raise [`Error::Diverged`] carrying the
/// offending exponent, so a bad step size is diagnosable rather than an
/// infinity stored in a log.
pub fn loss(theta: &Parameters) -> Result<f64> {
    theta.check_finite("loss parameters")?;
    let p = theta.preacts();
    let (z1, z2) = loss_exponents(&p);
    guard_exponents(z1, z2)?;
    Ok(0.5 * (z1.exp() + z2.exp()))
}

/// Sign-change points of the piecewise-linear network output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    /// Strictly increasing inputs where the prediction sign flips (or the
    /// output touches zero). Empty when the sign is constant.
    pub points: Vec<f64>,
    /// The output is constant in `x`, so no threshold exists anywhere.
    pub degenerate: bool,
    /// Per-instance verdicts: `sign(phi(x_i)) == y_i`, with a zero output
    /// counted as misclassified for either label.
    pub correct: [bool; 2],
}

/// Relative tolerance used to merge duplicate boundary points produced by
/// adjacent linear pieces.
const BOUNDARY_DEDUP_TOL: f64 = 1e-9;

/// Exact sign-change points of the network output, solved per linear piece.
///
/// The output has at most two kinks, hence at most three linear pieces; each
/// piece contributes its root (or, for a piece that is identically zero, its
/// finite endpoints) and the results are merged. A constant output sets the
/// `degenerate` flag and returns no points.
pub fn decision_boundary(theta: &Parameters) -> Result<BoundarySet> {
    theta.check_finite("decision_boundary parameters")?;

    let mut kinks: Vec<f64> = Vec::with_capacity(2);
    if theta.w1 != 0.0 {
        kinks.push(-theta.b1 / theta.w1);
    }
    if theta.w2 != 0.0 {
        kinks.push(-theta.b2 / theta.w2);
    }
    kinks.sort_by(|a, b| a.partial_cmp(b).expect("kinks are finite"));
    kinks.dedup_by(|a, b| a == b);

    // Piece boundaries, padded with infinities on both sides.
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(&kinks);
    edges.push(f64::INFINITY);

    // A neuron with positive slope is active on pieces right of its
    // breakpoint, a negative slope left of it, and a zero slope everywhere
    // or nowhere depending on the sign of its bias.
    let active_on = |w: f64, b: f64, lo: f64, hi: f64| -> bool {
        if w > 0.0 {
            lo >= -b / w
        } else if w < 0.0 {
            hi <= -b / w
        } else {
            b > 0.0
        }
    };

    let mut points: Vec<f64> = Vec::new();
    let mut constant = true;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let a1 = active_on(theta.w1, theta.b1, lo, hi) as u8 as f64;
        let a2 = active_on(theta.w2, theta.b2, lo, hi) as u8 as f64;
        let slope = theta.w1 * a1 - theta.w2 * a2;
        let offset = theta.b1 * a1 - theta.b2 * a2;
        if slope != 0.0 {
            constant = false;
            let z = -offset / slope;
            if z >= lo && z <= hi {
                points.push(z);
            }
        } else if offset == 0.0 {
            // The output vanishes on the whole piece; its finite edges
            // border regions of (possibly) nonzero sign.
            if lo.is_finite() {
                points.push(lo);
            }
            if hi.is_finite() {
                points.push(hi);
            }
        }
    }

    points.sort_by(|a, b| a.partial_cmp(b).expect("roots are finite"));
    points.dedup_by(|a, b| (*a - *b).abs() <= BOUNDARY_DEDUP_TOL * (1.0 + b.abs()));

    if constant {
        points.clear();
    }

    let mut correct = [false; 2];
    for (i, (x, y)) in TRAINING_SET.iter().enumerate() {
        let phi = eval_network(theta, *x)?;
        correct[i] = if *y > 0.0 { phi > 0.0 } else { phi < 0.0 };
    }

    Ok(BoundarySet {
        points,
        degenerate: constant,
        correct,
    })
}

impl BoundarySet {
    /// The single decision threshold, defined only when the sign changes at
    /// exactly one input.
    pub fn unique_point(&self) -> Option<f64> {
        if !self.degenerate && self.points.len() == 1 {
            Some(self.points[0])
        } else {
            None
        }
    }
}

/// Minimum input perturbation that flips a training point's predicted class.
///
/// Misclassified (or zero-output) instances have margin 0. A correctly
/// classified network whose output sign never changes has no finite
/// threshold to cross; that case returns the `+inf` sentinel.
pub fn robustness_margin(theta: &Parameters) -> Result<f64> {
    let boundary = decision_boundary(theta)?;
    if !boundary.correct[0] || !boundary.correct[1] {
        return Ok(0.0);
    }
    if boundary.points.is_empty() {
        return Ok(f64::INFINITY);
    }
    let mut best = f64::INFINITY;
    for (x, _) in TRAINING_SET {
        for p in &boundary.points {
            best = best.min((p - x).abs());
        }
    }
    Ok(best)
}

/// Distance to the optimal margin: `1 - robustness_margin`, clamped below at
/// zero (the `+inf` margin sentinel also maps to zero).
pub fn margin_gap(theta: &Parameters) -> Result<f64> {
    let margin = robustness_margin(theta)?;
    if margin.is_infinite() {
        return Ok(0.0);
    }
    Ok((1.0 - margin).max(0.0))
}

//! Shared oracles and samplers for the integration suites.
//!
//! Everything here is deliberately independent of the library's own
//! numerics: quadrature instead of the series expansion, finite
//! differences instead of the analytic gradient, rejection sampling
//! instead of the classifier under test.

#![allow(dead_code)]

use margindyn::{classify_pattern, gap_cdf, loss, Parameters, PatternTag, SplitMix64};

/// Adaptive Simpson quadrature with an absolute error target.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Central-difference gradient of the loss, the oracle for `subgradient`.
pub fn fd_loss_gradient(theta: &Parameters, h: f64) -> [f64; 4] {
    let mut g = [0.0; 4];
    let base = theta.as_array();
    for k in 0..4 {
        let mut up = base;
        let mut dn = base;
        up[k] += h;
        dn[k] -= h;
        let lu = loss(&Parameters::from_array(up)).expect("fd point stays in range");
        let ld = loss(&Parameters::from_array(dn)).expect("fd point stays in range");
        g[k] = (lu - ld) / (2.0 * h);
    }
    g
}

pub fn uniform_in(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

fn min_abs_preact(theta: &Parameters) -> f64 {
    let p = [
        theta.b1 - theta.w1,
        theta.w1 + theta.b1,
        theta.b2 - theta.w2,
        theta.w2 + theta.b2,
    ];
    p.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

/// Draws a point classifying as `tag` with every preactivation at least
/// 1e-3 in magnitude. Panics if a draw ever lands on the wrong pattern,
/// so the samplers themselves stay honest.
pub fn sample_for_tag(tag: PatternTag, rng: &mut SplitMix64) -> Parameters {
    loop {
        let theta = match tag {
            PatternTag::LinearBothActive => {
                let w1 = uniform_in(rng, 0.2, 2.0);
                let b1 = uniform_in(rng, w1 + 0.01, w1 + 2.0);
                let w2 = uniform_in(rng, -2.0, -0.2);
                let b2 = uniform_in(rng, -w2 + 0.01, -w2 + 2.0);
                Parameters::new(w1, b1, w2, b2)
            }
            PatternTag::Case1RightBothLeftSpec => {
                let w1 = uniform_in(rng, 0.2, 2.0);
                let b1 = uniform_in(rng, w1 + 0.01, w1 + 2.0);
                let w2 = uniform_in(rng, -2.0, -0.2);
                let b2 = uniform_in(rng, w2 + 0.01, -w2 - 0.01);
                Parameters::new(w1, b1, w2, b2)
            }
            PatternTag::Case2LeftBothRightSpec => {
                let w1 = uniform_in(rng, 0.2, 2.0);
                let b1 = uniform_in(rng, -w1 + 0.01, w1 - 0.01);
                let w2 = uniform_in(rng, -2.0, -0.2);
                let b2 = uniform_in(rng, -w2 + 0.01, -w2 + 2.0);
                Parameters::new(w1, b1, w2, b2)
            }
            PatternTag::Case3BothRightActive => {
                let w1 = uniform_in(rng, 0.2, 2.0);
                let b1 = uniform_in(rng, -w1 + 0.01, w1 - 0.01);
                let w2 = uniform_in(rng, 0.2, 2.0);
                let b2 = uniform_in(rng, w2 + 0.01, w2 + 2.0);
                Parameters::new(w1, b1, w2, b2)
            }
            PatternTag::Case4BothLeftActive => {
                let w1 = uniform_in(rng, -2.0, -0.2);
                let b1 = uniform_in(rng, -w1 + 0.01, -w1 + 2.0);
                let w2 = uniform_in(rng, -2.0, -0.2);
                let b2 = uniform_in(rng, w2 + 0.01, -w2 - 0.01);
                Parameters::new(w1, b1, w2, b2)
            }
            PatternTag::SpecializedOverlap => {
                let beta1 = uniform_in(rng, -0.95, 0.85);
                let beta2 = uniform_in(rng, beta1 + 0.05, 0.95);
                specialized_point(rng, beta1, beta2)
            }
            PatternTag::SpecializedDeadInterval => {
                let beta2 = uniform_in(rng, -0.9, 0.8);
                let beta1 = uniform_in(rng, beta2 + 0.05, 0.9);
                specialized_point(rng, beta1, beta2)
            }
            PatternTag::Degenerate => panic!("no sampler for degenerate points"),
        };
        if min_abs_preact(&theta) < 1e-3 {
            continue;
        }
        let got = classify_pattern(&theta).expect("sampled point is finite").tag;
        assert_eq!(got, tag, "sampler drew {theta:?} classifying as {got}");
        return theta;
    }
}

fn specialized_point(rng: &mut SplitMix64, beta1: f64, beta2: f64) -> Parameters {
    let w1 = uniform_in(rng, 0.3, 2.5);
    let w2 = -uniform_in(rng, 0.3, 2.5);
    Parameters::new(w1, -beta1 * w1, w2, -beta2 * w2)
}

/// A start with both breakpoints strictly inside (-1, 1) and the left one
/// first: the overlap regime's standing hypotheses.
pub fn overlap_start(rng: &mut SplitMix64) -> Parameters {
    sample_for_tag(PatternTag::SpecializedOverlap, rng)
}

/// A classified start concentrated near the specialized cone, used for the
/// flow-convergence runs: outer preactivations comfortably positive, inner
/// ones close to zero.
pub fn concentrated_flow_start(rng: &mut SplitMix64) -> Parameters {
    loop {
        let u1 = uniform_in(rng, 0.8, 3.0);
        let v2 = -uniform_in(rng, 0.8, 3.0);
        let v1 = uniform_in(rng, -0.25, 0.25);
        let u2 = uniform_in(rng, -0.25, 0.25);
        let theta = Parameters::new(
            0.5 * (u1 + v1),
            0.5 * (u1 - v1),
            0.5 * (u2 + v2),
            0.5 * (u2 - v2),
        );
        if loss(&theta).map(|l| l < 0.5).unwrap_or(false) {
            return theta;
        }
    }
}

/// Inverse of the gap distribution by bisection, for inverse-transform
/// sampling in the KS self-test.
pub fn gap_quantile(p: f64) -> f64 {
    assert!((0.0..1.0).contains(&p));
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap_cdf(mid).expect("in range") < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform draw from the zero-bias convergence box of the margin theorem.
pub fn margin_box_start(rng: &mut SplitMix64) -> Parameters {
    let w1 = uniform_in(rng, 2.7 + 1e-6, 3.0 - 1e-6);
    let w2 = uniform_in(rng, -0.5 + 1e-6, -1e-6);
    Parameters::new(w1, 0.0, w2, 0.0)
}

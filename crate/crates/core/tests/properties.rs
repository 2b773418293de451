//! Cross-module properties checked against independent oracles:
//! quadrature for the special functions, finite differences for gradients,
//! brute-force recursion for the growth bounds, and grid scans for the
//! decision boundary.

mod common;

use common::*;
use margindyn::*;
use proptest::prelude::*;

fn uniform_box_theta(rng: &mut SplitMix64) -> Parameters {
    Parameters::new(
        -3.0 + 6.0 * rng.next_f64(),
        -3.0 + 6.0 * rng.next_f64(),
        -3.0 + 6.0 * rng.next_f64(),
        -3.0 + 6.0 * rng.next_f64(),
    )
}

fn classified_theta(rng: &mut SplitMix64) -> Parameters {
    loop {
        let theta = uniform_box_theta(rng);
        if loss(&theta).map(|l| l < 0.5).unwrap_or(false) {
            return theta;
        }
    }
}

#[test]
fn network_is_positively_homogeneous() {
    let mut rng = SplitMix64::new(101);
    for _ in 0..1000 {
        let theta = uniform_box_theta(&mut rng);
        let x = -3.0 + 6.0 * rng.next_f64();
        let base = eval_network(&theta, x).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = eval_network(&theta.scale(c), x).unwrap();
            let err = (scaled - c * base).abs();
            assert!(
                err <= 1e-12 * (c * base).abs().max(1.0),
                "homogeneity off by {err} at {theta:?}, c={c}, x={x}"
            );
        }
    }
}

proptest! {
    #[test]
    fn homogeneity_holds_for_arbitrary_scales(
        w1 in -3.0..3.0f64,
        b1 in -3.0..3.0f64,
        w2 in -3.0..3.0f64,
        b2 in -3.0..3.0f64,
        c in 1e-3..1e3f64,
    ) {
        let theta = Parameters::new(w1, b1, w2, b2);
        let base = eval_network(&theta, 0.7).unwrap();
        let scaled = eval_network(&theta.scale(c), 0.7).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * (c * base).abs().max(1.0));
    }
}

#[test]
fn boundary_agrees_with_a_grid_scan() {
    let mut rng = SplitMix64::new(102);
    let n = 10_001usize;
    let spacing = 6.0 / (n - 1) as f64;
    for _ in 0..1000 {
        let theta = uniform_box_theta(&mut rng);
        let bset = decision_boundary(&theta).unwrap();
        if bset.degenerate {
            continue;
        }
        for &p in &bset.points {
            let v = eval_network(&theta, p).unwrap();
            assert!(v.abs() <= 1e-10, "boundary point {p} has output {v}");
        }
        let mut prev_x = -3.0;
        let mut prev_v = eval_network(&theta, prev_x).unwrap();
        for k in 1..n {
            let x = -3.0 + k as f64 * spacing;
            let v = eval_network(&theta, x).unwrap();
            if prev_v != 0.0 && v != 0.0 && prev_v.signum() != v.signum() {
                let hit = bset
                    .points
                    .iter()
                    .any(|&p| p >= prev_x - spacing && p <= x + spacing);
                assert!(
                    hit,
                    "sign change in [{prev_x}, {x}] with no boundary point, theta {theta:?}"
                );
            }
            prev_x = x;
            prev_v = v;
        }
    }
}

#[test]
fn exclusion_test_is_sound() {
    let mut rng = SplitMix64::new(103);
    let mut excluded = 0u32;
    for _ in 0..10_000 {
        let theta = uniform_box_theta(&mut rng);
        if excluded_by_loss_bound(&theta).unwrap() {
            excluded += 1;
            let l = loss(&theta).unwrap();
            assert!(l >= 0.5, "excluded point {theta:?} has loss {l}");
        }
    }
    assert!(excluded > 1000, "exclusion fired only {excluded} times");
}

#[test]
fn small_loss_implies_correct_classification() {
    let mut rng = SplitMix64::new(104);
    for _ in 0..1000 {
        let theta = classified_theta(&mut rng);
        for (x, y) in TRAINING_SET {
            let margin = y * eval_network(&theta, x).unwrap();
            assert!(margin > 0.0, "loss<0.5 point {theta:?} misclassifies x={x}");
        }
    }
}

#[test]
fn gd_step_decreases_classified_loss() {
    let mut rng = SplitMix64::new(105);
    for _ in 0..1000 {
        let theta = classified_theta(&mut rng);
        let before = loss(&theta).unwrap();
        for eta in [0.05, 0.3, 0.5] {
            let after = loss(&gd_step(&theta, eta).unwrap()).unwrap();
            assert!(
                after < before,
                "loss rose {before} -> {after} at {theta:?}, eta={eta}"
            );
        }
    }
}

#[test]
fn conserved_quantities_survive_a_million_steps() {
    let theta0 = Parameters::new(1.4, -0.21, -1.1, -0.33);
    assert!(classify_pattern(&theta0).unwrap().tag.is_specialized());
    let d0 = theta0.derived();
    let sum0 = theta0.w1 - theta0.b1 + theta0.w2 + theta0.b2;
    let stop = StopCriteria {
        classify_cap: 10_000,
        equilibrium_tol: None,
    };
    let log = run_trajectory(&theta0, 0.3, 1_000_000, stop).unwrap();
    for r in &log.steps {
        let d = r.theta.derived();
        assert!((d.v1 - d0.v1).abs() <= 1e-12, "v1 drifts at t={}", r.t);
        assert!((d.u2 - d0.u2).abs() <= 1e-12, "u2 drifts at t={}", r.t);
        let sum = r.theta.w1 - r.theta.b1 + r.theta.w2 + r.theta.b2;
        assert!((sum - sum0).abs() <= 1e-9, "balance sum drifts at t={}", r.t);
    }
}

#[test]
fn specialized_coordinates_move_monotonically() {
    let mut rng = SplitMix64::new(106);
    for _ in 0..5 {
        let mut theta = overlap_start(&mut rng);
        for step in 0..10_000u32 {
            let next = gd_step(&theta, 0.3).unwrap();
            assert!(next.w1 > theta.w1, "w1 stalled at step {step}");
            assert!(next.b1 > theta.b1, "b1 stalled at step {step}");
            assert!(next.w2 < theta.w2, "w2 stalled at step {step}");
            assert!(next.b2 > theta.b2, "b2 stalled at step {step}");
            let (b_prev, b_next) = (theta.derived(), next.derived());
            let (p1, p2) = (b_prev.beta1.unwrap(), b_prev.beta2.unwrap());
            let (n1, n2) = (b_next.beta1.unwrap(), b_next.beta2.unwrap());
            assert!(n1 < p1 && n1 > -1.0, "beta1 left its lane at step {step}");
            assert!(n2 > p2 && n2 < 1.0, "beta2 left its lane at step {step}");
            theta = next;
        }
    }
}

#[test]
fn overlap_regime_is_absorbing() {
    let mut rng = SplitMix64::new(107);
    let stop = StopCriteria {
        classify_cap: 100_000,
        equilibrium_tol: None,
    };
    for _ in 0..10 {
        let theta0 = overlap_start(&mut rng);
        let log = run_trajectory(&theta0, 0.3, 100_000, stop).unwrap();
        for r in &log.steps {
            assert_eq!(
                r.pattern,
                PatternTag::SpecializedOverlap,
                "pattern changed at t={}",
                r.t
            );
        }
        assert!(log.transitions.is_empty());
    }
}

#[test]
fn subgradient_matches_finite_differences() {
    let mut rng = SplitMix64::new(108);
    let mut checked = 0u32;
    while checked < 2000 {
        let theta = uniform_box_theta(&mut rng);
        let p = [
            theta.b1 - theta.w1,
            theta.w1 + theta.b1,
            theta.b2 - theta.w2,
            theta.w2 + theta.b2,
        ];
        if p.iter().any(|v| v.abs() < 1e-3) {
            continue;
        }
        checked += 1;
        let g = subgradient(&theta).unwrap();
        let fd = fd_loss_gradient(&theta, 1e-6);
        for k in 0..4 {
            assert!(
                (g[k] - fd[k]).abs() <= 1e-6,
                "component {k}: analytic {} vs fd {} at {theta:?}",
                g[k],
                fd[k]
            );
        }
    }
}

#[test]
fn recursion_bounds_contain_the_simulated_recursion() {
    let mut rng = SplitMix64::new(109);
    for _ in 0..500 {
        let a0 = -2.0 + 4.0 * rng.next_f64();
        let c2 = 0.1 + 2.9 * rng.next_f64();
        let mag = 0.1 + 1.9 * rng.next_f64();
        let positive = rng.next_u64() & 1 == 0;
        let c1 = if positive { mag } else { -mag };
        let mut a = a0;
        let mut t = 0u64;
        for checkpoint in [1u64, 7, 49, 343, 2401] {
            while t < checkpoint {
                a += if positive {
                    c1 * (-c2 * a).exp()
                } else {
                    c1 * (c2 * a).exp()
                };
                t += 1;
            }
            let (lo, hi) = exp_recursion_bounds(a0, c1, c2, t).unwrap();
            assert!(
                lo <= a && a <= hi,
                "a_{t} = {a} escapes [{lo}, {hi}] for a0={a0}, c1={c1}, c2={c2}"
            );
        }
    }
}

#[test]
fn flow_loss_is_non_increasing() {
    let mut rng = SplitMix64::new(110);
    for _ in 0..100 {
        let theta0 = concentrated_flow_start(&mut rng);
        let cfg = FlowConfig {
            dt: 1e-2,
            duration: 50.0,
            method: FlowMethod::Rk4,
        };
        let log = gf_integrate(&theta0, cfg).unwrap();
        let mut prev = f64::INFINITY;
        for r in &log.steps {
            assert!(
                r.loss <= prev,
                "loss rose to {} at tau={} from {theta0:?}",
                r.loss,
                r.tau
            );
            prev = r.loss;
        }
    }
}

#[test]
fn flow_pulls_the_example_start_toward_the_optimum() {
    let theta0 = Parameters::new(1.0, 0.5, -1.0, 0.5);
    let stopped = gf_integrate_until(&theta0, 0.01, FlowMethod::Rk4, 1e-3, 1e6).unwrap();
    assert!(matches!(
        stopped.terminal_status,
        FlowStatus::ReachedLossTarget { .. }
    ));
    let d_stop = directional_distance(&stopped.final_theta, &THETA_STAR).unwrap();
    assert!(
        (d_stop - 0.0722).abs() <= 2e-3,
        "distance at the loss target moved to {d_stop}"
    );
    assert!(robustness_margin(&stopped.final_theta).unwrap() >= 0.9);

    let cfg = FlowConfig {
        dt: 0.01,
        duration: 25_000.0,
        method: FlowMethod::Rk4,
    };
    let long = gf_integrate(&theta0, cfg).unwrap();
    let d_long = directional_distance(&long.final_theta, &THETA_STAR).unwrap();
    assert!(d_long <= 0.05, "distance {d_long} after the long horizon");
    assert!(d_long < d_stop);
}

#[test]
fn erfc_agrees_with_quadrature() {
    let norm = 2.0 / std::f64::consts::PI.sqrt();
    for x in [0.1, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let q = adaptive_simpson(&|s: f64| norm * (-s * s).exp(), x, 8.0, 1e-13);
        let e = erfc(x);
        assert!((q - e).abs() <= 1e-12, "erfc({x}) = {e} vs quadrature {q}");
    }
}

#[test]
fn gap_density_integrates_to_its_distribution() {
    let total = adaptive_simpson(&|x: f64| gap_pdf(x).unwrap(), 0.0, 40.0, 1e-11);
    assert!((total - 1.0).abs() <= 1e-9, "density mass {total}");

    let h = 1e-6;
    for x in [0.3, 1.0, 2.0] {
        let fd = (gap_cdf(x + h).unwrap() - gap_cdf(x - h).unwrap()) / (2.0 * h);
        let pdf = gap_pdf(x).unwrap();
        assert!((fd - pdf).abs() <= 1e-8, "pdf({x}) = {pdf} vs fd {fd}");
    }

    let mut prev = 0.0;
    for k in 0..=1000 {
        let x = k as f64 * 0.004;
        let f = gap_cdf(x).unwrap();
        assert!(f >= prev, "cdf decreases at {x}");
        prev = f;
    }
}

#[test]
fn tail_identity_matches_the_squared_erfc() {
    for b in [0.5, 1.0, 2.0] {
        let tail = 1.0 - gap_cdf(b).unwrap();
        let direct = erfc(b / std::f64::consts::SQRT_2).powi(2);
        assert!((tail - direct).abs() <= 1e-14, "tail({b}) off");
    }
}

#[test]
fn ks_accepts_its_own_distribution_and_rejects_uniform() {
    let mut rng = SplitMix64::new(111);
    let n = 2000;
    let mut samples: Vec<f64> = (0..n).map(|_| gap_quantile(rng.next_f64() % 1.0)).collect();
    samples.sort_by(f64::total_cmp);
    let d = ks_statistic(&samples, |x| gap_cdf(x).unwrap()).unwrap();
    let crit = ks_critical_value(n);
    assert!(d <= crit, "self-sampled KS statistic {d} exceeds {crit}");

    let mut uniforms: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    uniforms.sort_by(f64::total_cmp);
    let d_bad = ks_statistic(&uniforms, |x| gap_cdf(x).unwrap()).unwrap();
    assert!(d_bad > crit, "uniform control slipped through with {d_bad}");
}

#[test]
fn converged_trials_start_in_the_right_quadrant() {
    let cfg = TrialConfig {
        seed: 3,
        max_steps: 200_000,
        ..TrialConfig::default()
    };
    let mut converged = 0u32;
    for i in 0..400 {
        let mut rng = SplitMix64::from_stream(cfg.seed, i);
        let outcome = run_trial(&cfg, &mut rng).unwrap();
        if outcome.converged {
            converged += 1;
            assert!(
                outcome.theta_init.w2 < 0.0 && 0.0 < outcome.theta_init.w1,
                "converged from the wrong quadrant: {:?}",
                outcome.theta_init
            );
        }
    }
    assert!(converged >= 50, "only {converged}/400 trials converged");
}

#[test]
fn transition_logs_validate_on_random_starts() {
    let mut rng = SplitMix64::new(112);
    let tags = [
        PatternTag::LinearBothActive,
        PatternTag::Case1RightBothLeftSpec,
        PatternTag::Case2LeftBothRightSpec,
        PatternTag::Case3BothRightActive,
        PatternTag::Case4BothLeftActive,
        PatternTag::SpecializedOverlap,
        PatternTag::SpecializedDeadInterval,
    ];
    for tag in tags {
        for _ in 0..8 {
            let theta0 = sample_for_tag(tag, &mut rng);
            let log = run_trajectory(&theta0, 0.1, 10_000, StopCriteria::default()).unwrap();
            validate_transitions(&log).unwrap_or_else(|e| {
                panic!("illegal transition from {tag} start {theta0:?}: {e}")
            });
            assert_eq!(detect_phase_transitions(&log), log.transitions);
        }
    }
}

#[test]
fn slow_run_fits_an_inverse_log_rate() {
    let theta0 = Parameters::new(2.8, 0.0, -0.3, 0.0);
    let stop = StopCriteria {
        classify_cap: 10_000,
        equilibrium_tol: None,
    };
    let log = run_trajectory(&theta0, 0.3, 1_000_000, stop).unwrap();
    let fit = rate_fit(&log, (1_000, 1_000_000)).unwrap();
    assert!(
        fit.c_hat > 1.0 && fit.c_hat < 1.4,
        "rate constant {} out of family",
        fit.c_hat
    );
    assert!(
        fit.relative_residual <= 0.05,
        "inverse-log fit residual {}",
        fit.relative_residual
    );
    assert_eq!(fit.equilibrium_target, 1.25);
    assert!((fit.bias_gap_at_hi - 1.25).abs() <= 0.025);
    assert!((fit.boundary_product_at_hi - 1.25).abs() <= 0.025);
}

#[test]
fn long_horizon_audits_reach_the_equilibrium_band() {
    let mut rng = SplitMix64::new(113);
    let stop = StopCriteria {
        classify_cap: 100_000,
        equilibrium_tol: None,
    };
    for _ in 0..10 {
        let theta0 = overlap_start(&mut rng);
        let log = run_trajectory(&theta0, 0.3, 1_000_000, stop).unwrap();
        let report = audit_trajectory(&log, &theta0, 0.3);
        assert!(!report.has_violation(), "\n{}", report.to_text());
        let eq = report
            .entries
            .iter()
            .find(|e| e.id == "bias_gap_equilibrium")
            .unwrap();
        assert!(eq.applicable, "million-step horizon must enable the check");
        assert!(eq.checked_steps > 0 && eq.passed_steps == eq.checked_steps);
    }
}

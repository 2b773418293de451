//! Replication of the random-initialization experiment.
//!
//! Each trial draws He-style initial weights with zero biases, runs gradient
//! descent under the standard stopping protocol, and reports the equilibrium
//! bias gap together with its initialization-determined prediction. The
//! aggregate compares the observed gap statistic to the analytic limit law
//! through a histogram, the upper tail at 1, and a Kolmogorov-Smirnov test.

use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::rng::SplitMix64;
use crate::special::{gap_cdf, ks_critical_value, ks_statistic};
use crate::trajectory::{run_trajectory, StopCriteria, TerminalStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Protocol parameters of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub eta: f64,
    pub classify_cap: u64,
    pub equilibrium_tol: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            eta: 0.05,
            classify_cap: 10_000,
            equilibrium_tol: 1e-3,
            max_steps: 5_000_000,
            seed: 0,
        }
    }
}

impl TrialConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !(self.equilibrium_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step size and equilibrium tolerance must be positive, got {} and {}",
                self.eta, self.equilibrium_tol
            )));
        }
        if self.classify_cap == 0 || self.max_steps == 0 {
            return Err(Error::InvalidArgument(
                "classification cap and max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Result of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub converged: bool,
    pub iterations_used: u64,
    pub theta_init: Parameters,
    pub theta_final: Parameters,
    /// Final bias gap `b2 - b1`.
    pub numerator_final: f64,
    /// The equilibrium value `(w1(0) + w2(0)) / 2` implied by conservation
    /// under zero-bias initialization.
    pub predicted_limit: f64,
    /// `min(|b2 - b1|, |predicted_limit|)`, the monotone lower bound whose
    /// distribution the limit law describes.
    pub lower_bound_stat: f64,
    pub terminal_status: TerminalStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    /// Infinite for the overflow bin.
    pub hi: f64,
    pub count: u64,
}

/// Per-trial values feeding the distribution comparison. Kept in memory for
/// the converged trials of a run; not serialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub numerator_abs: f64,
    pub predicted_abs: f64,
    pub lower_bound_stat: f64,
}

/// Aggregated results of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub n_trials: usize,
    pub n_converged: usize,
    pub histogram: Vec<HistogramBin>,
    /// Fraction of converged trials with `lower_bound_stat > 1`.
    pub empirical_tail_gt_1: f64,
    /// None when the run is too small for the distribution test.
    pub ks_statistic: Option<f64>,
    pub ks_pass: bool,
    /// Left edge of the truncation-adjusted reference distribution.
    pub ks_lower_cut: f64,
    pub config: TrialConfig,
    #[serde(skip)]
    pub samples: Vec<GapSample>,
}

impl AggregateStats {
    /// JSON document with an explicit schema version.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("aggregate stats serialize");
        v.as_object_mut()
            .expect("stats serialize to an object")
            .insert("schema_version".into(), "1".into());
        v
    }
}

/// Weights from a zero-mean normal with variance 2, biases exactly zero.
pub fn he_init(rng: &mut SplitMix64) -> Parameters {
    let (z1, z2) = rng.next_normal_pair();
    let s = 2.0f64.sqrt();
    Parameters::new(s * z1, 0.0, s * z2, 0.0)
}

/// Runs one trial: initialize, descend, report.
pub fn run_trial(cfg: &TrialConfig, rng: &mut SplitMix64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let theta0 = he_init(rng);
    let stop = StopCriteria {
        classify_cap: cfg.classify_cap,
        equilibrium_tol: Some(cfg.equilibrium_tol),
    };
    let log = run_trajectory(&theta0, cfg.eta, cfg.max_steps, stop)?;
    let theta_final = log.final_theta;
    let numerator_final = theta_final.b2 - theta_final.b1;
    let predicted_limit = 0.5 * (theta0.w1 + theta0.w2);
    Ok(TrialOutcome {
        converged: matches!(
            log.terminal_status,
            TerminalStatus::ReachedEquilibriumTol { .. }
        ),
        iterations_used: log.final_step,
        theta_init: theta0,
        theta_final,
        numerator_final,
        predicted_limit,
        lower_bound_stat: numerator_final.abs().min(predicted_limit.abs()),
        terminal_status: log.terminal_status,
    })
}

const HISTOGRAM_BINS: usize = 30;
const BIN_WIDTH: f64 = 0.1;

fn empty_histogram() -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|k| HistogramBin {
            lo: k as f64 / 10.0,
            hi: (k + 1) as f64 / 10.0,
            count: 0,
        })
        .collect();
    bins.push(HistogramBin {
        lo: HISTOGRAM_BINS as f64 / 10.0,
        hi: f64::INFINITY,
        count: 0,
    });
    bins
}

fn bin_index(x: f64) -> usize {
    ((x / BIN_WIDTH) as usize).min(HISTOGRAM_BINS)
}

/// Left edge below which the stopping tolerance can hide the true gap: a
/// retained trial has `|b2 - b1| >= 0.98 |predicted|` and the residual at
/// termination is at most `tol`, so retained statistics cannot fall below
/// `0.98 (tol / 2) / 0.02`.
pub fn ks_lower_cut(equilibrium_tol: f64) -> f64 {
    0.98 * (equilibrium_tol / 2.0) / 0.02
}

/// Kolmogorov-Smirnov comparison of the converged gap statistics against
/// the limit law.
///
/// Trials where the stopping tolerance binds (`|b2 - b1|` short of 98% of
/// the predicted gap) are excluded, which left-truncates the retained
/// sample; the reference is therefore the limit law conditioned on
/// exceeding [`ks_lower_cut`], and the verdict uses the asymptotic two-sided
/// critical value at significance 0.01.
pub fn compare_to_theory(stats: &AggregateStats) -> Result<(f64, bool)> {
    if stats.n_converged < 100 {
        return Err(Error::NotEnoughSamples {
            needed: 100,
            got: stats.n_converged,
        });
    }
    let mut retained: Vec<f64> = stats
        .samples
        .iter()
        .filter(|s| s.numerator_abs >= 0.98 * s.predicted_abs)
        .map(|s| s.lower_bound_stat)
        .collect();
    if retained.len() < 100 {
        return Err(Error::NotEnoughSamples {
            needed: 100,
            got: retained.len(),
        });
    }
    retained.sort_unstable_by(|a, b| a.partial_cmp(b).expect("gap statistics are finite"));
    let cut = ks_lower_cut(stats.config.equilibrium_tol);
    let floor = gap_cdf(cut)?;
    let truncated_cdf = move |x: f64| {
        if x <= cut {
            0.0
        } else {
            let f = gap_cdf(x).expect("retained statistics are nonnegative");
            (f - floor).max(0.0) / (1.0 - floor)
        }
    };
    let d = ks_statistic(&retained, truncated_cdf)?;
    Ok((d, d <= ks_critical_value(retained.len())))
}

/// Runs `n` independent trials on per-trial streams and aggregates them in
/// trial order, so the result is bitwise identical for any parallelism
/// degree (0 picks the library default).
pub fn run_montecarlo(n: usize, cfg: &TrialConfig, parallelism: usize) -> Result<AggregateStats> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let outcomes: Result<Vec<TrialOutcome>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = SplitMix64::from_stream(cfg.seed, i as u64);
                run_trial(cfg, &mut rng)
            })
            .collect()
    });
    let outcomes = outcomes?;

    let mut histogram = empty_histogram();
    let mut samples = Vec::new();
    let mut tail = 0usize;
    for o in &outcomes {
        if !o.converged {
            continue;
        }
        histogram[bin_index(o.lower_bound_stat)].count += 1;
        if o.lower_bound_stat > 1.0 {
            tail += 1;
        }
        samples.push(GapSample {
            numerator_abs: o.numerator_final.abs(),
            predicted_abs: o.predicted_limit.abs(),
            lower_bound_stat: o.lower_bound_stat,
        });
    }
    let n_converged = samples.len();

    let mut stats = AggregateStats {
        n_trials: n,
        n_converged,
        histogram,
        empirical_tail_gt_1: if n_converged > 0 {
            tail as f64 / n_converged as f64
        } else {
            0.0
        },
        ks_statistic: None,
        ks_pass: false,
        ks_lower_cut: ks_lower_cut(cfg.equilibrium_tol),
        config: *cfg,
        samples,
    };
    match compare_to_theory(&stats) {
        Ok((d, pass)) => {
            stats.ks_statistic = Some(d);
            stats.ks_pass = pass;
        }
        Err(Error::NotEnoughSamples { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(stats)
}

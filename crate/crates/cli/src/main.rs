//! Command-line front end for the margindyn library.
//!
//! Five subcommands cover the workflows the library supports: `trajectory`
//! (gradient descent), `gf` (gradient flow), `montecarlo` (randomized
//! initialization sweep), `bounds` (audit a run against the closed-form
//! growth and gap bounds), and `kkt` (stationarity checks and direction
//! scans). Results are written as CSV/JSON/SVG files; a short summary goes
//! to stdout.
//!
//! Exit codes: 0 success, 1 bad arguments or unreadable input, 2 numerical
//! divergence, 3 bound violation.
//!
//! A flat JSON object passed via `--config` supplies defaults for any long
//! flag (keys are the flag names without dashes, e.g. `"eta"`, or with
//! inner dashes kept, e.g. `"equilibrium-tol"`); explicit flags win.

mod csvio;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use margindyn::{
    audit_trajectory, directional_distance, find_certificate, gf_integrate, kkt_residuals,
    margin_gap, run_montecarlo, run_trajectory, scan_kkt_hits, scan_to_json, Error, FlowConfig,
    FlowMethod, FlowStatus, Parameters, StopCriteria, TerminalStatus, TrialConfig, THETA_STAR,
};

struct CliErr {
    code: u8,
    msg: String,
}

impl CliErr {
    fn usage(msg: impl Into<String>) -> Self {
        CliErr {
            code: 1,
            msg: msg.into(),
        }
    }
}

impl From<Error> for CliErr {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Diverged { .. } => 2,
            _ => 1,
        };
        CliErr {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliErr {
    fn from(e: std::io::Error) -> Self {
        CliErr::usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "margindyn",
    version,
    about = "Training dynamics of a two-neuron ReLU classifier on two points"
)]
struct Cli {
    /// Flat JSON object supplying defaults for long flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run gradient descent and write the step log as CSV and JSON.
    Trajectory(TrajectoryArgs),
    /// Run the randomized-initialization experiment and write its artifacts.
    Montecarlo(MontecarloArgs),
    /// Audit a run against the closed-form growth and gap bounds.
    Bounds(BoundsArgs),
    /// Certify a point as stationary or scan the sphere for such directions.
    Kkt(KktArgs),
    /// Integrate the gradient flow and report the directional distance.
    Gf(GfArgs),
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Start point as four comma-separated numbers w1,b1,w2,b2.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
    /// Step size.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Number of gradient steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Stop early once the bias gap is this close to its predicted limit.
    #[arg(long, allow_hyphen_values = true)]
    equilibrium_tol: Option<f64>,
    /// Output directory for trajectory.csv and trajectory.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MontecarloArgs {
    /// Number of trials.
    #[arg(long)]
    n: Option<usize>,
    /// Step size shared by every trial.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Base seed; trial k draws from an independent stream seeded by (seed, k).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the trial loop.
    #[arg(long)]
    parallel: Option<usize>,
    /// Per-trial iteration budget.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Output directory for montecarlo.json, histogram.csv, histogram.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Audit a previously written trajectory CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Simulate a fresh trajectory and audit it.
    #[arg(long)]
    fresh: bool,
    /// Start point as four comma-separated numbers w1,b1,w2,b2.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
    /// Step size the trajectory was (or is to be) generated with.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Steps for a fresh run.
    #[arg(long)]
    steps: Option<u64>,
    /// Output directory for bounds.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KktArgs {
    /// Candidate point as four comma-separated numbers w1,b1,w2,b2.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Scan unit directions for stationary points.
    #[arg(long)]
    scan: bool,
    /// Angular resolution of the scan, in (0, 0.2].
    #[arg(long, allow_hyphen_values = true)]
    resolution: Option<f64>,
    /// Residual tolerance for accepting a certificate.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Output directory for kkt_scan.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GfArgs {
    /// Start point as four comma-separated numbers w1,b1,w2,b2.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
    /// Integrator step in virtual time.
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Total virtual time to integrate.
    #[arg(long, allow_hyphen_values = true)]
    duration: Option<f64>,
    /// Integration scheme: euler or rk4.
    #[arg(long)]
    method: Option<String>,
    /// Output directory for flow.csv and flow.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values read from the optional `--config` JSON file.
struct ConfigFile(serde_json::Map<String, serde_json::Value>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, CliErr> {
        let Some(path) = path else {
            return Ok(ConfigFile(serde_json::Map::new()));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliErr::usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliErr::usage(format!("config {} is not JSON: {e}", path.display())))?;
        match value {
            serde_json::Value::Object(map) => Ok(ConfigFile(map)),
            _ => Err(CliErr::usage(format!(
                "config {} must hold a flat JSON object",
                path.display()
            ))),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliErr> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliErr::usage(format!("config key {key:?} is not a number"))),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, CliErr> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| CliErr::usage(format!("config key {key:?} is not a whole number"))),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, CliErr> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    fn string(&self, key: &str) -> Result<Option<String>, CliErr> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| CliErr::usage(format!("config key {key:?} is not a string"))),
        }
    }

    fn bool(&self, key: &str) -> Result<bool, CliErr> {
        match self.0.get(key) {
            None => Ok(false),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| CliErr::usage(format!("config key {key:?} is not a boolean"))),
        }
    }
}

fn req<T>(v: Option<T>, flag: &str) -> Result<T, CliErr> {
    v.ok_or_else(|| CliErr::usage(format!("missing required flag --{flag}")))
}

fn parse_theta(s: &str, flag: &str) -> Result<Parameters, CliErr> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(CliErr::usage(format!(
            "--{flag} expects four comma-separated numbers w1,b1,w2,b2, got {s:?}"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (k, part) in parts.iter().enumerate() {
        vals[k] = part.trim().parse().map_err(|_| {
            CliErr::usage(format!("--{flag} component {part:?} is not a number"))
        })?;
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(CliErr::usage(format!("--{flag} must be finite")));
    }
    Ok(Parameters::from_array(vals))
}

fn out_dir(flag: Option<PathBuf>, cfg: &ConfigFile) -> Result<PathBuf, CliErr> {
    Ok(flag
        .or(cfg.string("out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(".")))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliErr> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliErr::usage(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn terminal_line(status: &TerminalStatus) -> String {
    match status {
        TerminalStatus::ReachedIterationCap => "reached the iteration cap".into(),
        TerminalStatus::ReachedEquilibriumTol { at_step } => {
            format!("reached the equilibrium tolerance at step {at_step}")
        }
        TerminalStatus::Diverged { at_step, exponent } => {
            format!("diverged at step {at_step} (loss exponent {exponent:.1})")
        }
        TerminalStatus::NeverClassified { cap } => {
            format!("never classified within {cap} steps")
        }
    }
}

fn flow_line(status: &FlowStatus) -> String {
    match status {
        FlowStatus::ReachedDurationCap => "reached the duration cap".into(),
        FlowStatus::ReachedLossTarget { at_tau } => {
            format!("reached the loss target at tau = {at_tau}")
        }
        FlowStatus::Diverged { at_tau, exponent } => {
            format!("diverged at tau = {at_tau} (loss exponent {exponent:.1})")
        }
    }
}

fn cmd_trajectory(a: TrajectoryArgs, cfg: &ConfigFile) -> Result<u8, CliErr> {
    let theta0 = parse_theta(&req(a.theta0.or(cfg.string("theta0")?), "theta0")?, "theta0")?;
    let eta = req(a.eta.or(cfg.f64("eta")?), "eta")?;
    let steps = req(a.steps.or(cfg.u64("steps")?), "steps")?;
    let equilibrium_tol = a.equilibrium_tol.or(cfg.f64("equilibrium-tol")?);
    let out = out_dir(a.out, cfg)?;

    let stop = StopCriteria {
        classify_cap: steps.max(1),
        equilibrium_tol,
    };
    let log = run_trajectory(&theta0, eta, steps, stop)?;

    fs::create_dir_all(&out)?;
    csvio::write_trajectory_csv(&out.join("trajectory.csv"), &log)?;
    write_json(&out.join("trajectory.json"), &log.to_json())?;

    println!("status: {}", terminal_line(&log.terminal_status));
    println!("final margin gap: {:?}", margin_gap(&log.final_theta)?);
    println!("wrote {} logged steps to {}", log.steps.len(), out.display());
    Ok(match log.terminal_status {
        TerminalStatus::Diverged { .. } => 2,
        _ => 0,
    })
}

fn cmd_montecarlo(a: MontecarloArgs, cfg: &ConfigFile) -> Result<u8, CliErr> {
    let n = req(a.n.or(cfg.usize("n")?), "n")?;
    if n == 0 {
        return Err(CliErr::usage("--n must be at least 1"));
    }
    let eta = req(a.eta.or(cfg.f64("eta")?), "eta")?;
    let seed = req(a.seed.or(cfg.u64("seed")?), "seed")?;
    let parallel = a.parallel.or(cfg.usize("parallel")?).unwrap_or(1);
    let out = out_dir(a.out, cfg)?;

    let mut trial = TrialConfig {
        eta,
        seed,
        ..TrialConfig::default()
    };
    if let Some(max_steps) = a.max_steps.or(cfg.u64("max-steps")?) {
        trial.max_steps = max_steps;
    }

    let stats = run_montecarlo(n, &trial, parallel)?;

    fs::create_dir_all(&out)?;
    write_json(&out.join("montecarlo.json"), &stats.to_json())?;
    csvio::write_histogram_csv(&out.join("histogram.csv"), &stats.histogram)?;
    fs::write(out.join("histogram.svg"), svg::histogram_svg(&stats))?;

    let fraction = stats.n_converged as f64 / stats.n_trials as f64;
    println!(
        "converged: {}/{} ({fraction:.4})",
        stats.n_converged, stats.n_trials
    );
    println!(
        "tail estimate P(statistic > 1): {:.4}",
        stats.empirical_tail_gt_1
    );
    match stats.ks_statistic {
        Some(d) => println!(
            "distribution test: {} (D = {d:.5})",
            if stats.ks_pass { "pass" } else { "FAIL" }
        ),
        None => println!("distribution test: skipped (too few converged trials)"),
    }
    Ok(0)
}

fn cmd_bounds(a: BoundsArgs, cfg: &ConfigFile) -> Result<u8, CliErr> {
    let fresh = a.fresh || cfg.bool("fresh")?;
    let theta0 = parse_theta(&req(a.theta0.or(cfg.string("theta0")?), "theta0")?, "theta0")?;
    let eta = req(a.eta.or(cfg.f64("eta")?), "eta")?;
    let out = out_dir(a.out, cfg)?;

    let log = if fresh {
        let steps = a.steps.or(cfg.u64("steps")?).unwrap_or(100_000);
        let stop = StopCriteria {
            classify_cap: steps.max(1),
            equilibrium_tol: None,
        };
        run_trajectory(&theta0, eta, steps, stop)?
    } else {
        let path = req(
            a.log.or(cfg.string("log")?.map(PathBuf::from)),
            "log (or --fresh)",
        )?;
        csvio::read_trajectory_csv(&path, &theta0, eta).map_err(CliErr::usage)?
    };

    let report = audit_trajectory(&log, &theta0, eta);
    fs::create_dir_all(&out)?;
    write_json(&out.join("bounds.json"), &report.to_json())?;

    let text = report.to_text();
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    if report.has_violation() {
        println!("verdict: VIOLATIONS FOUND");
        Ok(3)
    } else {
        println!("verdict: all applicable bounds hold");
        Ok(0)
    }
}

fn cmd_kkt(a: KktArgs, cfg: &ConfigFile) -> Result<u8, CliErr> {
    let scan = a.scan || cfg.bool("scan")?;
    let point = a.point.or(cfg.string("point")?);
    let out = out_dir(a.out, cfg)?;
    let tol_flag = a.tol.or(cfg.f64("tol")?);

    if scan == point.is_some() {
        return Err(CliErr::usage("pass exactly one of --scan or --point"));
    }

    if scan {
        let resolution = req(a.resolution.or(cfg.f64("resolution")?), "resolution")?;
        let tol = tol_flag.unwrap_or(1e-3);
        let hits = scan_kkt_hits(resolution, tol)?;
        fs::create_dir_all(&out)?;
        write_json(&out.join("kkt_scan.json"), &scan_to_json(&hits))?;
        println!(
            "{} direction(s) accepted at resolution {resolution}, tol {tol}",
            hits.len()
        );
        for h in &hits {
            println!(
                "  ({:?}, {:?}, {:?}, {:?})  stationarity {:.3e}",
                h.direction.w1,
                h.direction.b1,
                h.direction.w2,
                h.direction.b2,
                h.residuals.stationarity
            );
        }
        return Ok(0);
    }

    let theta = parse_theta(&point.expect("checked above"), "point")?;
    let tol = tol_flag.unwrap_or(1e-8);
    match find_certificate(&theta, tol)? {
        Some(cert) => {
            let r = kkt_residuals(&theta, &cert)?;
            println!("KKT point (tolerance {tol})");
            println!(
                "multipliers: lambda = ({:?}, {:?})",
                cert.lambda1, cert.lambda2
            );
            println!(
                "activation coefficients: [[{:?}, {:?}], [{:?}, {:?}]]",
                cert.g[0][0], cert.g[0][1], cert.g[1][0], cert.g[1][1]
            );
            println!(
                "residuals: stationarity {:.3e}, complementarity {:.3e}",
                r.stationarity, r.complementarity
            );
        }
        None => println!("not a KKT point (tolerance {tol})"),
    }
    Ok(0)
}

fn cmd_gf(a: GfArgs, cfg: &ConfigFile) -> Result<u8, CliErr> {
    let theta0 = parse_theta(&req(a.theta0.or(cfg.string("theta0")?), "theta0")?, "theta0")?;
    let dt = req(a.dt.or(cfg.f64("dt")?), "dt")?;
    let duration = req(a.duration.or(cfg.f64("duration")?), "duration")?;
    let method = match a.method.or(cfg.string("method")?).as_deref() {
        None | Some("rk4") => FlowMethod::Rk4,
        Some("euler") => FlowMethod::Euler,
        Some(other) => {
            return Err(CliErr::usage(format!(
                "--method must be euler or rk4, got {other:?}"
            )));
        }
    };
    let out = out_dir(a.out, cfg)?;

    let log = gf_integrate(
        &theta0,
        FlowConfig {
            dt,
            duration,
            method,
        },
    )?;

    fs::create_dir_all(&out)?;
    csvio::write_flow_csv(&out.join("flow.csv"), &log)?;
    write_json(&out.join("flow.json"), &log.to_json())?;

    let d = directional_distance(&log.final_theta, &THETA_STAR)?;
    println!("status: {}", flow_line(&log.terminal_status));
    println!("directional distance to the optimal direction: {d:?}");
    Ok(match log.terminal_status {
        FlowStatus::Diverged { .. } => 2,
        _ => 0,
    })
}

fn run(cli: Cli) -> Result<u8, CliErr> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Cmd::Trajectory(a) => cmd_trajectory(a, &cfg),
        Cmd::Montecarlo(a) => cmd_montecarlo(a, &cfg),
        Cmd::Bounds(a) => cmd_bounds(a, &cfg),
        Cmd::Kkt(a) => cmd_kkt(a, &cfg),
        Cmd::Gf(a) => cmd_gf(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

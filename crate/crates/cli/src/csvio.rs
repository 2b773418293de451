//! CSV serialization for step logs and histograms, plus the reverse path
//! that rebuilds a trajectory log from a previously written file.
//!
//! Floats are written with `{:?}` so every value round-trips exactly; the
//! `x_star` column is left empty when the boundary point is undefined.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use margindyn::{
    detect_phase_transitions, FlowLog, HistogramBin, Parameters, PatternTag, StepRecord,
    StopCriteria, TerminalStatus, TrajectoryLog,
};

pub const STEP_HEADER: &str = "t,w1,b1,w2,b2,loss,x_star,margin,pattern";

fn opt_float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_trajectory_csv(path: &Path, log: &TrajectoryLog) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{STEP_HEADER}")?;
    for r in &log.steps {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{:?},{:?},{},{:?},{}",
            r.t,
            r.theta.w1,
            r.theta.b1,
            r.theta.w2,
            r.theta.b2,
            r.loss,
            opt_float(r.x_star),
            r.margin,
            r.pattern.as_str()
        )?;
    }
    w.flush()
}

pub fn write_flow_csv(path: &Path, log: &FlowLog) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{STEP_HEADER}")?;
    for r in &log.steps {
        writeln!(
            w,
            "{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{}",
            r.tau,
            r.theta.w1,
            r.theta.b1,
            r.theta.w2,
            r.theta.b2,
            r.loss,
            opt_float(r.x_star),
            r.margin,
            r.pattern.as_str()
        )?;
    }
    w.flush()
}

pub fn write_histogram_csv(path: &Path, bins: &[HistogramBin]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bin_lo,bin_hi,count")?;
    for b in bins {
        let hi = if b.hi.is_finite() {
            format!("{:?}", b.hi)
        } else {
            "inf".to_string()
        };
        writeln!(w, "{:?},{},{}", b.lo, hi, b.count)?;
    }
    w.flush()
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, row: usize) -> Result<T, String> {
    field
        .trim()
        .parse()
        .map_err(|_| format!("row {row}: cannot parse {name} from {field:?}"))
}

/// Rebuilds a trajectory log from a CSV written by `write_trajectory_csv`.
///
/// The file carries no run configuration, so the caller supplies the start
/// point and step size; transitions are re-detected from the rows and the
/// terminal status is recorded as an iteration cap at the last logged step.
pub fn read_trajectory_csv(
    path: &Path,
    theta0: &Parameters,
    eta: f64,
) -> Result<TrajectoryLog, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read log {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == STEP_HEADER => {}
        Some((_, header)) => {
            return Err(format!(
                "log {} has header {header:?}, expected {STEP_HEADER:?}",
                path.display()
            ));
        }
        None => return Err(format!("log {} is empty", path.display())),
    }

    let mut steps: Vec<StepRecord> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("row {row}: expected 9 columns, got {}", fields.len()));
        }
        let t: u64 = parse_field(fields[0], "t", row)?;
        let theta = Parameters::new(
            parse_field(fields[1], "w1", row)?,
            parse_field(fields[2], "b1", row)?,
            parse_field(fields[3], "w2", row)?,
            parse_field(fields[4], "b2", row)?,
        );
        let loss: f64 = parse_field(fields[5], "loss", row)?;
        let x_star = if fields[6].trim().is_empty() {
            None
        } else {
            Some(parse_field(fields[6], "x_star", row)?)
        };
        let margin: f64 = parse_field(fields[7], "margin", row)?;
        let pattern = PatternTag::from_str_tag(fields[8].trim())
            .ok_or_else(|| format!("row {row}: unknown pattern {:?}", fields[8]))?;
        if steps.last().is_some_and(|prev| prev.t >= t) {
            return Err(format!("row {row}: step index {t} does not increase"));
        }
        steps.push(StepRecord {
            t,
            theta,
            loss,
            x_star,
            margin,
            pattern,
        });
    }
    let last = steps
        .last()
        .ok_or_else(|| format!("log {} has no data rows", path.display()))?;
    let final_step = last.t;
    let final_theta = last.theta;

    let mut log = TrajectoryLog {
        eta,
        theta0: *theta0,
        stop: StopCriteria {
            classify_cap: final_step.max(1),
            equilibrium_tol: None,
        },
        max_steps: final_step.max(1),
        steps,
        transitions: Vec::new(),
        terminal_status: TerminalStatus::ReachedIterationCap,
        final_theta,
        final_step,
    };
    log.transitions = detect_phase_transitions(&log);
    Ok(log)
}

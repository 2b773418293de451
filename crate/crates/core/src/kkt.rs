//! Numerical verification of the max-margin KKT conditions.
//!
//! The margin-maximization problem behind the trained classifier asks for
//! the minimum-norm parameters with both training margins at least one. A
//! candidate point is certified by dual multipliers and a subgradient
//! selection for each ReLU; this module evaluates the exact residuals of
//! such certificates, searches the certificate space at a given point, and
//! scans the unit sphere of directions to confirm that only one direction
//! admits a certificate.

use crate::error::{Error, Result};
use crate::model::{eval_network, Parameters, TRAINING_SET};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Preactivations within this band of zero leave the ReLU subgradient free.
const PREACT_BAND: f64 = 1e-9;

/// Dual multipliers and subgradient selections certifying a KKT point.
///
/// `g[i][j]` is the subgradient chosen for neuron `j` at training instance
/// `i` (instance 0 is x = -1, instance 1 is x = +1). Entries must be 1
/// where the preactivation is strictly positive, 0 where strictly negative,
/// and may take any value in [0, 1] on a zero preactivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KKTCertificate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub g: [[f64; 2]; 2],
}

/// Exact residuals of the first-order conditions at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KKTResiduals {
    /// Infinity norm of the stationarity defect.
    pub stationarity: f64,
    /// Per-instance margin slack `y_i phi(x_i) - 1`.
    pub feasibility: [f64; 2],
    /// Smaller of the two multipliers.
    pub dual_feasibility: f64,
    /// Largest `|lambda_i * slack_i|`.
    pub complementarity: f64,
}

/// A direction accepted by the sphere scan, with its certificate evaluated
/// at the margin-one rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanHit {
    pub direction: Parameters,
    pub certificate: KKTCertificate,
    pub residuals: KKTResiduals,
}

fn preact_matrix(theta: &Parameters) -> [[f64; 2]; 2] {
    let mut p = [[0.0; 2]; 2];
    for (i, &(x, _)) in TRAINING_SET.iter().enumerate() {
        p[i][0] = theta.w1 * x + theta.b1;
        p[i][1] = theta.w2 * x + theta.b2;
    }
    p
}

fn margins(theta: &Parameters) -> Result<[f64; 2]> {
    let mut m = [0.0; 2];
    for (i, &(x, y)) in TRAINING_SET.iter().enumerate() {
        m[i] = y * eval_network(theta, x)?;
    }
    Ok(m)
}

fn validate_certificate(theta: &Parameters, cert: &KKTCertificate) -> Result<()> {
    if !(cert.lambda1.is_finite() && cert.lambda2.is_finite()) {
        return Err(Error::InvalidCertificate("multipliers must be finite".into()));
    }
    if cert.lambda1 < 0.0 || cert.lambda2 < 0.0 {
        return Err(Error::InvalidCertificate(format!(
            "multipliers ({}, {}) must be nonnegative",
            cert.lambda1, cert.lambda2
        )));
    }
    let p = preact_matrix(theta);
    for i in 0..2 {
        for j in 0..2 {
            let g = cert.g[i][j];
            if !g.is_finite() || !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidCertificate(format!(
                    "g[{i}][{j}] = {g} outside [0, 1]"
                )));
            }
            if p[i][j] > PREACT_BAND && g != 1.0 {
                return Err(Error::InvalidCertificate(format!(
                    "g[{i}][{j}] = {g} on a strictly positive preactivation"
                )));
            }
            if p[i][j] < -PREACT_BAND && g != 0.0 {
                return Err(Error::InvalidCertificate(format!(
                    "g[{i}][{j}] = {g} on a strictly negative preactivation"
                )));
            }
        }
    }
    Ok(())
}

/// Stationarity coefficient vectors: the dual combination is
/// `lambda1 * a + lambda2 * c` with one vector per instance.
fn dual_directions(g: &[[f64; 2]; 2]) -> ([f64; 4], [f64; 4]) {
    let a = [g[0][0], -g[0][0], -g[0][1], g[0][1]];
    let c = [g[1][0], g[1][0], -g[1][1], -g[1][1]];
    (a, c)
}

fn residuals_unchecked(theta: &Parameters, cert: &KKTCertificate, m: &[f64; 2]) -> KKTResiduals {
    let (a, c) = dual_directions(&cert.g);
    let th = theta.as_array();
    let mut stationarity: f64 = 0.0;
    for k in 0..4 {
        let r = th[k] - cert.lambda1 * a[k] - cert.lambda2 * c[k];
        stationarity = stationarity.max(r.abs());
    }
    let feasibility = [m[0] - 1.0, m[1] - 1.0];
    KKTResiduals {
        stationarity,
        feasibility,
        dual_feasibility: cert.lambda1.min(cert.lambda2),
        complementarity: (cert.lambda1 * feasibility[0])
            .abs()
            .max((cert.lambda2 * feasibility[1]).abs()),
    }
}

/// Evaluates the exact first-order residuals of a certificate at a point.
///
/// No tolerance is applied; the caller judges the numbers. A certificate
/// that breaks the sign constraints is rejected outright.
pub fn kkt_residuals(theta: &Parameters, cert: &KKTCertificate) -> Result<KKTResiduals> {
    theta.check_finite("kkt_residuals parameters")?;
    validate_certificate(theta, cert)?;
    let m = margins(theta)?;
    Ok(residuals_unchecked(theta, cert, &m))
}

/// The single number driving acceptance: the worst violation across
/// stationarity, primal feasibility, and complementarity.
fn score(r: &KKTResiduals) -> f64 {
    let feas = (-r.feasibility[0]).max(-r.feasibility[1]).max(0.0);
    r.stationarity.max(feas).max(r.complementarity)
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Best nonnegative multipliers for a fixed subgradient selection, chosen
/// by enumerating the four active sets of the two-variable least-squares
/// problem and keeping the lowest overall score.
fn solve_multipliers(theta: &Parameters, g: &[[f64; 2]; 2], m: &[f64; 2]) -> (KKTCertificate, f64) {
    let (a, c) = dual_directions(g);
    let th = theta.as_array();
    let (aa, cc, ac) = (dot(&a, &a), dot(&c, &c), dot(&a, &c));
    let (at, ct) = (dot(&a, &th), dot(&c, &th));

    let mut candidates = [(0.0, 0.0); 4];
    let mut n = 1;
    if aa > 0.0 {
        candidates[n] = ((at / aa).max(0.0), 0.0);
        n += 1;
    }
    if cc > 0.0 {
        candidates[n] = (0.0, (ct / cc).max(0.0));
        n += 1;
    }
    let det = aa * cc - ac * ac;
    if det.abs() > f64::EPSILON * aa.max(cc).max(1.0) {
        let l1 = (at * cc - ct * ac) / det;
        let l2 = (ct * aa - at * ac) / det;
        if l1 >= 0.0 && l2 >= 0.0 {
            candidates[n] = (l1, l2);
            n += 1;
        }
    }

    let mut best = (
        KKTCertificate {
            lambda1: 0.0,
            lambda2: 0.0,
            g: *g,
        },
        f64::INFINITY,
    );
    for &(l1, l2) in &candidates[..n] {
        let cert = KKTCertificate {
            lambda1: l1,
            lambda2: l2,
            g: *g,
        };
        let s = score(&residuals_unchecked(theta, &cert, m));
        if s < best.1 {
            best = (cert, s);
        }
    }
    best
}

/// Coordinate-descent polish over the free subgradient entries and the
/// multipliers, minimizing the overall score.
fn refine(
    theta: &Parameters,
    m: &[f64; 2],
    free: &[(usize, usize)],
    mut cert: KKTCertificate,
    mut best: f64,
) -> (KKTCertificate, f64) {
    let mut step = 0.02;
    while step > 1e-14 && best > 0.0 {
        let mut improved = false;
        for coord in 0..free.len() + 2 {
            for sign in [1.0, -1.0] {
                let mut trial = cert;
                if coord < free.len() {
                    let (i, j) = free[coord];
                    trial.g[i][j] = (trial.g[i][j] + sign * step).clamp(0.0, 1.0);
                } else if coord == free.len() {
                    trial.lambda1 = (trial.lambda1 + sign * step).max(0.0);
                } else {
                    trial.lambda2 = (trial.lambda2 + sign * step).max(0.0);
                }
                let s = score(&residuals_unchecked(theta, &trial, m));
                if s < best {
                    cert = trial;
                    best = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (cert, best)
}

/// Searches the certificate space at a point: a step-0.05 grid over the
/// free subgradient entries with multipliers from nonnegative least
/// squares, then coordinate-descent refinement of the best grid point.
/// Returns a certificate only when every residual is within `tol`.
pub fn find_certificate(theta: &Parameters, tol: f64) -> Result<Option<KKTCertificate>> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    theta.check_finite("find_certificate parameters")?;
    let p = preact_matrix(theta);
    let m = margins(theta)?;

    let mut fixed = [[0.0f64; 2]; 2];
    let mut free = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            if p[i][j] > PREACT_BAND {
                fixed[i][j] = 1.0;
            } else if p[i][j] >= -PREACT_BAND {
                free.push((i, j));
            }
        }
    }

    const GRID: usize = 21;
    let levels: Vec<f64> = (0..GRID).map(|k| k as f64 / (GRID - 1) as f64).collect();
    let combos = GRID.pow(free.len() as u32);
    let mut best: Option<(KKTCertificate, f64)> = None;
    for combo in 0..combos {
        let mut g = fixed;
        let mut rem = combo;
        for &(i, j) in &free {
            g[i][j] = levels[rem % GRID];
            rem /= GRID;
        }
        let (cert, s) = solve_multipliers(theta, &g, &m);
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            best = Some((cert, s));
        }
    }
    let (cert, s) = best.expect("grid is never empty");
    let (cert, s) = if s > tol && s <= 100.0 * tol {
        refine(theta, &m, &free, cert, s)
    } else {
        (cert, s)
    };
    Ok((s <= tol).then_some(cert))
}

/// Whether the point admits a full certificate within `tol`.
pub fn is_kkt_point(theta: &Parameters, tol: f64) -> Result<bool> {
    Ok(find_certificate(theta, tol)?.is_some())
}

fn scan_direction(dir: &Parameters, tol: f64) -> Option<ScanHit> {
    let m = margins(dir).ok()?;
    let worst = m[0].min(m[1]);
    if worst <= PREACT_BAND {
        return None;
    }
    let scaled = dir.scale(1.0 / worst);
    let cert = find_certificate(&scaled, tol).ok()??;
    let residuals = kkt_residuals(&scaled, &cert).ok()?;
    Some(ScanHit {
        direction: *dir,
        certificate: cert,
        residuals,
    })
}

/// Cell-centered directions on the unit 3-sphere at a given angular
/// resolution, with band counts adapted to latitude so neighboring
/// directions stay roughly `resolution` apart.
fn sphere_grid(resolution: f64) -> Vec<Parameters> {
    use std::f64::consts::PI;
    let mut dirs = Vec::new();
    let n_psi = (PI / resolution).ceil() as usize;
    for i in 0..n_psi {
        let psi = (i as f64 + 0.5) * PI / n_psi as f64;
        let (sp, cp) = psi.sin_cos();
        let n_theta = ((PI * sp / resolution).ceil() as usize).max(1);
        for j in 0..n_theta {
            let theta = (j as f64 + 0.5) * PI / n_theta as f64;
            let (st, ct) = theta.sin_cos();
            let n_phi = ((2.0 * PI * sp * st / resolution).ceil() as usize).max(1);
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * 2.0 * PI / n_phi as f64;
                let (sf, cf) = phi.sin_cos();
                dirs.push(Parameters::new(cp, sp * ct, sp * st * cf, sp * st * sf));
            }
        }
    }
    dirs
}

/// Scans unit directions for KKT points of the margin problem.
///
/// Each direction with both margins positive is rescaled so its smaller
/// margin is exactly one, then tested for a certificate. The optimal
/// direction itself is always included in the grid.
pub fn scan_kkt_hits(resolution: f64, tol: f64) -> Result<Vec<ScanHit>> {
    if !(resolution > 0.0 && resolution <= 0.2) {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} outside (0, 0.2]"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let mut dirs = sphere_grid(resolution);
    let star = crate::model::THETA_STAR;
    dirs.push(star.scale(1.0 / star.norm()));
    Ok(dirs
        .par_iter()
        .filter_map(|d| scan_direction(d, tol))
        .collect())
}

/// The directions accepted by [`scan_kkt_hits`].
pub fn scan_kkt_directions(resolution: f64, tol: f64) -> Result<Vec<Parameters>> {
    Ok(scan_kkt_hits(resolution, tol)?
        .into_iter()
        .map(|h| h.direction)
        .collect())
}

/// JSON document for a scan's hits, with an explicit schema version.
pub fn scan_to_json(hits: &[ScanHit]) -> serde_json::Value {
    serde_json::json!({
        "schema_version": "1",
        "hits": hits,
    })
}

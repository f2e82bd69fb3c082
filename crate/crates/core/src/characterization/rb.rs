//! Randomized benchmarking decay simulation and fitting.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CharacterizationError, CharacterizationResult, SrbPair};
use crate::device::{DeviceModel, GateId};

/// Two-qubit RB decay amplitude and asymptote used by the simulator.
pub const RB_SPAN: f64 = 0.75;
pub const RB_ASYMPTOTE: f64 = 0.25;

/// Per-Clifford error per cx error.
const CLIFFORD_PER_CX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbPoint {
    pub m: u32,
    pub survival: f64,
    pub sequences: u32,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbConfig {
    pub lengths: Vec<u32>,
    pub sequences: u32,
    pub trials: u32,
}

impl Default for RbConfig {
    fn default() -> Self {
        RbConfig {
            lengths: vec![1, 5, 10, 15, 20, 25, 30, 35, 40],
            sequences: 100,
            trials: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbFit {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub epc: f64,
    pub cx_error: f64,
    pub sse: f64,
}

impl RbFit {
    fn from_params(p: [f64; 3], sse: f64) -> Self {
        let epc = 0.75 * (1.0 - p[1]);
        RbFit {
            a: p[0],
            alpha: p[1],
            b: p[2],
            epc,
            cx_error: epc / CLIFFORD_PER_CX,
            sse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("sequence lengths must be strictly increasing")]
    UnorderedLengths,
    #[error("survival {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("survival is flat at 1; no decay observed")]
    NoDecay,
    #[error("survival is flat; decay rate is unidentifiable")]
    Degenerate,
    #[error("fit did not converge")]
    NoConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrbMode {
    Independent,
    Simultaneous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrbCurve {
    pub gate: GateId,
    /// Gate driven at the same time, in simultaneous mode.
    pub spectator: Option<GateId>,
    pub true_error: f64,
    pub points: Vec<RbPoint>,
}

/// Expected survival after `m` Cliffords for a given cx error.
pub fn survival_model(cx_error: f64, m: u32) -> f64 {
    let alpha = 1.0 - (4.0 / 3.0) * CLIFFORD_PER_CX * cx_error;
    (RB_SPAN * alpha.powi(m as i32) + RB_ASYMPTOTE).clamp(0.0, 1.0)
}

pub fn simulate_rb_curve(
    cx_error: f64,
    config: &RbConfig,
    rng: &mut ChaCha8Rng,
) -> CharacterizationResult<Vec<RbPoint>> {
    let r = CLIFFORD_PER_CX * cx_error;
    if !(0.0..0.5).contains(&r) {
        return Err(CharacterizationError::InvalidParameter(format!(
            "per-Clifford error {r} outside [0, 0.5)"
        )));
    }
    if config.sequences == 0 || config.trials == 0 {
        return Err(CharacterizationError::InvalidParameter(
            "sequences and trials must be positive".into(),
        ));
    }
    if config.lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CharacterizationError::InvalidParameter(
            "sequence lengths must be strictly increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(config.lengths.len());
    for &m in &config.lengths {
        let p = survival_model(cx_error, m);
        let dist = Binomial::new(config.trials as u64, p).expect("p is clamped to [0, 1]");
        let total: u64 = (0..config.sequences).map(|_| dist.sample(rng)).sum();
        out.push(RbPoint {
            m,
            survival: total as f64 / (config.sequences as f64 * config.trials as f64),
            sequences: config.sequences,
            trials: config.trials,
        });
    }
    Ok(out)
}

/// Simulated SRB on one pair. Independent mode benchmarks each gate alone;
/// simultaneous mode uses the conditional errors from `truth`, falling back
/// to the independent error when the table has no entry.
pub fn simulate_srb(
    truth: &DeviceModel,
    pair: SrbPair,
    mode: SrbMode,
    config: &RbConfig,
    seed: u64,
) -> CharacterizationResult<[SrbCurve; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = |gate: GateId, other: GateId| -> CharacterizationResult<SrbCurve> {
        truth
            .gate(gate)
            .map_err(|e| CharacterizationError::InvalidParameter(e.to_string()))?;
        let (error, spectator) = match mode {
            SrbMode::Independent => (truth.independent_error(gate), None),
            SrbMode::Simultaneous => (
                truth
                    .conditional_errors()
                    .get(gate, other)
                    .unwrap_or_else(|| truth.independent_error(gate)),
                Some(other),
            ),
        };
        let per_clifford = CLIFFORD_PER_CX * error;
        if per_clifford >= 0.5 {
            return Err(CharacterizationError::NonPhysical { gate, per_clifford });
        }
        Ok(SrbCurve {
            gate,
            spectator,
            true_error: error,
            points: simulate_rb_curve(error, config, &mut rng)?,
        })
    };
    Ok([curve(pair.gi, pair.gj)?, curve(pair.gj, pair.gi)?])
}

fn sse(p: &[f64; 3], ms: &[f64], ys: &[f64]) -> f64 {
    ms.iter()
        .zip(ys)
        .map(|(&m, &y)| {
            let r = p[0] * p[1].powf(m) + p[2] - y;
            r * r
        })
        .sum()
}

const ALPHA_MIN: f64 = 1e-12;
const ALPHA_MAX: f64 = 1.0 - 1e-12;

fn project(p: [f64; 3]) -> [f64; 3] {
    [
        p[0].clamp(0.0, 1.0),
        p[1].clamp(ALPHA_MIN, ALPHA_MAX),
        p[2].clamp(0.0, 1.0),
    ]
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Projected Levenberg-Marquardt. Returns the parameters and final SSE.
fn levenberg_marquardt(start: [f64; 3], ms: &[f64], ys: &[f64]) -> ([f64; 3], f64) {
    let mut p = project(start);
    let mut cost = sse(&p, ms, ys);
    let mut lambda = 1e-3;
    for _ in 0..1000 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&m, &y) in ms.iter().zip(ys) {
            let am = p[1].powf(m);
            let r = p[0] * am + p[2] - y;
            let j = [am, if m > 0.0 { p[0] * m * p[1].powf(m - 1.0) } else { 0.0 }, 1.0];
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut lhs = jtj;
            for (d, row) in lhs.iter_mut().enumerate() {
                row[d] += lambda * jtj[d][d].max(1e-12);
            }
            let Some(step) = solve3(lhs, [-jtr[0], -jtr[1], -jtr[2]]) else {
                lambda *= 10.0;
                continue;
            };
            let cand = project([p[0] + step[0], p[1] + step[1], p[2] + step[2]]);
            let c = sse(&cand, ms, ys);
            if c < cost {
                let moved = (0..3).map(|k| (cand[k] - p[k]).abs()).fold(0.0, f64::max);
                let gain = cost - c;
                p = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if moved < 1e-15 || gain <= 1e-30 {
                    return (p, cost);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (p, cost)
}

/// Least-squares fit of `A * alpha^m + B` with `0 < alpha < 1` and
/// `A, B` in `[0, 1]`.
pub fn fit_rb(points: &[RbPoint]) -> Result<RbFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if points.windows(2).any(|w| w[0].m >= w[1].m) {
        return Err(FitError::UnorderedLengths);
    }
    if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p.survival)) {
        return Err(FitError::OutOfRange(p.survival));
    }
    let ms: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.survival).collect();
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = ymax - ymin;
    if range <= 1e-12 {
        return Err(if ymin >= 1.0 - 1e-12 {
            FitError::NoDecay
        } else {
            FitError::Degenerate
        });
    }

    let mut best: Option<([f64; 3], f64)> = None;
    for b0 in [0.0, 0.5 * ymin, 0.9 * ymin, ymin - 1e-3 * range] {
        let Some(start) = log_linear_start(&ms, &ys, b0) else {
            continue;
        };
        let (p, c) = levenberg_marquardt(start, &ms, &ys);
        if c.is_finite() && best.is_none_or(|(_, bc)| c < bc) {
            best = Some((p, c));
        }
    }
    let (p, cost) = best.ok_or(FitError::NoConvergence)?;
    if p[0] < 1e-9 {
        return Err(FitError::Degenerate);
    }
    Ok(RbFit::from_params(p, cost))
}

/// Straight-line fit of `ln(y - b0)` against `m`.
fn log_linear_start(ms: &[f64], ys: &[f64], b0: f64) -> Option<[f64; 3]> {
    let pts: Vec<(f64, f64)> = ms
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y - b0 > 1e-12)
        .map(|(&m, &y)| (m, (y - b0).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Some(project([intercept.exp(), slope.exp(), b0]))
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    m: u32,
    survival: f64,
    #[serde(rename = "sequence_count")]
    sequences: u32,
    trials: u32,
}

pub fn write_decay_csv(path: &Path, points: &[RbPoint]) -> CharacterizationResult<()> {
    let io = |e: csv::Error| CharacterizationError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for p in points {
        w.serialize(CsvRow {
            m: p.m,
            survival: p.survival,
            sequences: p.sequences,
            trials: p.trials,
        })
        .map_err(io)?;
    }
    w.flush().map_err(|e| CharacterizationError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_decay_csv(path: &Path) -> CharacterizationResult<Vec<RbPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CharacterizationError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row.map_err(|e| CharacterizationError::Csv(e.to_string()))?;
            Ok(RbPoint {
                m: row.m,
                survival: row.survival,
                sequences: row.sequences,
                trials: row.trials,
            })
        })
        .collect()
}

//! Success-probability estimates for schedules.
//!
//! The model composes independent failures: each gate fails with its
//! schedule-dependent error rate and each used qubit decoheres with
//! probability `1 - exp(-t/T)` over its lifetime. Readout error is left out.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitIR;
use crate::device::DeviceModel;
use crate::scheduler::{verify_schedule, Schedule, Violation};
use crate::seeds;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("schedule fails verification: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Unverified(Vec<Violation>),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type EvalResult<T> = Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub success: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub analytic_success: f64,
    pub analytic_error: f64,
    pub mc: Option<McEstimate>,
    pub makespan: u64,
    pub per_gate_error: BTreeMap<usize, f64>,
    /// `1 - exp(-t/T)` per qubit.
    pub per_qubit_decoherence: Vec<f64>,
}

impl EvalReport {
    /// Standard deviation of a `trials`-sample estimate of the analytic
    /// success probability.
    pub fn sigma(&self, trials: u64) -> f64 {
        let p = self.analytic_success;
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

fn failure_probabilities(device: &DeviceModel, s: &Schedule) -> (Vec<f64>, Vec<f64>) {
    let gates: Vec<f64> = s.per_gate_error.values().copied().collect();
    let qubits = s
        .per_qubit_lifetime
        .iter()
        .enumerate()
        .map(|(q, &t)| 1.0 - (-(t as f64) / device.qubit(q).coherence_ns()).exp())
        .collect();
    (gates, qubits)
}

fn checked(ir: &CircuitIR, device: &DeviceModel, s: &Schedule) -> EvalResult<()> {
    let v = verify_schedule(ir, device, s);
    if v.is_empty() {
        Ok(())
    } else {
        Err(EvalError::Unverified(v))
    }
}

fn report(device: &DeviceModel, s: &Schedule) -> EvalReport {
    let (gates, qubits) = failure_probabilities(device, s);
    let success = gates.iter().map(|e| 1.0 - e).product::<f64>()
        * s.per_qubit_lifetime
            .iter()
            .enumerate()
            .map(|(q, &t)| (-(t as f64) / device.qubit(q).coherence_ns()).exp())
            .product::<f64>();
    EvalReport {
        analytic_success: success,
        analytic_error: 1.0 - success,
        mc: None,
        makespan: s.makespan,
        per_gate_error: s.per_gate_error.clone(),
        per_qubit_decoherence: qubits,
    }
}

/// `prod(1 - eps_g) * prod(exp(-t_q / T_q))` for a verified schedule.
pub fn analytic_success(ir: &CircuitIR, device: &DeviceModel, s: &Schedule) -> EvalResult<EvalReport> {
    checked(ir, device, s)?;
    Ok(report(device, s))
}

/// Wilson score interval at `z` standard deviations.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

const SHARDS: u64 = 64;

/// Samples independent gate and qubit failures `trials` times. Trials are
/// split over a fixed number of shards with seeds derived from `seed`, so
/// the result does not depend on the thread count.
pub fn monte_carlo_success(
    ir: &CircuitIR,
    device: &DeviceModel,
    s: &Schedule,
    trials: u64,
    seed: u64,
) -> EvalResult<EvalReport> {
    if trials == 0 {
        return Err(EvalError::NoTrials);
    }
    checked(ir, device, s)?;
    let mut rep = report(device, s);
    let (gates, qubits) = failure_probabilities(device, s);
    let events: Vec<f64> = gates.into_iter().chain(qubits).filter(|&p| p > 0.0).collect();
    let successes: u64 = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = trials / SHARDS + u64::from(shard < trials % SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, shard));
            (0..n)
                .filter(|_| events.iter().all(|&p| rng.random::<f64>() >= p))
                .count() as u64
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(successes, trials, 1.96);
    rep.mc = Some(McEstimate {
        trials,
        successes,
        success: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    });
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub schedule_name: String,
    pub omega: f64,
    pub analytic_error: f64,
    pub mc_error: Option<f64>,
    pub mc_ci_low: Option<f64>,
    pub mc_ci_high: Option<f64>,
    pub makespan_ns: u64,
    /// Analytic error relative to the first schedule.
    pub ratio_vs_baseline: f64,
}

/// One row per schedule; ratios are against the first entry. Monte Carlo
/// columns are filled when `trials` is given.
pub fn compare(
    ir: &CircuitIR,
    device: &DeviceModel,
    schedules: &[(String, Schedule)],
    trials: Option<u64>,
    seed: u64,
) -> EvalResult<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(schedules.len());
    let mut baseline = None;
    for (k, (name, s)) in schedules.iter().enumerate() {
        let rep = match trials {
            Some(t) => monte_carlo_success(ir, device, s, t, seeds::derive(seed, k as u64))?,
            None => analytic_success(ir, device, s)?,
        };
        let base = *baseline.get_or_insert(rep.analytic_error);
        let ratio = if base == 0.0 {
            if rep.analytic_error == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            rep.analytic_error / base
        };
        rows.push(ComparisonRow {
            schedule_name: name.clone(),
            omega: s.omega,
            analytic_error: rep.analytic_error,
            mc_error: rep.mc.map(|m| 1.0 - m.success),
            mc_ci_low: rep.mc.map(|m| 1.0 - m.ci_high),
            mc_ci_high: rep.mc.map(|m| 1.0 - m.ci_low),
            makespan_ns: s.makespan,
            ratio_vs_baseline: ratio,
        });
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> EvalResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| EvalError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| EvalError::Csv(e.to_string()))
}

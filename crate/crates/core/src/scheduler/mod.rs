//! Crosstalk-adaptive scheduling.
//!
//! [`build_problem`] turns a circuit and device into an
//! [`OptimizationProblem`]; [`solve`] finds an optimal schedule with either
//! the internal branch-and-bound or an external SMT-LIB optimizer.
//! [`series_schedule`] and [`parallel_schedule`] are the two baselines.
//!
//! All times are integer nanoseconds. Intervals are half-open, so two
//! instructions overlap when their intersection has positive length.

mod barriers;
mod exact;
mod problem;
mod smtlib;
mod timing;
mod verify;

pub use barriers::{insert_barriers, overlap_set, BarrierCircuit};
pub use exact::ExactLimits;
pub use problem::{
    build_problem, CandidatePair, Constraint, InstrClass, OptimizationProblem, ProblemOptions,
    Truncation, DEFAULT_CAP, DEFAULT_OMEGA,
};
pub use smtlib::{emit_smtlib, parse_model, SmtOptions};
pub use timing::{min_weighted_lifetimes, times_from_latest, TimingGraph};
pub use verify::{verify_schedule, Violation, ViolationKind};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, CircuitIR};
use crate::device::{DeviceError, DeviceModel};

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("instruction {0} depends on a measurement")]
    DependsOnMeasure(usize),
    #[error("instruction {gate}: candidate set {set:?} exceeds the cap")]
    CapExceeded { gate: usize, set: Vec<usize> },
    #[error("no conditional error for candidate pair ({gate}, {other}) in both directions")]
    MissingConditional { gate: usize, other: usize },
    #[error("problem is infeasible")]
    Infeasible,
    #[error("external solver `{0}` not found")]
    SolverMissing(String),
    #[error("external solver timed out after {0:.1}s")]
    SolverTimeout(f64),
    #[error("external solver failed: {0}")]
    Solver(String),
    #[error("barrier insertion cannot reproduce the schedule: {0}")]
    UnverifiableOrdering(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("schedule parse error: {0}")]
    Parse(String),
}

pub type SchedulerResult<T> = Result<T, SchedulerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Xtalk,
    Series,
    Parallel,
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Xtalk => "xtalk",
            SchedulerKind::Series => "series",
            SchedulerKind::Parallel => "parallel",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Internal,
    Smtlib,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "internal" => Ok(Backend::Internal),
            "smtlib" => Ok(Backend::Smtlib),
            other => Err(format!("unknown backend `{other}` (expected internal or smtlib)")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Internal => "internal",
            Backend::Smtlib => "smtlib",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub backend: String,
    pub solve_time_s: f64,
    pub nodes: u64,
    /// False when a budget stopped the search before optimality was proven.
    pub optimal: bool,
}

impl SolverStats {
    fn baseline(name: &str) -> Self {
        SolverStats {
            backend: name.into(),
            solve_time_s: 0.0,
            nodes: 0,
            optimal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: SchedulerKind,
    pub omega: f64,
    pub gamma: f64,
    pub cap: usize,
    /// Start time of each instruction, indexed by instruction id.
    pub start_times: Vec<u64>,
    pub durations: Vec<u64>,
    pub readout_time: u64,
    pub makespan: u64,
    /// Error rate of every gate (cx and single-qubit) under this schedule.
    pub per_gate_error: BTreeMap<usize, f64>,
    pub per_qubit_lifetime: Vec<u64>,
    pub objective: f64,
    pub stats: SolverStats,
}

impl Schedule {
    pub fn end(&self, k: usize) -> u64 {
        self.start_times[k] + self.durations[k]
    }

    pub fn overlaps(&self, a: usize, b: usize) -> bool {
        intervals_overlap(
            self.start_times[a] as i64,
            self.durations[a],
            self.start_times[b] as i64,
            self.durations[b],
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> SchedulerResult<Self> {
        serde_json::from_str(text).map_err(|e| SchedulerError::Parse(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> SchedulerResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| SchedulerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> SchedulerResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SchedulerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

pub fn intervals_overlap(sa: i64, da: u64, sb: i64, db: u64) -> bool {
    sa < sb + db as i64 && sb < sa + da as i64
}

/// Objective terms of a timing under a problem's model.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Error of each gate; `None` for measures and barriers.
    pub gate_errors: Vec<Option<f64>>,
    pub lifetimes: Vec<u64>,
    pub readout_time: i64,
    pub makespan: u64,
    pub objective: f64,
}

/// Evaluates `omega * sum(log eps) + (1 - omega) * sum(t / T)` for the given
/// start times. A cx gate's error is the largest conditional error among
/// overlapping candidates, or its independent error if none overlap.
pub fn evaluate_times(p: &OptimizationProblem, times: &[i64]) -> Evaluation {
    let n = p.len();
    let mut gate_errors = vec![None; n];
    let mut log_sum = 0.0;
    for k in 0..n {
        let Some(base) = p.errors[k] else { continue };
        let eps = p.candidates[k]
            .iter()
            .filter(|&&j| intervals_overlap(times[k], p.durations[k], times[j], p.durations[j]))
            .map(|&j| p.conditional(k, j).expect("candidates form pairs"))
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
            .unwrap_or(base);
        gate_errors[k] = Some(eps);
        log_sum += eps.ln();
    }
    let mut lifetimes = vec![0u64; p.n_qubits];
    let mut decoherence = 0.0;
    for (q, ops) in p.qubit_ops.iter().enumerate() {
        if ops.is_empty() {
            continue;
        }
        let first = ops.iter().map(|&k| times[k]).min().unwrap();
        let last = ops.iter().map(|&k| times[k] + p.durations[k] as i64).max().unwrap();
        lifetimes[q] = (last - first).max(0) as u64;
        decoherence += lifetimes[q] as f64 / p.coherence_ns[q];
    }
    let readout_time = readout_time(p, times);
    let first = (0..n)
        .filter(|&k| p.classes[k] != InstrClass::Barrier)
        .map(|k| times[k])
        .min();
    let makespan = first.map_or(0, |f| (readout_time - f).max(0) as u64);
    let omega = p.omega();
    Evaluation {
        gate_errors,
        lifetimes,
        readout_time,
        makespan,
        objective: omega * log_sum + (1.0 - omega) * decoherence,
    }
}

fn readout_time(p: &OptimizationProblem, times: &[i64]) -> i64 {
    let n = p.len();
    if let Some(m) = (0..n).find(|&k| p.classes[k] == InstrClass::Measure) {
        return times[m];
    }
    (0..n)
        .filter(|&k| p.classes[k] == InstrClass::Gate)
        .map(|k| times[k] + p.durations[k] as i64)
        .max()
        .unwrap_or(0)
}

/// Dependencies, readout alignment and horizon bounds as arcs.
pub(crate) fn base_graph(p: &OptimizationProblem) -> TimingGraph {
    let mut g = TimingGraph::new(p.len());
    let r = g.anchor();
    for c in &p.constraints {
        match *c {
            Constraint::Dependency { from, to, gap } => g.push(from, to, gap as i64),
            Constraint::ReadoutAlignment { measure } => {
                g.push(measure, r, 0);
                g.push(r, measure, 0);
            }
            Constraint::Horizon { instr, slack } => {
                g.push(instr, r, p.durations[instr] as i64 - slack as i64)
            }
            _ => {}
        }
    }
    g
}

/// Builds a [`Schedule`] from start times relative to any origin; all
/// derived fields are recomputed from the times.
pub fn schedule_from_times(
    p: &OptimizationProblem,
    kind: SchedulerKind,
    times: &[i64],
    stats: SolverStats,
) -> Schedule {
    let times = &times[..p.len()];
    let shift = times.iter().copied().min().unwrap_or(0);
    let rel: Vec<i64> = times.iter().map(|t| t - shift).collect();
    let eval = evaluate_times(p, &rel);
    Schedule {
        kind,
        omega: p.options.omega,
        gamma: p.options.gamma,
        cap: p.options.cap,
        start_times: rel.iter().map(|&t| t as u64).collect(),
        durations: p.durations.clone(),
        readout_time: eval.readout_time.max(0) as u64,
        makespan: eval.makespan,
        per_gate_error: eval
            .gate_errors
            .iter()
            .enumerate()
            .filter_map(|(k, e)| e.map(|e| (k, e)))
            .collect(),
        per_qubit_lifetime: eval.lifetimes,
        objective: eval.objective,
        stats,
    }
}

/// All instructions one after another in id order, readouts aligned after
/// the last gate.
pub fn series_schedule(p: &OptimizationProblem) -> Schedule {
    let n = p.len();
    let mut times = vec![0i64; n];
    let mut cursor = 0i64;
    for k in 0..n {
        if p.classes[k] == InstrClass::Gate {
            times[k] = cursor;
            cursor += p.durations[k] as i64;
        }
    }
    for k in 0..n {
        if p.classes[k] == InstrClass::Measure {
            times[k] = cursor;
        }
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &p.dag_edges {
        preds[b].push(a);
    }
    for k in 0..n {
        if p.classes[k] == InstrClass::Barrier {
            times[k] = preds[k]
                .iter()
                .map(|&a| times[a] + p.durations[a] as i64)
                .max()
                .unwrap_or(0);
        }
    }
    schedule_from_times(p, SchedulerKind::Series, &times, SolverStats::baseline("series"))
}

/// As-late-as-possible list schedule anchored at the common readout time.
pub fn parallel_schedule(p: &OptimizationProblem) -> Schedule {
    let lp = base_graph(p)
        .latest()
        .expect("dependency graph without choices is acyclic");
    schedule_from_times(
        p,
        SchedulerKind::Parallel,
        &times_from_latest(&lp),
        SolverStats::baseline("parallel"),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub backend: Backend,
    pub limits: ExactLimits,
    pub smt: SmtOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: Backend::Internal,
            limits: ExactLimits::default(),
            smt: SmtOptions::default(),
        }
    }
}

pub fn solve(p: &OptimizationProblem, options: &SolveOptions) -> SchedulerResult<Schedule> {
    let start = Instant::now();
    let (times, mut stats) = match options.backend {
        Backend::Internal => exact::solve_exact(p, &options.limits)?,
        Backend::Smtlib => smtlib::solve_smt(p, &options.smt)?,
    };
    stats.solve_time_s = start.elapsed().as_secs_f64();
    Ok(schedule_from_times(p, SchedulerKind::Xtalk, &times, stats))
}

/// Builds and solves in one step.
pub fn xtalk_schedule(
    ir: &CircuitIR,
    device: &DeviceModel,
    problem: ProblemOptions,
    options: &SolveOptions,
) -> SchedulerResult<Schedule> {
    solve(&build_problem(ir, device, problem)?, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceBuilder;
    use crate::fixtures;

    fn problem(text: &str, device: &DeviceModel, omega: f64) -> OptimizationProblem {
        build_problem(
            &CircuitIR::parse(text).unwrap(),
            device,
            ProblemOptions::with_omega(omega),
        )
        .unwrap()
    }

    #[test]
    fn series_is_back_to_back() {
        let d = DeviceBuilder::linear(4).build().unwrap();
        let p = problem("cx 0 1\ncx 2 3\nmeasure 0\nmeasure 3", &d, 0.5);
        let s = series_schedule(&p);
        assert_eq!(s.start_times, vec![0, 400, 800, 800]);
        assert_eq!(s.makespan, 800);
    }

    #[test]
    fn parallel_makespan_is_critical_path() {
        let d = DeviceBuilder::linear(4).build().unwrap();
        let p = problem("u 0\ncx 0 1\ncx 2 3\nmeasure 0\nmeasure 1\nmeasure 2", &d, 0.5);
        let s = parallel_schedule(&p);
        assert_eq!(s.makespan, 500);
        assert_eq!(s.start_times, vec![0, 100, 100, 500, 500, 500]);
        // qubit 3 is unmeasured but still ends by the readout
        assert_eq!(s.per_qubit_lifetime, vec![1500, 1400, 1400, 400]);
    }

    #[test]
    fn single_gate_closed_form_objective() {
        let d = DeviceBuilder::linear(2).all_coherence(50.0, 50.0).build().unwrap();
        let p = problem("cx 0 1", &d, 0.5);
        let s = parallel_schedule(&p);
        let want = 0.5 * 0.01f64.ln() + 0.5 * 2.0 * 400.0 / 50_000.0;
        assert!((s.objective - want).abs() < 1e-12);
    }

    #[test]
    fn long_two_qubit_chain_is_feasible() {
        // Early instructions get relaxed many more times than there are
        // nodes while the chain propagates.
        let d = DeviceBuilder::linear(2).cx_duration(250).one_qubit(50, 0.001).build().unwrap();
        let text = "u 0\ncx 1 0\nu 0\nu 1\nu 0\ncx 1 0\nu 0\ncx 0 1\ncx 1 0\nu 1\nu 1\nu 0\n\
                    cx 0 1\nu 0\ncx 0 1\nu 0\ncx 1 0\ncx 1 0\nu 0\nmeasure 0\nmeasure 1";
        let p = problem(text, &d, 0.5);
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(s.makespan, parallel_schedule(&p).makespan);
    }

    #[test]
    fn empty_circuit() {
        let d = DeviceBuilder::linear(2).build().unwrap();
        let p = problem("", &d, 0.5);
        for s in [series_schedule(&p), parallel_schedule(&p)] {
            assert_eq!(s.makespan, 0);
            assert_eq!(s.objective, 0.0);
        }
    }

    #[test]
    fn three_cx_parallel_overlaps_the_pair() {
        let d = fixtures::chain6();
        let p = build_problem(&fixtures::three_cx_circuit(), &d, ProblemOptions::default()).unwrap();
        let s = parallel_schedule(&p);
        assert!(s.overlaps(1, 2));
        assert_eq!(s.per_gate_error[&1], 0.11);
        assert_eq!(s.per_gate_error[&3], 0.01);
    }

    #[test]
    fn schedule_json_round_trip() {
        let d = fixtures::chain6();
        let p = build_problem(&fixtures::three_cx_circuit(), &d, ProblemOptions::default()).unwrap();
        let s = series_schedule(&p);
        assert_eq!(Schedule::from_json(&s.to_json()).unwrap(), s);
    }
}

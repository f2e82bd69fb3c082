//! The scheduling problem for one (circuit, device, weights) instance.

use std::collections::HashMap;

use log::warn;

use super::{SchedulerError, SchedulerResult};
use crate::circuit::{can_overlap, CircuitIR, Op};
use crate::device::{DeviceModel, QubitId, DEFAULT_GAMMA};

pub const DEFAULT_CAP: usize = 10;
pub const DEFAULT_OMEGA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    /// Weight of gate error against decoherence, in `[0, 1]`.
    pub omega: f64,
    pub gamma: f64,
    /// Maximum candidate-set size per gate.
    pub cap: usize,
    /// Fail instead of truncating oversized candidate sets.
    pub strict_cap: bool,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            omega: DEFAULT_OMEGA,
            gamma: DEFAULT_GAMMA,
            cap: DEFAULT_CAP,
            strict_cap: false,
        }
    }
}

impl ProblemOptions {
    pub fn with_omega(omega: f64) -> Self {
        ProblemOptions {
            omega,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrClass {
    Gate,
    Measure,
    Barrier,
}

/// Two instructions that may overlap and interfere; `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub i: usize,
    pub j: usize,
    /// E(i | j) and E(j | i).
    pub e_ij: f64,
    pub e_ji: f64,
}

/// Constraint families of the model. Times are integer nanoseconds; `R`
/// is the common readout time.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `tau[to] >= tau[from] + gap`.
    Dependency { from: usize, to: usize, gap: u64 },
    /// `o[pair]` holds iff the two intervals intersect.
    OverlapDefinition { pair: usize },
    /// When exactly `overlapping` of the gate's candidates overlap it, its
    /// log-error is `log_error`.
    ErrorSelection {
        gate: usize,
        overlapping: Vec<usize>,
        log_error: f64,
    },
    /// Disjoint, or one interval nested in the other.
    NoPartialOverlap { pair: usize },
    /// `tau[measure] == R`.
    ReadoutAlignment { measure: usize },
    /// `tau[instr] + duration <= R + slack`.
    Horizon { instr: usize, slack: u64 },
    /// Lifetime of `qubit` spans its first to last instruction.
    Lifetime { qubit: QubitId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub gate: usize,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub options: ProblemOptions,
    pub n_qubits: usize,
    pub classes: Vec<InstrClass>,
    pub qubits: Vec<Vec<QubitId>>,
    pub durations: Vec<u64>,
    pub dag_edges: Vec<(usize, usize)>,
    /// Independent error of every gate; `None` for measures and barriers.
    pub errors: Vec<Option<f64>>,
    /// Candidate overlap set of each instruction after truncation.
    pub candidates: Vec<Vec<usize>>,
    pub pairs: Vec<CandidatePair>,
    pub pair_index: HashMap<(usize, usize), usize>,
    /// Non-barrier instructions per qubit in program order.
    pub qubit_ops: Vec<Vec<usize>>,
    /// min(T1, T2) in ns per qubit.
    pub coherence_ns: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub truncations: Vec<Truncation>,
    /// Longest readout duration; bounds barriers placed after measures.
    pub max_readout: u64,
}

impl OptimizationProblem {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn omega(&self) -> f64 {
        self.options.omega
    }

    pub fn pair(&self, a: usize, b: usize) -> Option<&CandidatePair> {
        self.pair_index
            .get(&(a.min(b), a.max(b)))
            .map(|&k| &self.pairs[k])
    }

    /// E(a | b) for a candidate pair.
    pub fn conditional(&self, a: usize, b: usize) -> Option<f64> {
        self.pair(a, b)
            .map(|p| if p.i == a { p.e_ij } else { p.e_ji })
    }

    /// True when every used qubit ends in a measurement, which makes the
    /// latest feasible timing lifetime-optimal.
    pub fn all_measured(&self) -> bool {
        self.qubit_ops.iter().all(|ops| {
            ops.last()
                .is_none_or(|&k| self.classes[k] == InstrClass::Measure)
        })
    }

    pub fn count(&self, family: fn(&Constraint) -> bool) -> usize {
        self.constraints.iter().filter(|c| family(c)).count()
    }
}

pub fn build_problem(
    ir: &CircuitIR,
    device: &DeviceModel,
    options: ProblemOptions,
) -> SchedulerResult<OptimizationProblem> {
    if !(0.0..=1.0).contains(&options.omega) {
        return Err(SchedulerError::InvalidOption(format!(
            "omega {} outside [0, 1]",
            options.omega
        )));
    }
    if options.cap == 0 {
        return Err(SchedulerError::InvalidOption("cap must be positive".into()));
    }
    let binding = ir.bind(device)?;
    let n = ir.len();
    let mut classes = Vec::with_capacity(n);
    let mut durations = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    let mut max_readout = 0;
    for (ins, hw) in ir.instructions().iter().zip(&binding) {
        let class = match ins.op {
            Op::Barrier => InstrClass::Barrier,
            Op::Measure => InstrClass::Measure,
            Op::Cx | Op::U(_) => InstrClass::Gate,
        };
        let (duration, error) = match hw {
            Some(g) => {
                let gate = device.gate(*g)?;
                (gate.duration_ns, gate.error)
            }
            None => (0, 0.0),
        };
        if class == InstrClass::Measure {
            max_readout = max_readout.max(duration);
        }
        classes.push(class);
        durations.push(duration);
        errors.push((class == InstrClass::Gate).then_some(error));
    }

    let measures: Vec<usize> = (0..n).filter(|&k| classes[k] == InstrClass::Measure).collect();
    let after_measure: Vec<bool> = (0..n)
        .map(|k| measures.iter().any(|&m| ir.is_ancestor(m, k)))
        .collect();
    if let Some(k) = (0..n).find(|&k| after_measure[k] && classes[k] != InstrClass::Barrier) {
        return Err(SchedulerError::DependsOnMeasure(k));
    }

    // candidate sets, truncated to the cap by conditional error
    let mut candidates = Vec::with_capacity(n);
    let mut truncations = Vec::new();
    for gi in 0..n {
        let set = can_overlap(ir, device, &binding, gi, options.gamma);
        let mut with_err = Vec::with_capacity(set.len());
        for gj in set {
            let (hi, hj) = (binding[gi].unwrap(), binding[gj].unwrap());
            let table = device.conditional_errors();
            match (table.get(hi, hj), table.get(hj, hi)) {
                (Some(e), Some(_)) => with_err.push((gj, e)),
                _ => return Err(SchedulerError::MissingConditional { gate: gi, other: gj }),
            }
        }
        if with_err.len() > options.cap {
            let all: Vec<usize> = with_err.iter().map(|&(g, _)| g).collect();
            if options.strict_cap {
                return Err(SchedulerError::CapExceeded { gate: gi, set: all });
            }
            with_err.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let dropped: Vec<usize> = with_err[options.cap..].iter().map(|&(g, _)| g).collect();
            with_err.truncate(options.cap);
            let mut kept: Vec<usize> = with_err.iter().map(|&(g, _)| g).collect();
            kept.sort_unstable();
            warn!(
                "instruction {gi}: candidate set of {} truncated to {}, dropped {:?}",
                all.len(),
                options.cap,
                dropped
            );
            truncations.push(Truncation {
                gate: gi,
                kept,
                dropped,
            });
        }
        let mut kept: Vec<usize> = with_err.into_iter().map(|(g, _)| g).collect();
        kept.sort_unstable();
        candidates.push(kept);
    }
    // a pair survives only if both sides kept it
    let snapshot = candidates.clone();
    for (gi, set) in candidates.iter_mut().enumerate() {
        set.retain(|&gj| snapshot[gj].binary_search(&gi).is_ok());
    }

    let mut pairs = Vec::new();
    let mut pair_index = HashMap::new();
    for i in 0..n {
        for &j in &candidates[i] {
            if i < j {
                let (hi, hj) = (binding[i].unwrap(), binding[j].unwrap());
                let table = device.conditional_errors();
                pair_index.insert((i, j), pairs.len());
                pairs.push(CandidatePair {
                    i,
                    j,
                    e_ij: table.get(hi, hj).unwrap(),
                    e_ji: table.get(hj, hi).unwrap(),
                });
            }
        }
    }

    let qubit_ops: Vec<Vec<usize>> = (0..ir.n_qubits()).map(|q| ir.qubit_ops(q)).collect();
    let coherence_ns = (0..ir.n_qubits())
        .map(|q| device.qubit(q).coherence_ns())
        .collect();

    let mut problem = OptimizationProblem {
        options,
        n_qubits: ir.n_qubits(),
        classes,
        qubits: ir.instructions().iter().map(|i| i.qubits.clone()).collect(),
        durations,
        dag_edges: ir.dag().to_vec(),
        errors,
        candidates,
        pairs,
        pair_index,
        qubit_ops,
        coherence_ns,
        constraints: Vec::new(),
        truncations,
        max_readout,
    };
    problem.constraints = constraints(&problem, &after_measure);
    Ok(problem)
}

fn constraints(p: &OptimizationProblem, after_measure: &[bool]) -> Vec<Constraint> {
    let mut out = Vec::new();
    for &(from, to) in &p.dag_edges {
        out.push(Constraint::Dependency {
            from,
            to,
            gap: p.durations[from],
        });
    }
    for pair in 0..p.pairs.len() {
        out.push(Constraint::OverlapDefinition { pair });
    }
    for gate in 0..p.len() {
        let cands = &p.candidates[gate];
        if cands.is_empty() {
            continue;
        }
        let base = p.errors[gate].expect("candidates are gates").ln();
        for mask in 0u32..(1u32 << cands.len()) {
            let overlapping: Vec<usize> = (0..cands.len())
                .filter(|&b| mask & (1 << b) != 0)
                .map(|b| cands[b])
                .collect();
            let log_error = overlapping
                .iter()
                .map(|&j| p.conditional(gate, j).unwrap().ln())
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
                .unwrap_or(base);
            out.push(Constraint::ErrorSelection {
                gate,
                overlapping,
                log_error,
            });
        }
    }
    for pair in 0..p.pairs.len() {
        out.push(Constraint::NoPartialOverlap { pair });
    }
    for k in 0..p.len() {
        match p.classes[k] {
            InstrClass::Measure => out.push(Constraint::ReadoutAlignment { measure: k }),
            InstrClass::Gate => out.push(Constraint::Horizon { instr: k, slack: 0 }),
            InstrClass::Barrier => out.push(Constraint::Horizon {
                instr: k,
                slack: if after_measure[k] { p.max_readout } else { 0 },
            }),
        }
    }
    for (qubit, ops) in p.qubit_ops.iter().enumerate() {
        if !ops.is_empty() {
            out.push(Constraint::Lifetime { qubit });
        }
    }
    out
}

//! Executable checks of a schedule against its problem instance.

use std::fmt;

use serde::Serialize;

use super::{
    build_problem, evaluate_times, Constraint, InstrClass, ProblemOptions, Schedule, SchedulerKind,
};
use crate::circuit::CircuitIR;
use crate::device::DeviceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// The schedule does not fit the circuit or device at all.
    Shape,
    DataDependency,
    ReadoutAlignment,
    Horizon,
    NoPartialOverlap,
    GateError,
    Lifetime,
    Makespan,
    Objective,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Shape => "shape",
            ViolationKind::DataDependency => "data-dependency",
            ViolationKind::ReadoutAlignment => "readout-alignment",
            ViolationKind::Horizon => "horizon",
            ViolationKind::NoPartialOverlap => "no-partial-overlap",
            ViolationKind::GateError => "gate-error",
            ViolationKind::Lifetime => "lifetime",
            ViolationKind::Makespan => "makespan",
            ViolationKind::Objective => "objective",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub instructions: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.kind, self.instructions, self.message)
    }
}

fn violation(kind: ViolationKind, instructions: Vec<usize>, message: String) -> Violation {
    Violation {
        kind,
        instructions,
        message,
    }
}

/// Returns every violated constraint; empty means the schedule is valid.
///
/// Partial overlap of candidate pairs is only a violation for crosstalk
/// schedules; the baselines do not model it.
pub fn verify_schedule(ir: &CircuitIR, device: &DeviceModel, s: &Schedule) -> Vec<Violation> {
    use ViolationKind::*;
    let options = ProblemOptions {
        omega: s.omega,
        gamma: s.gamma,
        cap: s.cap,
        strict_cap: false,
    };
    let p = match build_problem(ir, device, options) {
        Ok(p) => p,
        Err(e) => return vec![violation(Shape, vec![], e.to_string())],
    };
    let n = p.len();
    if s.start_times.len() != n || s.durations.len() != n {
        return vec![violation(
            Shape,
            vec![],
            format!(
                "{} start times and {} durations for {n} instructions",
                s.start_times.len(),
                s.durations.len()
            ),
        )];
    }
    let mut out = Vec::new();
    for k in 0..n {
        if s.durations[k] != p.durations[k] {
            out.push(violation(
                Shape,
                vec![k],
                format!("duration {} but device says {}", s.durations[k], p.durations[k]),
            ));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let t: Vec<i64> = s.start_times.iter().map(|&x| x as i64).collect();
    let end = |k: usize| t[k] + p.durations[k] as i64;
    let r = s.readout_time as i64;

    for c in &p.constraints {
        match *c {
            Constraint::Dependency { from, to, .. } if t[to] < end(from) => out.push(violation(
                DataDependency,
                vec![from, to],
                format!("{to} starts at {} before {from} ends at {}", t[to], end(from)),
            )),
            Constraint::ReadoutAlignment { measure } if t[measure] != r => out.push(violation(
                ReadoutAlignment,
                vec![measure],
                format!("measurement starts at {} but readout time is {r}", t[measure]),
            )),
            Constraint::Horizon { instr, slack }
                if p.classes[instr] == InstrClass::Gate && end(instr) > r + slack as i64 =>
            {
                out.push(violation(
                    Horizon,
                    vec![instr],
                    format!("ends at {} after readout time {r}", end(instr)),
                ))
            }
            Constraint::NoPartialOverlap { pair } if s.kind == SchedulerKind::Xtalk => {
                let cp = &p.pairs[pair];
                let (i, j) = (cp.i, cp.j);
                let overlap = t[i] < end(j) && t[j] < end(i);
                let nested = (t[i] <= t[j] && end(j) <= end(i)) || (t[j] <= t[i] && end(i) <= end(j));
                if overlap && !nested {
                    out.push(violation(
                        NoPartialOverlap,
                        vec![i, j],
                        format!(
                            "[{}, {}) and [{}, {}) partially overlap",
                            t[i],
                            end(i),
                            t[j],
                            end(j)
                        ),
                    ));
                }
            }
            _ => {}
        }
    }

    let eval = evaluate_times(&p, &t);
    for k in 0..n {
        let want = eval.gate_errors[k];
        let got = s.per_gate_error.get(&k).copied();
        let same = match (want, got) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        if !same {
            out.push(violation(
                GateError,
                vec![k],
                format!("error {got:?} but the overlaps imply {want:?}"),
            ));
        }
    }
    if let Some(&k) = s.per_gate_error.keys().find(|&&k| k >= n) {
        out.push(violation(GateError, vec![k], "error for unknown instruction".into()));
    }
    if s.per_qubit_lifetime != eval.lifetimes {
        let bad: Vec<usize> = (0..p.n_qubits)
            .filter(|&q| s.per_qubit_lifetime.get(q) != Some(&eval.lifetimes[q]))
            .collect();
        out.push(violation(
            Lifetime,
            bad,
            format!("lifetimes {:?}, expected {:?}", s.per_qubit_lifetime, eval.lifetimes),
        ));
    }
    if eval.readout_time != r && !(0..n).any(|k| p.classes[k] == InstrClass::Measure) {
        out.push(violation(
            ReadoutAlignment,
            vec![],
            format!("readout time {r} but last gate ends at {}", eval.readout_time),
        ));
    }
    if s.makespan != eval.makespan {
        out.push(violation(
            Makespan,
            vec![],
            format!("makespan {} but times give {}", s.makespan, eval.makespan),
        ));
    }
    if (s.objective - eval.objective).abs() > 1e-9 * eval.objective.abs().max(1.0) {
        out.push(violation(
            Objective,
            vec![],
            format!("objective {} but times give {}", s.objective, eval.objective),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scheduler::{parallel_schedule, series_schedule, solve, SolveOptions};

    fn setup() -> (CircuitIR, DeviceModel, crate::scheduler::OptimizationProblem) {
        let d = fixtures::chain6();
        let ir = fixtures::three_cx_circuit();
        let p = build_problem(&ir, &d, ProblemOptions::default()).unwrap();
        (ir, d, p)
    }

    #[test]
    fn solver_outputs_are_clean() {
        let (ir, d, p) = setup();
        for s in [
            solve(&p, &SolveOptions::default()).unwrap(),
            series_schedule(&p),
            parallel_schedule(&p),
        ] {
            assert_eq!(verify_schedule(&ir, &d, &s), vec![]);
        }
    }

    #[test]
    fn broken_dependency_is_reported() {
        let (ir, d, p) = setup();
        let mut s = parallel_schedule(&p);
        s.start_times[1] = 0; // cx 0 1 now starts with u 0
        let v = verify_schedule(&ir, &d, &s);
        assert!(v.iter().any(|v| v.kind == ViolationKind::DataDependency && v.instructions == vec![0, 1]));
    }

    #[test]
    fn partial_overlap_is_reported_for_xtalk_only() {
        let (ir, d, p) = setup();
        let mut s = solve(&p, &SolveOptions::default()).unwrap();
        s.start_times[1] = s.start_times[2] - 200;
        s.start_times[0] = s.start_times[1] - 100;
        let v = verify_schedule(&ir, &d, &s);
        assert!(v.iter().any(|v| v.kind == ViolationKind::NoPartialOverlap));
        s.kind = SchedulerKind::Parallel;
        let v = verify_schedule(&ir, &d, &s);
        assert!(!v.iter().any(|v| v.kind == ViolationKind::NoPartialOverlap));
    }
}

//! Barrier insertion: turns a schedule's ordering decisions into a circuit
//! that a hardware as-late-as-possible executor runs the same way.

use std::collections::BTreeSet;

use super::{
    build_problem, intervals_overlap, parallel_schedule, OptimizationProblem, ProblemOptions,
    Schedule, SchedulerError, SchedulerResult,
};
use crate::circuit::{CircuitIR, Op};
use crate::device::{DeviceModel, QubitId};

#[derive(Debug, Clone)]
pub struct BarrierCircuit {
    pub circuit: CircuitIR,
    /// Original instruction id of each new instruction; `None` for inserted
    /// barriers.
    pub origin: Vec<Option<usize>>,
    pub inserted: usize,
}

/// Candidate pairs `(i, j)` that overlap under `times`.
pub fn overlap_set(p: &OptimizationProblem, times: &[i64]) -> BTreeSet<(usize, usize)> {
    p.pairs
        .iter()
        .filter(|cp| intervals_overlap(times[cp.i], p.durations[cp.i], times[cp.j], p.durations[cp.j]))
        .map(|cp| (cp.i, cp.j))
        .collect()
}

struct Inserted {
    time: i64,
    qubits: Vec<QubitId>,
}

fn assemble(
    ir: &CircuitIR,
    times: &[i64],
    barriers: &[Inserted],
) -> SchedulerResult<(CircuitIR, Vec<Option<usize>>)> {
    let n = ir.len();
    // (time, barriers first, position)
    let mut keyed: Vec<((i64, u8, usize), Op, Vec<QubitId>, Option<usize>)> = ir
        .instructions()
        .iter()
        .map(|ins| {
            let class = u8::from(!ins.is_barrier());
            ((times[ins.id], class, ins.id), ins.op.clone(), ins.qubits.clone(), Some(ins.id))
        })
        .collect();
    for (k, b) in barriers.iter().enumerate() {
        keyed.push(((b.time, 0, n + k), Op::Barrier, b.qubits.clone(), None));
    }
    keyed.sort_by_key(|e| e.0);
    let origin = keyed.iter().map(|e| e.3).collect();
    let ops = keyed.into_iter().map(|e| (e.1, e.2)).collect();
    Ok((CircuitIR::new(ir.n_qubits(), ops)?, origin))
}

fn alap_times(
    circuit: &CircuitIR,
    origin: &[Option<usize>],
    device: &DeviceModel,
    options: ProblemOptions,
    n: usize,
) -> SchedulerResult<Vec<i64>> {
    let p = build_problem(circuit, device, options)?;
    let s = parallel_schedule(&p);
    let mut times = vec![0i64; n];
    for (new, o) in origin.iter().enumerate() {
        if let Some(o) = o {
            times[*o] = s.start_times[new] as i64;
        }
    }
    Ok(times)
}

/// First placement of a barrier between `i` and `j` that no instruction on
/// its qubits straddles. Tries all qubits of both, then single pairs.
fn place(
    p: &OptimizationProblem,
    times: &[i64],
    i: usize,
    j: usize,
) -> Option<Inserted> {
    let end_i = times[i] + p.durations[i] as i64;
    let start_j = times[j];
    let mut qubit_sets: Vec<Vec<QubitId>> = Vec::new();
    let mut all: Vec<QubitId> = p.qubits[i].iter().chain(&p.qubits[j]).copied().collect();
    all.sort_unstable();
    all.dedup();
    qubit_sets.push(all);
    for &a in &p.qubits[i] {
        for &c in &p.qubits[j] {
            qubit_sets.push(vec![a.min(c), a.max(c)]);
        }
    }
    for qs in qubit_sets {
        let on: Vec<usize> = qs.iter().flat_map(|&q| p.qubit_ops[q].iter().copied()).collect();
        let mut slots = vec![end_i, start_j];
        for &k in &on {
            for t in [times[k], times[k] + p.durations[k] as i64] {
                if end_i <= t && t <= start_j {
                    slots.push(t);
                }
            }
        }
        for t in slots {
            let straddled = on
                .iter()
                .any(|&k| times[k] < t && t < times[k] + p.durations[k] as i64);
            if !straddled {
                return Some(Inserted { time: t, qubits: qs });
            }
        }
    }
    None
}

/// Adds barriers so that re-scheduling the result as late as possible gives
/// the same overlapping candidate pairs as `schedule`. Barriers are added
/// only for serialized pairs the executor would otherwise reorder.
pub fn insert_barriers(
    ir: &CircuitIR,
    device: &DeviceModel,
    schedule: &Schedule,
) -> SchedulerResult<BarrierCircuit> {
    let options = ProblemOptions {
        omega: schedule.omega,
        gamma: schedule.gamma,
        cap: schedule.cap,
        strict_cap: false,
    };
    let p = build_problem(ir, device, options)?;
    let n = p.len();
    if schedule.start_times.len() != n {
        return Err(SchedulerError::UnverifiableOrdering(
            "schedule does not match the circuit".into(),
        ));
    }
    let times: Vec<i64> = schedule.start_times.iter().map(|&t| t as i64).collect();
    let end = |k: usize| times[k] + p.durations[k] as i64;
    let serialized: Vec<(usize, usize)> = p
        .pairs
        .iter()
        .filter_map(|cp| {
            if end(cp.i) <= times[cp.j] {
                Some((cp.i, cp.j))
            } else if end(cp.j) <= times[cp.i] {
                Some((cp.j, cp.i))
            } else {
                None
            }
        })
        .collect();

    let mut barriers: Vec<Inserted> = Vec::new();
    let mut done = vec![false; serialized.len()];
    loop {
        let mut added = false;
        for (k, &(first, second)) in serialized.iter().enumerate() {
            if done[k] {
                continue;
            }
            let (circuit, origin) = assemble(ir, &times, &barriers)?;
            let alap = alap_times(&circuit, &origin, device, options, n)?;
            if alap[first] + p.durations[first] as i64 <= alap[second] {
                continue;
            }
            let b = place(&p, &times, first, second).ok_or_else(|| {
                SchedulerError::UnverifiableOrdering(format!(
                    "no barrier slot between instructions {first} and {second}"
                ))
            })?;
            barriers.push(b);
            done[k] = true;
            added = true;
        }
        if !added {
            break;
        }
    }

    let (circuit, origin) = assemble(ir, &times, &barriers)?;
    let alap = alap_times(&circuit, &origin, device, options, n)?;
    let want = overlap_set(&p, &times);
    let got = overlap_set(&p, &alap);
    if want != got {
        let diff: Vec<_> = want.symmetric_difference(&got).collect();
        return Err(SchedulerError::UnverifiableOrdering(format!(
            "overlap sets differ on {diff:?}"
        )));
    }
    Ok(BarrierCircuit {
        circuit,
        origin,
        inserted: barriers.len(),
    })
}

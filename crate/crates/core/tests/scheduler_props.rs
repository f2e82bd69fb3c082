mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use xtalk_core::circuit::{can_overlap, gen_random_circuit_with_gates, CircuitIR};
use xtalk_core::device::DeviceModel;
use xtalk_core::scheduler::{
    build_problem, insert_barriers, overlap_set, parallel_schedule, series_schedule, solve,
    verify_schedule, Constraint, OptimizationProblem, ProblemOptions, Schedule, SolveOptions,
};

/// Circuits span every device qubit so that candidate pairs are common.
fn instance(seed: u64, uniform: bool, gates: usize) -> (DeviceModel, CircuitIR) {
    let d = common::fuzz_device(5 + (seed % 4) as usize, seed, uniform);
    let ir = gen_random_circuit_with_gates(&d, d.n_qubits(), gates, seed).unwrap();
    (d, ir)
}

/// Objective recomputed from the schedule's start times and the device.
fn objective_from_scratch(ir: &CircuitIR, d: &DeviceModel, s: &Schedule, omega: f64, gamma: f64) -> f64 {
    let binding = ir.bind(d).unwrap();
    let overlap = |a: usize, b: usize| {
        let (sa, sb) = (s.start_times[a], s.start_times[b]);
        sa < sb + s.durations[b] && sb < sa + s.durations[a]
    };
    let mut log_sum = 0.0;
    for ins in ir.instructions() {
        if ins.is_barrier() || ins.is_measure() {
            continue;
        }
        let hw = binding[ins.id].unwrap();
        let mut eps = d.independent_error(hw);
        let mut worst: Option<f64> = None;
        for j in can_overlap(ir, d, &binding, ins.id, gamma) {
            if overlap(ins.id, j) {
                let e = d.conditional_errors().get(hw, binding[j].unwrap()).unwrap();
                worst = Some(worst.map_or(e, |w: f64| w.max(e)));
            }
        }
        if let Some(w) = worst {
            eps = w;
        }
        log_sum += eps.ln();
    }
    let mut decoherence = 0.0;
    for q in ir.used_qubits() {
        let ops: Vec<usize> = ir.qubit_ops(q).into_iter().filter(|&k| !ir.instruction(k).is_barrier()).collect();
        let first = ops.iter().map(|&k| s.start_times[k]).min().unwrap();
        let last = ops.iter().map(|&k| s.end(k)).max().unwrap();
        decoherence += (last - first) as f64 / d.qubit(q).coherence_ns();
    }
    omega * log_sum + (1.0 - omega) * decoherence
}

/// Exhaustive optimum for all-measured circuits: every candidate pair is
/// ordered either way or nested, and for each choice the latest feasible
/// timing minimizes every lifetime at once.
fn brute_force_optimum(p: &OptimizationProblem) -> f64 {
    let n = p.len();
    let r = n;
    let mut base: Vec<(usize, usize, i64)> = Vec::new();
    for &(a, b) in &p.dag_edges {
        base.push((a, b, p.durations[a] as i64));
    }
    for k in 0..n {
        if p.errors[k].is_none() {
            base.push((k, r, 0));
            base.push((r, k, 0));
        } else {
            base.push((k, r, p.durations[k] as i64));
        }
    }
    let mut best = f64::INFINITY;
    let combos = 3usize.pow(p.pairs.len() as u32);
    for code in 0..combos {
        let mut arcs = base.clone();
        let mut nested = vec![false; p.pairs.len()];
        let mut c = code;
        for (k, cp) in p.pairs.iter().enumerate() {
            let (di, dj) = (p.durations[cp.i] as i64, p.durations[cp.j] as i64);
            match c % 3 {
                0 => arcs.push((cp.i, cp.j, di)),
                1 => arcs.push((cp.j, cp.i, dj)),
                _ => {
                    nested[k] = true;
                    let (outer, inner, dout, din) = if di >= dj { (cp.i, cp.j, di, dj) } else { (cp.j, cp.i, dj, di) };
                    arcs.push((outer, inner, 0));
                    arcs.push((inner, outer, din - dout));
                }
            }
            c /= 3;
        }
        // latest times with tau[R] = 0: tau[a] <= tau[b] - w
        let mut tau = vec![i64::MAX / 4; n + 1];
        tau[r] = 0;
        let mut stable = false;
        for _ in 0..=n + 1 {
            stable = true;
            for &(a, b, w) in &arcs {
                if tau[b] - w < tau[a] {
                    tau[a] = tau[b] - w;
                    stable = false;
                }
            }
            if stable {
                break;
            }
        }
        if !stable {
            continue;
        }
        let mut log_sum = 0.0;
        for k in 0..n {
            let Some(e) = p.errors[k] else { continue };
            let mut eps = e;
            let mut worst: Option<f64> = None;
            for (idx, cp) in p.pairs.iter().enumerate() {
                if nested[idx] && (cp.i == k || cp.j == k) {
                    let c = if cp.i == k { cp.e_ij } else { cp.e_ji };
                    worst = Some(worst.map_or(c, |w: f64| w.max(c)));
                }
            }
            if let Some(w) = worst {
                eps = w;
            }
            log_sum += eps.ln();
        }
        let mut decoherence = 0.0;
        for (q, ops) in p.qubit_ops.iter().enumerate() {
            if let Some(first) = ops.iter().map(|&k| tau[k]).min() {
                let last = ops.iter().map(|&k| tau[k] + p.durations[k] as i64).max().unwrap();
                decoherence += (last - first) as f64 / p.coherence_ns[q];
            }
        }
        let omega = p.omega();
        best = best.min(omega * log_sum + (1.0 - omega) * decoherence);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn every_scheduler_output_verifies(seed in any::<u64>(), uniform in any::<bool>(), omega in 0.0f64..=1.0, gates in 4usize..24) {
        let (d, ir) = instance(seed, uniform, gates);
        let opts = ProblemOptions::with_omega(omega);
        let p = build_problem(&ir, &d, opts).unwrap();
        for s in [parallel_schedule(&p), series_schedule(&p), solve(&p, &SolveOptions::default()).unwrap()] {
            let v = verify_schedule(&ir, &d, &s);
            prop_assert!(v.is_empty(), "{:?}: {:?}", s.kind, v);
            let scratch = objective_from_scratch(&ir, &d, &s, omega, opts.gamma);
            prop_assert!((scratch - s.objective).abs() <= 1e-9 * scratch.abs().max(1.0));
        }
    }

    #[test]
    fn exact_solver_matches_exhaustive_search(seed in any::<u64>(), uniform in any::<bool>(), omega in 0.0f64..=1.0, gates in 6usize..16) {
        let (d, ir) = instance(seed, uniform, gates);
        let p = build_problem(&ir, &d, ProblemOptions::with_omega(omega)).unwrap();
        prop_assume!(!p.pairs.is_empty() && p.pairs.len() <= 6);
        let s = solve(&p, &SolveOptions::default()).unwrap();
        prop_assert!(s.stats.optimal);
        let oracle = brute_force_optimum(&p);
        prop_assert!((s.objective - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{} vs {}", s.objective, oracle);
    }

    #[test]
    fn raising_a_conditional_error_never_newly_overlaps(
        seed in any::<u64>(),
        uniform in any::<bool>(),
        omega in 0.05f64..0.95,
        factor in 1.1f64..4.0,
        pick in any::<prop::sample::Index>(),
    ) {
        let (d, ir) = instance(seed, uniform, 12);
        let opts = ProblemOptions::with_omega(omega);
        let p = build_problem(&ir, &d, opts).unwrap();
        prop_assume!(!p.pairs.is_empty());
        let before = solve(&p, &SolveOptions::default()).unwrap();
        let cp = p.pairs[pick.index(p.pairs.len())];
        prop_assume!(!before.overlaps(cp.i, cp.j));

        let binding = ir.bind(&d).unwrap();
        let (hi, hj) = (binding[cp.i].unwrap(), binding[cp.j].unwrap());
        let mut table = d.conditional_errors().clone();
        let raised = (table.get(hi, hj).unwrap() * factor).min(0.99);
        table.insert(hi, hj, raised);
        let d2 = d.with_conditional(table).unwrap();
        let p2 = build_problem(&ir, &d2, opts).unwrap();
        prop_assert!(p2.pair(cp.i, cp.j).is_some());
        let after = solve(&p2, &SolveOptions::default()).unwrap();
        prop_assert!(!after.overlaps(cp.i, cp.j));
    }

    #[test]
    fn constraint_count_matches_formula(seed in any::<u64>(), uniform in any::<bool>()) {
        let (d, ir) = instance(seed, uniform, 20);
        let opts = ProblemOptions { cap: 64, ..ProblemOptions::default() };
        let p = build_problem(&ir, &d, opts).unwrap();
        let binding = ir.bind(&d).unwrap();
        let sets: Vec<BTreeSet<usize>> = (0..ir.len()).map(|k| can_overlap(&ir, &d, &binding, k, opts.gamma)).collect();
        let pairs = sets.iter().map(BTreeSet::len).sum::<usize>() / 2;
        let selections: usize = sets.iter().filter(|s| !s.is_empty()).map(|s| 1usize << s.len()).sum();
        let measures = ir.instructions().iter().filter(|i| i.is_measure()).count();
        let expected = ir.dag().len() + 2 * pairs + selections + measures + (ir.len() - measures) + ir.used_qubits().len();
        prop_assert_eq!(p.pairs.len(), pairs);
        prop_assert_eq!(p.constraints.len(), expected);
        prop_assert_eq!(p.count(|c| matches!(c, Constraint::NoPartialOverlap { .. })), pairs);
    }

    #[test]
    fn barrier_circuit_reproduces_the_overlaps(seed in any::<u64>(), uniform in any::<bool>(), omega in 0.0f64..=1.0) {
        let (d, ir) = instance(seed, uniform, 14);
        let opts = ProblemOptions::with_omega(omega);
        let p = build_problem(&ir, &d, opts).unwrap();
        prop_assume!(!p.pairs.is_empty());
        let s = solve(&p, &SolveOptions::default()).unwrap();
        let bc = insert_barriers(&ir, &d, &s).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let times: Vec<i64> = s.start_times.iter().map(|&t| t as i64).collect();
        let want = overlap_set(&p, &times);

        let pb = build_problem(&bc.circuit, &d, opts).unwrap();
        let alap = parallel_schedule(&pb);
        let mut mapped = vec![0i64; ir.len()];
        for (new, orig) in bc.origin.iter().enumerate() {
            if let Some(k) = orig {
                mapped[*k] = alap.start_times[new] as i64;
            }
        }
        prop_assert_eq!(overlap_set(&p, &mapped), want);
    }
}

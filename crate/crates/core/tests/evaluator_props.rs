mod common;

use proptest::prelude::*;
use xtalk_core::circuit::{gen_random_circuit_with_gates, CircuitIR};
use xtalk_core::device::DeviceModel;
use xtalk_core::evaluator::{analytic_success, compare, monte_carlo_success, wilson_interval};
use xtalk_core::scheduler::{
    build_problem, parallel_schedule, schedule_from_times, series_schedule, solve, ProblemOptions, Schedule,
    SolveOptions,
};

fn instance(seed: u64, uniform: bool, gates: usize) -> (DeviceModel, CircuitIR) {
    let d = common::fuzz_device(5 + (seed % 3) as usize, seed, uniform);
    let ir = gen_random_circuit_with_gates(&d, d.n_qubits(), gates, seed).unwrap();
    (d, ir)
}

fn success_from_scratch(ir: &CircuitIR, d: &DeviceModel, s: &Schedule) -> f64 {
    let gates: f64 = s.per_gate_error.values().map(|e| 1.0 - e).product();
    let idle: f64 = ir
        .used_qubits()
        .into_iter()
        .map(|q| {
            let ops: Vec<usize> = ir.qubit_ops(q).into_iter().filter(|&k| !ir.instruction(k).is_barrier()).collect();
            let first = ops.iter().map(|&k| s.start_times[k]).min().unwrap();
            let last = ops.iter().map(|&k| s.end(k)).max().unwrap();
            (-((last - first) as f64) / d.qubit(q).coherence_ns()).exp()
        })
        .product();
    gates * idle
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_success_is_the_product_of_survivals(seed in any::<u64>(), uniform in any::<bool>(), gates in 1usize..20) {
        let (d, ir) = instance(seed, uniform, gates);
        let p = build_problem(&ir, &d, ProblemOptions::default()).unwrap();
        for s in [parallel_schedule(&p), series_schedule(&p), solve(&p, &SolveOptions::default()).unwrap()] {
            let r = analytic_success(&ir, &d, &s).unwrap();
            let expect = success_from_scratch(&ir, &d, &s);
            prop_assert!((r.analytic_success - expect).abs() <= 1e-12);
            prop_assert!(r.analytic_success > 0.0 && r.analytic_success <= 1.0);
            prop_assert!((r.analytic_error - (1.0 - expect)).abs() <= 1e-12);
        }
    }

    #[test]
    fn longer_coherence_never_lowers_success(
        seed in any::<u64>(),
        uniform in any::<bool>(),
        qubit in any::<prop::sample::Index>(),
        factor in 1.0f64..5.0,
    ) {
        let (d, ir) = instance(seed, uniform, 12);
        let opts = ProblemOptions::default();
        let p = build_problem(&ir, &d, opts).unwrap();
        let s = solve(&p, &SolveOptions::default()).unwrap();
        let base = analytic_success(&ir, &d, &s).unwrap().analytic_success;

        let mut file = d.to_file();
        let q = qubit.index(file.qubits.len());
        file.qubits[q].t1_us *= factor;
        file.qubits[q].t2_us *= factor;
        let d2 = DeviceModel::from_file(file).unwrap();
        let p2 = build_problem(&ir, &d2, opts).unwrap();
        let times: Vec<i64> = s.start_times.iter().map(|&t| t as i64).collect();
        let s2 = schedule_from_times(&p2, s.kind, &times, s.stats.clone());
        let better = analytic_success(&ir, &d2, &s2).unwrap().analytic_success;
        prop_assert!(better >= base - 1e-15);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_bracketed(seed in any::<u64>(), trials in 1u64..5000) {
        let (d, ir) = instance(seed, false, 10);
        let p = build_problem(&ir, &d, ProblemOptions::default()).unwrap();
        let s = parallel_schedule(&p);
        let a = monte_carlo_success(&ir, &d, &s, trials, seed).unwrap();
        let b = monte_carlo_success(&ir, &d, &s, trials, seed).unwrap();
        prop_assert_eq!(a.mc, b.mc);
        let mc = a.mc.unwrap();
        prop_assert_eq!(mc.trials, trials);
        prop_assert!(mc.ci_low <= mc.success && mc.success <= mc.ci_high);
        prop_assert!(0.0 <= mc.ci_low && mc.ci_high <= 1.0);
    }

    #[test]
    fn wilson_interval_contains_the_estimate(trials in 1u64..1_000_000, frac in 0.0f64..=1.0, z in 0.5f64..4.0) {
        let successes = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(successes, trials, z);
        let p = successes as f64 / trials as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!(0.0 <= lo && hi <= 1.0);
        let (wlo, whi) = wilson_interval(successes, trials, z + 0.5);
        prop_assert!(wlo <= lo + 1e-12 && hi <= whi + 1e-12);
    }

    #[test]
    fn comparison_ratios_are_relative_to_the_first_row(seed in any::<u64>()) {
        let (d, ir) = instance(seed, true, 10);
        let p = build_problem(&ir, &d, ProblemOptions::default()).unwrap();
        let named = vec![
            ("parallel".to_string(), parallel_schedule(&p)),
            ("series".to_string(), series_schedule(&p)),
            ("xtalk".to_string(), solve(&p, &SolveOptions::default()).unwrap()),
        ];
        let rows = compare(&ir, &d, &named, None, seed).unwrap();
        prop_assert_eq!(rows.len(), 3);
        prop_assert!((rows[0].ratio_vs_baseline - 1.0).abs() < 1e-12);
        for row in &rows {
            prop_assert!((row.ratio_vs_baseline - row.analytic_error / rows[0].analytic_error).abs() < 1e-12);
            prop_assert!(row.mc_error.is_none());
        }
    }
}

use xtalk_core::circuit::CircuitIR;
use xtalk_core::fixtures;
use xtalk_core::scheduler::{
    build_problem, solve, verify_schedule, Backend, ProblemOptions, SchedulerError, SolveOptions,
};

fn z3_available() -> bool {
    std::process::Command::new("z3")
        .arg("-version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn smt() -> SolveOptions {
    SolveOptions {
        backend: Backend::Smtlib,
        ..SolveOptions::default()
    }
}

#[test]
fn z3_matches_internal_on_three_cx() {
    if !z3_available() {
        eprintln!("z3 not installed; skipping");
        return;
    }
    let d = fixtures::chain6();
    let ir = fixtures::three_cx_circuit();
    for omega in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = build_problem(&ir, &d, ProblemOptions::with_omega(omega)).unwrap();
        let a = solve(&p, &SolveOptions::default()).unwrap();
        let b = solve(&p, &smt()).unwrap();
        assert!(
            (a.objective - b.objective).abs() <= 1e-6 * a.objective.abs().max(1.0),
            "omega {omega}: internal {} vs z3 {}",
            a.objective,
            b.objective
        );
        assert_eq!(verify_schedule(&ir, &d, &b), vec![]);
    }
}

#[test]
fn z3_handles_unmeasured_qubits() {
    if !z3_available() {
        return;
    }
    let d = fixtures::chain6();
    let ir = CircuitIR::parse("qreg 6\ncx 0 1\ncx 2 3\ncx 1 2\nmeasure 0").unwrap();
    let p = build_problem(&ir, &d, ProblemOptions::default()).unwrap();
    let a = solve(&p, &SolveOptions::default()).unwrap();
    let b = solve(&p, &smt()).unwrap();
    assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.abs().max(1.0));
}

#[test]
fn dump_writes_problem_file() {
    let d = fixtures::chain6();
    let p = build_problem(&fixtures::three_cx_circuit(), &d, ProblemOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three_cx.smt2");
    let mut opts = smt();
    opts.smt.dump = Some(path.clone());
    opts.smt.command = "no-such-solver-here".into();
    assert!(matches!(solve(&p, &opts), Err(SchedulerError::SolverMissing(_))));
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("(check-sat)"));
}

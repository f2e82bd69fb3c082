//! SMT-LIB2 emission and an external optimizing-solver backend.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::{Constraint, OptimizationProblem, SchedulerError, SchedulerResult, SolverStats};

#[derive(Debug, Clone, PartialEq)]
pub struct SmtOptions {
    /// Solver command line; the problem is written to its stdin.
    pub command: String,
    pub timeout: Duration,
    /// Also write the emitted problem here.
    pub dump: Option<PathBuf>,
}

impl Default for SmtOptions {
    fn default() -> Self {
        SmtOptions {
            command: "z3 -in -smt2".into(),
            timeout: Duration::from_secs(60),
            dump: None,
        }
    }
}

/// Shortest round-trip decimal; f64 `Display` never uses exponents.
fn real(v: f64) -> String {
    let mut text = format!("{}", v.abs());
    if !text.contains('.') {
        text.push_str(".0");
    }
    if v < 0.0 {
        format!("(- {text})")
    } else {
        text
    }
}

fn int(v: i64) -> String {
    real(v as f64)
}

fn tau(k: usize) -> String {
    format!("t{k}")
}

/// Times are declared `Real`: z3's optimizer is far faster than with `Int`,
/// and every constraint is a difference constraint with integer weights, so
/// optimal vertices are integral.
pub fn emit_smtlib(p: &OptimizationProblem) -> String {
    let mut s = String::new();
    let n = p.len();
    s.push_str("(set-option :produce-models true)\n(set-logic ALL)\n");
    s.push_str("(declare-const R Real)\n(assert (= R 0.0))\n");
    for k in 0..n {
        writeln!(s, "(declare-const {} Real)", tau(k)).unwrap();
    }
    let dur = |k: usize| int(p.durations[k] as i64);
    let mut gate_terms: Vec<String> = Vec::new();
    let mut constant = 0.0;
    for k in 0..n {
        if let Some(e) = p.errors[k] {
            if p.candidates[k].is_empty() {
                constant += e.ln();
            } else {
                writeln!(s, "(declare-const le{k} Real)").unwrap();
                gate_terms.push(format!("le{k}"));
            }
        }
    }
    for (k, _) in p.pairs.iter().enumerate() {
        writeln!(s, "(declare-const o{k} Bool)").unwrap();
    }
    let mut lifetime_terms = Vec::new();
    for c in &p.constraints {
        match c {
            Constraint::Dependency { from, to, gap } => {
                writeln!(s, "(assert (>= {} (+ {} {})))", tau(*to), tau(*from), int(*gap as i64))
                    .unwrap()
            }
            Constraint::OverlapDefinition { pair } => {
                let cp = &p.pairs[*pair];
                let (i, j) = (cp.i, cp.j);
                writeln!(
                    s,
                    "(assert (= o{pair} (and (< {tj} (+ {ti} {di})) (< {ti} (+ {tj} {dj})))))",
                    ti = tau(i),
                    tj = tau(j),
                    di = dur(i),
                    dj = dur(j)
                )
                .unwrap();
            }
            Constraint::ErrorSelection {
                gate,
                overlapping,
                log_error,
            } => {
                let lits: Vec<String> = p.candidates[*gate]
                    .iter()
                    .map(|&j| {
                        let o = format!("o{}", p.pair_index[&((*gate).min(j), (*gate).max(j))]);
                        if overlapping.contains(&j) {
                            o
                        } else {
                            format!("(not {o})")
                        }
                    })
                    .collect();
                writeln!(
                    s,
                    "(assert (=> (and {}) (= le{gate} {})))",
                    lits.join(" "),
                    real(*log_error)
                )
                .unwrap();
            }
            Constraint::NoPartialOverlap { pair } => {
                let cp = &p.pairs[*pair];
                let (ti, tj, di, dj) = (tau(cp.i), tau(cp.j), dur(cp.i), dur(cp.j));
                writeln!(
                    s,
                    "(assert (or (<= (+ {ti} {di}) {tj}) (<= (+ {tj} {dj}) {ti}) \
                     (and (<= {ti} {tj}) (<= (+ {tj} {dj}) (+ {ti} {di}))) \
                     (and (<= {tj} {ti}) (<= (+ {ti} {di}) (+ {tj} {dj})))))"
                )
                .unwrap();
            }
            Constraint::ReadoutAlignment { measure } => {
                writeln!(s, "(assert (= {} R))", tau(*measure)).unwrap()
            }
            Constraint::Horizon { instr, slack } => writeln!(
                s,
                "(assert (<= (+ {} {}) (+ R {})))",
                tau(*instr),
                dur(*instr),
                int(*slack as i64)
            )
            .unwrap(),
            Constraint::Lifetime { qubit } => {
                let q = *qubit;
                writeln!(s, "(declare-const f{q} Real)\n(declare-const l{q} Real)").unwrap();
                for &k in &p.qubit_ops[q] {
                    writeln!(s, "(assert (<= f{q} {}))", tau(k)).unwrap();
                    writeln!(s, "(assert (>= l{q} (+ {} {})))", tau(k), dur(k)).unwrap();
                }
                // z3 stalls on `(/ (to_real ..) T)`; a constant factor is fine.
                lifetime_terms.push(format!(
                    "(* (- l{q} f{q}) {})",
                    real(1.0 / p.coherence_ns[q])
                ));
            }
        }
    }
    let sum = |terms: &[String], extra: f64| {
        let mut all = terms.to_vec();
        all.push(real(extra));
        format!("(+ {})", all.join(" "))
    };
    let omega = p.omega();
    writeln!(
        s,
        "(minimize (+ (* {} {}) (* {} {})))",
        real(omega),
        sum(&gate_terms, constant),
        real(1.0 - omega),
        sum(&lifetime_terms, 0.0)
    )
    .unwrap();
    s.push_str("(check-sat)\n");
    if n > 0 {
        let names: Vec<String> = (0..n).map(tau).collect();
        writeln!(s, "(get-value ({}))", names.join(" ")).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_sexps(tokens: &[String]) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(list));
            }
            atom => stack.last_mut().unwrap().push(Sexp::Atom(atom.to_string())),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

fn num_value(e: &Sexp) -> Option<f64> {
    match e {
        Sexp::Atom(a) => a.parse().ok(),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), inner] if op == "-" => num_value(inner).map(|v| -v),
            [Sexp::Atom(op), a, b] if op == "/" => Some(num_value(a)? / num_value(b)?),
            _ => None,
        },
    }
}

/// Numeric assignments from solver output: `(get-value ...)` pairs or
/// `(define-fun name () Int|Real value)` model entries.
pub fn parse_model(text: &str) -> Result<HashMap<String, f64>, String> {
    let exprs = parse_sexps(&tokenize(text))?;
    let mut out = HashMap::new();
    fn walk(e: &Sexp, out: &mut HashMap<String, f64>) {
        let Sexp::List(items) = e else { return };
        match items.as_slice() {
            [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(ty), value]
                if kw == "define-fun" && args.is_empty() && (ty == "Int" || ty == "Real") =>
            {
                if let Some(v) = num_value(value) {
                    out.insert(name.clone(), v);
                }
            }
            [Sexp::Atom(name), value] if num_value(value).is_some() => {
                out.insert(name.clone(), num_value(value).unwrap());
            }
            _ => {
                for item in items {
                    walk(item, out);
                }
            }
        }
    }
    for e in &exprs {
        walk(e, &mut out);
    }
    Ok(out)
}

fn run_solver(options: &SmtOptions, input: &str) -> SchedulerResult<String> {
    let mut parts = options.command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SchedulerError::InvalidOption("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => SchedulerError::SolverMissing(program.to_string()),
            _ => SchedulerError::Solver(format!("cannot start `{program}`: {e}")),
        })?;
    let mut stdin = child.stdin.take().unwrap();
    let input = input.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().unwrap();
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let mut stderr = child.stderr.take().unwrap();
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child
            .try_wait()
            .map_err(|e| SchedulerError::Solver(e.to_string()))?
        {
            break status;
        }
        if start.elapsed() >= options.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SchedulerError::SolverTimeout(options.timeout.as_secs_f64()));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !status.success() && !out.trim_start().starts_with("sat") {
        return Err(SchedulerError::Solver(format!(
            "exit status {status}: {}",
            err.trim().lines().chain(out.trim().lines()).next().unwrap_or("")
        )));
    }
    Ok(out)
}

pub(crate) fn solve_smt(
    p: &OptimizationProblem,
    options: &SmtOptions,
) -> SchedulerResult<(Vec<i64>, SolverStats)> {
    let text = emit_smtlib(p);
    if let Some(path) = &options.dump {
        std::fs::write(path, &text).map_err(|e| SchedulerError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    let started = Instant::now();
    let stats = |t: f64| SolverStats {
        backend: "smtlib".into(),
        solve_time_s: t,
        nodes: 0,
        optimal: true,
    };
    if p.is_empty() {
        return Ok((Vec::new(), stats(0.0)));
    }
    let out = run_solver(options, &text)?;
    let verdict = out.split_whitespace().next().unwrap_or("");
    match verdict {
        "sat" => {}
        "unsat" => return Err(SchedulerError::Infeasible),
        other => return Err(SchedulerError::Solver(format!("solver answered `{other}`"))),
    }
    let model = parse_model(&out[verdict.len()..]).map_err(SchedulerError::Solver)?;
    let times = (0..p.len())
        .map(|k| {
            let v = model
                .get(&tau(k))
                .copied()
                .ok_or_else(|| SchedulerError::Solver(format!("model lacks {}", tau(k))))?;
            if (v - v.round()).abs() > 1e-6 {
                return Err(SchedulerError::Solver(format!("{} = {v} is not integral", tau(k))));
            }
            Ok(v.round() as i64)
        })
        .collect::<SchedulerResult<Vec<i64>>>()?;
    Ok((times, stats(started.elapsed().as_secs_f64())))
}

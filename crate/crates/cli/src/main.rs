//! `xtalk` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solver failure,
//! 3 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use xtalk_core::characterization::{
    bin_pack, characterize_plan, conditional_table, enumerate_pairs, fit_rb, read_decay_csv,
    unpacked_plan, CostParams, ExperimentPlan, PairPolicy, RbConfig,
};
use xtalk_core::circuit::{
    gen_random_circuit, gen_random_circuit_with_gates, gen_swap_along, gen_swap_path, CircuitError,
    CircuitIR,
};
use xtalk_core::device::DeviceModel;
use xtalk_core::evaluator::{analytic_success, compare, monte_carlo_success, write_comparison_csv, EvalError};
use xtalk_core::scheduler::{
    build_problem, insert_barriers, parallel_schedule, series_schedule, solve, verify_schedule,
    Backend, ExactLimits, OptimizationProblem, ProblemOptions, Schedule, SchedulerError,
    SmtOptions, SolveOptions,
};
use xtalk_core::seeds;

#[derive(Parser)]
#[command(name = "xtalk", version, about = "Crosstalk-aware scheduling for superconducting qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose SRB pairs, pack them into parallel bins and estimate the cost.
    CharacterizePlan(PlanArgs),
    /// Fit RB decays: simulate a plan against a device, or fit one CSV.
    CharacterizeFit(FitArgs),
    /// Schedule a circuit.
    Schedule(ScheduleArgs),
    /// Verify and score an existing schedule.
    Evaluate(EvaluateArgs),
    /// Compare baselines and crosstalk-aware schedules over several omegas.
    Compare(CompareArgs),
    /// Schedule a batch of random circuits and report timings and errors.
    Bench(BenchArgs),
    /// Generate benchmark circuits.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct DeviceArg {
    /// Device calibration file (JSON).
    #[arg(long, env = "XTALK_DEVICE")]
    device: PathBuf,
}

#[derive(Args)]
struct CircuitArg {
    /// Circuit file in the line-based text format.
    #[arg(long, env = "XTALK_CIRCUIT")]
    circuit: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    /// Weight of crosstalk against decoherence, in [0, 1].
    #[arg(long, env = "XTALK_OMEGA", default_value_t = 0.5)]
    omega: f64,
    /// Conditional/independent error ratio above which a pair is high crosstalk.
    #[arg(long, env = "XTALK_GAMMA", default_value_t = 3.0)]
    gamma: f64,
    /// Largest candidate set per gate.
    #[arg(long, env = "XTALK_CAP", default_value_t = 10)]
    cap: usize,
    /// Fail instead of truncating candidate sets above the cap.
    #[arg(long, env = "XTALK_STRICT_CAP")]
    strict_cap: bool,
    #[arg(long, env = "XTALK_BACKEND", default_value = "internal")]
    backend: Backend,
    /// External solver command; the SMT-LIB problem is written to its stdin.
    #[arg(long, env = "XTALK_SOLVER_CMD", default_value = "z3 -in -smt2")]
    solver_cmd: String,
    /// Time limit for either backend, in seconds.
    #[arg(long, env = "XTALK_TIMEOUT_S", default_value_t = 300.0)]
    timeout_s: f64,
    /// Also write the emitted SMT-LIB problem here.
    #[arg(long, env = "XTALK_DUMP_SMT")]
    dump_smt: Option<PathBuf>,
}

impl SolverArgs {
    fn problem_options(&self) -> Result<ProblemOptions, Failure> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Failure::usage(anyhow!("--omega must lie in [0, 1], got {}", self.omega)));
        }
        if !(self.gamma > 1.0) {
            return Err(Failure::usage(anyhow!("--gamma must exceed 1, got {}", self.gamma)));
        }
        Ok(ProblemOptions {
            omega: self.omega,
            gamma: self.gamma,
            cap: self.cap,
            strict_cap: self.strict_cap,
        })
    }

    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(Failure::usage(anyhow!("--timeout-s must be positive")));
        }
        let timeout = Duration::from_secs_f64(self.timeout_s);
        Ok(SolveOptions {
            backend: self.backend,
            limits: ExactLimits {
                time_limit: timeout,
                ..ExactLimits::default()
            },
            smt: SmtOptions {
                command: self.solver_cmd.clone(),
                timeout,
                dump: self.dump_smt.clone(),
            },
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    AllPairs,
    OneHop,
    HighCrosstalkDaily,
}

impl From<Policy> for PairPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::AllPairs => PairPolicy::AllPairs,
            Policy::OneHop => PairPolicy::OneHop,
            Policy::HighCrosstalkDaily => PairPolicy::HighCrosstalkDaily,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[arg(long, value_enum, default_value_t = Policy::OneHop)]
    policy: Policy,
    /// Minimum hop separation between pairs sharing a bin; 0 disables packing.
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    #[arg(long, env = "XTALK_GAMMA", default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
    seed: u64,
    /// RB sequences per experiment, for the cost estimate.
    #[arg(long, default_value_t = 100)]
    sequences: u64,
    /// Shots per sequence, for the cost estimate.
    #[arg(long, env = "XTALK_TRIALS", default_value_t = 1024)]
    trials: u64,
    /// Plan file to write; the plan goes to stdout when omitted.
    #[arg(long, env = "XTALK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Ground-truth device to simulate against (plan mode).
    #[arg(long, env = "XTALK_DEVICE")]
    device: Option<PathBuf>,
    /// Plan whose pairs are simulated and fitted.
    #[arg(long, conflicts_with = "decay")]
    plan: Option<PathBuf>,
    /// Decay CSV (m, survival, sequence_count, trials) to fit directly.
    #[arg(long)]
    decay: Option<PathBuf>,
    #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    sequences: u32,
    #[arg(long, env = "XTALK_TRIALS", default_value_t = 1024)]
    trials: u32,
    /// Plan mode: output directory for fits.csv and device.json.
    /// Decay mode: file for the fit (stdout when omitted).
    #[arg(long, env = "XTALK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheduler {
    Xtalk,
    Series,
    Parallel,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[command(flatten)]
    circuit: CircuitArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Scheduler::Xtalk)]
    scheduler: Scheduler,
    /// Schedule file to write; stdout when omitted.
    #[arg(long, env = "XTALK_OUT")]
    out: Option<PathBuf>,
    /// Write the circuit with ordering barriers inserted.
    #[arg(long)]
    barriers: Option<PathBuf>,
    /// Keep the measured solve time in the schedule file.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[command(flatten)]
    circuit: CircuitArg,
    #[arg(long)]
    schedule: PathBuf,
    /// Monte Carlo trials; 0 reports the analytic estimate only.
    #[arg(long, env = "XTALK_TRIALS", default_value_t = 0)]
    trials: u64,
    #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[command(flatten)]
    circuit: CircuitArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Omegas for the crosstalk-aware rows.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    omegas: Vec<f64>,
    /// Monte Carlo trials per schedule; 0 skips sampling.
    #[arg(long, env = "XTALK_TRIALS", default_value_t = 100_000)]
    trials: u64,
    #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
    seed: u64,
    /// CSV report; stdout when omitted.
    #[arg(long, env = "XTALK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    device: DeviceArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 50)]
    gates: usize,
    #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
    seed: u64,
    /// CSV report; stdout when omitted.
    #[arg(long, env = "XTALK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Swap two qubits towards each other and entangle them.
    Swap {
        #[command(flatten)]
        device: DeviceArg,
        #[arg(long, required_unless_present = "path", requires = "to")]
        from: Option<usize>,
        #[arg(long, requires = "from")]
        to: Option<usize>,
        /// Explicit qubit path, e.g. 0,5,10,11,12,13.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
        path: Option<Vec<usize>>,
        #[arg(long, env = "XTALK_OUT")]
        out: Option<PathBuf>,
    },
    /// Layers of random single-qubit gates and cx matchings.
    Random {
        #[command(flatten)]
        device: DeviceArg,
        #[arg(long)]
        qubits: Option<usize>,
        /// Number of layers.
        #[arg(long, conflicts_with = "gates", default_value_t = 4)]
        depth: usize,
        /// Exact number of gates instead of a layer count.
        #[arg(long)]
        gates: Option<usize>,
        #[arg(long, env = "XTALK_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "XTALK_OUT")]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }

    fn verification(error: anyhow::Error) -> Self {
        Failure { code: 3, error }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::usage(error)
    }
}

impl From<SchedulerError> for Failure {
    fn from(e: SchedulerError) -> Self {
        let code = match e {
            SchedulerError::Infeasible
            | SchedulerError::SolverMissing(_)
            | SchedulerError::SolverTimeout(_)
            | SchedulerError::Solver(_) => 2,
            SchedulerError::UnverifiableOrdering(_) => 3,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        Failure::usage(e.into())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = if matches!(e, EvalError::Unverified(_)) { 3 } else { 1 };
        Failure {
            code,
            error: e.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load_device(path: &Path) -> anyhow::Result<DeviceModel> {
    DeviceModel::load(path).with_context(|| format!("loading device {}", path.display()))
}

fn load_circuit(path: &Path) -> anyhow::Result<CircuitIR> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading circuit {}", path.display()))?;
    CircuitIR::parse(&text).with_context(|| format!("parsing circuit {}", path.display()))
}

/// Writes to `path`, or stdout when `None`.
fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check(ir: &CircuitIR, device: &DeviceModel, s: &Schedule) -> CmdResult {
    let violations = verify_schedule(ir, device, s);
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
    Err(Failure::verification(anyhow!(
        "{} schedule violates {} constraint(s):\n  {}",
        s.kind,
        list.len(),
        list.join("\n  ")
    )))
}

fn run_scheduler(p: &OptimizationProblem, which: Scheduler, opts: &SolveOptions) -> Result<Schedule, Failure> {
    Ok(match which {
        Scheduler::Xtalk => solve(p, opts)?,
        Scheduler::Series => series_schedule(p),
        Scheduler::Parallel => parallel_schedule(p),
    })
}

fn cmd_plan(a: PlanArgs) -> CmdResult {
    if !(a.gamma > 1.0) {
        return Err(Failure::usage(anyhow!("--gamma must exceed 1, got {}", a.gamma)));
    }
    let device = load_device(&a.device.device)?;
    let policy = PairPolicy::from(a.policy);
    let pairs = enumerate_pairs(&device, policy, a.gamma);
    let plan = if a.k_min == 0 {
        unpacked_plan(&pairs, policy)
    } else {
        bin_pack(&pairs, &device, policy, a.k_min, a.repeats, a.seed).context("packing bins")?
    };
    let params = CostParams {
        sequences: a.sequences,
        trials: a.trials,
        ..CostParams::default()
    };
    let cost = plan.cost(&params);
    let summary = format!(
        "policy {policy}\npairs {}\nexperiments {}\nexecutions {}\nwall_time_h {:.2}\n",
        plan.pair_count(),
        plan.experiment_count(),
        cost.executions,
        cost.wall_time_hours()
    );
    match &a.out {
        Some(path) => {
            plan.save(path).with_context(|| format!("writing {}", path.display()))?;
            print!("{summary}");
        }
        None => {
            println!("{}", plan.to_json());
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    if let Some(decay) = &a.decay {
        let points = read_decay_csv(decay).with_context(|| format!("reading {}", decay.display()))?;
        let fit = fit_rb(&points).map_err(|e| anyhow!("fit failed: {e}"))?;
        let text = serde_json::to_string_pretty(&fit).expect("fit serializes") + "\n";
        emit(a.out.as_deref(), &text)?;
        return Ok(());
    }
    let (Some(plan_path), Some(device_path)) = (&a.plan, &a.device) else {
        return Err(Failure::usage(anyhow!("pass either --decay, or --plan with --device")));
    };
    let Some(out) = &a.out else {
        return Err(Failure::usage(anyhow!("plan mode needs --out DIR")));
    };
    let truth = load_device(device_path)?;
    let plan = ExperimentPlan::load(plan_path)
        .with_context(|| format!("reading plan {}", plan_path.display()))?;
    let config = RbConfig {
        sequences: a.sequences,
        trials: a.trials,
        ..RbConfig::default()
    };
    let (fits, failures) = characterize_plan(&truth, &plan, &config, a.seed);
    for f in &failures {
        log::warn!("pair {}: {}", f.pair, f.error);
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut csv = String::from("gate,spectator,fitted_error,true_error,independent_error\n");
    let mut rows = Vec::new();
    for r in &fits {
        rows.push((r.pair.gi, r.pair.gj, r.gi_given_gj.cx_error));
        rows.push((r.pair.gj, r.pair.gi, r.gj_given_gi.cx_error));
    }
    for (g, s, e) in rows {
        let truth_e = truth
            .conditional_errors()
            .get(g, s)
            .unwrap_or_else(|| truth.independent_error(g));
        writeln!(csv, "{g},{s},{e},{truth_e},{}", truth.independent_error(g)).unwrap();
    }
    fs::write(out.join("fits.csv"), csv).context("writing fits.csv")?;
    let fitted = truth
        .with_conditional(conditional_table(&fits))
        .context("building fitted device")?;
    fs::write(out.join("device.json"), fitted.to_json() + "\n").context("writing device.json")?;
    println!("fitted {} pairs, {} failed", fits.len(), failures.len());
    Ok(())
}

fn cmd_schedule(a: ScheduleArgs) -> CmdResult {
    let popts = a.solver.problem_options()?;
    let sopts = a.solver.solve_options()?;
    let device = load_device(&a.device.device)?;
    let ir = load_circuit(&a.circuit.circuit)?;
    let p = build_problem(&ir, &device, popts)?;
    let mut s = run_scheduler(&p, a.scheduler, &sopts)?;
    log::info!(
        "{} schedule: makespan {} ns, objective {:.6}, {} nodes, {:.3}s, optimal {}",
        s.kind,
        s.makespan,
        s.objective,
        s.stats.nodes,
        s.stats.solve_time_s,
        s.stats.optimal
    );
    if !s.stats.optimal && a.scheduler == Scheduler::Xtalk {
        log::warn!("search stopped at the time limit; schedule may not be optimal");
    }
    if !a.timings {
        s.stats.solve_time_s = 0.0;
    }
    check(&ir, &device, &s)?;
    emit(a.out.as_deref(), &(s.to_json() + "\n"))?;
    if let Some(path) = &a.barriers {
        let b = insert_barriers(&ir, &device, &s)?;
        fs::write(path, b.circuit.serialize())
            .with_context(|| format!("writing {}", path.display()))?;
        log::info!("inserted {} barriers", b.inserted);
    }
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> CmdResult {
    let device = load_device(&a.device.device)?;
    let ir = load_circuit(&a.circuit.circuit)?;
    let s = Schedule::load(&a.schedule)?;
    let report = if a.trials == 0 {
        analytic_success(&ir, &device, &s)?
    } else {
        monte_carlo_success(&ir, &device, &s, a.trials, a.seed)?
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> CmdResult {
    let base = a.solver.problem_options()?;
    let sopts = a.solver.solve_options()?;
    if let Some(w) = a.omegas.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Failure::usage(anyhow!("omega {w} is outside [0, 1]")));
    }
    let device = load_device(&a.device.device)?;
    let ir = load_circuit(&a.circuit.circuit)?;
    let p = build_problem(&ir, &device, base)?;
    let mut schedules = vec![
        ("parallel".to_string(), parallel_schedule(&p)),
        ("series".to_string(), series_schedule(&p)),
    ];
    for &omega in &a.omegas {
        let p = build_problem(&ir, &device, ProblemOptions { omega, ..base })?;
        schedules.push((format!("xtalk-{omega}"), solve(&p, &sopts)?));
    }
    for (_, s) in &schedules {
        check(&ir, &device, s)?;
    }
    let trials = (a.trials > 0).then_some(a.trials);
    let rows = compare(&ir, &device, &schedules, trials, a.seed)?;
    let mut buf = Vec::new();
    write_comparison_csv(&mut buf, &rows)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    instance: usize,
    qubits: usize,
    gates: usize,
    cx: usize,
    pairs: usize,
    nodes: u64,
    optimal: bool,
    solve_time_s: f64,
    xtalk_error: f64,
    parallel_error: f64,
    series_error: f64,
    error_ratio_vs_parallel: f64,
    makespan_ratio_vs_parallel: f64,
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let popts = a.solver.problem_options()?;
    let sopts = a.solver.solve_options()?;
    let device = load_device(&a.device.device)?;
    let qubits = a.qubits.unwrap_or(device.n_qubits());
    let mut w = csv::Writer::from_writer(Vec::new());
    for k in 0..a.count {
        let seed = seeds::derive(a.seed, k as u64);
        let ir = gen_random_circuit_with_gates(&device, qubits, a.gates, seed)?;
        let p = build_problem(&ir, &device, popts)?;
        let x = solve(&p, &sopts)?;
        let par = parallel_schedule(&p);
        let ser = series_schedule(&p);
        let err = |s: &Schedule| -> Result<f64, Failure> {
            Ok(analytic_success(&ir, &device, s)?.analytic_error)
        };
        let (ex, ep, es) = (err(&x)?, err(&par)?, err(&ser)?);
        w.serialize(BenchRow {
            instance: k,
            qubits,
            gates: a.gates,
            cx: ir.cx_ids().count(),
            pairs: p.pairs.len(),
            nodes: x.stats.nodes,
            optimal: x.stats.optimal,
            solve_time_s: x.stats.solve_time_s,
            xtalk_error: ex,
            parallel_error: ep,
            series_error: es,
            error_ratio_vs_parallel: ex / ep,
            makespan_ratio_vs_parallel: x.makespan as f64 / par.makespan.max(1) as f64,
        })
        .context("writing csv row")?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    emit(a.out.as_deref(), &String::from_utf8(bytes).expect("csv is utf-8"))?;
    Ok(())
}

fn cmd_gen(g: GenCommand) -> CmdResult {
    match g {
        GenCommand::Swap {
            device,
            from,
            to,
            path,
            out,
        } => {
            let d = load_device(&device.device)?;
            let sw = match (path, from, to) {
                (Some(path), _, _) => gen_swap_along(&d, &path)?,
                (None, Some(from), Some(to)) => gen_swap_path(&d, from, to)?,
                _ => return Err(Failure::usage(anyhow!("pass --from and --to, or --path"))),
            };
            emit(out.as_deref(), &(sw.metadata() + &sw.circuit.serialize()))?;
        }
        GenCommand::Random {
            device,
            qubits,
            depth,
            gates,
            seed,
            out,
        } => {
            let d = load_device(&device.device)?;
            let n = qubits.unwrap_or(d.n_qubits());
            let ir = match gates {
                Some(g) => gen_random_circuit_with_gates(&d, n, g, seed)?,
                None => gen_random_circuit(&d, n, depth, seed)?,
            };
            emit(out.as_deref(), &ir.serialize())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::CharacterizePlan(a) => cmd_plan(a),
        Command::CharacterizeFit(a) => cmd_fit(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(g) => cmd_gen(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

//! Exact branch and bound over candidate-pair orderings.
//!
//! Each candidate pair is either ordered one way, ordered the other way,
//! or nested (the shorter instruction inside the longer one). A node fixes
//! some of these choices; its timing is the optimal timing under the fixed
//! choices alone, which gives an exact lifetime term and, with the
//! cheapest still-possible error per gate, a lower bound on the objective.

use std::time::{Duration, Instant};

use super::timing::{min_weighted_lifetimes, times_from_latest, TimingGraph};
use super::{
    base_graph, evaluate_times, intervals_overlap, OptimizationProblem, SchedulerError,
    SchedulerResult, SolverStats,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLimits {
    pub node_limit: u64,
    pub time_limit: Duration,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            node_limit: 5_000_000,
            time_limit: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Before,
    After,
    Nested,
}

const CHOICES: [Choice; 3] = [Choice::Before, Choice::After, Choice::Nested];

fn choice_arcs(p: &OptimizationProblem, pair: usize, choice: Choice) -> Vec<(usize, usize, i64)> {
    let (i, j) = (p.pairs[pair].i, p.pairs[pair].j);
    let (di, dj) = (p.durations[i] as i64, p.durations[j] as i64);
    match choice {
        Choice::Before => vec![(i, j, di)],
        Choice::After => vec![(j, i, dj)],
        Choice::Nested if di >= dj => vec![(i, j, 0), (j, i, dj - di)],
        Choice::Nested => vec![(j, i, 0), (i, j, di - dj)],
    }
}

struct Node {
    lp: Vec<i64>,
    times: Vec<i64>,
    bound: f64,
}

struct Search<'a> {
    p: &'a OptimizationProblem,
    graph: TimingGraph,
    decided: Vec<Option<Choice>>,
    /// Pairs touching each instruction.
    pairs_of: Vec<Vec<usize>>,
    weights: Vec<f64>,
    use_latest: bool,
    best: Option<(f64, Vec<i64>)>,
    nodes: u64,
    started: Instant,
    limits: ExactLimits,
    aborted: bool,
}

impl Search<'_> {
    fn node(&self, lp: Vec<i64>) -> Option<Node> {
        let times = if self.use_latest {
            times_from_latest(&lp)
        } else {
            min_weighted_lifetimes(
                &self.graph,
                &self.p.durations,
                &self.p.qubit_ops,
                &self.weights,
            )?
        };
        let bound = self.bound(&times);
        Some(Node { lp, times, bound })
    }

    fn bound(&self, times: &[i64]) -> f64 {
        let p = self.p;
        let mut log_sum = 0.0;
        for k in 0..p.len() {
            let Some(base) = p.errors[k] else { continue };
            let mut known: Option<f64> = None;
            let mut cheapest = base;
            for &pair in &self.pairs_of[k] {
                let other = if p.pairs[pair].i == k { p.pairs[pair].j } else { p.pairs[pair].i };
                let e = p.conditional(k, other).unwrap();
                match self.decided[pair] {
                    Some(Choice::Nested) => known = Some(known.map_or(e, |a: f64| a.max(e))),
                    Some(_) => {}
                    None => cheapest = cheapest.min(e),
                }
            }
            log_sum += known.unwrap_or(cheapest).ln();
        }
        let mut decoherence = 0.0;
        for (q, ops) in p.qubit_ops.iter().enumerate() {
            if ops.is_empty() {
                continue;
            }
            let first = ops.iter().map(|&k| times[k]).min().unwrap();
            let last = ops.iter().map(|&k| times[k] + p.durations[k] as i64).max().unwrap();
            decoherence += (last - first) as f64 / p.coherence_ns[q];
        }
        let omega = p.omega();
        omega * log_sum + (1.0 - omega) * decoherence
    }

    fn partial(&self, pair: usize, times: &[i64]) -> (bool, bool) {
        let cp = &self.p.pairs[pair];
        let (si, sj) = (times[cp.i], times[cp.j]);
        let (di, dj) = (self.p.durations[cp.i], self.p.durations[cp.j]);
        let overlap = intervals_overlap(si, di, sj, dj);
        let (ei, ej) = (si + di as i64, sj + dj as i64);
        let nested = (si <= sj && ej <= ei) || (sj <= si && ei <= ej);
        (overlap, overlap && !nested)
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.best.as_ref().map_or(1.0, |(v, _)| v.abs().max(1.0))
    }

    fn out_of_budget(&self) -> bool {
        self.nodes >= self.limits.node_limit || self.started.elapsed() >= self.limits.time_limit
    }

    fn dfs(&mut self, node: Node) {
        self.nodes += 1;
        let tol = self.tolerance();
        if let Some((best, _)) = &self.best {
            if node.bound >= best - tol {
                return;
            }
        }
        let undecided: Vec<usize> = (0..self.p.pairs.len())
            .filter(|&k| self.decided[k].is_none())
            .collect();
        let states: Vec<(bool, bool)> =
            undecided.iter().map(|&k| self.partial(k, &node.times)).collect();
        if states.iter().all(|&(_, partial)| !partial) {
            let value = evaluate_times(self.p, &node.times).objective;
            if self.best.as_ref().is_none_or(|(b, _)| value < b - tol) {
                self.best = Some((value, node.times.clone()));
            }
            if value <= node.bound + tol {
                return;
            }
        }
        if self.best.is_some() && self.out_of_budget() {
            self.aborted = true;
            return;
        }
        let pick = states
            .iter()
            .position(|&(_, partial)| partial)
            .or_else(|| states.iter().position(|&(overlap, _)| overlap))
            .or(if undecided.is_empty() { None } else { Some(0) });
        let Some(pick) = pick else { return };
        let pair = undecided[pick];

        let mut children = Vec::with_capacity(3);
        for (rank, choice) in CHOICES.into_iter().enumerate() {
            let arcs = choice_arcs(self.p, pair, choice);
            for &(a, b, w) in &arcs {
                self.graph.push(a, b, w);
            }
            self.decided[pair] = Some(choice);
            let child = self
                .graph
                .latest_from(&node.lp, &arcs)
                .and_then(|lp| self.node(lp));
            self.decided[pair] = None;
            for &(_, b, _) in arcs.iter().rev() {
                self.graph.pop(b);
            }
            if let Some(child) = child {
                children.push((rank, choice, arcs, child));
            }
        }
        children.sort_by(|a, b| a.3.bound.total_cmp(&b.3.bound).then(a.0.cmp(&b.0)));
        for (_, choice, arcs, child) in children {
            if self.aborted {
                return;
            }
            for &(a, b, w) in &arcs {
                self.graph.push(a, b, w);
            }
            self.decided[pair] = Some(choice);
            self.dfs(child);
            self.decided[pair] = None;
            for &(_, b, _) in arcs.iter().rev() {
                self.graph.pop(b);
            }
        }
    }
}

pub(crate) fn solve_exact(
    p: &OptimizationProblem,
    limits: &ExactLimits,
) -> SchedulerResult<(Vec<i64>, SolverStats)> {
    let graph = base_graph(p);
    let mut pairs_of = vec![Vec::new(); p.len()];
    for (k, cp) in p.pairs.iter().enumerate() {
        pairs_of[cp.i].push(k);
        pairs_of[cp.j].push(k);
    }
    let omega = p.omega();
    let mut search = Search {
        p,
        decided: vec![None; p.pairs.len()],
        pairs_of,
        weights: p.coherence_ns.iter().map(|t| 1.0 / t).collect(),
        use_latest: p.all_measured() || omega >= 1.0,
        best: None,
        nodes: 0,
        started: Instant::now(),
        limits: *limits,
        aborted: false,
        graph,
    };
    let root = search
        .graph
        .latest()
        .and_then(|lp| search.node(lp))
        .ok_or(SchedulerError::Infeasible)?;
    search.dfs(root);
    let (_, times) = search.best.ok_or(SchedulerError::Infeasible)?;
    Ok((
        times,
        SolverStats {
            backend: "internal".into(),
            solve_time_s: search.started.elapsed().as_secs_f64(),
            nodes: search.nodes,
            optimal: !search.aborted,
        },
    ))
}

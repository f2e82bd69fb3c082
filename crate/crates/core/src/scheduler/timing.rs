//! Start-time computation under difference constraints.
//!
//! Node `anchor` stands for the readout time `R`; every other node is an
//! instruction. An arc `(a, b, w)` means `tau[b] - tau[a] >= w`.

use std::collections::VecDeque;

pub const NEG_INF: i64 = i64::MIN / 4;

#[derive(Debug, Clone)]
pub struct TimingGraph {
    anchor: usize,
    /// Incoming arcs per node: `(from, weight)`.
    incoming: Vec<Vec<(usize, i64)>>,
}

impl TimingGraph {
    pub fn new(n_instr: usize) -> Self {
        TimingGraph {
            anchor: n_instr,
            incoming: vec![Vec::new(); n_instr + 1],
        }
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn n_nodes(&self) -> usize {
        self.incoming.len()
    }

    pub fn push(&mut self, a: usize, b: usize, w: i64) {
        self.incoming[b].push((a, w));
    }

    /// Removes the most recent arc into `b`.
    pub fn pop(&mut self, b: usize) {
        self.incoming[b].pop();
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.incoming
            .iter()
            .enumerate()
            .flat_map(|(b, inc)| inc.iter().map(move |&(a, w)| (a, b, w)))
    }

    /// Longest path from every node to the anchor, i.e. how far before `R`
    /// each node must start at the latest. `None` on a positive cycle.
    pub fn latest(&self) -> Option<Vec<i64>> {
        let mut lp = vec![NEG_INF; self.n_nodes()];
        lp[self.anchor] = 0;
        self.relax(lp, &[self.anchor])
    }

    /// Re-solves after `added` arcs were pushed, starting from a solution
    /// of the graph without them.
    pub fn latest_from(&self, warm: &[i64], added: &[(usize, usize, i64)]) -> Option<Vec<i64>> {
        let lp = warm.to_vec();
        let seeds: Vec<usize> = added.iter().map(|&(_, b, _)| b).collect();
        self.relax(lp, &seeds)
    }

    fn relax(&self, mut lp: Vec<i64>, seeds: &[usize]) -> Option<Vec<i64>> {
        let n = self.n_nodes();
        let mut queued = vec![false; n];
        // Edges on the walk behind each improved value; a strictly improving
        // walk of n edges repeats a node, so it closes a positive cycle.
        let mut walk = vec![0usize; n];
        let mut queue = VecDeque::new();
        for &s in seeds {
            if !queued[s] {
                queued[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(b) = queue.pop_front() {
            queued[b] = false;
            if lp[b] == NEG_INF {
                continue;
            }
            for &(a, w) in &self.incoming[b] {
                let cand = lp[b] + w;
                if cand > lp[a] {
                    lp[a] = cand;
                    walk[a] = walk[b] + 1;
                    if walk[a] >= n {
                        return None;
                    }
                    if !queued[a] {
                        queued[a] = true;
                        queue.push_back(a);
                    }
                }
            }
        }
        Some(lp)
    }
}

/// Start times relative to `R = 0` from longest paths.
pub fn times_from_latest(lp: &[i64]) -> Vec<i64> {
    lp.iter().map(|&d| -d).collect()
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: f64,
    cost: i64,
}

const FLOW_EPS: f64 = 1e-12;

/// Start times (relative to `R = 0`) minimizing
/// `sum_q weight[q] * (end of last op on q - start of first op on q)`.
///
/// Solved through the dual: a min-cost flow from each qubit's "first" node
/// to its "last" node with arc costs `-w`, after which shortest-path
/// potentials give optimal times.
pub fn min_weighted_lifetimes(
    graph: &TimingGraph,
    durations: &[u64],
    qubit_ops: &[Vec<usize>],
    weights: &[f64],
) -> Option<Vec<i64>> {
    let base = graph.n_nodes();
    let used: Vec<usize> = (0..qubit_ops.len())
        .filter(|&q| !qubit_ops[q].is_empty() && weights[q] > 0.0)
        .collect();
    let first = |k: usize| base + 2 * k;
    let last = |k: usize| base + 2 * k + 1;
    let source = base + 2 * used.len();
    let sink = source + 1;
    let n = sink + 1;

    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |a: usize, b: usize, cap: f64, cost: i64| {
        adj[a].push(edges.len());
        edges.push(Edge { to: b, cap, cost });
        adj[b].push(edges.len());
        edges.push(Edge {
            to: a,
            cap: 0.0,
            cost: -cost,
        });
    };
    for (a, b, w) in graph.arcs() {
        add(a, b, f64::INFINITY, -w);
    }
    let scale = used.iter().map(|&q| weights[q]).fold(0.0, f64::max);
    let mut total = 0.0;
    for (k, &q) in used.iter().enumerate() {
        let w = weights[q] / scale;
        total += w;
        for &op in &qubit_ops[q] {
            add(first(k), op, f64::INFINITY, 0);
            add(op, last(k), f64::INFINITY, -(durations[op] as i64));
        }
        add(source, first(k), w, 0);
        add(last(k), sink, w, 0);
    }

    let mut routed = 0.0;
    while routed < total - FLOW_EPS * total.max(1.0) {
        let (dist, prev) = shortest_paths(&edges, &adj, n, &[source])?;
        if dist[sink] == i64::MAX {
            return None;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = prev[v];
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = prev[v];
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        routed += push;
    }

    let all: Vec<usize> = (0..n).collect();
    let (dist, _) = shortest_paths(&edges, &adj, n, &all)?;
    let x_anchor = -dist[graph.anchor()];
    Some((0..base).map(|v| -dist[v] - x_anchor).collect())
}

/// Bellman-Ford (queue based) over residual edges. `None` on a negative
/// cycle.
fn shortest_paths(
    edges: &[Edge],
    adj: &[Vec<usize>],
    n: usize,
    sources: &[usize],
) -> Option<(Vec<i64>, Vec<usize>)> {
    let mut dist = vec![i64::MAX; n];
    let mut prev = vec![usize::MAX; n];
    let mut queued = vec![false; n];
    let mut walk = vec![0usize; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queued[s] = true;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &e in &adj[u] {
            let edge = edges[e];
            if edge.cap <= FLOW_EPS {
                continue;
            }
            let cand = dist[u] + edge.cost;
            if cand < dist[edge.to] {
                dist[edge.to] = cand;
                prev[edge.to] = e;
                walk[edge.to] = walk[u] + 1;
                if walk[edge.to] >= n {
                    return None;
                }
                if !queued[edge.to] {
                    queued[edge.to] = true;
                    queue.push_back(edge.to);
                }
            }
        }
    }
    Some((dist, prev))
}

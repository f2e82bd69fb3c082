//! Hardware-compliant circuit IR.
//!
//! Instructions are kept in program order; the dependency DAG is derived
//! from per-qubit program order (barriers participate as fences) and stored
//! transitively reduced, together with ancestor bitsets for O(1)
//! comparability queries.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::device::{DeviceModel, GateId, QubitId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange {
        line: usize,
        qubit: QubitId,
        n_qubits: usize,
    },
    #[error("instruction {id}: {message}")]
    Invalid { id: usize, message: String },
    #[error("instruction {id}: no hardware gate for {what}")]
    Unbound { id: usize, what: String },
    #[error("no path between qubits {0} and {1}")]
    NoPath(QubitId, QubitId),
}

pub type CircuitResult<T> = Result<T, CircuitError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    Cx,
    U(String),
    Barrier,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub id: usize,
    pub op: Op,
    pub qubits: Vec<QubitId>,
}

impl Instruction {
    pub fn is_cx(&self) -> bool {
        self.op == Op::Cx
    }

    pub fn is_barrier(&self) -> bool {
        self.op == Op::Barrier
    }

    pub fn is_measure(&self) -> bool {
        self.op == Op::Measure
    }

    pub fn touches(&self, q: QubitId) -> bool {
        self.qubits.contains(&q)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.op {
            Op::Cx => write!(f, "cx {} {}", self.qubits[0], self.qubits[1]),
            Op::U(name) if name == "u" => write!(f, "u {}", self.qubits[0]),
            Op::U(name) => write!(f, "u {} {name}", self.qubits[0]),
            Op::Measure => write!(f, "measure {}", self.qubits[0]),
            Op::Barrier => {
                f.write_str("barrier")?;
                for q in &self.qubits {
                    write!(f, " {q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct CircuitIR {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    dag: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    ancestors: Vec<BitSet>,
}

impl PartialEq for CircuitIR {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.instructions == other.instructions
    }
}

impl CircuitIR {
    /// Builds the IR from `(op, qubits)` pairs in program order. Ids are
    /// assigned by position.
    pub fn new(n_qubits: usize, ops: Vec<(Op, Vec<QubitId>)>) -> CircuitResult<Self> {
        let instructions: Vec<Instruction> = ops
            .into_iter()
            .enumerate()
            .map(|(id, (op, qubits))| Instruction { id, op, qubits })
            .collect();
        validate(n_qubits, &instructions)?;
        let dag = build_dag(n_qubits, &instructions);
        let n = instructions.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &dag {
            preds[b].push(a);
            succs[a].push(b);
        }
        let ancestors = ancestor_sets(n, &preds);
        Ok(CircuitIR {
            n_qubits,
            instructions,
            dag,
            preds,
            succs,
            ancestors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn instruction(&self, id: usize) -> &Instruction {
        &self.instructions[id]
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Transitively reduced dependency edges `(i, j)`: `j` depends on `i`.
    pub fn dag(&self) -> &[(usize, usize)] {
        &self.dag
    }

    pub fn predecessors(&self, id: usize) -> &[usize] {
        &self.preds[id]
    }

    pub fn successors(&self, id: usize) -> &[usize] {
        &self.succs[id]
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.ancestors[b].contains(a)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    pub fn cx_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.instructions.iter().filter(|i| i.is_cx()).map(|i| i.id)
    }

    /// Non-barrier instructions on `q`, in program order (which is also
    /// time order in any valid schedule).
    pub fn qubit_ops(&self, q: QubitId) -> Vec<usize> {
        self.instructions
            .iter()
            .filter(|i| !i.is_barrier() && i.touches(q))
            .map(|i| i.id)
            .collect()
    }

    /// Qubits touched by at least one non-barrier instruction.
    pub fn used_qubits(&self) -> Vec<QubitId> {
        let mut used = vec![false; self.n_qubits];
        for ins in self.instructions.iter().filter(|i| !i.is_barrier()) {
            for &q in &ins.qubits {
                used[q] = true;
            }
        }
        (0..self.n_qubits).filter(|&q| used[q]).collect()
    }

    /// Resolves every non-barrier instruction to its hardware gate.
    pub fn bind(&self, device: &DeviceModel) -> CircuitResult<Vec<Option<GateId>>> {
        if self.n_qubits > device.n_qubits() {
            return Err(CircuitError::Invalid {
                id: 0,
                message: format!(
                    "circuit uses {} qubits but device has {}",
                    self.n_qubits,
                    device.n_qubits()
                ),
            });
        }
        self.instructions
            .iter()
            .map(|ins| {
                let q = &ins.qubits;
                let (gate, what) = match ins.op {
                    Op::Barrier => return Ok(None),
                    Op::Cx => (device.cx_gate_on(q[0], q[1]), format!("cx {} {}", q[0], q[1])),
                    Op::U(_) => (device.one_qubit_gate(q[0]), format!("u {}", q[0])),
                    Op::Measure => (device.readout_gate(q[0]), format!("measure {}", q[0])),
                };
                gate.map(Some).ok_or(CircuitError::Unbound { id: ins.id, what })
            })
            .collect()
    }

    /// Canonical text form.
    pub fn serialize(&self) -> String {
        let mut out = format!("qreg {}\n", self.n_qubits);
        for ins in &self.instructions {
            writeln!(out, "{ins}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> CircuitResult<Self> {
        parse_circuit(text)
    }
}

fn validate(n_qubits: usize, instructions: &[Instruction]) -> CircuitResult<()> {
    let mut measured = vec![false; n_qubits];
    for ins in instructions {
        let bad = |message: String| CircuitError::Invalid { id: ins.id, message };
        let arity = match ins.op {
            Op::Cx => Some(2),
            Op::U(_) | Op::Measure => Some(1),
            Op::Barrier => None,
        };
        if let Some(k) = arity {
            if ins.qubits.len() != k {
                return Err(bad(format!("expected {k} qubits, got {}", ins.qubits.len())));
            }
        }
        if ins.qubits.is_empty() {
            return Err(bad("barrier without qubits".into()));
        }
        let mut seen = BTreeSet::new();
        for &q in &ins.qubits {
            if q >= n_qubits {
                return Err(bad(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            if !seen.insert(q) {
                return Err(bad(format!("qubit {q} repeated")));
            }
        }
        if !ins.is_barrier() {
            for &q in &ins.qubits {
                if measured[q] {
                    return Err(bad(format!("qubit {q} is used after its measurement")));
                }
            }
        }
        if ins.is_measure() {
            measured[ins.qubits[0]] = true;
        }
    }
    Ok(())
}

/// Per-qubit program order edges, transitively reduced.
pub fn build_dag(n_qubits: usize, instructions: &[Instruction]) -> Vec<(usize, usize)> {
    let n = instructions.len();
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    let mut raw_preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for ins in instructions {
        for &q in &ins.qubits {
            if let Some(p) = last[q] {
                if !raw_preds[ins.id].contains(&p) {
                    raw_preds[ins.id].push(p);
                }
            }
            last[q] = Some(ins.id);
        }
    }
    let ancestors = ancestor_sets(n, &raw_preds);
    let mut edges = Vec::new();
    for (v, preds) in raw_preds.iter().enumerate() {
        for &u in preds {
            let implied = preds.iter().any(|&w| w != u && ancestors[w].contains(u));
            if !implied {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    edges
}

fn ancestor_sets(n: usize, preds: &[Vec<usize>]) -> Vec<BitSet> {
    let mut anc: Vec<BitSet> = Vec::with_capacity(n);
    for v in 0..n {
        let mut set = BitSet::new(n);
        for &p in &preds[v] {
            debug_assert!(p < v, "dag edges follow program order");
            set.insert(p);
            set.union_with(&anc[p]);
        }
        anc.push(set);
    }
    anc
}

fn parse_circuit(text: &str) -> CircuitResult<CircuitIR> {
    let mut declared: Option<(usize, usize)> = None;
    let mut ops = Vec::new();
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |message: &str| CircuitError::Syntax {
            line,
            message: message.to_string(),
        };
        let mut words = body.split_whitespace();
        let head = words.next().unwrap();
        let args: Vec<&str> = words.collect();
        let qubit = |s: &str| {
            s.parse::<QubitId>()
                .map_err(|_| syntax(&format!("expected qubit index, found `{s}`")))
        };
        match head {
            "qreg" => {
                if declared.is_some() || !ops.is_empty() {
                    return Err(syntax("qreg must be the first statement and appear once"));
                }
                let [n] = args[..] else {
                    return Err(syntax("usage: qreg <n>"));
                };
                let n = n
                    .parse()
                    .map_err(|_| syntax(&format!("invalid register size `{n}`")))?;
                declared = Some((n, line));
            }
            "cx" => {
                let [a, b] = args[..] else {
                    return Err(syntax("usage: cx <control> <target>"));
                };
                ops.push((Op::Cx, vec![qubit(a)?, qubit(b)?]));
                lines.push(line);
            }
            "u" => {
                let (q, name) = match args[..] {
                    [q] => (q, "u"),
                    [q, name] => (q, name),
                    _ => return Err(syntax("usage: u <q> [<name>]")),
                };
                ops.push((Op::U(name.to_string()), vec![qubit(q)?]));
                lines.push(line);
            }
            "measure" => {
                let [q] = args[..] else {
                    return Err(syntax("usage: measure <q>"));
                };
                ops.push((Op::Measure, vec![qubit(q)?]));
                lines.push(line);
            }
            "barrier" => {
                if args.is_empty() {
                    return Err(syntax("usage: barrier <q>..."));
                }
                let qs = args.iter().map(|a| qubit(a)).collect::<CircuitResult<_>>()?;
                ops.push((Op::Barrier, qs));
                lines.push(line);
            }
            other => return Err(syntax(&format!("unknown instruction `{other}`"))),
        }
    }
    let n_qubits = match declared {
        Some((n, _)) => {
            for ((_, qs), &line) in ops.iter().zip(&lines) {
                if let Some(&q) = qs.iter().find(|&&q| q >= n) {
                    return Err(CircuitError::QubitOutOfRange {
                        line,
                        qubit: q,
                        n_qubits: n,
                    });
                }
            }
            n
        }
        None => ops
            .iter()
            .flat_map(|(_, qs)| qs.iter().copied())
            .max()
            .map_or(0, |m| m + 1),
    };
    CircuitIR::new(n_qubits, ops).map_err(|e| match e {
        CircuitError::Invalid { id, message } => CircuitError::Syntax {
            line: lines[id],
            message,
        },
        other => other,
    })
}

/// cx instructions that may overlap `gi` in time: dag-incomparable, one
/// hop away on the device and high-crosstalk in at least one direction.
pub fn can_overlap(
    ir: &CircuitIR,
    device: &DeviceModel,
    binding: &[Option<GateId>],
    gi: usize,
    gamma: f64,
) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    if !ir.instruction(gi).is_cx() {
        return out;
    }
    let hw_i = binding[gi].expect("cx instructions are bound");
    for gj in ir.cx_ids() {
        if ir.comparable(gi, gj) {
            continue;
        }
        let hw_j = binding[gj].expect("cx instructions are bound");
        if device.gate_hop_distance(hw_i, hw_j).ok() != Some(1) {
            continue;
        }
        if device.is_high_crosstalk(hw_i, hw_j, gamma) {
            out.insert(gj);
        }
    }
    out
}

/// A meet-in-the-middle SWAP circuit with the routing decisions that
/// produced it.
#[derive(Debug, Clone)]
pub struct SwapPath {
    pub circuit: CircuitIR,
    pub path: Vec<QubitId>,
    pub meeting_edge: (QubitId, QubitId),
    pub swaps_from_a: usize,
    pub swaps_from_b: usize,
}

impl SwapPath {
    pub fn metadata(&self) -> String {
        let path: Vec<String> = self.path.iter().map(ToString::to_string).collect();
        format!(
            "# path: {}\n# meeting-edge: {} {}\n# swaps: {} {}\n",
            path.join(" "),
            self.meeting_edge.0,
            self.meeting_edge.1,
            self.swaps_from_a,
            self.swaps_from_b
        )
    }
}

fn push_swap(ops: &mut Vec<(Op, Vec<QubitId>)>, a: QubitId, b: QubitId) {
    ops.push((Op::Cx, vec![a, b]));
    ops.push((Op::Cx, vec![b, a]));
    ops.push((Op::Cx, vec![a, b]));
}

/// Moves `qa` and `qb` towards each other along a shortest path and
/// applies one cx across the meeting edge.
pub fn gen_swap_path(device: &DeviceModel, qa: QubitId, qb: QubitId) -> CircuitResult<SwapPath> {
    if qa == qb {
        return Err(CircuitError::Invalid {
            id: 0,
            message: format!("swap endpoints coincide ({qa})"),
        });
    }
    let path = device
        .shortest_path(qa, qb)
        .ok_or(CircuitError::NoPath(qa, qb))?;
    gen_swap_along(device, &path)
}

/// As [`gen_swap_path`] but along an explicit qubit path.
pub fn gen_swap_along(device: &DeviceModel, path: &[QubitId]) -> CircuitResult<SwapPath> {
    let invalid = |message: String| CircuitError::Invalid { id: 0, message };
    if path.len() < 2 {
        return Err(invalid("swap path needs at least two qubits".into()));
    }
    for w in path.windows(2) {
        if device.cx_gate_on(w[0], w[1]).is_none() {
            return Err(invalid(format!("({},{}) is not a coupling edge", w[0], w[1])));
        }
    }
    let hops = path.len() - 1;
    let swaps = hops - 1;
    let (swaps_from_a, swaps_from_b) = if swaps.is_multiple_of(2) {
        (swaps / 2, swaps / 2)
    } else {
        // Odd count only happens for an even hop count; the middle qubit
        // belongs to neither side.
        let half = hops / 2;
        let coherence = |qs: &[QubitId]| -> f64 {
            qs.iter().map(|&q| device.qubit(q).coherence_ns()).sum()
        };
        let front = coherence(&path[..half]);
        let back = coherence(&path[half + 1..]);
        if front >= back {
            (swaps / 2 + 1, swaps / 2)
        } else {
            (swaps / 2, swaps / 2 + 1)
        }
    };
    let mut ops = vec![(Op::U("u2".into()), vec![path[0]])];
    for k in 0..swaps_from_a {
        push_swap(&mut ops, path[k], path[k + 1]);
    }
    for k in 0..swaps_from_b {
        push_swap(&mut ops, path[hops - k], path[hops - k - 1]);
    }
    let meeting_edge = (path[swaps_from_a], path[swaps_from_a + 1]);
    ops.push((Op::Cx, vec![meeting_edge.0, meeting_edge.1]));
    let mut touched = path.to_vec();
    touched.sort_unstable();
    for &q in &touched {
        ops.push((Op::Measure, vec![q]));
    }
    let n_qubits = touched.last().map_or(0, |&m| m + 1);
    Ok(SwapPath {
        circuit: CircuitIR::new(n_qubits, ops)?,
        path: path.to_vec(),
        meeting_edge,
        swaps_from_a,
        swaps_from_b,
    })
}

const SINGLE_QUBIT_NAMES: [&str; 3] = ["sx", "sy", "t"];

/// Random layered circuit on qubits `0..n_qubits` of `device`: each layer
/// is a random set of single-qubit gates followed by a random matching of
/// coupling edges. Every qubit is measured at the end.
pub fn gen_random_circuit(
    device: &DeviceModel,
    n_qubits: usize,
    depth: usize,
    seed: u64,
) -> CircuitResult<CircuitIR> {
    let ops = random_layers(device, n_qubits, depth, seed)?;
    CircuitIR::new(n_qubits, with_measurements(ops, n_qubits))
}

/// Like [`gen_random_circuit`] but truncated to exactly `gates` gate
/// instructions (before measurement), adding layers as needed.
pub fn gen_random_circuit_with_gates(
    device: &DeviceModel,
    n_qubits: usize,
    gates: usize,
    seed: u64,
) -> CircuitResult<CircuitIR> {
    let mut depth = 1;
    loop {
        let mut ops = random_layers(device, n_qubits, depth, seed)?;
        if ops.len() >= gates {
            ops.truncate(gates);
            return CircuitIR::new(n_qubits, with_measurements(ops, n_qubits));
        }
        depth *= 2;
    }
}

fn with_measurements(
    mut ops: Vec<(Op, Vec<QubitId>)>,
    n_qubits: usize,
) -> Vec<(Op, Vec<QubitId>)> {
    ops.extend((0..n_qubits).map(|q| (Op::Measure, vec![q])));
    ops
}

fn random_layers(
    device: &DeviceModel,
    n_qubits: usize,
    depth: usize,
    seed: u64,
) -> CircuitResult<Vec<(Op, Vec<QubitId>)>> {
    if n_qubits == 0 || n_qubits > device.n_qubits() {
        return Err(CircuitError::Invalid {
            id: 0,
            message: format!(
                "cannot draw {n_qubits} qubits from a {}-qubit device",
                device.n_qubits()
            ),
        });
    }
    let edges: Vec<(QubitId, QubitId)> = device
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| a < n_qubits && b < n_qubits)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::new();
    for _ in 0..depth {
        for q in 0..n_qubits {
            if rng.random_bool(0.5) {
                let name = SINGLE_QUBIT_NAMES[rng.random_range(0..SINGLE_QUBIT_NAMES.len())];
                ops.push((Op::U(name.into()), vec![q]));
            }
        }
        let mut order = edges.clone();
        order.shuffle(&mut rng);
        let mut busy = vec![false; n_qubits];
        for (a, b) in order {
            if busy[a] || busy[b] || !rng.random_bool(0.5) {
                continue;
            }
            busy[a] = true;
            busy[b] = true;
            let (c, t) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            ops.push((Op::Cx, vec![c, t]));
        }
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceBuilder;

    const THREE_CX: &str = "qreg 6\nu 0\ncx 0 1\ncx 2 3\ncx 4 5\n\
                        measure 0\nmeasure 1\nmeasure 2\nmeasure 3\nmeasure 4\nmeasure 5\n";

    #[test]
    fn single_cx() {
        let ir = CircuitIR::parse("cx 0 1").unwrap();
        assert_eq!(ir.len(), 1);
        assert!(ir.dag().is_empty());
        assert_eq!(ir.n_qubits(), 2);
    }

    #[test]
    fn three_cx_program_dependencies() {
        let ir = CircuitIR::parse(THREE_CX).unwrap();
        let gate_edges: Vec<_> = ir.dag().iter().filter(|&&(_, b)| b < 4).copied().collect();
        assert_eq!(gate_edges, vec![(0, 1)]);
    }

    #[test]
    fn malformed_cx() {
        let err = CircuitIR::parse("qreg 2\ncx 0").unwrap_err();
        assert!(matches!(err, CircuitError::Syntax { line: 2, .. }));
    }

    #[test]
    fn out_of_range_qubit() {
        let err = CircuitIR::parse("qreg 2\ncx 0 2").unwrap_err();
        assert!(matches!(err, CircuitError::QubitOutOfRange { qubit: 2, .. }));
    }

    #[test]
    fn chain_edges() {
        let ir = CircuitIR::parse("cx 0 1\ncx 1 2\ncx 2 3").unwrap();
        assert_eq!(ir.dag(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn barrier_fence() {
        let ir = CircuitIR::parse("cx 0 1\nbarrier 0 1 2 3\ncx 2 3").unwrap();
        assert_eq!(ir.dag(), &[(0, 1), (1, 2)]);
        assert!(ir.is_ancestor(0, 2));
    }

    #[test]
    fn reduction_drops_implied_edge() {
        let ir = CircuitIR::parse("cx 0 1\ncx 1 2\ncx 0 2").unwrap();
        assert_eq!(ir.dag(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn measurement_must_be_terminal() {
        let err = CircuitIR::parse("measure 0\nu 0").unwrap_err();
        assert!(matches!(err, CircuitError::Syntax { line: 2, .. }));
        CircuitIR::parse("measure 0\nbarrier 0 1\nu 1").unwrap();
    }

    #[test]
    fn comments_and_names() {
        let ir = CircuitIR::parse("# header\nqreg 3\nu 2 u3  # tail\nu 1\n").unwrap();
        assert_eq!(ir.serialize(), "qreg 3\nu 2 u3\nu 1\n");
    }

    #[test]
    fn can_overlap_three_cx() {
        let device = DeviceBuilder::linear(6)
            .conditional(0, 2, 0.11)
            .conditional(2, 0, 0.11)
            .conditional(2, 4, 0.012)
            .conditional(4, 2, 0.012)
            .build()
            .unwrap();
        let ir = CircuitIR::parse(THREE_CX).unwrap();
        let bind = ir.bind(&device).unwrap();
        assert_eq!(can_overlap(&ir, &device, &bind, 1, 3.0), BTreeSet::from([2]));
        assert_eq!(can_overlap(&ir, &device, &bind, 2, 3.0), BTreeSet::from([1]));
        assert!(can_overlap(&ir, &device, &bind, 3, 3.0).is_empty());
        assert!(can_overlap(&ir, &device, &bind, 0, 3.0).is_empty());
        // before pruning, g2 may overlap both neighbours
        assert_eq!(
            can_overlap(&ir, &device, &bind, 2, 1.0),
            BTreeSet::from([1, 3])
        );
        assert!(can_overlap(&ir, &device, &bind, 1, f64::INFINITY).is_empty());
    }

    #[test]
    fn sequential_circuit_has_no_candidates() {
        let device = DeviceBuilder::linear(4)
            .conditional(0, 2, 0.5)
            .conditional(2, 0, 0.5)
            .build()
            .unwrap();
        let ir = CircuitIR::parse("cx 0 1\ncx 1 2\ncx 2 3\ncx 2 1").unwrap();
        let bind = ir.bind(&device).unwrap();
        for g in 0..ir.len() {
            assert!(can_overlap(&ir, &device, &bind, g, 3.0).is_empty());
        }
    }

    #[test]
    fn adjacent_swap_path_is_single_cx() {
        let device = DeviceBuilder::linear(3).build().unwrap();
        let sp = gen_swap_path(&device, 1, 2).unwrap();
        let cx: Vec<_> = sp.circuit.cx_ids().collect();
        assert_eq!(cx.len(), 1);
        assert_eq!(sp.meeting_edge, (1, 2));
    }

    #[test]
    fn swap_path_length_four() {
        let device = DeviceBuilder::linear(5).coherence(4, 10.0, 10.0).build().unwrap();
        let sp = gen_swap_path(&device, 0, 4).unwrap();
        assert_eq!(sp.circuit.cx_ids().count(), 10);
        assert_eq!(sp.swaps_from_a + sp.swaps_from_b, 3);
        assert!(sp.swaps_from_a.abs_diff(sp.swaps_from_b) <= 1);
        // front side (0,1) has more coherence than (3,4)
        assert_eq!((sp.swaps_from_a, sp.swaps_from_b), (2, 1));
        assert_eq!(sp.meeting_edge, (2, 3));
    }

    #[test]
    fn disconnected_swap_request() {
        let device = DeviceBuilder::linear(3).build().unwrap();
        assert!(gen_swap_path(&device, 0, 7).is_err());
        assert!(gen_swap_path(&device, 1, 1).is_err());
    }

    #[test]
    fn random_circuit_layer_bound() {
        let device = DeviceBuilder::linear(6).build().unwrap();
        for seed in 0..20 {
            let ir = gen_random_circuit(&device, 6, 1, seed).unwrap();
            assert!(ir.cx_ids().count() <= 3);
        }
    }

    #[test]
    fn random_circuit_deterministic() {
        let device = DeviceBuilder::linear(6).build().unwrap();
        let a = gen_random_circuit(&device, 6, 5, 9).unwrap();
        let b = gen_random_circuit(&device, 6, 5, 9).unwrap();
        assert_eq!(a.serialize(), b.serialize());
    }

    #[test]
    fn truncated_random_circuit() {
        let device = DeviceBuilder::linear(6).build().unwrap();
        let ir = gen_random_circuit_with_gates(&device, 6, 37, 1).unwrap();
        assert_eq!(ir.instructions().iter().filter(|i| !i.is_measure()).count(), 37);
    }
}

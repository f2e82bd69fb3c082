//! Hardware description: qubits, coupling graph, calibrated gates and the
//! conditional (crosstalk) error table.
//!
//! A [`DeviceModel`] is immutable once validated. All graph queries are
//! answered from an all-pairs hop-distance matrix computed at construction.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type QubitId = usize;
pub type GateId = usize;

/// Threshold ratio used when no other value is configured.
pub const DEFAULT_GAMMA: f64 = 3.0;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("cannot read device file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("device file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid device: {0}")]
    Invalid(String),
    #[error("unknown gate id {0}")]
    UnknownGate(GateId),
}

pub type DeviceResult<T> = Result<T, DeviceError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "cx")]
    Cx,
    #[serde(rename = "one-qubit")]
    OneQubit,
    #[serde(rename = "readout")]
    Readout,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Cx => "cx",
            GateKind::OneQubit => "one-qubit",
            GateKind::Readout => "readout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitInfo {
    pub id: QubitId,
    pub t1_us: f64,
    pub t2_us: f64,
}

impl QubitInfo {
    /// Usable coherence budget `min(T1, T2)` in nanoseconds.
    pub fn coherence_ns(&self) -> f64 {
        self.t1_us.min(self.t2_us) * 1000.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareGate {
    pub id: GateId,
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
    pub duration_ns: u64,
    /// Independent error rate, measured with no other gate running.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalEntry {
    pub gate: GateId,
    pub spectator: GateId,
    pub error: f64,
}

/// Directional table of `E(gate | spectator)` values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionalErrorTable {
    entries: BTreeMap<(GateId, GateId), f64>,
}

impl ConditionalErrorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, gate: GateId, spectator: GateId, error: f64) {
        self.entries.insert((gate, spectator), error);
    }

    pub fn get(&self, gate: GateId, spectator: GateId) -> Option<f64> {
        self.entries.get(&(gate, spectator)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateId, GateId, f64)> + '_ {
        self.entries.iter().map(|(&(g, s), &e)| (g, s, e))
    }

    pub fn to_entries(&self) -> Vec<ConditionalEntry> {
        self.iter()
            .map(|(gate, spectator, error)| ConditionalEntry {
                gate,
                spectator,
                error,
            })
            .collect()
    }
}

/// On-disk calibration schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub qubits: Vec<QubitInfo>,
    pub edges: Vec<[QubitId; 2]>,
    pub gates: Vec<HardwareGate>,
    #[serde(default)]
    pub conditional_errors: Vec<ConditionalEntry>,
}

#[derive(Debug, Clone)]
pub struct DeviceModel {
    qubits: Vec<QubitInfo>,
    gates: Vec<HardwareGate>,
    edges: Vec<(QubitId, QubitId)>,
    conditional: ConditionalErrorTable,
    adjacency: Vec<Vec<QubitId>>,
    distance: Vec<Vec<usize>>,
    cx_by_edge: HashMap<(QubitId, QubitId), GateId>,
    one_qubit: Vec<Option<GateId>>,
    readout: Vec<Option<GateId>>,
}

fn normalized(a: QubitId, b: QubitId) -> (QubitId, QubitId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn invalid<T>(msg: impl Into<String>) -> DeviceResult<T> {
    Err(DeviceError::Invalid(msg.into()))
}

impl DeviceModel {
    pub fn load(path: impl AsRef<Path>) -> DeviceResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DeviceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> DeviceResult<Self> {
        let file: DeviceFile = serde_json::from_str(text).map_err(|e| DeviceError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_file(file)
    }

    pub fn from_file(file: DeviceFile) -> DeviceResult<Self> {
        let DeviceFile {
            mut qubits,
            edges,
            mut gates,
            conditional_errors,
        } = file;
        qubits.sort_by_key(|q| q.id);
        for (expected, q) in qubits.iter().enumerate() {
            if q.id != expected {
                return invalid(format!(
                    "qubit ids must be dense and unique (expected {expected}, found {})",
                    q.id
                ));
            }
            if !(q.t1_us > 0.0 && q.t1_us.is_finite()) {
                return invalid(format!("qubit {} has non-positive t1 {}", q.id, q.t1_us));
            }
            if !(q.t2_us > 0.0 && q.t2_us.is_finite()) {
                return invalid(format!("qubit {} has non-positive t2 {}", q.id, q.t2_us));
            }
        }
        let n = qubits.len();

        let mut edge_list = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for [a, b] in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a},{b}) references an unknown qubit"));
            }
            if a == b {
                return invalid(format!("edge ({a},{b}) is a self loop"));
            }
            let e = normalized(a, b);
            if edge_list.contains(&e) {
                return invalid(format!("duplicate edge ({a},{b})"));
            }
            edge_list.push(e);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        gates.sort_by_key(|g| g.id);
        let mut cx_by_edge = HashMap::new();
        let mut one_qubit = vec![None; n];
        let mut readout = vec![None; n];
        for (expected, g) in gates.iter().enumerate() {
            if g.id != expected {
                return invalid(format!(
                    "gate ids must be dense and unique (expected {expected}, found {})",
                    g.id
                ));
            }
            if g.duration_ns == 0 {
                return invalid(format!("gate {} has zero duration", g.id));
            }
            if !(g.error > 0.0 && g.error < 1.0) {
                return invalid(format!("gate {} error {} outside (0,1)", g.id, g.error));
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= n) {
                return invalid(format!("gate {} references unknown qubit {q}", g.id));
            }
            match g.kind {
                GateKind::Cx => {
                    let [c, t] = g.qubits[..] else {
                        return invalid(format!("cx gate {} must act on exactly 2 qubits", g.id));
                    };
                    if c == t {
                        return invalid(format!("cx gate {} acts twice on qubit {c}", g.id));
                    }
                    let e = normalized(c, t);
                    if !edge_list.contains(&e) {
                        return invalid(format!(
                            "cx gate {} on ({c},{t}) is not a coupling edge",
                            g.id
                        ));
                    }
                    if cx_by_edge.insert(e, g.id).is_some() {
                        return invalid(format!("edge ({c},{t}) has more than one cx gate"));
                    }
                }
                GateKind::OneQubit | GateKind::Readout => {
                    let [q] = g.qubits[..] else {
                        return invalid(format!(
                            "{} gate {} must act on exactly 1 qubit",
                            g.kind, g.id
                        ));
                    };
                    let slot = if g.kind == GateKind::OneQubit {
                        &mut one_qubit[q]
                    } else {
                        &mut readout[q]
                    };
                    if slot.replace(g.id).is_some() {
                        return invalid(format!("qubit {q} has more than one {} gate", g.kind));
                    }
                }
            }
        }
        if let Some(&(a, b)) = edge_list.iter().find(|e| !cx_by_edge.contains_key(e)) {
            return invalid(format!("edge ({a},{b}) has no cx gate"));
        }

        let mut conditional = ConditionalErrorTable::new();
        for entry in conditional_errors {
            for id in [entry.gate, entry.spectator] {
                if id >= gates.len() || gates[id].kind != GateKind::Cx {
                    return invalid(format!(
                        "conditional error ({},{}) references non-cx gate {id}",
                        entry.gate, entry.spectator
                    ));
                }
            }
            let (g, s) = (&gates[entry.gate], &gates[entry.spectator]);
            if g.qubits.iter().any(|q| s.qubits.contains(q)) {
                return invalid(format!(
                    "conditional error ({},{}) pairs gates that share a qubit",
                    entry.gate, entry.spectator
                ));
            }
            if !(entry.error > 0.0 && entry.error < 1.0) {
                return invalid(format!(
                    "conditional error ({},{}) value {} outside (0,1)",
                    entry.gate, entry.spectator, entry.error
                ));
            }
            conditional.insert(entry.gate, entry.spectator, entry.error);
        }

        let distance = all_pairs_bfs(&adjacency);
        if n > 0 && distance[0].contains(&usize::MAX) {
            return invalid("coupling graph is not connected");
        }

        Ok(DeviceModel {
            qubits,
            gates,
            edges: edge_list,
            conditional,
            adjacency,
            distance,
            cx_by_edge,
            one_qubit,
            readout,
        })
    }

    pub fn to_file(&self) -> DeviceFile {
        DeviceFile {
            qubits: self.qubits.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            gates: self.gates.clone(),
            conditional_errors: self.conditional.to_entries(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("device serializes")
    }

    /// Returns a copy with the conditional table replaced.
    pub fn with_conditional(&self, table: ConditionalErrorTable) -> DeviceResult<Self> {
        let mut file = self.to_file();
        file.conditional_errors = table.to_entries();
        Self::from_file(file)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitInfo] {
        &self.qubits
    }

    pub fn qubit(&self, q: QubitId) -> &QubitInfo {
        &self.qubits[q]
    }

    pub fn gates(&self) -> &[HardwareGate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> DeviceResult<&HardwareGate> {
        self.gates.get(id).ok_or(DeviceError::UnknownGate(id))
    }

    pub fn edges(&self) -> &[(QubitId, QubitId)] {
        &self.edges
    }

    pub fn neighbors(&self, q: QubitId) -> &[QubitId] {
        &self.adjacency[q]
    }

    pub fn conditional_errors(&self) -> &ConditionalErrorTable {
        &self.conditional
    }

    pub fn cx_gates(&self) -> impl Iterator<Item = &HardwareGate> {
        self.gates.iter().filter(|g| g.kind == GateKind::Cx)
    }

    pub fn cx_gate_on(&self, a: QubitId, b: QubitId) -> Option<GateId> {
        self.cx_by_edge.get(&normalized(a, b)).copied()
    }

    pub fn one_qubit_gate(&self, q: QubitId) -> Option<GateId> {
        self.one_qubit.get(q).copied().flatten()
    }

    pub fn readout_gate(&self, q: QubitId) -> Option<GateId> {
        self.readout.get(q).copied().flatten()
    }

    /// Hop distance between two qubits; `usize::MAX` if unreachable.
    pub fn qubit_distance(&self, a: QubitId, b: QubitId) -> usize {
        self.distance[a][b]
    }

    /// Minimum coupling-graph distance between any endpoint of `gi` and any
    /// endpoint of `gj`. Zero iff the gates share a qubit.
    pub fn gate_hop_distance(&self, gi: GateId, gj: GateId) -> DeviceResult<usize> {
        let (a, b) = (self.gate(gi)?, self.gate(gj)?);
        Ok(a.qubits
            .iter()
            .flat_map(|&u| b.qubits.iter().map(move |&v| (u, v)))
            .map(|(u, v)| self.distance[u][v])
            .min()
            .unwrap_or(usize::MAX))
    }

    /// Unordered cx pairs that share no qubit, ascending.
    pub fn simultaneous_pairs(&self) -> Vec<(GateId, GateId)> {
        let cx: Vec<GateId> = self.cx_gates().map(|g| g.id).collect();
        let mut out = Vec::new();
        for (k, &i) in cx.iter().enumerate() {
            for &j in &cx[k + 1..] {
                if self.gate_hop_distance(i, j).expect("known ids") >= 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn independent_error(&self, g: GateId) -> f64 {
        self.gates[g].error
    }

    /// `E(gi|gj) / E(gi)`, or `None` when the entry is missing.
    pub fn crosstalk_ratio(&self, gi: GateId, gj: GateId) -> Option<f64> {
        self.conditional
            .get(gi, gj)
            .map(|e| e / self.gates[gi].error)
    }

    /// Ordered pairs `(i, j)` with `E(gi|gj) > gamma * E(gi)`. Missing table
    /// entries count as no crosstalk.
    pub fn high_crosstalk_pairs(&self, gamma: f64) -> Vec<(GateId, GateId)> {
        self.conditional
            .iter()
            .filter(|&(g, _, e)| e > gamma * self.gates[g].error)
            .map(|(g, s, _)| (g, s))
            .collect()
    }

    /// True when either direction of the pair exceeds the threshold.
    pub fn is_high_crosstalk(&self, gi: GateId, gj: GateId, gamma: f64) -> bool {
        let over = |a: GateId, b: GateId| {
            self.conditional
                .get(a, b)
                .is_some_and(|e| e > gamma * self.gates[a].error)
        };
        over(gi, gj) || over(gj, gi)
    }

    /// Shortest qubit path from `from` to `to`, breaking ties towards the
    /// smallest qubit id at every step.
    pub fn shortest_path(&self, from: QubitId, to: QubitId) -> Option<Vec<QubitId>> {
        if from >= self.n_qubits() || to >= self.n_qubits() {
            return None;
        }
        if self.distance[from][to] == usize::MAX {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let next = self.adjacency[cur]
                .iter()
                .copied()
                .find(|&n| self.distance[n][to] + 1 == self.distance[cur][to])?;
            path.push(next);
            cur = next;
        }
        Some(path)
    }
}

fn all_pairs_bfs(adjacency: &[Vec<QubitId>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut dist = vec![vec![usize::MAX; n]; n];
    for (src, row) in dist.iter_mut().enumerate() {
        row[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if row[v] == usize::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Programmatic construction of devices with uniform calibration values.
///
/// Gate ids are assigned as: one cx per edge (in edge order), then one
/// single-qubit gate per qubit, then one readout per qubit.
#[derive(Debug, Clone)]
pub struct DeviceBuilder {
    n_qubits: usize,
    edges: Vec<(QubitId, QubitId)>,
    t1_us: Vec<f64>,
    t2_us: Vec<f64>,
    cx_ns: Vec<u64>,
    cx_error: Vec<f64>,
    one_qubit_ns: u64,
    one_qubit_error: f64,
    readout_ns: u64,
    readout_error: f64,
    conditional: Vec<ConditionalEntry>,
}

impl DeviceBuilder {
    pub fn new(n_qubits: usize, edges: &[(QubitId, QubitId)]) -> Self {
        DeviceBuilder {
            n_qubits,
            edges: edges.to_vec(),
            t1_us: vec![60.0; n_qubits],
            t2_us: vec![60.0; n_qubits],
            cx_ns: vec![400; edges.len()],
            cx_error: vec![0.01; edges.len()],
            one_qubit_ns: 100,
            one_qubit_error: 0.001,
            readout_ns: 1000,
            readout_error: 0.03,
            conditional: Vec::new(),
        }
    }

    pub fn linear(n_qubits: usize) -> Self {
        let edges: Vec<_> = (1..n_qubits).map(|q| (q - 1, q)).collect();
        Self::new(n_qubits, &edges)
    }

    pub fn coherence(mut self, q: QubitId, t1_us: f64, t2_us: f64) -> Self {
        self.t1_us[q] = t1_us;
        self.t2_us[q] = t2_us;
        self
    }

    pub fn all_coherence(mut self, t1_us: f64, t2_us: f64) -> Self {
        self.t1_us.fill(t1_us);
        self.t2_us.fill(t2_us);
        self
    }

    pub fn cx_duration(mut self, ns: u64) -> Self {
        self.cx_ns.fill(ns);
        self
    }

    pub fn cx_duration_on(mut self, edge: usize, ns: u64) -> Self {
        self.cx_ns[edge] = ns;
        self
    }

    pub fn cx_error(mut self, e: f64) -> Self {
        self.cx_error.fill(e);
        self
    }

    pub fn cx_error_on(mut self, edge: usize, e: f64) -> Self {
        self.cx_error[edge] = e;
        self
    }

    pub fn one_qubit(mut self, ns: u64, error: f64) -> Self {
        self.one_qubit_ns = ns;
        self.one_qubit_error = error;
        self
    }

    pub fn readout(mut self, ns: u64, error: f64) -> Self {
        self.readout_ns = ns;
        self.readout_error = error;
        self
    }

    /// Adds `E(gate|spectator)`; gate ids are edge indices.
    pub fn conditional(mut self, gate: GateId, spectator: GateId, error: f64) -> Self {
        self.conditional.push(ConditionalEntry {
            gate,
            spectator,
            error,
        });
        self
    }

    pub fn into_file(self) -> DeviceFile {
        let n = self.n_qubits;
        let qubits = (0..n)
            .map(|id| QubitInfo {
                id,
                t1_us: self.t1_us[id],
                t2_us: self.t2_us[id],
            })
            .collect();
        let mut gates = Vec::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            gates.push(HardwareGate {
                id: k,
                kind: GateKind::Cx,
                qubits: vec![a, b],
                duration_ns: self.cx_ns[k],
                error: self.cx_error[k],
            });
        }
        for q in 0..n {
            gates.push(HardwareGate {
                id: gates.len(),
                kind: GateKind::OneQubit,
                qubits: vec![q],
                duration_ns: self.one_qubit_ns,
                error: self.one_qubit_error,
            });
        }
        for q in 0..n {
            gates.push(HardwareGate {
                id: gates.len(),
                kind: GateKind::Readout,
                qubits: vec![q],
                duration_ns: self.readout_ns,
                error: self.readout_error,
            });
        }
        DeviceFile {
            qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            gates,
            conditional_errors: self.conditional,
        }
    }

    pub fn build(self) -> DeviceResult<DeviceModel> {
        DeviceModel::from_file(self.into_file())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain6() -> DeviceModel {
        DeviceBuilder::linear(6).build().unwrap()
    }

    #[test]
    fn chain_has_five_cx_gates() {
        let d = chain6();
        assert_eq!(d.cx_gates().count(), 5);
        assert_eq!(d.cx_gate_on(3, 2), Some(2));
    }

    #[test]
    fn one_hop_between_01_and_23() {
        let d = chain6();
        assert_eq!(d.gate_hop_distance(0, 2).unwrap(), 1);
        assert_eq!(d.gate_hop_distance(0, 0).unwrap(), 0);
        assert_eq!(d.gate_hop_distance(0, 4).unwrap(), 3);
        assert!(matches!(
            d.gate_hop_distance(0, 99),
            Err(DeviceError::UnknownGate(99))
        ));
    }

    #[test]
    fn chain_simultaneous_pairs() {
        let pairs = chain6().simultaneous_pairs();
        assert_eq!(pairs, vec![(0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 4)]);
    }

    #[test]
    fn two_disjoint_gates_one_pair() {
        let d = DeviceBuilder::new(4, &[(0, 1), (1, 2), (2, 3)]).build().unwrap();
        // (0,1) and (2,3) are the only disjoint pair
        assert_eq!(d.simultaneous_pairs(), vec![(0, 2)]);
    }

    #[test]
    fn large_ratio_is_high_crosstalk() {
        let d = DeviceBuilder::linear(4)
            .cx_error(0.01)
            .conditional(0, 2, 0.11)
            .conditional(2, 0, 0.01)
            .build()
            .unwrap();
        assert_eq!(d.high_crosstalk_pairs(3.0), vec![(0, 2)]);
        assert!(d.is_high_crosstalk(2, 0, 3.0));
        assert!(d.high_crosstalk_pairs(1.0).iter().all(|&p| p != (2, 0)));
    }

    #[test]
    fn rejects_zero_t1() {
        let mut file = DeviceBuilder::linear(3).into_file();
        file.qubits[1].t1_us = 0.0;
        let err = DeviceModel::from_file(file).unwrap_err();
        assert!(err.to_string().contains("qubit 1"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_with_location() {
        let err = DeviceModel::from_json(
            "{\"qubits\": [], \"edges\": [], \"gates\": [],\n \"extra\": 1}",
        )
        .unwrap_err();
        match err {
            DeviceError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_disconnected_graph() {
        let err = DeviceBuilder::new(4, &[(0, 1), (2, 3)]).build().unwrap_err();
        assert!(err.to_string().contains("connected"));
    }

    #[test]
    fn rejects_conditional_on_shared_qubit() {
        let err = DeviceBuilder::linear(3)
            .conditional(0, 1, 0.05)
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("share a qubit"));
    }

    #[test]
    fn json_round_trip() {
        let d = DeviceBuilder::linear(4).conditional(0, 2, 0.05).build().unwrap();
        let back = DeviceModel::from_json(&d.to_json()).unwrap();
        assert_eq!(back.to_file(), d.to_file());
    }

    #[test]
    fn shortest_path_prefers_low_ids() {
        let d = DeviceBuilder::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).build().unwrap();
        assert_eq!(d.shortest_path(0, 3).unwrap(), vec![0, 1, 3]);
    }
}

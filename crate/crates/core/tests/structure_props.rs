mod common;

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use xtalk_core::circuit::{can_overlap, gen_swap_path, CircuitIR, Op};
use xtalk_core::device::DeviceModel;

fn bfs(d: &DeviceModel, from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; d.n_qubits()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in d.edges() {
            let v = if a == u { b } else if b == u { a } else { continue };
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn cx_qubits(d: &DeviceModel) -> Vec<(usize, Vec<usize>)> {
    d.cx_gates().map(|g| (g.id, g.qubits.clone())).collect()
}

fn device_strategy() -> impl Strategy<Value = DeviceModel> {
    (4usize..10, any::<u64>(), any::<bool>()).prop_map(|(n, s, u)| common::fuzz_device(n, s, u))
}

/// Random instruction list over `n` qubits, measures last.
fn ops_strategy() -> impl Strategy<Value = (usize, Vec<(Op, Vec<usize>)>)> {
    (2usize..7).prop_flat_map(|n| {
        let op = prop_oneof![
            (0..n, 0..n - 1).prop_map(move |(a, b)| {
                let b = if b >= a { b + 1 } else { b };
                (Op::Cx, vec![a, b])
            }),
            (0..n, 0usize..3).prop_map(|(q, k)| (Op::U(["sx", "sy", "t"][k].into()), vec![q])),
            proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n)
                .prop_map(|qs| (Op::Barrier, qs)),
        ];
        (Just(n), proptest::collection::vec(op, 0..30), proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=n))
            .prop_map(|(n, mut ops, measured)| {
                ops.extend(measured.into_iter().map(|q| (Op::Measure, vec![q])));
                (n, ops)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hop_distance_is_symmetric_and_bounded(d in device_strategy()) {
        let dist: Vec<Vec<usize>> = (0..d.n_qubits()).map(|q| bfs(&d, q)).collect();
        let cx = cx_qubits(&d);
        let hop = |a: &[usize], b: &[usize]| {
            a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).map(|(x, y)| dist[x][y]).min().unwrap()
        };
        for (i, qi) in &cx {
            for (j, qj) in &cx {
                let h = d.gate_hop_distance(*i, *j).unwrap();
                prop_assert_eq!(h, hop(qi, qj));
                prop_assert_eq!(h, d.gate_hop_distance(*j, *i).unwrap());
                for (k, _) in &cx {
                    // a cx gate spans one edge, so set distance obeys the
                    // triangle inequality up to that one hop
                    let via = d.gate_hop_distance(*i, *k).unwrap() + d.gate_hop_distance(*k, *j).unwrap();
                    prop_assert!(h <= via + 1);
                }
            }
        }
    }

    #[test]
    fn simultaneous_pairs_match_brute_force(d in device_strategy()) {
        let cx = cx_qubits(&d);
        let mut expect = Vec::new();
        for (x, (i, qi)) in cx.iter().enumerate() {
            for (j, qj) in &cx[x + 1..] {
                if qi.iter().all(|q| !qj.contains(q)) {
                    expect.push((*i.min(j), *i.max(j)));
                }
            }
        }
        expect.sort_unstable();
        let mut got = d.simultaneous_pairs();
        got.sort_unstable();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn high_crosstalk_set_shrinks_as_gamma_grows(d in device_strategy(), g1 in 1.0f64..6.0, dg in 0.0f64..6.0) {
        let low: BTreeSet<_> = d.high_crosstalk_pairs(g1).into_iter().collect();
        let high: BTreeSet<_> = d.high_crosstalk_pairs(g1 + dg).into_iter().collect();
        prop_assert!(high.is_subset(&low));
    }

    #[test]
    fn dag_is_acyclic_and_orders_shared_qubits((n, ops) in ops_strategy()) {
        let ir = CircuitIR::new(n, ops).unwrap();
        let len = ir.len();
        let mut indegree = vec![0usize; len];
        for &(a, b) in ir.dag() {
            prop_assert!(a < len && b < len);
            indegree[b] += 1;
        }
        let mut ready: Vec<usize> = (0..len).filter(|&k| indegree[k] == 0).collect();
        let mut seen = 0;
        while let Some(u) = ready.pop() {
            seen += 1;
            for &(a, b) in ir.dag() {
                if a == u {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        prop_assert_eq!(seen, len);
        let ins = ir.instructions();
        for a in 0..len {
            for b in a + 1..len {
                let shared = ins[a].qubits.iter().any(|q| ins[b].qubits.contains(q));
                if shared {
                    prop_assert!(ir.is_ancestor(a, b));
                }
                prop_assert!(!ir.is_ancestor(b, a));
            }
        }
    }

    #[test]
    fn text_format_round_trips((n, ops) in ops_strategy()) {
        let ir = CircuitIR::new(n, ops).unwrap();
        let back = CircuitIR::parse(&ir.serialize()).unwrap();
        prop_assert_eq!(back.instructions(), ir.instructions());
        prop_assert_eq!(back.dag(), ir.dag());
    }

    #[test]
    fn can_overlap_is_symmetric(seed in any::<u64>(), uniform in any::<bool>(), gamma in 1.0f64..5.0) {
        let d = common::fuzz_device(4 + (seed % 5) as usize, seed, uniform);
        let ir = common::fuzz_circuit(&d, seed, 25, 12);
        let binding = ir.bind(&d).unwrap();
        let sets: Vec<BTreeSet<usize>> = (0..ir.len()).map(|k| can_overlap(&ir, &d, &binding, k, gamma)).collect();
        for (i, set) in sets.iter().enumerate() {
            for &j in set {
                prop_assert!(sets[j].contains(&i));
                prop_assert!(!ir.comparable(i, j));
            }
        }
    }

    #[test]
    fn swaps_expand_to_three_alternating_cx(d in device_strategy(), a in 0usize..10, b in 0usize..10) {
        let (a, b) = (a % d.n_qubits(), b % d.n_qubits());
        prop_assume!(a != b);
        let s = gen_swap_path(&d, a, b).unwrap();
        let cx: Vec<Vec<usize>> = s
            .circuit
            .instructions()
            .iter()
            .filter(|i| i.is_cx())
            .map(|i| i.qubits.clone())
            .collect();
        let swaps = s.swaps_from_a + s.swaps_from_b;
        prop_assert_eq!(swaps + 2, s.path.len());
        prop_assert_eq!(cx.len(), 3 * swaps + 1);
        for triple in cx[..3 * swaps].chunks(3) {
            let (x, y) = (triple[0][0], triple[0][1]);
            prop_assert_eq!(&triple[1], &vec![y, x]);
            prop_assert_eq!(&triple[2], &vec![x, y]);
            prop_assert!(d.cx_gate_on(x, y).is_some());
        }
        let last = &cx[3 * swaps];
        prop_assert_eq!((last[0], last[1]), s.meeting_edge);
    }
}

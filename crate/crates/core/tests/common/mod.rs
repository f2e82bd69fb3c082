//! Random devices and circuits shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xtalk_core::circuit::{gen_random_circuit_with_gates, CircuitIR};
use xtalk_core::device::{DeviceBuilder, DeviceModel};

/// Random connected device: a path over all qubits plus a few chords.
///
/// About half of the one-hop simultaneous cx pairs get conditional errors
/// in both directions, strictly above the independent errors; most of those
/// exceed 3x. With `uniform`, cx and single-qubit gates share one duration.
pub fn fuzz_device(n: usize, seed: u64, uniform: bool) -> DeviceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|q| (q, q + 1)).collect();
    for _ in 0..n / 3 {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (a, b) = (a.min(b), a.max(b));
        if b > a + 1 && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    let mut builder = DeviceBuilder::new(n, &edges);
    for q in 0..n {
        let t1 = if rng.random_bool(0.25) {
            rng.random_range(4.0..12.0)
        } else {
            rng.random_range(30.0..120.0)
        };
        let t2 = t1 * rng.random_range(0.6..1.4);
        builder = builder.coherence(q, t1, t2);
    }
    let base = rng.random_range(2..=4) * 100;
    if uniform {
        builder = builder.cx_duration(base).one_qubit(base, 0.001);
    } else {
        builder = builder.one_qubit(rng.random_range(5..=10) * 10, 0.001);
    }
    let mut cx_err = Vec::new();
    for e in 0..edges.len() {
        let err = rng.random_range(0.005..0.03);
        cx_err.push(err);
        builder = builder.cx_error_on(e, err);
        if !uniform {
            builder = builder.cx_duration_on(e, rng.random_range(5..=10) * 50);
        }
    }
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            let (ea, eb) = (edges[a], edges[b]);
            let disjoint = ea.0 != eb.0 && ea.0 != eb.1 && ea.1 != eb.0 && ea.1 != eb.1;
            let adjacent = edges.iter().any(|&(x, y)| {
                let hit = |q| q == ea.0 || q == ea.1;
                let hit_b = |q| q == eb.0 || q == eb.1;
                (hit(x) && hit_b(y)) || (hit(y) && hit_b(x))
            });
            if !disjoint || !adjacent || !rng.random_bool(0.5) {
                continue;
            }
            let high = rng.random_bool(0.8);
            let mut ratio = || {
                if high {
                    rng.random_range(3.5..12.0)
                } else {
                    rng.random_range(1.05..2.5)
                }
            };
            builder = builder
                .conditional(a, b, cx_err[a] * ratio())
                .conditional(b, a, cx_err[b] * ratio());
        }
    }
    builder.build().expect("fuzz device is valid")
}

pub fn cx_count(ir: &CircuitIR) -> usize {
    ir.instructions().iter().filter(|i| i.is_cx()).count()
}

/// Random measured circuit on `device` with at most `max_cx` cx gates.
pub fn fuzz_circuit(device: &DeviceModel, seed: u64, max_gates: usize, max_cx: usize) -> CircuitIR {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    loop {
        let n = rng.random_range(2..=device.n_qubits());
        let gates = rng.random_range(1..=max_gates);
        let ir = gen_random_circuit_with_gates(device, n, gates, rng.random())
            .expect("generator accepts fuzz devices");
        if cx_count(&ir) <= max_cx {
            return ir;
        }
    }
}

/// `count` (device, circuit) instances; devices have 4 to 7 qubits.
pub fn corpus(count: usize, seed: u64, uniform: bool, max_gates: usize, max_cx: usize) -> Vec<(DeviceModel, CircuitIR)> {
    (0..count as u64)
        .map(|k| {
            let s = xtalk_core::seeds::derive(seed, k);
            let n = 4 + (s % 4) as usize;
            let d = fuzz_device(n, s, uniform);
            let ir = fuzz_circuit(&d, s, max_gates, max_cx);
            (d, ir)
        })
        .collect()
}

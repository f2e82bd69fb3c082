//! Bundled device fixtures.

use crate::circuit::CircuitIR;
use crate::device::DeviceModel;

pub const CHAIN6_JSON: &str = include_str!("../fixtures/chain6.json");
pub const GRID20_JSON: &str = include_str!("../fixtures/grid20.json");

/// Two-gate-layer example circuit for [`chain6`].
pub const THREE_CX_CIRCUIT: &str = "qreg 6
u 0
cx 0 1
cx 2 3
cx 4 5
measure 0
measure 1
measure 2
measure 3
measure 4
measure 5
";

/// Six-qubit chain; CX(0,1) and CX(2,3) interfere (1% alone, 11% together)
/// and qubit 2 has a 6 us coherence time against 60 us elsewhere.
pub fn chain6() -> DeviceModel {
    DeviceModel::from_json(CHAIN6_JSON).expect("bundled fixture is valid")
}

/// 20-qubit, 23-edge heavy grid with five one-hop high-crosstalk pairs.
pub fn grid20() -> DeviceModel {
    DeviceModel::from_json(GRID20_JSON).expect("bundled fixture is valid")
}

pub fn three_cx_circuit() -> CircuitIR {
    CircuitIR::parse(THREE_CX_CIRCUIT).expect("bundled circuit is valid")
}

/// Path taken by the SWAP(0,13) example on [`grid20`].
pub const GRID20_SWAP_0_13: [usize; 6] = [0, 5, 10, 11, 12, 13];

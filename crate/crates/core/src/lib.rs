//! Crosstalk-aware instruction scheduling for superconducting quantum
//! devices: device models, circuit IR, crosstalk characterization planning,
//! schedulers and success-probability evaluation.

pub mod characterization;
pub mod circuit;
pub mod device;
pub mod fixtures;
pub mod seeds;
pub mod scheduler;
pub mod evaluator;

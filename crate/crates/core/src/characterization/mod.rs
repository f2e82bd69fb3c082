//! Planning of simultaneous randomized benchmarking (SRB) experiments.
//!
//! Pairs of cx gates are selected according to a [`PairPolicy`], packed
//! into bins of pairs that can be benchmarked in the same experiment, and
//! costed in executions and wall-clock time.

mod rb;

pub use rb::{
    fit_rb, read_decay_csv, simulate_rb_curve, simulate_srb, survival_model, write_decay_csv,
    FitError, RbConfig, RbFit, RbPoint, SrbCurve, SrbMode, RB_ASYMPTOTE, RB_SPAN,
};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{ConditionalErrorTable, DeviceModel, GateId};

#[derive(Debug, Error)]
pub enum CharacterizationError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gate {gate}: per-Clifford error {per_clifford} is non-physical for this decay model")]
    NonPhysical { gate: GateId, per_clifford: f64 },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("decay data parse error: {0}")]
    Csv(String),
}

pub type CharacterizationResult<T> = Result<T, CharacterizationError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SrbPair {
    pub gi: GateId,
    pub gj: GateId,
}

impl SrbPair {
    pub fn new(a: GateId, b: GateId) -> Self {
        SrbPair {
            gi: a.min(b),
            gj: a.max(b),
        }
    }

    pub fn gates(&self) -> [GateId; 2] {
        [self.gi, self.gj]
    }
}

impl fmt::Display for SrbPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.gi, self.gj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicy {
    /// Every pair of cx gates that share no qubit.
    AllPairs,
    /// Only pairs exactly one hop apart.
    OneHop,
    /// One-hop pairs already known to have high crosstalk.
    HighCrosstalkDaily,
}

impl fmt::Display for PairPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairPolicy::AllPairs => "all-pairs",
            PairPolicy::OneHop => "one-hop",
            PairPolicy::HighCrosstalkDaily => "high-crosstalk-daily",
        })
    }
}

impl FromStr for PairPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-pairs" => Ok(PairPolicy::AllPairs),
            "one-hop" => Ok(PairPolicy::OneHop),
            "high-crosstalk-daily" => Ok(PairPolicy::HighCrosstalkDaily),
            other => Err(format!("unknown pair policy `{other}`")),
        }
    }
}

pub fn enumerate_pairs(device: &DeviceModel, policy: PairPolicy, gamma: f64) -> Vec<SrbPair> {
    device
        .simultaneous_pairs()
        .into_iter()
        .filter(|&(a, b)| match policy {
            PairPolicy::AllPairs => true,
            PairPolicy::OneHop => device.gate_hop_distance(a, b).ok() == Some(1),
            PairPolicy::HighCrosstalkDaily => {
                device.gate_hop_distance(a, b).ok() == Some(1)
                    && device.is_high_crosstalk(a, b, gamma)
            }
        })
        .map(|(a, b)| SrbPair::new(a, b))
        .collect()
}

/// Minimum hop distance between any gate of `p` and any gate of `q`.
pub fn pair_distance(device: &DeviceModel, p: SrbPair, q: SrbPair) -> usize {
    p.gates()
        .into_iter()
        .flat_map(|a| q.gates().into_iter().map(move |b| (a, b)))
        .map(|(a, b)| device.gate_hop_distance(a, b).expect("plan pairs use known gates"))
        .min()
        .unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub policy: PairPolicy,
    pub k_min: usize,
    pub seed: u64,
    pub repeats: usize,
    pub bins: Vec<Vec<SrbPair>>,
}

impl ExperimentPlan {
    pub fn experiment_count(&self) -> usize {
        self.bins.len()
    }

    pub fn pair_count(&self) -> usize {
        self.bins.iter().map(Vec::len).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = SrbPair> + '_ {
        self.bins.iter().flatten().copied()
    }

    /// Bins that contain two pairs closer than `k_min`.
    pub fn invalid_bins(&self, device: &DeviceModel) -> Vec<usize> {
        (0..self.bins.len())
            .filter(|&b| !bin_is_compatible(device, &self.bins[b], self.k_min))
            .collect()
    }

    pub fn cost(&self, params: &CostParams) -> CostEstimate {
        estimate_cost(self.experiment_count(), params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> CharacterizationResult<Self> {
        serde_json::from_str(text).map_err(|e| CharacterizationError::Csv(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> CharacterizationResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| CharacterizationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> CharacterizationResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CharacterizationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

fn bin_is_compatible(device: &DeviceModel, bin: &[SrbPair], k_min: usize) -> bool {
    bin.iter().enumerate().all(|(x, &p)| {
        bin[x + 1..]
            .iter()
            .all(|&q| pair_distance(device, p, q) >= k_min)
    })
}

fn first_fit(device: &DeviceModel, order: &[SrbPair], k_min: usize) -> Vec<Vec<SrbPair>> {
    let mut bins: Vec<Vec<SrbPair>> = Vec::new();
    for &pair in order {
        let slot = bins
            .iter()
            .position(|bin| bin.iter().all(|&q| pair_distance(device, pair, q) >= k_min));
        match slot {
            Some(b) => bins[b].push(pair),
            None => bins.push(vec![pair]),
        }
    }
    bins
}

/// Single first-fit pass over `pairs` in the given order.
pub fn first_fit_once(device: &DeviceModel, pairs: &[SrbPair], k_min: usize) -> Vec<Vec<SrbPair>> {
    first_fit(device, pairs, k_min)
}

/// Randomized first fit: the given order plus `repeats - 1` shuffles; the
/// partition with the fewest bins wins (earliest on ties).
pub fn bin_pack(
    pairs: &[SrbPair],
    device: &DeviceModel,
    policy: PairPolicy,
    k_min: usize,
    repeats: usize,
    seed: u64,
) -> CharacterizationResult<ExperimentPlan> {
    if k_min < 1 {
        return Err(CharacterizationError::InvalidParameter("k_min must be at least 1".into()));
    }
    if repeats < 1 {
        return Err(CharacterizationError::InvalidParameter(
            "repeats must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = first_fit(device, pairs, k_min);
    let mut order = pairs.to_vec();
    for _ in 1..repeats {
        order.shuffle(&mut rng);
        let bins = first_fit(device, &order, k_min);
        if bins.len() < best.len() {
            best = bins;
        }
    }
    Ok(ExperimentPlan {
        policy,
        k_min,
        seed,
        repeats,
        bins: best,
    })
}

/// Plan with one experiment per pair (no packing).
pub fn unpacked_plan(pairs: &[SrbPair], policy: PairPolicy) -> ExperimentPlan {
    ExperimentPlan {
        policy,
        k_min: 1,
        seed: 0,
        repeats: 1,
        bins: pairs.iter().map(|&p| vec![p]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub sequences: u64,
    pub trials: u64,
    /// Wall-clock time of one execution, in seconds.
    pub per_trial_s: f64,
}

/// 1.28 ms per execution puts 22,630,400 executions just over 8 hours.
pub const DEFAULT_PER_TRIAL_S: f64 = 1.28e-3;

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            sequences: 100,
            trials: 1024,
            per_trial_s: DEFAULT_PER_TRIAL_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub experiments: usize,
    pub executions: u64,
    pub wall_time_s: f64,
}

impl CostEstimate {
    pub fn wall_time_hours(&self) -> f64 {
        self.wall_time_s / 3600.0
    }
}

pub fn estimate_cost(experiments: usize, params: &CostParams) -> CostEstimate {
    let executions = experiments as u64 * params.sequences * params.trials;
    CostEstimate {
        experiments,
        executions,
        wall_time_s: executions as f64 * params.per_trial_s,
    }
}

/// Result of characterizing one pair by SRB: fitted conditional errors in
/// both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCharacterization {
    pub pair: SrbPair,
    pub gi_given_gj: RbFit,
    pub gj_given_gi: RbFit,
}

#[derive(Debug)]
pub struct PairFailure {
    pub pair: SrbPair,
    pub error: CharacterizationError,
}

/// Simulates SRB on every pair of the plan against `truth` and fits the
/// curves. Each pair draws from its own seed derived from `seed`.
pub fn characterize_plan(
    truth: &DeviceModel,
    plan: &ExperimentPlan,
    config: &RbConfig,
    seed: u64,
) -> (Vec<PairCharacterization>, Vec<PairFailure>) {
    use rayon::prelude::*;

    let pairs: Vec<SrbPair> = plan.pairs().collect();
    let results: Vec<_> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &pair)| {
            let sub = crate::seeds::derive(seed, k as u64);
            let run = || -> CharacterizationResult<PairCharacterization> {
                let curves = simulate_srb(truth, pair, SrbMode::Simultaneous, config, sub)?;
                let fi = fit_rb(&curves[0].points)?;
                let fj = fit_rb(&curves[1].points)?;
                Ok(PairCharacterization {
                    pair,
                    gi_given_gj: fi,
                    gj_given_gi: fj,
                })
            };
            (pair, run())
        })
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (pair, r) in results {
        match r {
            Ok(c) => ok.push(c),
            Err(error) => failed.push(PairFailure { pair, error }),
        }
    }
    (ok, failed)
}

/// Conditional table holding both directions of every characterized pair.
pub fn conditional_table(results: &[PairCharacterization]) -> ConditionalErrorTable {
    let mut table = ConditionalErrorTable::new();
    for r in results {
        let clamp = |e: f64| e.clamp(1e-9, 1.0 - 1e-9);
        table.insert(r.pair.gi, r.pair.gj, clamp(r.gi_given_gj.cx_error));
        table.insert(r.pair.gj, r.pair.gi, clamp(r.gj_given_gi.cx_error));
    }
    table
}

//! Time-stepped Monte-Carlo simulation of mobile UEs choosing modes.

pub mod engine;
pub mod mobility;
pub mod stats;
pub mod sweep;
pub mod topology;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ahp::{RankTable, Slice};
use crate::ldpc::LdpcError;
use crate::radio::{PhyParams, RadioError};
use crate::selection::{SelectParams, SelectorKind};

pub use engine::{run, run_on, RunSummary, StepRecord};
pub use stats::{aggregate, Aggregate};
pub use sweep::{run_sweep, SweepPlan, SweepResult, SweepVar};
pub use topology::{place, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("need at least 2 runs to aggregate, got {0}")]
    InsufficientRuns(usize),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
}

/// `engine.*` config keys.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineParams {
    pub area_m: (f64, f64),
    pub n_ue: usize,
    pub n_enb: usize,
    pub n_gnb: usize,
    pub steps: usize,
    pub dt_s: f64,
    pub runs: usize,
    pub speed_mps: f64,
    pub node_capacity: f64,
    pub packet_bits: f64,
    /// Decode one LDPC block per hop and packet instead of reading BER and
    /// block errors off the calibration curves.
    pub per_packet_decode: bool,
    /// Worker threads for sweeps; 0 picks the machine default.
    pub workers: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            area_m: (1000.0, 1000.0),
            n_ue: 60,
            n_enb: 1,
            n_gnb: 2,
            steps: 100,
            dt_s: 1.0,
            runs: 10,
            speed_mps: 6.0,
            node_capacity: 50.0,
            packet_bits: 12_000.0,
            per_packet_decode: false,
            workers: 0,
        }
    }
}

/// Everything one run needs besides the calibration curves and a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub engine: EngineParams,
    pub phy: PhyParams,
    pub select: SelectParams,
    pub selector: SelectorKind,
    pub slice: Slice,
    /// Static per-option scores for the proposed selector.
    pub rank: RankTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kpi {
    Throughput,
    Ber,
    Latency,
    Jitter,
    Handovers,
}

impl Kpi {
    pub const ALL: [Kpi; 5] = [Kpi::Throughput, Kpi::Ber, Kpi::Latency, Kpi::Jitter, Kpi::Handovers];

    pub fn key(self) -> &'static str {
        match self {
            Kpi::Throughput => "throughput_bps",
            Kpi::Ber => "ber",
            Kpi::Latency => "latency_ms",
            Kpi::Jitter => "jitter_ms",
            Kpi::Handovers => "handover_count",
        }
    }
}

impl fmt::Display for Kpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Kpi {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kpi::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| format!("unknown KPI `{s}`"))
    }
}

/// Seed streams under a run seed.
pub(crate) mod stream {
    pub const PLACEMENT: u64 = 1;
    pub const SHADOWING: u64 = 2;
    pub const MOBILITY: u64 = 3;
    pub const CHANNEL: u64 = 4;
}

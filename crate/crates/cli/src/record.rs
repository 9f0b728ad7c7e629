//! Serialisable results of a command invocation.

use seqshare_core::optimize::{MaxBobsResult, SharingResult};
use seqshare_core::robustness::ThresholdResult;
use seqshare_core::seqchain::ValueVector;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// Every setting that influenced the payload; feeding it back reproduces the payload.
    pub config: RunConfig,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Bounds(Vec<BoundRow>),
    Replay(ReplayResult),
    Eval(ValueVector),
    Share(SharingResult),
    MaxBobs(MaxBobsResult),
    Robustness(ThresholdResult),
    Tables(Tables),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub functional: String,
    /// Exact enumerated bound, as a reduced fraction.
    pub enumerated: String,
    pub declared: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayResult {
    pub preset: String,
    pub values: ValueVector,
    pub expected: Vec<f64>,
    pub tolerance: f64,
    pub within_tolerance: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub max_bobs: Vec<MaxBobsRow>,
    pub thresholds: Vec<ThresholdResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBobsRow {
    pub functional: String,
    pub result: MaxBobsResult,
}

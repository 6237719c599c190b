//! Self-describing result records (JSON lines) and the task-seed mix.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Documented, implementation-independent task seed:
/// `splitmix64( splitmix64( splitmix64(master) ^ grid_index ) ^ seed_index )`.
pub fn task_seed(master: u64, grid_index: u64, seed_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ grid_index) ^ seed_index)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    /// `g<grid_index>_s<seed_index>`; stable across runs and resumes.
    pub task_key: String,
    /// "ok" or an error description.
    pub status: String,
    /// grid-point coordinates of this task
    pub grid: BTreeMap<String, f64>,
    /// model parameters (copied so the record re-runs from itself)
    pub params: BTreeMap<String, f64>,
    pub options: BTreeMap<String, String>,
    /// master seed from the config list and the derived per-task seed
    pub seed: u64,
    pub task_seed: u64,
    pub value_re: f64,
    pub value_im: f64,
    pub quantized_value: i64,
    pub deviation: f64,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
    pub wall_time_ms: u64,
    pub code_version: String,
}

impl ResultRecord {
    pub fn key(grid_index: usize, seed_index: usize) -> String {
        format!("g{grid_index}_s{seed_index}")
    }
}

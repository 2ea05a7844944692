//! Simulation output: totals, time series, and the allocation history.

use serde::{Deserialize, Serialize};

use crate::chunk::{ChunkType, TransferParams};
use crate::sched::Algorithm;

/// One per-chunk observation at a period tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub chunk: ChunkType,
    pub channels: u32,
    pub throughput: f64,
    pub remaining: f64,
}

/// Why an allocation changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocReason {
    Initial,
    PhaseStart,
    Completion,
    Periodic,
}

/// One allocation change: `channels` channels (re)assigned to `chunk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocEvent {
    pub time: f64,
    pub reason: AllocReason,
    pub chunk: ChunkType,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<ChunkType>,
    pub channels: u32,
}

/// Completion record for a single file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileCompletion {
    pub id: String,
    pub chunk: ChunkType,
    pub size_bytes: u64,
    pub time: f64,
}

/// Static description plus completion time of one chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSummary {
    pub chunk: ChunkType,
    pub file_count: usize,
    pub total_bytes: u64,
    pub avg_file_size: f64,
    pub params: TransferParams,
    pub completion_time: f64,
}

/// Everything a simulation run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub algorithm: Algorithm,
    pub profile: String,
    pub k_chunks: u32,
    pub max_cc: u32,
    pub file_count: usize,
    pub total_bytes: u64,
    pub total_time: f64,
    pub aggregate_throughput: f64,
    pub chunks: Vec<ChunkSummary>,
    pub samples: Vec<Sample>,
    pub allocations: Vec<AllocEvent>,
    pub file_completions: Vec<FileCompletion>,
    /// Invariant violations caught by the engine's internal audit.
    /// Always empty on a correct run; excluded from serialized output.
    #[serde(skip)]
    pub audit: Vec<String>,
}

impl SimReport {
    /// Exact byte total over completed files; must equal the dataset size.
    pub fn completed_bytes(&self) -> u64 {
        self.file_completions.iter().map(|f| f.size_bytes).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat CSV of the sample series: one row per (tick, chunk).
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("time,chunk,channels,throughput,remaining\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.time, s.chunk, s.channels, s.throughput, s.remaining
            ));
        }
        out
    }
}

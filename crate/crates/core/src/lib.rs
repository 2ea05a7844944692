//! Heuristic protocol tuning for wide-area bulk file transfers.
//!
//! The pipeline: partition a dataset into size-class chunks using
//! bandwidth-derived cutoffs, estimate per-chunk pipelining, parallelism,
//! and concurrency from closed forms, then schedule the chunks with one of
//! three algorithms:
//!
//! - SC transfers chunks sequentially, each with its own parameters;
//! - MC co-schedules chunks, dealing channels round-robin;
//! - ProMC weights the deal by chunk type and size and re-allocates
//!   channels from fast chunks to slow ones at runtime.
//!
//! A deterministic fluid-flow simulator stands in for real transports, so
//! every scheduling decision is reproducible and testable.

pub mod chunk;
pub mod config;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod partition;
pub mod profile;
pub mod sched;
pub mod sim;
pub mod units;

pub use chunk::{Chunk, ChunkType, TransferParams};
pub use config::Config;
pub use dataset::{dataset_stats, scan_directory, Dataset, FileEntry};
pub use error::{Error, Result};
pub use estimator::find_optimal_parameters;
pub use harness::{generate_dataset, run_experiment, DatasetSpec, ExperimentSpec};
pub use partition::{partition_files, PartitionSpec};
pub use profile::NetworkProfile;
pub use sched::{
    allocate_mc, allocate_promc, periodic_reallocate, plan_sc, reallocate_on_completion,
    Algorithm, ChannelAllocation, DeltaWeights, SchedulerConfig,
};
pub use sim::{run_simulation, simulate_plan, ReferenceModel, SimReport, ThroughputModel};

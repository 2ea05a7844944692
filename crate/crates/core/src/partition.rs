//! Dataset partitioning into up to four chunks by file size.
//!
//! The cutoffs are fractions of the link bandwidth: a file "belongs" to a
//! class by how long the link would need to carry it. With bandwidth in
//! bytes/second the ladder BW/20, BW/5, BW/2 is in bytes, and the Medium
//! class (BW/20, BW/5] is exactly the band where BDP/avg lands between
//! 5*RTT and 20*RTT.

use serde::{Deserialize, Serialize};

use crate::chunk::{Chunk, ChunkType};
use crate::dataset::{dataset_stats, Dataset, FileEntry};
use crate::error::{Error, Result};
use crate::profile::NetworkProfile;

/// The full three-cutoff ladder for a bandwidth, in bytes.
pub fn threshold_ladder(bandwidth: f64) -> [f64; 3] {
    [bandwidth / 20.0, bandwidth / 5.0, bandwidth / 2.0]
}

/// A requested chunk count and the derived byte cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub k: u32,
    pub thresholds: Vec<f64>,
}

impl PartitionSpec {
    /// Derive the first k-1 cutoffs of the ladder for this bandwidth.
    pub fn new(k: u32, bandwidth: f64) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(Error::InvalidChunkCount(k));
        }
        let ladder = threshold_ladder(bandwidth);
        Ok(Self {
            k,
            thresholds: ladder[..(k as usize - 1)].to_vec(),
        })
    }

    /// Bucket index for a size. Sizes exactly on a cutoff go to the lower
    /// bucket, matching the half-open (lo, hi] class intervals.
    pub fn bucket_of(&self, size: f64) -> usize {
        self.thresholds.iter().take_while(|t| size > **t).count()
    }
}

/// Classify an average size against the full ladder (the single-chunk case).
fn classify_by_average(avg: f64, bandwidth: f64) -> ChunkType {
    let ladder = threshold_ladder(bandwidth);
    let idx = ladder.iter().take_while(|t| avg > **t).count();
    ChunkType::SIZE_ORDER[idx]
}

/// Split a dataset into up to `k` chunks by file size.
///
/// Every file lands in exactly one chunk; empty buckets are dropped, so
/// fewer than `k` chunks may come back. File order within a chunk is
/// manifest order. For `k = 1` the whole dataset forms one chunk whose
/// type comes from its average file size.
pub fn partition_files(ds: &Dataset, profile: &NetworkProfile, k: u32) -> Result<Vec<Chunk>> {
    let (_, _, avg) = dataset_stats(ds)?;
    let spec = PartitionSpec::new(k, profile.bandwidth())?;

    if k == 1 {
        let chunk_type = classify_by_average(avg, profile.bandwidth());
        return Ok(vec![Chunk::new(chunk_type, ds.files.clone())?]);
    }

    let mut buckets: Vec<Vec<FileEntry>> = vec![Vec::new(); k as usize];
    for f in &ds.files {
        buckets[spec.bucket_of(f.size_bytes as f64)].push(f.clone());
    }

    let mut chunks = Vec::new();
    for (idx, files) in buckets.into_iter().enumerate() {
        if !files.is_empty() {
            chunks.push(Chunk::new(ChunkType::SIZE_ORDER[idx], files)?);
        }
    }
    Ok(chunks)
}

/// Partition the files of one chunk again under the same spec.
/// Used to check idempotence; returns the chunks produced.
pub fn repartition_chunk(chunk: &Chunk, profile: &NetworkProfile, k: u32) -> Result<Vec<Chunk>> {
    let ds = Dataset::new("repartition", chunk.files.clone())?;
    partition_files(&ds, profile, k)
}

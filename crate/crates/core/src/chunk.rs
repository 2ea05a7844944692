//! Chunks: groups of similar-sized files scheduled under one parameter set.

use serde::{Deserialize, Serialize};

use crate::dataset::FileEntry;
use crate::error::{Error, Result};

/// Size class of a chunk, ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChunkType {
    Small,
    Medium,
    Large,
    Huge,
}

impl ChunkType {
    /// Ascending size order: Small, Medium, Large, Huge.
    pub const SIZE_ORDER: [ChunkType; 4] = [
        ChunkType::Small,
        ChunkType::Medium,
        ChunkType::Large,
        ChunkType::Huge,
    ];

    /// Fixed round-robin priority used when dealing channels to chunks.
    pub const PRIORITY_ORDER: [ChunkType; 4] = [
        ChunkType::Huge,
        ChunkType::Small,
        ChunkType::Large,
        ChunkType::Medium,
    ];

    /// Index into the size order; doubles as an array key.
    pub fn index(self) -> usize {
        match self {
            ChunkType::Small => 0,
            ChunkType::Medium => 1,
            ChunkType::Large => 2,
            ChunkType::Huge => 3,
        }
    }

    /// Position in the round-robin priority order (lower deals first).
    pub fn priority_rank(self) -> usize {
        Self::PRIORITY_ORDER
            .iter()
            .position(|t| *t == self)
            .expect("all chunk types ranked")
    }

    pub fn name(self) -> &'static str {
        match self {
            ChunkType::Small => "small",
            ChunkType::Medium => "medium",
            ChunkType::Large => "large",
            ChunkType::Huge => "huge",
        }
    }
}

impl std::fmt::Display for ChunkType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The tuned (pipelining, parallelism, concurrency) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferParams {
    /// Commands queued ahead on the control channel; 0 means none.
    pub pipelining: u32,
    /// Data streams per file; at least 1.
    pub parallelism: u32,
    /// Simultaneous file transfers; at least 1.
    pub concurrency: u32,
}

impl TransferParams {
    pub fn new(pipelining: u32, parallelism: u32, concurrency: u32) -> Result<Self> {
        if parallelism == 0 {
            return Err(Error::InvalidParameter("parallelism must be >= 1".into()));
        }
        if concurrency == 0 {
            return Err(Error::InvalidParameter("concurrency must be >= 1".into()));
        }
        Ok(Self {
            pipelining,
            parallelism,
            concurrency,
        })
    }
}

/// A typed group of files with derived statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_type: ChunkType,
    pub files: Vec<FileEntry>,
    pub total_size: u64,
    pub avg_file_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<TransferParams>,
}

impl Chunk {
    /// Build a chunk; statistics are recomputed here, never trusted.
    pub fn new(chunk_type: ChunkType, files: Vec<FileEntry>) -> Result<Self> {
        if files.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let total_size: u64 = files.iter().map(|f| f.size_bytes).sum();
        let avg_file_size = total_size as f64 / files.len() as f64;
        Ok(Self {
            chunk_type,
            files,
            total_size,
            avg_file_size,
            params: None,
        })
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn with_params(mut self, params: TransferParams) -> Self {
        self.params = Some(params);
        self
    }
}

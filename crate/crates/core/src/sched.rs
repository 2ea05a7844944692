//! Chunk scheduling: SC, MC, and ProMC as pure decision procedures.
//!
//! Nothing here touches the transport. The simulator (or a real executor)
//! drives these functions from its events: initial allocation at start,
//! completion handoff when a chunk drains, and the periodic fast-to-slow
//! move for ProMC.

use serde::{Deserialize, Serialize};

use crate::chunk::{Chunk, ChunkType};
use crate::error::{Error, Result};
use crate::estimator::params_for_chunk;
use crate::profile::NetworkProfile;

/// Which scheduling algorithm drives a transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sc,
    Mc,
    #[serde(rename = "promc")]
    ProMc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sc => "sc",
            Algorithm::Mc => "mc",
            Algorithm::ProMc => "promc",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Algorithm::Sc),
            "mc" => Ok(Algorithm::Mc),
            "promc" => Ok(Algorithm::ProMc),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-type priority coefficients for ProMC weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWeights {
    pub small: f64,
    pub medium: f64,
    pub large: f64,
    pub huge: f64,
}

impl DeltaWeights {
    pub fn get(&self, t: ChunkType) -> f64 {
        match t {
            ChunkType::Small => self.small,
            ChunkType::Medium => self.medium,
            ChunkType::Large => self.large,
            ChunkType::Huge => self.huge,
        }
    }
}

impl Default for DeltaWeights {
    /// {6, 3, 2, 1} for {Small, Medium, Large, Huge}.
    fn default() -> Self {
        Self { small: 6.0, medium: 3.0, large: 2.0, huge: 1.0 }
    }
}

/// Scheduler knobs. Defaults follow the published constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub algorithm: Algorithm,
    pub k_chunks: u32,
    pub max_cc: u32,
    pub delta: DeltaWeights,
    /// Seconds between ETA snapshots (and report samples).
    pub realloc_period: f64,
    /// The slow chunk must be expected to run at least this many times
    /// longer than the fast one before a channel moves.
    pub realloc_ratio: f64,
    /// Consecutive periods the ratio must hold.
    pub realloc_consecutive: u32,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Mc,
            k_chunks: 2,
            max_cc: 8,
            delta: DeltaWeights::default(),
            realloc_period: 5.0,
            realloc_ratio: 2.0,
            realloc_consecutive: 3,
        }
    }
}

impl SchedulerConfig {
    pub fn new(algorithm: Algorithm, k_chunks: u32, max_cc: u32) -> Result<Self> {
        let cfg = Self {
            algorithm,
            k_chunks,
            max_cc,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.k_chunks) {
            return Err(Error::InvalidChunkCount(self.k_chunks));
        }
        if self.max_cc == 0 {
            return Err(Error::InvalidParameter("max_cc must be at least 1".into()));
        }
        if !self.realloc_period.is_finite() || self.realloc_period <= 0.0 {
            return Err(Error::InvalidParameter("realloc_period must be positive".into()));
        }
        if !self.realloc_ratio.is_finite() || self.realloc_ratio <= 0.0 {
            return Err(Error::InvalidParameter("realloc_ratio must be positive".into()));
        }
        if self.realloc_consecutive == 0 {
            return Err(Error::InvalidParameter("realloc_consecutive must be at least 1".into()));
        }
        for t in ChunkType::SIZE_ORDER {
            if !self.delta.get(t).is_finite() || self.delta.get(t) <= 0.0 {
                return Err(Error::InvalidParameter(format!("delta weight for {t} must be positive")));
            }
        }
        Ok(())
    }
}

/// Channel counts per chunk type. Indexed by `ChunkType::index()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChannelAllocation(pub [u32; 4]);

impl ChannelAllocation {
    pub fn get(&self, t: ChunkType) -> u32 {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: ChunkType, n: u32) {
        self.0[t.index()] = n;
    }

    pub fn add(&mut self, t: ChunkType, n: u32) {
        self.0[t.index()] += n;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Live progress of a chunk as seen by the scheduler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkProgress {
    pub remaining_bytes: f64,
    /// Sum of the chunk's channel rates right now.
    pub current_throughput: f64,
}

impl ChunkProgress {
    /// Estimated completion time; infinite with no throughput, so a starved
    /// chunk is always first in line to receive channels.
    pub fn eta(&self) -> f64 {
        if self.remaining_bytes <= 0.0 {
            0.0
        } else if self.current_throughput > 0.0 {
            self.remaining_bytes / self.current_throughput
        } else {
            f64::INFINITY
        }
    }
}

/// One periodic ETA observation: per-type ETA, `None` for finished or
/// absent chunks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSnapshot {
    pub etas: [Option<f64>; 4],
}

impl EtaSnapshot {
    pub fn get(&self, t: ChunkType) -> Option<f64> {
        self.etas[t.index()]
    }
}

/// Attach estimator parameters to every chunk.
pub fn assign_params(chunks: Vec<Chunk>, profile: &NetworkProfile) -> Result<Vec<Chunk>> {
    chunks
        .into_iter()
        .map(|c| {
            let params = params_for_chunk(&c, profile)?;
            Ok(c.with_params(params))
        })
        .collect()
}

/// SC plan: chunks in ascending size order, each with its own parameters.
/// The execution contract is strictly one chunk at a time.
pub fn plan_sc(chunks: Vec<Chunk>, profile: &NetworkProfile) -> Result<Vec<Chunk>> {
    let mut planned = assign_params(chunks, profile)?;
    planned.sort_by_key(|c| c.chunk_type.index());
    Ok(planned)
}

/// MC allocation: deal channels one at a time cycling Huge, Small, Large,
/// Medium, skipping absent chunks, until the budget is spent.
pub fn allocate_mc(chunks: &[Chunk], max_cc: u32) -> ChannelAllocation {
    let mut alloc = ChannelAllocation::default();
    let present: Vec<ChunkType> = ChunkType::PRIORITY_ORDER
        .iter()
        .copied()
        .filter(|t| chunks.iter().any(|c| c.chunk_type == *t))
        .collect();
    if present.is_empty() {
        return alloc;
    }
    let mut next = 0usize;
    for _ in 0..max_cc {
        alloc.add(present[next], 1);
        next = (next + 1) % present.len();
    }
    alloc
}

/// ProMC allocation: proportional to delta-weighted chunk size, floored,
/// with leftovers going to the largest fractional remainders (ties in
/// round-robin priority order). When the budget covers every chunk, each
/// one is guaranteed at least one channel, topped up from the largest
/// allocation.
pub fn allocate_promc(chunks: &[Chunk], max_cc: u32, delta: &DeltaWeights) -> ChannelAllocation {
    let mut alloc = ChannelAllocation::default();
    if chunks.is_empty() {
        return alloc;
    }

    let weights: Vec<(ChunkType, f64)> = chunks
        .iter()
        .map(|c| (c.chunk_type, delta.get(c.chunk_type) * c.total_size as f64))
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();

    let mut remainders: Vec<(ChunkType, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0u32;
    for (t, w) in &weights {
        let share = w / total * max_cc as f64;
        let floor = share.floor() as u32;
        alloc.set(*t, floor);
        assigned += floor;
        remainders.push((*t, share - share.floor()));
    }

    // Leftover channels from flooring: largest remainder first.
    let mut leftover = max_cc - assigned;
    remainders.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then(a.0.priority_rank().cmp(&b.0.priority_rank()))
    });
    for (t, _) in &remainders {
        if leftover == 0 {
            break;
        }
        alloc.add(*t, 1);
        leftover -= 1;
    }

    // A zero-channel chunk would never start; top it up from the fattest
    // allocation whenever the budget allows one channel per chunk.
    if max_cc as usize >= chunks.len() {
        let starved = |alloc: &ChannelAllocation| {
            ChunkType::PRIORITY_ORDER
                .iter()
                .copied()
                .find(|t| weights.iter().any(|(wt, _)| wt == t) && alloc.get(*t) == 0)
        };
        while let Some(recipient) = starved(&alloc) {
            let donor = weights
                .iter()
                .map(|(t, _)| *t)
                .max_by(|a, b| {
                    alloc
                        .get(*a)
                        .cmp(&alloc.get(*b))
                        .then(a.priority_rank().cmp(&b.priority_rank()))
                })
                .expect("chunks non-empty");
            alloc.add(recipient, 1);
            alloc.set(donor, alloc.get(donor) - 1);
        }
    }

    alloc
}

/// Initial allocation for a concurrent algorithm.
pub fn initial_allocation(
    algorithm: Algorithm,
    chunks: &[Chunk],
    max_cc: u32,
    delta: &DeltaWeights,
) -> ChannelAllocation {
    match algorithm {
        Algorithm::Mc => allocate_mc(chunks, max_cc),
        Algorithm::ProMc => allocate_promc(chunks, max_cc, delta),
        Algorithm::Sc => ChannelAllocation::default(),
    }
}

/// Move every channel of a finished chunk, one at a time, each to the
/// unfinished chunk with the largest ETA at that moment. `eta` estimates a
/// chunk's completion time given a hypothetical channel count; it is
/// re-evaluated after every move. Returns the new allocation and the move
/// targets in order.
pub fn reallocate_on_completion(
    alloc: &ChannelAllocation,
    finished: ChunkType,
    unfinished: &[ChunkType],
    mut eta: impl FnMut(ChunkType, u32) -> f64,
) -> (ChannelAllocation, Vec<ChunkType>) {
    let mut next = *alloc;
    let freed = next.get(finished);
    next.set(finished, 0);

    let mut moves = Vec::with_capacity(freed as usize);
    if unfinished.is_empty() {
        return (next, moves);
    }

    for _ in 0..freed {
        let target = unfinished
            .iter()
            .copied()
            .max_by(|a, b| {
                let ea = eta_or_inf(&mut eta, *a, next.get(*a));
                let eb = eta_or_inf(&mut eta, *b, next.get(*b));
                // Ties go to the earlier chunk in priority order.
                ea.partial_cmp(&eb)
                    .unwrap()
                    .then(b.priority_rank().cmp(&a.priority_rank()))
            })
            .expect("unfinished non-empty");
        next.add(target, 1);
        moves.push(target);
    }
    (next, moves)
}

fn eta_or_inf(eta: &mut impl FnMut(ChunkType, u32) -> f64, t: ChunkType, channels: u32) -> f64 {
    if channels == 0 {
        f64::INFINITY
    } else {
        eta(t, channels)
    }
}

/// ProMC periodic rule: move one channel from the currently fastest chunk
/// to the currently slowest, if the slow ETA has been at least
/// `realloc_ratio` times the fast ETA in each of the last
/// `realloc_consecutive` snapshots and the donor keeps a channel.
pub fn periodic_reallocate(
    history: &[EtaSnapshot],
    alloc: &ChannelAllocation,
    cfg: &SchedulerConfig,
) -> Option<(ChunkType, ChunkType)> {
    let window = cfg.realloc_consecutive as usize;
    if history.len() < window {
        return None;
    }
    let recent = &history[history.len() - window..];
    let current = recent.last()?;

    let live: Vec<(ChunkType, f64)> = ChunkType::SIZE_ORDER
        .iter()
        .copied()
        .filter_map(|t| current.get(t).map(|e| (t, e)))
        .collect();
    if live.len() < 2 {
        return None;
    }

    let fastest = live
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.priority_rank().cmp(&b.0.priority_rank())))?
        .0;
    let slowest = live
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.priority_rank().cmp(&a.0.priority_rank())))?
        .0;
    if fastest == slowest {
        return None;
    }
    if alloc.get(fastest) < 2 {
        return None;
    }

    let held = recent.iter().all(|snap| {
        match (snap.get(fastest), snap.get(slowest)) {
            (Some(fast), Some(slow)) => slow >= cfg.realloc_ratio * fast && fast.is_finite(),
            _ => false,
        }
    });
    if held {
        Some((fastest, slowest))
    } else {
        None
    }
}

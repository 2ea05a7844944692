//! Deterministic fluid-flow transfer simulation.
//!
//! Channels move whole files at model-given rates; the engine advances
//! time between events (file completions, per-file gaps, reconnect
//! delays, period ticks) and replays the scheduler's decisions exactly.

mod engine;
mod report;

pub use engine::{run_simulation, simulate_plan};
pub use report::{AllocEvent, AllocReason, ChunkSummary, FileCompletion, Sample, SimReport};

use serde::{Deserialize, Serialize};

use crate::chunk::TransferParams;
use crate::profile::NetworkProfile;

/// Rate and overhead model a simulation runs against.
///
/// `rate` must be positive for valid inputs and non-increasing in the
/// total number of active channels; `per_file_gap` must be non-increasing
/// in pipelining.
pub trait ThroughputModel: Sync {
    /// Instantaneous transfer rate (bytes/second) for one channel moving a
    /// file of `file_size` bytes while `n_active` channels are busy in total.
    fn rate(&self, file_size: f64, params: &TransferParams, profile: &NetworkProfile, n_active: u32) -> f64;

    /// Idle time between consecutive files on one channel.
    fn per_file_gap(&self, params: &TransferParams, profile: &NetworkProfile) -> f64;

    /// Setup cost charged when a channel moves to a chunk with different
    /// parameters (connections cannot change parallelism in place).
    fn reconnect_delay(&self, params: &TransferParams, profile: &NetworkProfile) -> f64 {
        profile.rtt() * params.parallelism as f64
    }
}

/// Default model: per-stream buffer ceiling, fair shares of the link and of
/// the aggregate disk, and a fixed per-file startup cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceModel {
    /// Startup cost expressed in bytes: a file "costs" size + k_io to move,
    /// which halves the rate at file_size == k_io and vanishes for large files.
    pub k_io: u64,
    /// Reconnect delay in units of RTT (scaled by the new chunk's parallelism).
    pub reconnect_rtts: f64,
}

impl Default for ReferenceModel {
    fn default() -> Self {
        Self {
            k_io: 4_000_000,
            reconnect_rtts: 1.0,
        }
    }
}

impl ThroughputModel for ReferenceModel {
    fn rate(&self, file_size: f64, params: &TransferParams, profile: &NetworkProfile, n_active: u32) -> f64 {
        let n = n_active.max(1) as f64;
        let buffer_limit = params.parallelism as f64 * profile.buffer_size() as f64 / profile.rtt();
        let bw_share = profile.bandwidth() / n;
        let io_share = profile.io_cap() / n;
        let penalty = file_size / (file_size + self.k_io as f64);
        buffer_limit.min(bw_share).min(io_share) * penalty
    }

    fn per_file_gap(&self, params: &TransferParams, profile: &NetworkProfile) -> f64 {
        profile.rtt() / (params.pipelining as f64 + 1.0)
    }

    fn reconnect_delay(&self, params: &TransferParams, profile: &NetworkProfile) -> f64 {
        self.reconnect_rtts * profile.rtt() * params.parallelism as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MB: u64 = 1_000_000;

    fn params(pipelining: u32, parallelism: u32) -> TransferParams {
        TransferParams::new(pipelining, parallelism, 1).unwrap()
    }

    #[test]
    fn buffer_limited_until_parallelism_covers_it() {
        // 32 MB buffer over 40 ms moves 800 MB/s per stream; one stream is
        // buffer-limited below the 1.25 GB/s link, two streams hit the link.
        let p = NetworkProfile::new("t", 1.25e9, 0.040, 32 * MB, 8).unwrap();
        let m = ReferenceModel::default();
        let huge = 100e9;

        let one = m.rate(huge, &params(0, 1), &p, 1);
        assert_relative_eq!(one, 8e8, max_relative = 1e-3);

        let two = m.rate(huge, &params(0, 2), &p, 1);
        assert_relative_eq!(two, 1.25e9, max_relative = 1e-3);
    }

    #[test]
    fn startup_penalty_algebra() {
        let p = NetworkProfile::new("t", 1.25e9, 0.040, 64 * MB, 8).unwrap();
        let m = ReferenceModel::default();
        // At file_size == k_io the rate exactly halves.
        let full = m.rate(1e15, &params(0, 1), &p, 1);
        let half = m.rate(m.k_io as f64, &params(0, 1), &p, 1);
        assert_relative_eq!(half, full / 2.0 * (1e15 / (1e15 + m.k_io as f64)).recip(), max_relative = 1e-6);
        // Enormous files approach the un-penalized rate.
        assert!(full / (p.bandwidth()) > 0.999_999);
    }

    #[test]
    fn constrained_buffers_reward_concurrency() {
        // 4 MB buffers over 45 ms cap a channel near parallelism * 88.9 MB/s,
        // so aggregate throughput keeps rising with additional channels.
        let p = NetworkProfile::new("t", 1.25e9, 0.045, 4 * MB, 8).unwrap();
        let m = ReferenceModel::default();
        let pars = params(0, 4);
        let single = m.rate(100e9, &pars, &p, 1);
        assert_relative_eq!(single, 4.0 * 4e6 / 0.045, max_relative = 1e-3);

        let agg = |n: u32| n as f64 * m.rate(100e9, &pars, &p, n);
        assert!(agg(2) > agg(1));
        assert!(agg(4) > agg(2));
    }

    #[test]
    fn gap_shrinks_with_pipelining() {
        let p = NetworkProfile::new("t", 1.25e9, 0.040, 32 * MB, 8).unwrap();
        let m = ReferenceModel::default();
        assert_eq!(m.per_file_gap(&params(0, 1), &p), 0.040);
        assert_eq!(m.per_file_gap(&params(9, 1), &p), 0.004);
    }

    #[test]
    fn rate_non_increasing_in_active_channels() {
        let p = NetworkProfile::new("t", 1.25e9, 0.040, 32 * MB, 8).unwrap();
        let m = ReferenceModel::default();
        let mut last = f64::INFINITY;
        for n in 1..32 {
            let r = m.rate(1e9, &params(0, 2), &p, n);
            assert!(r > 0.0 && r <= last);
            last = r;
        }
    }
}

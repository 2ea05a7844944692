//! Network profile: the per-path constants every heuristic keys off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default aggregate disk cap relative to bandwidth when none is given.
/// Keeps the network the bottleneck unless an experiment wants otherwise.
const DEFAULT_IO_HEADROOM: f64 = 1.25;

/// Immutable description of a transfer path between two end systems.
///
/// All fields are base units: bytes, bytes/second, seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProfile {
    name: String,
    bandwidth: f64,
    rtt: f64,
    buffer_size: u64,
    max_cc: u32,
    io_cap: f64,
}

impl NetworkProfile {
    /// Build a profile with the default I/O cap (1.25 x bandwidth).
    pub fn new(name: &str, bandwidth: f64, rtt: f64, buffer_size: u64, max_cc: u32) -> Result<Self> {
        Self::with_io_cap(name, bandwidth, rtt, buffer_size, max_cc, bandwidth * DEFAULT_IO_HEADROOM)
    }

    pub fn with_io_cap(
        name: &str,
        bandwidth: f64,
        rtt: f64,
        buffer_size: u64,
        max_cc: u32,
        io_cap: f64,
    ) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidProfile(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if !(rtt > 0.0 && rtt.is_finite()) {
            return Err(Error::InvalidProfile(format!("rtt must be positive, got {rtt}")));
        }
        if buffer_size == 0 {
            return Err(Error::InvalidProfile("buffer_size must be positive".into()));
        }
        if max_cc == 0 {
            return Err(Error::InvalidProfile("max_cc must be at least 1".into()));
        }
        if !(io_cap > 0.0 && io_cap.is_finite()) {
            return Err(Error::InvalidProfile(format!("io_cap must be positive, got {io_cap}")));
        }
        Ok(Self {
            name: name.to_string(),
            bandwidth,
            rtt,
            buffer_size,
            max_cc,
            io_cap,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Bytes per second.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Round-trip time in seconds.
    pub fn rtt(&self) -> f64 {
        self.rtt
    }

    /// Per-stream TCP buffer size in bytes.
    pub fn buffer_size(&self) -> u64 {
        self.buffer_size
    }

    /// User budget for total concurrent channels.
    pub fn max_cc(&self) -> u32 {
        self.max_cc
    }

    /// Aggregate end-system disk cap, bytes per second.
    pub fn io_cap(&self) -> f64 {
        self.io_cap
    }

    /// Bandwidth-delay product in bytes, rounded to the nearest byte.
    /// Always derived, never stored.
    pub fn bdp(&self) -> u64 {
        (self.bandwidth * self.rtt).round() as u64
    }

    /// Copy of this profile with a different channel budget.
    pub fn with_max_cc(&self, max_cc: u32) -> Result<Self> {
        Self::with_io_cap(&self.name, self.bandwidth, self.rtt, self.buffer_size, max_cc, self.io_cap)
    }
}

/// Profiles for the published test environments, usable as fixtures.
pub mod fixtures {
    use super::NetworkProfile;

    const GBPS: f64 = 1e9 / 8.0;
    const MB: u64 = 1_000_000;

    /// XSEDE Lonestar-Gordon: 10 Gbps, 60 ms, 32 MB buffers (BDP 75 MB).
    pub fn lonestar_gordon() -> NetworkProfile {
        NetworkProfile::new("lonestar-gordon", 10.0 * GBPS, 0.060, 32 * MB, 8).unwrap()
    }

    /// LONI Queenbee-Painter: 10 ms, 16 MB buffers. The quoted BDP of
    /// 9 MB implies an effective bandwidth of 7.2 Gbps over this path, so
    /// that is what the fixture carries.
    pub fn queenbee_painter() -> NetworkProfile {
        NetworkProfile::new("queenbee-painter", 7.2 * GBPS, 0.010, 16 * MB, 8).unwrap()
    }

    /// BlueWaters-Stampede: 10 Gbps per link, 32 ms, 32 MB buffers (BDP 40 MB).
    pub fn bluewaters_stampede() -> NetworkProfile {
        NetworkProfile::new("bluewaters-stampede", 10.0 * GBPS, 0.032, 32 * MB, 8).unwrap()
    }

    /// Stampede-Comet: 10 Gbps, 40 ms, 32 MB buffers (BDP 50 MB).
    pub fn stampede_comet() -> NetworkProfile {
        NetworkProfile::new("stampede-comet", 10.0 * GBPS, 0.040, 32 * MB, 8).unwrap()
    }

    /// SuperMIC-Bridges: 10 Gbps, 45 ms, but only 4 MB buffers (BDP 56 MB).
    pub fn supermic_bridges() -> NetworkProfile {
        NetworkProfile::new("supermic-bridges", 10.0 * GBPS, 0.045, 4 * MB, 8).unwrap()
    }

    /// Local-area pair: 10 Gbps, 0.2 ms, 1 MB buffers (BDP 0.25 MB).
    pub fn lan() -> NetworkProfile {
        NetworkProfile::new("lan", 10.0 * GBPS, 0.0002, MB, 8).unwrap()
    }

    /// All published profiles in table order.
    pub fn all() -> Vec<NetworkProfile> {
        vec![
            lonestar_gordon(),
            queenbee_painter(),
            bluewaters_stampede(),
            stampede_comet(),
            supermic_bridges(),
            lan(),
        ]
    }
}

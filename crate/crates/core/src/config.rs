//! TOML configuration with human units at the boundary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::NetworkProfile;
use crate::sched::{Algorithm, DeltaWeights, SchedulerConfig};
use crate::sim::ReferenceModel;
use crate::units::{
    format_bytes, format_duration, format_rate, parse_bytes, parse_duration, parse_rate,
};

/// Resolved configuration: profile, scheduler knobs, and model overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub profile: NetworkProfile,
    pub scheduler: SchedulerConfig,
    pub model: ReferenceModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawConfig {
    network: RawNetwork,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheduler: Option<RawScheduler>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<RawModel>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawNetwork {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    bandwidth: String,
    rtt: String,
    buffer: String,
    max_cc: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    io_cap: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawScheduler {
    #[serde(skip_serializing_if = "Option::is_none")]
    algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chunks: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realloc_period: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realloc_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realloc_consecutive: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<DeltaWeights>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    k_io: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconnect_rtts: Option<f64>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;

        let n = &raw.network;
        let name = n.name.clone().unwrap_or_else(|| "custom".to_string());
        let bandwidth = parse_rate(&n.bandwidth)?;
        let rtt = parse_duration(&n.rtt)?;
        let buffer = parse_bytes(&n.buffer)?;
        let profile = match &n.io_cap {
            Some(cap) => NetworkProfile::with_io_cap(&name, bandwidth, rtt, buffer, n.max_cc, parse_rate(cap)?)?,
            None => NetworkProfile::new(&name, bandwidth, rtt, buffer, n.max_cc)?,
        };

        let s = raw.scheduler.unwrap_or_default();
        let mut scheduler = SchedulerConfig {
            max_cc: n.max_cc,
            ..SchedulerConfig::default()
        };
        if let Some(a) = &s.algorithm {
            scheduler.algorithm = a.parse()?;
        }
        if let Some(k) = s.chunks {
            scheduler.k_chunks = k;
        }
        if let Some(p) = &s.realloc_period {
            scheduler.realloc_period = parse_duration(p)?;
        }
        if let Some(r) = s.realloc_ratio {
            scheduler.realloc_ratio = r;
        }
        if let Some(c) = s.realloc_consecutive {
            scheduler.realloc_consecutive = c;
        }
        if let Some(d) = s.delta {
            scheduler.delta = d;
        }
        scheduler.validate()?;

        let m = raw.model.unwrap_or_default();
        let mut model = ReferenceModel::default();
        if let Some(k) = &m.k_io {
            model.k_io = parse_bytes(k)?;
        }
        if let Some(r) = m.reconnect_rtts {
            model.reconnect_rtts = r;
        }

        Ok(Config { profile, scheduler, model })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            network: RawNetwork {
                name: Some(self.profile.name().to_string()),
                bandwidth: format_rate(self.profile.bandwidth()),
                rtt: format_duration(self.profile.rtt()),
                buffer: format_bytes(self.profile.buffer_size()),
                max_cc: self.profile.max_cc(),
                io_cap: Some(format_rate(self.profile.io_cap())),
            },
            scheduler: Some(RawScheduler {
                algorithm: Some(self.scheduler.algorithm.name().to_string()),
                chunks: Some(self.scheduler.k_chunks),
                realloc_period: Some(format_duration(self.scheduler.realloc_period)),
                realloc_ratio: Some(self.scheduler.realloc_ratio),
                realloc_consecutive: Some(self.scheduler.realloc_consecutive),
                delta: Some(self.scheduler.delta),
            }),
            model: Some(RawModel {
                k_io: Some(format_bytes(self.model.k_io)),
                reconnect_rtts: Some(self.model.reconnect_rtts),
            }),
        };
        toml::to_string_pretty(&raw).expect("config serializes")
    }

    /// Apply command-line overrides on top of a loaded config.
    pub fn with_overrides(
        mut self,
        algorithm: Option<Algorithm>,
        k_chunks: Option<u32>,
        max_cc: Option<u32>,
    ) -> Result<Self> {
        if let Some(a) = algorithm {
            self.scheduler.algorithm = a;
        }
        if let Some(k) = k_chunks {
            self.scheduler.k_chunks = k;
        }
        if let Some(cc) = max_cc {
            self.scheduler.max_cc = cc;
            self.profile = self.profile.with_max_cc(cc)?;
        }
        self.scheduler.validate()?;
        Ok(self)
    }
}

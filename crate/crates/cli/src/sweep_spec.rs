//! Experiment spec files: a dataset source, a profile reference, and the
//! sweep axes, all with human units.
//!
//! ```toml
//! profile = "fixtures/profiles/supermic_bridges.toml"
//!
//! [dataset]
//! generator = "mixed"            # or: manifest = "path/to/manifest.json"
//! seed = 7
//! total_size = "8 GB"
//!
//! [sweep]
//! algorithms = ["sc", "mc", "promc"]
//! chunks = [2]
//! max_cc = [4, 8, 16]
//! ```

use std::path::Path;

use serde::Deserialize;

use xfertune::config::Config;
use xfertune::dataset::Dataset;
use xfertune::error::{Error, Result};
use xfertune::harness::{generate_dataset, Bucket, DatasetSpec, ExperimentSpec};
use xfertune::sched::Algorithm;
use xfertune::units::parse_bytes;

#[derive(Deserialize)]
struct SweepFile {
    dataset: RawDataset,
    profile: String,
    sweep: RawSweep,
}

#[derive(Deserialize)]
struct DatasetFile {
    dataset: RawDataset,
}

#[derive(Deserialize)]
struct RawDataset {
    generator: Option<String>,
    manifest: Option<String>,
    seed: Option<u64>,
    total_size: Option<String>,
    size: Option<String>,
    buckets: Option<Vec<RawBucket>>,
}

#[derive(Deserialize)]
struct RawBucket {
    min_size: String,
    max_size: String,
    count: usize,
}

#[derive(Deserialize)]
struct RawSweep {
    algorithms: Vec<String>,
    chunks: Vec<u32>,
    max_cc: Vec<u32>,
}

fn to_spec(raw: &RawDataset) -> Result<DatasetSpec> {
    let seed = raw.seed.unwrap_or(0);
    let total = |what: &str| -> Result<u64> {
        raw.total_size
            .as_deref()
            .ok_or_else(|| Error::Config(format!("{what} needs total_size")))
            .and_then(parse_bytes)
    };
    match raw.generator.as_deref() {
        Some("mixed") => Ok(DatasetSpec::Mixed { seed, total_size: total("mixed")? }),
        Some("small_dominated") | Some("small-dominated") => {
            Ok(DatasetSpec::SmallDominated { seed, total_size: total("small_dominated")? })
        }
        Some("uniform") => {
            let size = raw
                .size
                .as_deref()
                .ok_or_else(|| Error::Config("uniform needs a file size".into()))?;
            Ok(DatasetSpec::Uniform {
                seed,
                total_size: total("uniform")?,
                size: parse_bytes(size)?,
            })
        }
        Some("bucketed") => {
            let raw_buckets = raw
                .buckets
                .as_ref()
                .ok_or_else(|| Error::Config("bucketed needs [[dataset.buckets]] entries".into()))?;
            let buckets = raw_buckets
                .iter()
                .map(|b| {
                    Ok(Bucket {
                        min_size: parse_bytes(&b.min_size)?,
                        max_size: parse_bytes(&b.max_size)?,
                        count: b.count,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let total_size = raw.total_size.as_deref().map(parse_bytes).transpose()?;
            Ok(DatasetSpec::Bucketed { seed, buckets, total_size })
        }
        Some(other) => Err(Error::Config(format!("unknown generator {other:?}"))),
        None => Err(Error::Config("dataset needs a generator or a manifest".into())),
    }
}

/// Parse a standalone dataset spec file (for `gen-dataset --spec`).
pub fn dataset_spec_from_toml(text: &str) -> Result<DatasetSpec> {
    let file: DatasetFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad dataset spec: {e}")))?;
    to_spec(&file.dataset)
}

/// Parse a sweep file and materialize its dataset. Paths are resolved
/// relative to the spec file's directory.
pub fn resolve(text: &str, base: &Path) -> Result<(Dataset, ExperimentSpec)> {
    let file: SweepFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("bad sweep spec: {e}")))?;

    let config = Config::load(&base.join(&file.profile))?;

    let (dataset, ds_spec) = match &file.dataset.manifest {
        Some(path) => (Dataset::load(&base.join(path))?, None),
        None => {
            let spec = to_spec(&file.dataset)?;
            (generate_dataset(&spec)?, Some(spec))
        }
    };

    let algorithms = file
        .sweep
        .algorithms
        .iter()
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>>>()?;
    if algorithms.is_empty() || file.sweep.chunks.is_empty() || file.sweep.max_cc.is_empty() {
        return Err(Error::Config("sweep axes must be non-empty".into()));
    }

    let spec = ExperimentSpec {
        dataset: ds_spec,
        profile: config.profile,
        algorithms,
        k_chunks: file.sweep.chunks,
        max_cc: file.sweep.max_cc,
        model: config.model,
    };
    Ok((dataset, spec))
}

//! Synthetic dataset generators and the experiment sweep runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FileEntry};
use crate::error::{Error, Result};
use crate::profile::NetworkProfile;
use crate::sched::{Algorithm, SchedulerConfig};
use crate::sim::{run_simulation, ReferenceModel, SimReport, ThroughputModel};

/// PRNG identifier written into generated manifests.
const PRNG_NAME: &str = "chacha12";

const MB: u64 = 1_000_000;

/// Size bands for generated datasets, aligned with the 10 Gbps cutoff
/// ladder (62.5 MB / 250 MB / 625 MB).
const MIXED_BANDS: [(u64, u64); 4] = [
    (MB, 16 * MB),
    (63 * MB, 250 * MB),
    (251 * MB, 625 * MB),
    (626 * MB, 5_000 * MB),
];

/// What to generate and how much of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// Four size classes with near-equal byte totals.
    Mixed { seed: u64, total_size: u64 },
    /// Like `Mixed` but the small-file class doubled: 40% of the bytes.
    SmallDominated { seed: u64, total_size: u64 },
    /// Identical files approaching the byte target from below.
    Uniform { seed: u64, total_size: u64, size: u64 },
    /// Exact file counts drawn from explicit size ranges.
    Bucketed {
        seed: u64,
        buckets: Vec<Bucket>,
        #[serde(skip_serializing_if = "Option::is_none")]
        total_size: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub min_size: u64,
    pub max_size: u64,
    pub count: usize,
}

impl DatasetSpec {
    fn seed(&self) -> u64 {
        match self {
            DatasetSpec::Mixed { seed, .. }
            | DatasetSpec::SmallDominated { seed, .. }
            | DatasetSpec::Uniform { seed, .. }
            | DatasetSpec::Bucketed { seed, .. } => *seed,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            DatasetSpec::Mixed { .. } => "mixed",
            DatasetSpec::SmallDominated { .. } => "small_dominated",
            DatasetSpec::Uniform { .. } => "uniform",
            DatasetSpec::Bucketed { .. } => "bucketed",
        }
    }
}

/// Log-uniform size in [lo, hi]: small sizes dominate by count, the way
/// real archives skew.
fn draw_size(rng: &mut ChaCha12Rng, lo: u64, hi: u64) -> u64 {
    let (lo_f, hi_f) = (lo as f64, hi as f64);
    let u: f64 = rng.gen();
    let size = lo_f * (hi_f / lo_f).powf(u);
    (size.round() as u64).clamp(lo, hi)
}

/// Fill one size class up to `target` bytes.
fn fill_band(
    rng: &mut ChaCha12Rng,
    files: &mut Vec<FileEntry>,
    prefix: &str,
    (lo, hi): (u64, u64),
    target: u64,
) {
    let mut total = 0u64;
    let mut n = 0usize;
    while total < target {
        let mut size = draw_size(rng, lo, hi);
        let remaining = target - total;
        // Clamp the last file into the band so totals land close to target.
        if size > remaining {
            if remaining < lo {
                break;
            }
            size = remaining.clamp(lo, hi);
        }
        files.push(FileEntry::new(format!("{prefix}{n:06}"), size));
        total += size;
        n += 1;
    }
}

/// Deterministically generate a dataset from a spec.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed());
    let mut files = Vec::new();

    match spec {
        DatasetSpec::Mixed { total_size, .. } => {
            validate_total(*total_size, &MIXED_BANDS, &[1, 1, 1, 1])?;
            let share = total_size / 4;
            for (band, prefix) in MIXED_BANDS.iter().zip(["s", "m", "l", "h"]) {
                fill_band(&mut rng, &mut files, prefix, *band, share);
            }
        }
        DatasetSpec::SmallDominated { total_size, .. } => {
            validate_total(*total_size, &MIXED_BANDS, &[2, 1, 1, 1])?;
            let share = total_size / 5;
            let targets = [2 * share, share, share, share];
            for ((band, prefix), target) in MIXED_BANDS.iter().zip(["s", "m", "l", "h"]).zip(targets) {
                fill_band(&mut rng, &mut files, prefix, *band, target);
            }
        }
        DatasetSpec::Uniform { total_size, size, .. } => {
            if *size == 0 {
                return Err(Error::InfeasibleSpec("uniform file size must be positive".into()));
            }
            let count = total_size / size;
            if count == 0 {
                return Err(Error::InfeasibleSpec(format!(
                    "total_size {total_size} is smaller than one file of {size}"
                )));
            }
            for n in 0..count {
                files.push(FileEntry::new(format!("u{n:06}"), *size));
            }
        }
        DatasetSpec::Bucketed { buckets, total_size, .. } => {
            if buckets.is_empty() {
                return Err(Error::InfeasibleSpec("no buckets given".into()));
            }
            for b in buckets {
                if b.min_size == 0 || b.min_size > b.max_size {
                    return Err(Error::InfeasibleSpec(format!(
                        "bad bucket range {}..{}",
                        b.min_size, b.max_size
                    )));
                }
            }
            if let Some(target) = total_size {
                let capacity: u64 = buckets.iter().map(|b| b.max_size * b.count as u64).sum();
                if capacity < *target {
                    return Err(Error::InfeasibleSpec(format!(
                        "buckets can hold at most {capacity} bytes, target is {target}"
                    )));
                }
            }
            for (bi, b) in buckets.iter().enumerate() {
                for n in 0..b.count {
                    let size = draw_size(&mut rng, b.min_size, b.max_size);
                    files.push(FileEntry::new(format!("b{bi}-{n:06}"), size));
                }
            }
        }
    }

    if files.is_empty() {
        return Err(Error::InfeasibleSpec("spec generated no files".into()));
    }
    let mut ds = Dataset::new(spec.name(), files)?;
    ds.seed = Some(spec.seed());
    ds.generator = Some(spec.name().to_string());
    ds.prng = Some(PRNG_NAME.to_string());
    Ok(ds)
}

fn validate_total(total: u64, bands: &[(u64, u64); 4], weights: &[u64; 4]) -> Result<()> {
    let denom: u64 = weights.iter().sum();
    for ((lo, _), w) in bands.iter().zip(weights) {
        if total * w / denom < *lo {
            return Err(Error::InfeasibleSpec(format!(
                "total_size {total} cannot fill a size class starting at {lo}"
            )));
        }
    }
    Ok(())
}

/// One run-matrix description: the cross product of algorithms, chunk
/// counts, and channel budgets over one dataset and profile. `dataset` is
/// `None` when the matrix runs over an externally supplied manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: Option<DatasetSpec>,
    pub profile: NetworkProfile,
    pub algorithms: Vec<Algorithm>,
    pub k_chunks: Vec<u32>,
    pub max_cc: Vec<u32>,
    #[serde(default)]
    pub model: ReferenceModel,
}

/// Factor combination for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factors {
    pub algorithm: Algorithm,
    pub k: u32,
    pub max_cc: u32,
}

/// Outcome of one factor combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub factors: Factors,
    pub throughput: f64,
    pub total_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Full experiment result: summary rows plus the underlying reports.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dataset_name: String,
    pub rows: Vec<ExperimentRow>,
    pub reports: Vec<(Factors, SimReport)>,
}

impl ExperimentReport {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// The plot-ready summary table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,k,max_cc,throughput,total_time\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.factors.algorithm, r.factors.k, r.factors.max_cc, r.throughput, r.total_time
            ));
        }
        out
    }
}

/// Run every factor combination of a spec. Runs execute in parallel but
/// results are merged in deterministic factor order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let ds_spec = spec
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("experiment spec has no dataset generator".into()))?;
    let dataset = generate_dataset(ds_spec)?;
    run_experiment_on(&dataset, spec)
}

/// Like `run_experiment` but over an existing dataset (e.g. a manifest).
pub fn run_experiment_on(dataset: &Dataset, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut matrix = Vec::new();
    for algorithm in &spec.algorithms {
        for k in &spec.k_chunks {
            for max_cc in &spec.max_cc {
                matrix.push(Factors {
                    algorithm: *algorithm,
                    k: *k,
                    max_cc: *max_cc,
                });
            }
        }
    }

    let outcomes: Vec<(Factors, Result<SimReport>)> = matrix
        .par_iter()
        .map(|f| {
            let result = SchedulerConfig::new(f.algorithm, f.k, f.max_cc)
                .and_then(|config| run_simulation(dataset, &spec.profile, &config, &spec.model as &dyn ThroughputModel));
            (*f, result)
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut reports = Vec::new();
    for (factors, outcome) in outcomes {
        match outcome {
            Ok(report) => {
                rows.push(ExperimentRow {
                    factors,
                    throughput: report.aggregate_throughput,
                    total_time: report.total_time,
                    error: None,
                });
                reports.push((factors, report));
            }
            Err(e) => rows.push(ExperimentRow {
                factors,
                throughput: 0.0,
                total_time: 0.0,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(ExperimentReport {
        dataset_name: dataset.name.clone(),
        rows,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::fixtures;

    const GB: u64 = 1_000_000_000;

    #[test]
    fn uniform_hits_exact_count() {
        let spec = DatasetSpec::Uniform { seed: 1, total_size: 100 * MB, size: MB };
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.len(), 100);
        assert!(ds.files.iter().all(|f| f.size_bytes == MB));
    }

    #[test]
    fn mixed_fills_four_near_equal_classes() {
        // Four classes around 4 GB each, like the 16 GB chunk-count study.
        let spec = DatasetSpec::Mixed { seed: 7, total_size: 16 * GB };
        let ds = generate_dataset(&spec).unwrap();
        let share = 4 * GB;
        for (band, prefix) in MIXED_BANDS.iter().zip(["s", "m", "l", "h"]) {
            let total: u64 = ds
                .files
                .iter()
                .filter(|f| f.id.starts_with(prefix))
                .map(|f| f.size_bytes)
                .sum();
            // Close to equal: within one max-size file of the share.
            assert!(share - total <= band.1, "{prefix}: {total}");
            assert!(ds
                .files
                .iter()
                .filter(|f| f.id.starts_with(prefix))
                .all(|f| f.size_bytes >= band.0 && f.size_bytes <= band.1));
        }
    }

    #[test]
    fn small_dominated_doubles_the_small_share() {
        let spec = DatasetSpec::SmallDominated { seed: 7, total_size: 10 * GB };
        let ds = generate_dataset(&spec).unwrap();
        let small: u64 = ds
            .files
            .iter()
            .filter(|f| f.id.starts_with('s'))
            .map(|f| f.size_bytes)
            .sum();
        let frac = small as f64 / ds.total_size() as f64;
        assert!((0.36..=0.44).contains(&frac), "small share {frac}");
    }

    #[test]
    fn bucketed_mimics_the_published_mixed_dataset() {
        // 6,232 files spanning 1 MB to 5 GB, skewed toward small files.
        let spec = DatasetSpec::Bucketed {
            seed: 3,
            buckets: vec![
                Bucket { min_size: MB, max_size: 62 * MB, count: 5_800 },
                Bucket { min_size: 63 * MB, max_size: 625 * MB, count: 400 },
                Bucket { min_size: 626 * MB, max_size: 5 * GB, count: 32 },
            ],
            total_size: None,
        };
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.len(), 6_232);
        assert!(ds.files.iter().all(|f| f.size_bytes >= MB && f.size_bytes <= 5 * GB));
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = DatasetSpec::Mixed { seed: 42, total_size: 8 * GB };
        assert_eq!(generate_dataset(&spec).unwrap(), generate_dataset(&spec).unwrap());
        let other = DatasetSpec::Mixed { seed: 43, total_size: 8 * GB };
        assert_ne!(generate_dataset(&spec).unwrap(), generate_dataset(&other).unwrap());
    }

    #[test]
    fn infeasible_specs_error() {
        assert!(generate_dataset(&DatasetSpec::Uniform { seed: 0, total_size: 10, size: 100 }).is_err());
        assert!(generate_dataset(&DatasetSpec::Mixed { seed: 0, total_size: 100 }).is_err());
        assert!(generate_dataset(&DatasetSpec::Bucketed {
            seed: 0,
            buckets: vec![Bucket { min_size: MB, max_size: MB, count: 1 }],
            total_size: Some(100 * MB),
        })
        .is_err());
    }

    #[test]
    fn manifest_totals_match_an_independent_sum() {
        let ds = generate_dataset(&DatasetSpec::Mixed { seed: 11, total_size: 8 * GB }).unwrap();
        let (count, total, avg) = crate::dataset::dataset_stats(&ds).unwrap();

        // Oracle: walk the serialized manifest with a generic JSON reader.
        let value: serde_json::Value = serde_json::from_str(&ds.to_json()).unwrap();
        let entries = value["files"].as_array().unwrap();
        let oracle_total: u64 = entries.iter().map(|e| e["size_bytes"].as_u64().unwrap()).sum();

        assert_eq!(count, entries.len());
        assert_eq!(total, oracle_total);
        assert_eq!(avg, oracle_total as f64 / entries.len() as f64);
    }

    #[test]
    fn chunk_count_study_table_shape() {
        // k in 1..=4, one algorithm, fixed budget, five dataset sizes:
        // twenty rows, the dataset-size study layout.
        let mut rows = 0;
        for total in [4u64, 8, 12, 16, 24] {
            let spec = ExperimentSpec {
                dataset: Some(DatasetSpec::Mixed { seed: 5, total_size: total * GB }),
                profile: fixtures::stampede_comet(),
                algorithms: vec![Algorithm::Mc],
                k_chunks: vec![1, 2, 3, 4],
                max_cc: vec![6],
                model: ReferenceModel::default(),
            };
            let report = run_experiment(&spec).unwrap();
            assert_eq!(report.failed(), 0);
            rows += report.rows.len();
        }
        assert_eq!(rows, 20);
    }

    #[test]
    fn sweep_emits_one_row_per_factor() {
        let spec = ExperimentSpec {
            dataset: Some(DatasetSpec::Uniform { seed: 1, total_size: 40 * MB, size: 2 * MB }),
            profile: fixtures::stampede_comet(),
            algorithms: vec![Algorithm::Sc, Algorithm::Mc, Algorithm::ProMc],
            k_chunks: vec![2],
            max_cc: vec![2, 4, 8, 16],
            model: ReferenceModel::default(),
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rows.len(), 12);
        assert_eq!(report.failed(), 0);
        assert_eq!(report.to_csv().lines().count(), 13);

        // Determinism: the whole sweep reproduces byte for byte.
        let again = run_experiment(&spec).unwrap();
        assert_eq!(report.to_csv(), again.to_csv());
    }
}

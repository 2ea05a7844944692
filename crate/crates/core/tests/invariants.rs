//! Cross-module invariants that need whole simulations to observe.

use std::path::Path;

use xfertune::config::Config;
use xfertune::harness::{generate_dataset, DatasetSpec};
use xfertune::profile::{fixtures, NetworkProfile};
use xfertune::sched::{Algorithm, SchedulerConfig};
use xfertune::sim::{run_simulation, simulate_plan, ReferenceModel};
use xfertune::{Chunk, ChunkType, FileEntry, TransferParams};

const MB: u64 = 1_000_000;
const GB: u64 = 1_000_000_000;

#[test]
fn shipped_profile_files_match_the_builtin_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/profiles");
    let expected = [
        ("lonestar_gordon.toml", fixtures::lonestar_gordon()),
        ("queenbee_painter.toml", fixtures::queenbee_painter()),
        ("bluewaters_stampede.toml", fixtures::bluewaters_stampede()),
        ("stampede_comet.toml", fixtures::stampede_comet()),
        ("supermic_bridges.toml", fixtures::supermic_bridges()),
        ("lan.toml", fixtures::lan()),
    ];
    for (file, profile) in expected {
        let config = Config::load(&dir.join(file)).unwrap();
        assert_eq!(config.profile, profile, "{file} drifted from the fixture");
    }
}

#[test]
fn sc_walks_four_phases_in_size_order() {
    let profile = fixtures::stampede_comet();
    let model = ReferenceModel::default();
    let mixed = generate_dataset(&DatasetSpec::Mixed { seed: 7, total_size: 8 * GB }).unwrap();
    let config = SchedulerConfig::new(Algorithm::Sc, 4, 8).unwrap();
    let report = run_simulation(&mixed, &profile, &config, &model).unwrap();

    // One initial phase plus three reconnecting phase starts, small first.
    let phases: Vec<ChunkType> = report.allocations.iter().map(|e| e.chunk).collect();
    assert_eq!(
        phases,
        vec![ChunkType::Small, ChunkType::Medium, ChunkType::Large, ChunkType::Huge]
    );
    assert_eq!(report.completed_bytes(), mixed.total_size());
}

#[test]
fn more_pipelining_never_slows_a_single_channel() {
    let profile = fixtures::lonestar_gordon();
    let model = ReferenceModel::default();
    let mut last = f64::INFINITY;
    for pipelining in [0u32, 1, 2, 5, 10, 25, 75, 300] {
        let chunk = Chunk::new(
            ChunkType::Small,
            (0..25).map(|i| FileEntry::new(format!("f{i:02}"), 2 * MB)).collect::<Vec<_>>(),
        )
        .unwrap()
        .with_params(TransferParams::new(pipelining, 1, 1).unwrap());
        let config = SchedulerConfig::new(Algorithm::Sc, 4, 1).unwrap();
        let t = simulate_plan(vec![chunk], &profile, &config, &model).unwrap().total_time;
        assert!(t <= last, "pipelining {pipelining} slowed the run: {t} > {last}");
        last = t;
    }
}

#[test]
fn more_channels_never_slow_mc_without_a_disk_cap() {
    let profile = NetworkProfile::with_io_cap(
        "uncapped",
        1.25e9,
        0.045,
        4 * MB,
        16,
        f64::MAX / 1e9, // effectively infinite
    )
    .unwrap();
    let model = ReferenceModel::default();
    let mixed = generate_dataset(&DatasetSpec::Mixed { seed: 21, total_size: 6 * GB }).unwrap();
    let mut last = f64::INFINITY;
    for max_cc in [1u32, 2, 4, 8, 16] {
        let config = SchedulerConfig::new(Algorithm::Mc, 2, max_cc).unwrap();
        let t = run_simulation(&mixed, &profile, &config, &model).unwrap().total_time;
        assert!(t <= last, "max_cc {max_cc} slowed MC: {t} > {last}");
        last = t;
    }
}

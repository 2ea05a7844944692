//! Closed-form estimation of pipelining, parallelism, and concurrency.

use crate::chunk::{Chunk, TransferParams};
use crate::error::{Error, Result};
use crate::profile::NetworkProfile;

/// Compute transfer parameters for a chunk with the given average file size.
///
/// - pipelining covers the in-flight window in units of files: floor(BDP/avg),
///   0 when files are larger than the BDP (no command queued ahead).
/// - parallelism is the stream count needed to cover the BDP with the given
///   per-stream buffer, but never more streams than the file itself can fill.
/// - concurrency is floor(BDP/avg) with a lower limit of 2, capped by the
///   user budget. A budget of 1 wins over the lower limit.
pub fn find_optimal_parameters(
    avg_file_size: f64,
    bdp: u64,
    buffer_size: u64,
    max_cc: u32,
) -> Result<TransferParams> {
    if !(avg_file_size > 0.0 && avg_file_size.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "avg_file_size must be positive, got {avg_file_size}"
        )));
    }
    if bdp == 0 || buffer_size == 0 {
        return Err(Error::InvalidParameter(
            "bdp and buffer_size must be positive".into(),
        ));
    }
    if max_cc == 0 {
        return Err(Error::InvalidParameter("max_cc must be at least 1".into()));
    }

    let ratio = bdp as f64 / avg_file_size;
    let pipelining = saturate_u32(ratio.floor());

    let streams_for_bdp = bdp.div_ceil(buffer_size);
    let streams_for_file = (avg_file_size / buffer_size as f64).ceil();
    let parallelism = saturate_u32((streams_for_bdp as f64).min(streams_for_file)).max(1);

    let concurrency = saturate_u32(ratio.floor()).max(2).min(max_cc).max(1);

    TransferParams::new(pipelining, parallelism, concurrency)
}

/// Parameters for a chunk under a profile, using the profile's channel budget.
pub fn params_for_chunk(chunk: &Chunk, profile: &NetworkProfile) -> Result<TransferParams> {
    find_optimal_parameters(
        chunk.avg_file_size,
        profile.bdp(),
        profile.buffer_size(),
        profile.max_cc(),
    )
}

fn saturate_u32(v: f64) -> u32 {
    if v >= u32::MAX as f64 {
        u32::MAX
    } else if v <= 0.0 {
        0
    } else {
        v as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MB: u64 = 1_000_000;

    #[test]
    fn small_files_get_deep_queues() {
        // avg 1 MB, BDP 50 MB, buffer 32 MB, budget 8:
        //   pipelining floor(50/1) = 50
        //   parallelism min(ceil(50/32)=2, ceil(1/32)=1) = 1
        //   concurrency min(max(50,2),8) = 8
        let p = find_optimal_parameters(1e6, 50 * MB, 32 * MB, 8).unwrap();
        assert_eq!((p.pipelining, p.parallelism, p.concurrency), (50, 1, 8));
    }

    #[test]
    fn large_files_get_streams_not_queues() {
        // avg 1 GB, BDP 50 MB, buffer 32 MB, budget 8:
        //   pipelining floor(50/1000) = 0
        //   parallelism min(ceil(50/32)=2, ceil(1000/32)=32) = 2
        //   concurrency min(max(0,2),8) = 2  <- the lower limit of 2
        let p = find_optimal_parameters(1e9, 50 * MB, 32 * MB, 8).unwrap();
        assert_eq!((p.pipelining, p.parallelism, p.concurrency), (0, 2, 2));
    }

    #[test]
    fn wan_medium_and_larger_chunks_use_concurrency_two() {
        // Stampede-Comet numbers: BDP 50 MB, RTT 40 ms. Any chunk whose
        // average exceeds BW/20 has BDP/avg < 20*RTT = 0.8, so the floor
        // hits 0 and the lower limit of 2 takes over for any budget >= 2.
        for avg in [70e6, 150e6, 250e6, 400e6, 2e9] {
            for max_cc in [2, 4, 8, 16, 64] {
                let p = find_optimal_parameters(avg, 50 * MB, 32 * MB, max_cc).unwrap();
                assert_eq!(p.concurrency, 2, "avg={avg} max_cc={max_cc}");
            }
        }
    }

    #[test]
    fn all_ratios_collapse_to_one() {
        // avg == BDP and buffer >= BDP: (1, 1, 2).
        let p = find_optimal_parameters(50e6, 50 * MB, 64 * MB, 2).unwrap();
        assert_eq!((p.pipelining, p.parallelism, p.concurrency), (1, 1, 2));
    }

    #[test]
    fn budget_of_one_beats_the_lower_limit() {
        let p = find_optimal_parameters(1e9, 50 * MB, 32 * MB, 1).unwrap();
        assert_eq!(p.concurrency, 1);
    }

    #[test]
    fn extreme_ratios_saturate_instead_of_overflowing() {
        // A 1-byte average on a fat path: the ratio exceeds u32 range.
        let p = find_optimal_parameters(1.0, 12_500_000_000, 32 * MB, 16).unwrap();
        assert_eq!(p.pipelining, u32::MAX);
        assert_eq!(p.concurrency, 16);
        // The gap formula must survive the saturated queue depth.
        use crate::sim::ThroughputModel;
        let profile = crate::profile::fixtures::stampede_comet();
        let gap = crate::sim::ReferenceModel::default().per_file_gap(&p, &profile);
        assert!(gap > 0.0 && gap < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(find_optimal_parameters(0.0, 1, 1, 1).is_err());
        assert!(find_optimal_parameters(-1.0, 1, 1, 1).is_err());
        assert!(find_optimal_parameters(1.0, 0, 1, 1).is_err());
        assert!(find_optimal_parameters(1.0, 1, 0, 1).is_err());
        assert!(find_optimal_parameters(1.0, 1, 1, 0).is_err());
    }

    proptest! {
        // pipelining does not grow with file size; parallelism does not
        // shrink; both concurrency clamps hold.
        #[test]
        fn monotone_in_average_size(
            bdp in 1_000_000u64..1_000_000_000,
            buffer in 1_000_000u64..100_000_000,
            max_cc in 1u32..64,
            avg_lo in 1_000.0f64..1e10,
            bump in 1.0f64..1e9,
        ) {
            let lo = find_optimal_parameters(avg_lo, bdp, buffer, max_cc).unwrap();
            let hi = find_optimal_parameters(avg_lo + bump, bdp, buffer, max_cc).unwrap();
            prop_assert!(hi.pipelining <= lo.pipelining);
            prop_assert!(hi.parallelism >= lo.parallelism || hi.parallelism == bdp.div_ceil(buffer) as u32);
            for p in [&lo, &hi] {
                prop_assert!(p.concurrency >= 1 && p.concurrency <= max_cc);
                prop_assert!(p.parallelism as u64 <= bdp.div_ceil(buffer).max(1));
            }
            // Whenever the ratio is at most 2 and the budget allows it,
            // concurrency is exactly 2.
            if max_cc >= 2 && (bdp as f64 / avg_lo) <= 2.0 {
                prop_assert_eq!(lo.concurrency, 2);
            }
        }
    }
}

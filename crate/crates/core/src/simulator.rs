//! Seeded Monte Carlo oracle: Bernoulli packet loss, any-n-of-(n+k) decode
//! semantics, and empirical counterparts of every analytical quantity.
//!
//! Randomness is counter-based: each packet's loss indicator is a hash of
//! (seed, flat packet index), so a given [`SimConfig`] always produces the
//! same stream regardless of how work is scheduled.

use crate::erasure::{CodeParams, LossProbability};
use crate::scalar::{real_from_u64, Real};
use crate::{Error, Result};

/// Simulation inputs. The seed fully determines the outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<R> {
    pub params: CodeParams,
    pub p: LossProbability<R>,
    pub num_blocks: u64,
    pub seed: u64,
}

/// Decoded view of one block: which data packets stayed lost.
///
/// When the block's total network losses fit within the redundancy budget
/// the decoder restores everything and the bitmap is empty; otherwise the
/// bitmap marks exactly the data packets lost in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    bits: u128,
    n: u32,
}

impl BlockOutcome {
    pub fn unrecovered_count(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_lost(&self, i: u32) -> bool {
        debug_assert!(i < self.n);
        self.bits >> i & 1 == 1
    }

    /// Maximal runs of consecutive unrecovered losses within the block.
    pub fn rows(&self) -> u32 {
        (self.bits & !(self.bits << 1)).count_ones()
    }

    pub fn is_clean(&self) -> bool {
        self.bits == 0
    }
}

/// Empirical measurements over one simulated stream.
///
/// Two burstiness estimators are reported side by side: the mean of t/r over
/// completed multiblock patterns (the analytical series target), and the
/// mean length of completed consecutive-loss runs over the raw packet stream
/// (the renewal-style run length). They measure different things and
/// generally differ.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstReport<R> {
    /// Histogram of per-block unrecoverable-loss counts, indices 0..=n;
    /// sums to `num_blocks`.
    pub empirical_q: Vec<u64>,
    /// Mean losses-per-row ratio over completed multiblock patterns; `None`
    /// when no pattern completed.
    pub pattern_ratio_mean: Option<R>,
    pub pattern_count: u64,
    pub standard_error_ratio: Option<R>,
    /// Mean length of completed consecutive-loss runs over the whole data
    /// stream; `None` when no run completed.
    pub burst_length_mean: Option<R>,
    pub burst_count: u64,
    pub standard_error_burst: Option<R>,
    /// A pattern still open when the stream ends is dropped, not clipped.
    pub discarded_patterns: u64,
    /// Likewise for a loss run still open at stream end.
    pub discarded_bursts: u64,
}

/// 64-bit finalizer (splitmix64); bijective, well mixed.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0, 1) for one packet, keyed by (seed, flat index).
fn unit_draw(seed: u64, index: u64) -> f64 {
    let state = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (mix(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw one block's network losses and apply the decode rule.
fn decode_block<R: Real>(config: &SimConfig<R>, block_index: u64) -> BlockOutcome {
    let n = config.params.n();
    let total = config.params.total();
    let p = config.p.value();
    let base = block_index * total as u64;
    let mut data_bits = 0u128;
    let mut losses = 0u32;
    for pkt in 0..total {
        let u = R::from_f64(unit_draw(config.seed, base + pkt as u64))
            .expect("unit draw fits any float width");
        if u < p {
            losses += 1;
            // The last k positions carry redundancy; only data positions
            // matter downstream.
            if pkt < n {
                data_bits |= 1u128 << pkt;
            }
        }
    }
    if losses <= config.params.k() {
        BlockOutcome { bits: 0, n }
    } else {
        BlockOutcome { bits: data_bits, n }
    }
}

/// Streaming mean and standard error (Welford).
struct RunningStats<R> {
    count: u64,
    mean: R,
    m2: R,
}

impl<R: Real> RunningStats<R> {
    fn new() -> Self {
        Self { count: 0, mean: R::zero(), m2: R::zero() }
    }

    fn push(&mut self, x: R) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / real_from_u64::<R>(self.count);
        self.m2 += delta * (x - self.mean);
    }

    fn mean(&self) -> Option<R> {
        (self.count > 0).then_some(self.mean)
    }

    /// Standard error of the mean; `None` below two samples.
    fn standard_error(&self) -> Option<R> {
        (self.count > 1).then(|| {
            let n = real_from_u64::<R>(self.count);
            (self.m2 / (n - R::one()) / n).sqrt()
        })
    }
}

/// Simulate `num_blocks` blocks and measure the stream.
///
/// Per block: draw n + k loss indicators, decode, and append the n-packet
/// data bitmap to the stream. The report collects the per-block loss
/// histogram, per-pattern t/r ratios (patterns are maximal runs of lossy
/// blocks; rows merge across junctions where a loss ends one block and
/// another begins the next), and maximal consecutive-loss runs over the raw
/// packet stream. Patterns and runs still open at stream end are discarded.
pub fn simulate<R: Real>(config: &SimConfig<R>) -> Result<BurstReport<R>> {
    if config.num_blocks == 0 {
        return Err(Error::InvalidParameter("num_blocks must be >= 1".into()));
    }
    let n = config.params.n();
    let mut empirical_q = vec![0u64; n as usize + 1];

    let mut ratio_stats = RunningStats::new();
    let mut burst_stats = RunningStats::new();

    // Open multiblock pattern, if any.
    let mut in_pattern = false;
    let mut pattern_losses = 0u64;
    let mut pattern_rows = 0u64;
    let mut prev_block_ends_lost = false;

    // Open packet-level loss run, if any.
    let mut run_len = 0u64;

    for block in 0..config.num_blocks {
        let outcome = decode_block(config, block);
        let m = outcome.unrecovered_count();
        empirical_q[m as usize] += 1;

        for i in 0..n {
            if outcome.is_lost(i) {
                run_len += 1;
            } else if run_len > 0 {
                burst_stats.push(real_from_u64::<R>(run_len));
                run_len = 0;
            }
        }

        if m > 0 {
            let rows = outcome.rows() as u64;
            if in_pattern {
                let merged = prev_block_ends_lost && outcome.is_lost(0);
                pattern_losses += m as u64;
                pattern_rows += rows - u64::from(merged);
            } else {
                in_pattern = true;
                pattern_losses = m as u64;
                pattern_rows = rows;
            }
            prev_block_ends_lost = outcome.is_lost(n - 1);
        } else {
            if in_pattern {
                ratio_stats
                    .push(real_from_u64::<R>(pattern_losses) / real_from_u64::<R>(pattern_rows));
                in_pattern = false;
            }
            prev_block_ends_lost = false;
        }
    }

    Ok(BurstReport {
        empirical_q,
        pattern_ratio_mean: ratio_stats.mean(),
        pattern_count: ratio_stats.count,
        standard_error_ratio: ratio_stats.standard_error(),
        burst_length_mean: burst_stats.mean(),
        burst_count: burst_stats.count,
        standard_error_burst: burst_stats.standard_error(),
        discarded_patterns: u64::from(in_pattern),
        discarded_bursts: u64::from(run_len > 0),
    })
}

/// Mean losses-per-row over lossy blocks, each block scored in isolation
/// (no junction merging). Empirical counterpart of the single-block
/// expectation.
pub fn empirical_single_block_burst<R: Real>(config: &SimConfig<R>) -> Result<R> {
    if config.num_blocks == 0 {
        return Err(Error::InvalidParameter("num_blocks must be >= 1".into()));
    }
    let mut stats = RunningStats::new();
    for block in 0..config.num_blocks {
        let outcome = decode_block(config, block);
        let m = outcome.unrecovered_count();
        if m > 0 {
            stats.push(real_from_u64::<R>(m as u64) / real_from_u64::<R>(outcome.rows() as u64));
        }
    }
    stats.mean().ok_or(Error::NoLossySamples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::UnrecoverableDistribution;

    fn config(n: u32, k: u32, p: f64, blocks: u64, seed: u64) -> SimConfig<f64> {
        SimConfig {
            params: CodeParams::new(n, k).unwrap(),
            p: LossProbability::new(p).unwrap(),
            num_blocks: blocks,
            seed,
        }
    }

    #[test]
    fn identical_configs_give_identical_reports() {
        let c = config(10, 3, 0.1, 20_000, 0xFEC);
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let shifted = SimConfig { seed: 0xFED, ..c };
        assert_ne!(simulate(&c).unwrap(), simulate(&shifted).unwrap());
    }

    #[test]
    fn lossless_network_yields_empty_report() {
        let report = simulate(&config(10, 3, 0.0, 5_000, 1)).unwrap();
        assert_eq!(report.empirical_q[0], 5_000);
        assert_eq!(report.pattern_count, 0);
        assert_eq!(report.burst_count, 0);
        assert_eq!(report.pattern_ratio_mean, None);
        assert_eq!(report.burst_length_mean, None);
        assert_eq!(report.discarded_patterns, 0);
        assert_eq!(report.discarded_bursts, 0);
    }

    #[test]
    fn total_loss_leaves_one_open_pattern() {
        let report = simulate(&config(4, 2, 1.0, 1_000, 3)).unwrap();
        assert_eq!(report.empirical_q[4], 1_000);
        assert_eq!(report.pattern_count, 0);
        assert_eq!(report.discarded_patterns, 1);
        assert_eq!(report.burst_count, 0);
        assert_eq!(report.discarded_bursts, 1);
    }

    #[test]
    fn unrecovered_losses_are_a_subset_of_network_losses() {
        let c = config(8, 3, 0.4, 2_000, 9);
        let total = c.params.total();
        for block in 0..c.num_blocks {
            let outcome = decode_block(&c, block);
            let base = block * total as u64;
            let mut net_data = 0u128;
            let mut net_total = 0u32;
            for pkt in 0..total {
                if unit_draw(c.seed, base + pkt as u64) < 0.4 {
                    net_total += 1;
                    if pkt < 8 {
                        net_data |= 1 << pkt;
                    }
                }
            }
            if net_total <= 3 {
                assert!(outcome.is_clean());
            } else {
                // decode failed: exactly the network data losses remain
                assert_eq!(outcome.unrecovered_count(), net_data.count_ones());
                for i in 0..8 {
                    assert_eq!(outcome.is_lost(i), net_data >> i & 1 == 1);
                }
            }
        }
    }

    #[test]
    fn histogram_tracks_the_analytical_distribution() {
        let c = config(10, 3, 0.1, 100_000, 77);
        let report = simulate(&c).unwrap();
        assert_eq!(report.empirical_q.iter().sum::<u64>(), c.num_blocks);
        let d = UnrecoverableDistribution::for_code(10, 3, 0.1).unwrap();
        let blocks = c.num_blocks as f64;
        for (i, &count) in report.empirical_q.iter().enumerate() {
            let q = d.q(i as u32);
            let se = (q * (1.0 - q) / blocks).sqrt();
            let diff = (count as f64 / blocks - q).abs();
            assert!(diff <= 4.0 * se + 1e-9, "bin {i}: diff {diff}, se {se}");
        }
    }

    #[test]
    fn uncoded_stream_has_geometric_run_lengths() {
        // With k = 0 the stream is raw Bernoulli; mean run length 1/(1-p).
        let report = simulate(&config(16, 0, 0.3, 200_000, 5)).unwrap();
        let mean = report.burst_length_mean.unwrap();
        let se = report.standard_error_burst.unwrap();
        let expected = 1.0 / 0.7;
        assert!(
            (mean - expected).abs() <= 4.0 * se,
            "mean {mean}, expected {expected}, se {se}"
        );
    }

    #[test]
    fn single_block_estimator_matches_hand_value() {
        let c = config(2, 0, 0.5, 500_000, 21);
        let v = empirical_single_block_burst(&c).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 0.01, "v = {v}");
    }

    #[test]
    fn single_block_estimator_needs_lossy_blocks() {
        let c = config(4, 1, 0.0, 1_000, 2);
        assert!(matches!(
            empirical_single_block_burst(&c),
            Err(Error::NoLossySamples)
        ));
    }

    #[test]
    fn rare_losses_arrive_isolated() {
        let c = config(12, 0, 1e-4, 200_000, 11);
        let v = empirical_single_block_burst(&c).unwrap();
        assert!((1.0..1.01).contains(&v), "v = {v}");
    }

    #[test]
    fn zero_blocks_is_rejected() {
        let c = config(4, 1, 0.2, 0, 2);
        assert!(simulate(&c).is_err());
        assert!(empirical_single_block_burst(&c).is_err());
    }

    #[test]
    fn unit_draws_cover_the_unit_interval() {
        let mut min = 1.0f64;
        let mut max = 0.0f64;
        let mut sum = 0.0;
        let draws = 100_000;
        for i in 0..draws {
            let u = unit_draw(42, i);
            assert!((0.0..1.0).contains(&u));
            min = min.min(u);
            max = max.max(u);
            sum += u;
        }
        assert!(min < 1e-3 && max > 1.0 - 1e-3);
        assert!((sum / draws as f64 - 0.5).abs() < 0.01);
    }
}

//! Single-block loss patterns: per-loss-vector probabilities, the expected
//! consecutive-loss length within one block, an exhaustive bitmap oracle,
//! and the partition-based estimate of the summation index size.

use crate::combinatorics::{
    binomial, enumerate_grouped_terms, multichoose, partition_table, Count,
};
use crate::erasure::UnrecoverableDistribution;
use crate::scalar::{real_from_count, real_from_u64, Real};
use crate::{Error, Result};

/// Boundary flags plus ordered loss-row lengths describing one block's
/// pattern class.
///
/// `s` is 0 when the block's first packet is an unrecoverable loss and 1
/// when it arrived; `e` likewise for the last packet. `runs` holds the
/// lengths of the maximal loss rows in block order. The all-receipts block
/// is the distinguished vector (1, [], 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LossVector {
    s: u8,
    runs: Vec<u32>,
    e: u8,
}

impl LossVector {
    pub fn new(s: u8, runs: Vec<u32>, e: u8) -> Result<Self> {
        if s > 1 || e > 1 {
            return Err(Error::InvalidLossVector(
                "boundary flags must be 0 or 1".into(),
            ));
        }
        if runs.contains(&0) {
            return Err(Error::InvalidLossVector("loss rows must be non-empty".into()));
        }
        if runs.is_empty() && (s == 0 || e == 0) {
            return Err(Error::InvalidLossVector(
                "a boundary loss requires at least one loss row".into(),
            ));
        }
        Ok(Self { s, runs, e })
    }

    /// The all-receipts block, (1, [], 1).
    pub fn all_receipts() -> Self {
        Self { s: 1, runs: Vec::new(), e: 1 }
    }

    /// Derive the loss vector of a concrete pattern (true = lost).
    pub fn from_pattern(lost: &[bool]) -> Self {
        assert!(!lost.is_empty(), "pattern must have at least one packet");
        let mut runs = Vec::new();
        let mut current = 0u32;
        for &bit in lost {
            if bit {
                current += 1;
            } else if current > 0 {
                runs.push(current);
                current = 0;
            }
        }
        if current > 0 {
            runs.push(current);
        }
        Self {
            s: u8::from(!lost[0]),
            runs,
            e: u8::from(!lost[lost.len() - 1]),
        }
    }

    pub fn s(&self) -> u8 {
        self.s
    }

    pub fn e(&self) -> u8 {
        self.e
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    /// Total losses m.
    pub fn total_losses(&self) -> u32 {
        self.runs.iter().sum()
    }

    /// Row count j.
    pub fn row_count(&self) -> u32 {
        self.runs.len() as u32
    }

    pub fn is_all_receipts(&self) -> bool {
        self.runs.is_empty()
    }

    /// Whether the vector fits a block of n packets:
    /// s + m + e + (j - 1) <= n, with one packet reserved between rows and
    /// one at each received boundary.
    pub fn fits(&self, n: u32) -> bool {
        if self.is_all_receipts() {
            return true;
        }
        let need = self.s as u64
            + self.total_losses() as u64
            + self.e as u64
            + (self.row_count() as u64 - 1);
        need <= n as u64
    }
}

/// Probability that a block draws exactly this loss vector.
///
/// The count of arrangements realizing the vector, over the count of
/// arrangements with the same number of losses, times Q(m). Vectors that fit
/// the inequality but admit no arrangement (say a single interior loss with
/// both boundary flags claiming losses) get probability zero through the
/// vanishing multichoose.
pub fn loss_vector_probability<R: Real>(
    lv: &LossVector,
    dist: &UnrecoverableDistribution<R>,
) -> Result<R> {
    if lv.is_all_receipts() {
        return Err(Error::InvalidLossVector(
            "probability formula requires at least one loss row".into(),
        ));
    }
    let n = dist.params().n();
    if !lv.fits(n) {
        return Err(Error::InvalidLossVector(format!(
            "vector needs more than {n} packets"
        )));
    }
    let j = lv.row_count();
    let m = lv.total_losses();
    Ok(class_probability(lv.s, j, m, lv.e, dist))
}

/// Shared Theorem-2-shaped weight for a class (s, j, m, e):
/// arrangements(class) * Q(m) / arrangements(m losses).
pub(crate) fn class_probability<R: Real>(
    s: u8,
    j: u32,
    m: u32,
    e: u8,
    dist: &UnrecoverableDistribution<R>,
) -> R {
    let n = dist.params().n();
    let boxes = (j - 1) as u64 + s as u64 + e as u64;
    let blanks = (n - m - (j - 1) - s as u32 - e as u32) as u64;
    real_from_count::<R>(&multichoose(boxes, blanks)) * dist.q(m)
        / real_from_count::<R>(&binomial(n as u64, m as i64))
}

/// Expected length of a consecutive-loss row within a single lossy block.
///
/// Sums losses-per-row over every loss-vector class, conditioned on the
/// block having at least one unrecoverable loss.
pub fn expected_burst_single_block<R: Real>(dist: &UnrecoverableDistribution<R>) -> Result<R> {
    let lossy = dist.lossy_mass();
    if dist.q0() >= R::one() || lossy <= R::zero() {
        return Err(Error::NoLossesPossible);
    }
    let n = dist.params().n();
    let mut sum = R::zero();
    for term in enumerate_grouped_terms(n) {
        let weight = real_from_count::<R>(&term.multiplicity)
            * class_probability(term.s, term.j, term.m, term.e, dist);
        sum += real_from_u64::<R>(term.m as u64) / real_from_u64::<R>(term.j as u64) * weight;
    }
    Ok(sum / lossy)
}

/// Exhaustive oracle for [`expected_burst_single_block`]: walks all 2^n loss
/// bitmaps, weighting each bitmap with m losses by Q(m) / binomial(n, m)
/// (positions are uniform given the loss count).
///
/// Refuses n > 16.
pub fn brute_force_expected_burst<R: Real>(dist: &UnrecoverableDistribution<R>) -> Result<R> {
    let n = dist.params().n();
    if n > 16 {
        return Err(Error::Infeasible(format!(
            "bitmap enumeration is capped at n = 16 (got {n})"
        )));
    }
    let lossy = dist.lossy_mass();
    if dist.q0() >= R::one() || lossy <= R::zero() {
        return Err(Error::NoLossesPossible);
    }
    let mut sum = R::zero();
    for mask in 1u32..(1u32 << n) {
        let m = mask.count_ones();
        // A row starts where a loss has no loss immediately before it.
        let rows = (mask & !(mask << 1)).count_ones();
        sum += real_from_u64::<R>(m as u64) / real_from_u64::<R>(rows as u64) * dist.q(m)
            / real_from_count::<R>(&binomial(n as u64, m as i64));
    }
    Ok(sum / lossy)
}

/// Partition-count estimate of how many terms the single-block summation
/// ranges over: for each row count j, the partitions of every reachable loss
/// total into j parts.
pub fn index_size(n: u32) -> Count {
    let j_max = n.div_ceil(2);
    let table = partition_table(n as usize, j_max as usize);
    let mut total = Count::from(0u32);
    for (j, row) in table.iter().enumerate().skip(1) {
        for count in row.iter().take(n as usize - (j - 1) + 1).skip(1) {
            total += count.clone();
        }
    }
    total
}

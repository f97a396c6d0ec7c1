//! Exact integer combinatorics: binomial and multichoose coefficients,
//! partition and composition counting, and the grouped enumeration of
//! single-block loss-pattern classes.
//!
//! Everything here is exact. Counts only become floats at the last moment,
//! inside the probability modules.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Exact non-negative count. Arbitrary precision, so coefficients for block
/// sizes up to 128 packets never overflow or round.
pub type Count = BigUint;

/// n choose k. Total function: returns 0 when k < 0 or k > n.
///
/// Computed by the multiplicative formula; every intermediate division is
/// exact.
pub fn binomial(n: u64, k: i64) -> Count {
    if k < 0 || k as u64 > n {
        return Count::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = Count::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Multichoose: ways to distribute m identical items into r distinguishable
/// boxes, binomial(r + m - 1, m).
///
/// Conventions: multichoose(0, 0) = 1 and multichoose(0, m > 0) = 0, so a
/// vanishing coefficient silently filters arrangements with items left over
/// and no box to hold them.
pub fn multichoose(r: u64, m: u64) -> Count {
    if r == 0 {
        return if m == 0 { Count::one() } else { Count::zero() };
    }
    binomial(r + m - 1, m as i64)
}

/// Number of integer partitions of n into exactly j positive parts.
///
/// Zero when j > n. Uses the recurrence p(n, j) = p(n-1, j-1) + p(n-j, j).
pub fn partition_count(n: u64, j: u64) -> Count {
    if j > n {
        return Count::zero();
    }
    let table = partition_table(n as usize, j as usize);
    table[j as usize][n as usize].clone()
}

/// Table t[j][n] of partition counts for all j' <= max_j, n' <= max_n.
pub(crate) fn partition_table(max_n: usize, max_j: usize) -> Vec<Vec<Count>> {
    let mut t = vec![vec![Count::zero(); max_n + 1]; max_j + 1];
    t[0][0] = Count::one();
    for j in 1..=max_j {
        for n in 1..=max_n {
            let mut v = t[j - 1][n - 1].clone();
            if n >= j {
                let shifted = t[j][n - j].clone();
                v += shifted;
            }
            t[j][n] = v;
        }
    }
    t
}

/// Number of ordered sequences of j positive integers summing to m:
/// binomial(m - 1, j - 1). Zero when j > m.
pub fn composition_count(m: u64, j: u64) -> Count {
    if m == 0 || j == 0 {
        return Count::zero();
    }
    binomial(m - 1, (j - 1) as i64)
}

/// One equivalence class of single-block loss patterns.
///
/// A block's loss pattern is summarized by the loss vector
/// (s, a_1..a_j, e): boundary flags plus the ordered lengths of its maximal
/// loss rows. Both the probability of a loss vector and its losses-per-row
/// ratio depend only on (s, j, m, e) with m = sum of the a_i, so vectors are
/// enumerated as classes carrying the number of run-length orderings as a
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedTerm {
    /// 0 if the block's first packet is an unrecoverable loss, 1 otherwise.
    pub s: u8,
    /// Number of loss rows, j >= 1.
    pub j: u32,
    /// Total unrecoverable losses, m >= j.
    pub m: u32,
    /// 0 if the block's last packet is an unrecoverable loss, 1 otherwise.
    pub e: u8,
    /// Number of ordered run-length sequences in the class:
    /// composition_count(m, j).
    pub multiplicity: Count,
}

impl GroupedTerm {
    /// Number of packet arrangements realizing one loss vector of this class
    /// in a block of n packets: the received packets not already forced
    /// between or beside the loss rows distribute freely into the open
    /// boxes around them.
    ///
    /// Zero when no arrangement exists (blanks remain but every box is
    /// closed), which is how structurally impossible vectors drop out.
    pub fn pattern_count(&self, n: u32) -> Count {
        let boxes = (self.j - 1) as u64 + self.s as u64 + self.e as u64;
        let used = self.m + (self.j - 1) + self.s as u32 + self.e as u32;
        debug_assert!(used <= n, "class does not fit the block");
        multichoose(boxes, (n - used) as u64)
    }
}

/// Enumerate every class (s, j, m, e) that fits a block of n packets:
/// s, e in {0, 1}, 1 <= j <= floor((n+1)/2), j <= m, and
/// s + m + e + (j - 1) <= n. Classes appear in (s, e, j, m) lexicographic
/// order, each with multiplicity composition_count(m, j).
///
/// Classes whose pattern count vanishes are kept; they carry zero
/// probability downstream.
pub fn enumerate_grouped_terms(n: u32) -> Vec<GroupedTerm> {
    let mut out = Vec::new();
    let j_max = n.div_ceil(2);
    for s in 0..=1u32 {
        for e in 0..=1u32 {
            for j in 1..=j_max {
                // s + m + e + (j - 1) <= n, m >= j
                let m_hi = n.saturating_sub(s + e + j - 1);
                for m in j..=m_hi {
                    out.push(GroupedTerm {
                        s: s as u8,
                        j,
                        m,
                        e: e as u8,
                        multiplicity: composition_count(m as u64, j as u64),
                    });
                }
            }
        }
    }
    out
}

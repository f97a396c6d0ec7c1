//! Expected consecutive-loss length across an unbounded stream of blocks.
//!
//! Losses can run across block boundaries, so the stream is scored by
//! multiblock patterns: maximal runs of consecutive lossy blocks, delimited
//! by all-receipt blocks. A pattern accumulates t total losses over r loss
//! rows, where a row spanning a block boundary is counted once. The series
//! evaluated here sums (t / r) over patterns of every length i, weighted by
//! the pattern probability times Q(0) for the delimiter; truncating it after
//! `n_terms` lengths leaves a tail controlled by a closed-form geometric
//! bound.
//!
//! The series weights over all pattern lengths total 1 - Q(0), not 1.
//! [`TruncatedResult::pattern_mean`] divides that mass back out, giving the
//! expected losses-per-row of one multiblock pattern: the burstiness figure
//! to compare against the uncoded baseline 1 / (1 - p) and against the
//! simulator's per-pattern ratio mean.

use crate::combinatorics::enumerate_grouped_terms;
use crate::erasure::UnrecoverableDistribution;
use crate::scalar::{real_from_count, real_from_u64, Real};
use crate::single_block::class_probability;
use crate::{Error, Result};

/// Refusal threshold for the DP state grid, in cells. Two grids of this size
/// may be live at once while stepping.
const MAX_DP_CELLS: u64 = 1 << 27;

/// Truncated multiblock series together with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedResult<R> {
    /// Partial sum of the series over pattern lengths 1..=terms_used.
    pub value: R,
    pub terms_used: u64,
    /// Closed-form bound on the discarded tail of the series.
    pub error_bound: R,
    lossy_mass: R,
}

impl<R: Real> TruncatedResult<R> {
    /// The series value normalized by the probability 1 - Q(0) that a block
    /// is lossy: the expected losses-per-row ratio of a single multiblock
    /// pattern. This is the quantity the simulator's `pattern_ratio_mean`
    /// estimates, and the one comparable to the uncoded baseline.
    pub fn pattern_mean(&self) -> R {
        self.value / self.lossy_mass
    }
}

/// One aggregated DP state: every pattern prefix with t total losses,
/// r merged loss rows, and a last block ending in a loss (e_last = 0) or a
/// receipt (e_last = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiblockState<R> {
    pub t: u64,
    pub r: u64,
    pub e_last: u8,
    pub mass: R,
}

/// A lossy single-block class with its total probability mass.
struct BlockClass<R> {
    s: u8,
    j: u32,
    m: u32,
    e: u8,
    weight: R,
}

fn lossy_classes<R: Real>(dist: &UnrecoverableDistribution<R>) -> Vec<BlockClass<R>> {
    enumerate_grouped_terms(dist.params().n())
        .into_iter()
        .map(|t| BlockClass {
            s: t.s,
            j: t.j,
            m: t.m,
            e: t.e,
            weight: real_from_count::<R>(&t.multiplicity)
                * class_probability(t.s, t.j, t.m, t.e, dist),
        })
        .filter(|c| c.weight > R::zero())
        .collect()
}

/// A loss row merges across a junction when the left block ends with a loss
/// and the right block starts with one.
fn junction(e_last: u8, s_next: u8) -> u32 {
    u32::from(e_last == 0 && s_next == 0)
}

/// Flat (t, r, e_last) mass grid for one pattern length.
struct DpGrid<R> {
    n: u64,
    j_max: u64,
    depth: u64,
    t_max: u64,
    r_max: u64,
    data: Vec<R>,
}

fn grid_cells(n: u64, j_max: u64, depth: u64) -> u64 {
    (n * depth + 1) * (j_max * depth + 1) * 2
}

impl<R: Real> DpGrid<R> {
    fn seed(n: u32, classes: &[BlockClass<R>]) -> Self {
        let n = n as u64;
        let j_max = n.div_ceil(2);
        let mut grid = Self {
            n,
            j_max,
            depth: 1,
            t_max: n,
            r_max: j_max,
            data: vec![R::zero(); grid_cells(n, j_max, 1) as usize],
        };
        for c in classes {
            let idx = grid.idx(c.m as u64, c.j as u64, c.e);
            grid.data[idx] += c.weight;
        }
        grid
    }

    #[inline]
    fn idx(&self, t: u64, r: u64, e: u8) -> usize {
        ((t * (self.r_max + 1) + r) * 2 + e as u64) as usize
    }

    /// Append one more lossy block to every pattern prefix.
    fn advance(&mut self, classes: &[BlockClass<R>]) {
        let depth = self.depth + 1;
        let t_max = self.n * depth;
        let r_max = self.j_max * depth;
        let mut next = vec![R::zero(); grid_cells(self.n, self.j_max, depth) as usize];
        let stride_r = r_max + 1;
        let idx_next =
            |t: u64, r: u64, e: u8| -> usize { ((t * stride_r + r) * 2 + e as u64) as usize };
        // Lexicographic (t, r, e_last) visit order keeps accumulation
        // reproducible.
        for t in 0..=self.t_max {
            for r in 1..=self.r_max.min(t) {
                for e_last in 0..=1u8 {
                    let mass = self.data[self.idx(t, r, e_last)];
                    if mass == R::zero() {
                        continue;
                    }
                    for c in classes {
                        let dj = c.j - junction(e_last, c.s);
                        next[idx_next(t + c.m as u64, r + dj as u64, c.e)] += mass * c.weight;
                    }
                }
            }
        }
        self.depth = depth;
        self.t_max = t_max;
        self.r_max = r_max;
        self.data = next;
    }

    /// Sum of mass * t / r over all states, visited lexicographically.
    fn ratio_sum(&self) -> R {
        let mut acc = R::zero();
        for t in 1..=self.t_max {
            for r in 1..=self.r_max.min(t) {
                for e_last in 0..=1u8 {
                    let mass = self.data[self.idx(t, r, e_last)];
                    if mass != R::zero() {
                        acc += mass * real_from_u64::<R>(t) / real_from_u64::<R>(r);
                    }
                }
            }
        }
        acc
    }

    fn states(&self) -> Vec<MultiblockState<R>> {
        let mut out = Vec::new();
        for t in 0..=self.t_max {
            for r in 0..=self.r_max {
                for e_last in 0..=1u8 {
                    let mass = self.data[self.idx(t, r, e_last)];
                    if mass != R::zero() {
                        out.push(MultiblockState { t, r, e_last, mass });
                    }
                }
            }
        }
        out
    }
}

fn check_series_inputs<R: Real>(q0: R, n_terms: u64) -> Result<()> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be >= 1".into()));
    }
    if q0 >= R::one() {
        return Err(Error::NoLossesPossible);
    }
    if q0 <= R::zero() {
        return Err(Error::DivergentSeries);
    }
    Ok(())
}

/// Truncated series by exact dynamic programming over
/// (total losses, merged rows, end flag), one deterministic pass per pattern
/// length.
///
/// Agrees with [`expected_burst_truncated_naive`] wherever the latter is
/// feasible. State space grows as O(n^2 * n_terms^2); depths whose grid
/// would exceed the internal cell cap are refused up front.
pub fn expected_burst_dp<R: Real>(
    dist: &UnrecoverableDistribution<R>,
    n_terms: u64,
) -> Result<TruncatedResult<R>> {
    let q0 = dist.q0();
    check_series_inputs(q0, n_terms)?;
    let n = dist.params().n();
    let j_max = (n as u64).div_ceil(2);
    if grid_cells(n as u64, j_max, n_terms) > MAX_DP_CELLS {
        return Err(Error::Infeasible(format!(
            "DP grid for {n_terms} terms exceeds {MAX_DP_CELLS} cells; \
             truncate earlier or accept the tail bound"
        )));
    }
    let classes = lossy_classes(dist);
    let mut grid = DpGrid::seed(n, &classes);
    let mut acc = q0 * grid.ratio_sum();
    for _ in 1..n_terms {
        grid.advance(&classes);
        acc += q0 * grid.ratio_sum();
    }
    Ok(TruncatedResult {
        value: acc,
        terms_used: n_terms,
        error_bound: truncation_error_bound(n, q0, n_terms)?,
        lossy_mass: dist.lossy_mass(),
    })
}

/// DP states after `depth` lossy blocks, zero-mass cells skipped.
///
/// Diagnostic surface: the masses at depth i must total (1 - Q(0))^i.
pub fn dp_states<R: Real>(
    dist: &UnrecoverableDistribution<R>,
    depth: u64,
) -> Result<Vec<MultiblockState<R>>> {
    let q0 = dist.q0();
    check_series_inputs(q0, depth)?;
    let n = dist.params().n();
    let j_max = (n as u64).div_ceil(2);
    if grid_cells(n as u64, j_max, depth) > MAX_DP_CELLS {
        return Err(Error::Infeasible(format!("DP grid too large at depth {depth}")));
    }
    let classes = lossy_classes(dist);
    let mut grid = DpGrid::seed(n, &classes);
    for _ in 1..depth {
        grid.advance(&classes);
    }
    Ok(grid.states())
}

/// Truncated series by exhaustive enumeration of lossy-class sequences.
///
/// Exponential in the number of terms; refuses blocks over 6 packets or more
/// than 3 terms. Exists as the independent oracle for [`expected_burst_dp`].
pub fn expected_burst_truncated_naive<R: Real>(
    dist: &UnrecoverableDistribution<R>,
    n_terms: u64,
) -> Result<R> {
    let n = dist.params().n();
    if n > 6 || n_terms > 3 {
        return Err(Error::Infeasible(format!(
            "naive enumeration is capped at n = 6 and 3 terms (got n = {n}, terms = {n_terms})"
        )));
    }
    let q0 = dist.q0();
    check_series_inputs(q0, n_terms)?;
    let classes = lossy_classes(dist);
    let empty = MultiblockState { t: 0, r: 0, e_last: 1, mass: R::one() };
    let mut acc = R::zero();
    extend_sequence(&classes, n_terms, empty, q0, &mut acc);
    Ok(acc)
}

fn extend_sequence<R: Real>(
    classes: &[BlockClass<R>],
    remaining: u64,
    prefix: MultiblockState<R>,
    q0: R,
    acc: &mut R,
) {
    for c in classes {
        let next = MultiblockState {
            t: prefix.t + c.m as u64,
            r: prefix.r + (c.j - junction(prefix.e_last, c.s)) as u64,
            e_last: c.e,
            mass: prefix.mass * c.weight,
        };
        *acc += q0 * next.mass * real_from_u64::<R>(next.t) / real_from_u64::<R>(next.r);
        if remaining > 1 {
            extend_sequence(classes, remaining - 1, next, q0, acc);
        }
    }
}

/// Closed-form upper bound on the series tail discarded after `n_terms`
/// pattern lengths: N((n+1)x^(n+1) - n x^(n+2)) / Q(0) with x = 1 - Q(0).
///
/// Evaluated directly in the working precision; switches to log space only
/// when x^(n+1) underflows. Zero when Q(0) = 1; errors when Q(0) = 0 (the
/// series itself diverges).
pub fn truncation_error_bound<R: Real>(n_packets: u32, q0: R, n_terms: u64) -> Result<R> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be >= 1".into()));
    }
    if q0.is_nan() || q0 > R::one() {
        return Err(Error::InvalidParameter(format!("Q(0) out of range: {q0}")));
    }
    if q0 <= R::zero() {
        return Err(Error::DivergentSeries);
    }
    if q0 == R::one() {
        return Ok(R::zero());
    }
    let x = R::one() - q0;
    let n_blocks = real_from_u64::<R>(n_terms);
    let n_pkts = real_from_u64::<R>(n_packets as u64);
    let xp1 = x.powf(n_blocks + R::one());
    if xp1.is_normal() {
        let xp2 = x.powf(n_blocks + R::one() + R::one());
        Ok((n_pkts * (n_blocks + R::one()) * xp1 - n_pkts * n_blocks * xp2) / q0)
    } else {
        // N (1 + n q0) x^(n+1) / q0, algebraically identical, in log space.
        let ln = n_pkts.ln() + (n_blocks * q0).ln_1p() + (n_blocks + R::one()) * (-q0).ln_1p()
            - q0.ln();
        Ok(ln.exp())
    }
}

/// Smallest number of series terms whose tail bound drops below `epsilon`,
/// found by doubling then bisection (the bound decreases in the term count).
pub fn required_terms<R: Real>(n_packets: u32, q0: R, epsilon: R) -> Result<u64> {
    if epsilon.is_nan() || epsilon <= R::zero() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive (got {epsilon})"
        )));
    }
    if q0.is_nan() || q0 > R::one() {
        return Err(Error::InvalidParameter(format!("Q(0) out of range: {q0}")));
    }
    if q0 <= R::zero() {
        return Err(Error::DivergentSeries);
    }
    if q0 == R::one() {
        return Ok(1);
    }
    let below = |n: u64| -> Result<bool> {
        Ok(truncation_error_bound(n_packets, q0, n)? < epsilon)
    };
    if below(1)? {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !below(hi)? {
        hi = hi.checked_mul(2).ok_or_else(|| {
            Error::InvalidParameter("required term count does not fit in u64".into())
        })?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Mean run length of consecutive losses without any coding: 1 / (1 - p).
pub fn baseline_expected_burst<R: Real>(p: R) -> Result<R> {
    if p.is_nan() || p < R::zero() || p >= R::one() {
        return Err(Error::InvalidParameter(format!(
            "p must be in [0, 1) (got {p})"
        )));
    }
    Ok(R::one() / (R::one() - p))
}

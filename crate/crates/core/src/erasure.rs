//! Residual loss after erasure decoding: the per-block distribution of
//! unrecoverable losses and the residual per-packet loss probability.

use crate::combinatorics::binomial;
use crate::scalar::{pow_repeated, real_from_count, real_from_u64, Real};
use crate::{Error, Result};

/// Hard cap on n + k. Keeps exact binomials cheap and float powers well
/// conditioned without any log-space machinery.
pub const MAX_TOTAL_PACKETS: u32 = 128;

/// Block erasure code parameters: n data packets protected by k redundancy
/// packets. Any n of the n + k transmitted packets reconstruct the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    n: u32,
    k: u32,
}

impl CodeParams {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block size n must be >= 1".into()));
        }
        match n.checked_add(k) {
            Some(total) if total <= MAX_TOTAL_PACKETS => Ok(Self { n, k }),
            _ => Err(Error::InvalidParameter(format!(
                "n + k must be <= {MAX_TOTAL_PACKETS} (got n = {n}, k = {k})"
            ))),
        }
    }

    /// Data packets per block.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Redundancy packets per block.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Packets on the wire per block.
    pub fn total(&self) -> u32 {
        self.n + self.k
    }
}

/// Bernoulli per-packet network loss probability, in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossProbability<R>(R);

impl<R: Real> LossProbability<R> {
    pub fn new(p: R) -> Result<Self> {
        if p.is_nan() || p < R::zero() || p > R::one() {
            return Err(Error::InvalidParameter(format!("p out of range: {p}")));
        }
        Ok(Self(p))
    }

    pub fn value(&self) -> R {
        self.0
    }
}

/// Distribution Q over the number of unrecoverable losses in a decoded block.
///
/// Q(m) is the probability that exactly m of the n data packets were lost in
/// the network and stay lost after decoding, i.e. the block as a whole
/// dropped more than k of its n + k packets. Q(0) collects every outcome the
/// decoder repairs.
///
/// Immutable once built; evaluation fixes the summation order (ascending
/// index, powers by repeated multiplication) so results are reproducible
/// run to run.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrecoverableDistribution<R> {
    params: CodeParams,
    p: LossProbability<R>,
    q: Vec<R>,
}

impl<R: Real> UnrecoverableDistribution<R> {
    /// Evaluate Q for the given code and network loss probability.
    pub fn new(params: CodeParams, p: LossProbability<R>) -> Self {
        let q = compute_q(params, p.value());
        Self { params, p, q }
    }

    /// Convenience constructor validating raw parameters.
    pub fn for_code(n: u32, k: u32, p: R) -> Result<Self> {
        Ok(Self::new(CodeParams::new(n, k)?, LossProbability::new(p)?))
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn loss_probability(&self) -> LossProbability<R> {
        self.p
    }

    /// Q(m); zero for m > n.
    pub fn q(&self, m: u32) -> R {
        self.q.get(m as usize).copied().unwrap_or_else(R::zero)
    }

    /// Q(0), the probability a block decodes with nothing missing.
    pub fn q0(&self) -> R {
        self.q[0]
    }

    /// The full vector Q(0)..Q(n).
    pub fn qs(&self) -> &[R] {
        &self.q
    }

    /// Probability that a block is lossy: Q(1) + ... + Q(n).
    ///
    /// Mathematically 1 - Q(0), but summing the positive terms directly
    /// avoids the cancellation that loses several digits when Q(0) is close
    /// to one (small p with k >= 1). Conditional expectations divide by this.
    pub fn lossy_mass(&self) -> R {
        let mut acc = R::zero();
        for &qm in self.q.iter().skip(1) {
            acc += qm;
        }
        acc
    }

    /// Residual per-packet loss probability: the chance a given data packet
    /// is lost in the network and unrecoverable, E[m] / n.
    pub fn residual_loss_probability(&self) -> R {
        let mut acc = R::zero();
        for (m, &qm) in self.q.iter().enumerate().skip(1) {
            acc += real_from_u64::<R>(m as u64) * qm;
        }
        acc / real_from_u64::<R>(self.params.n as u64)
    }
}

fn compute_q<R: Real>(params: CodeParams, p: R) -> Vec<R> {
    let n = params.n() as u64;
    let k = params.k() as u64;
    let recv = R::one() - p;
    let mut q = vec![R::zero(); n as usize + 1];

    // m = 0: at most k losses among all n + k packets, so decoding repairs
    // everything.
    let mut q0 = R::zero();
    for i in 0..=k {
        q0 += real_from_count::<R>(&binomial(n + k, i as i64))
            * pow_repeated(p, i as u32)
            * pow_repeated(recv, (n + k - i) as u32);
    }
    q[0] = q0;

    for m in 1..=n {
        let data = real_from_count::<R>(&binomial(n, m as i64))
            * pow_repeated(p, m as u32)
            * pow_repeated(recv, (n - m) as u32);
        q[m as usize] = if m <= k {
            // With m <= k data losses, decoding fails only when the
            // redundancy set loses more than k - m packets; j counts
            // received redundancy packets.
            let mut tail = R::zero();
            for j in 0..m {
                tail += real_from_count::<R>(&binomial(k, (k - j) as i64))
                    * pow_repeated(p, (k - j) as u32)
                    * pow_repeated(recv, j as u32);
            }
            data * tail
        } else {
            // More data losses than redundancy packets: never recoverable.
            data
        };
    }
    q
}

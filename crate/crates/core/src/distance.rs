//! Exact minimum distance of shortened CRC codes.
//!
//! The `[n, n - p]` code generated by `g` has a `p`-dimensional dual whose
//! generator matrix has columns `x^j mod g`, `j = 0..n`. The dual's weight
//! distribution falls out of a Walsh-Hadamard transform of the column
//! histogram, and the MacWilliams identities turn it into the code's own
//! weight distribution one coefficient at a time.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;

/// Largest degree the transform engine accepts (`2^p` scratch entries).
pub const MAX_ENGINE_DEGREE: u32 = 28;

/// Largest code dimension the brute-force oracle will enumerate.
pub const MAX_BRUTE_FORCE_DIMENSION: usize = 28;

/// Residues `x^j mod g` for `j = 0, 1, ...`, the columns of the dual code's
/// generator matrix. Grown on demand.
#[derive(Clone, Debug)]
pub struct ColumnStream {
    g: Gf2Poly,
    residues: Vec<u32>,
    order: Option<usize>,
}

impl ColumnStream {
    pub fn new(g: Gf2Poly) -> Result<Self> {
        check_engine_degree(g)?;
        Ok(ColumnStream {
            g,
            residues: vec![1],
            order: None,
        })
    }

    pub fn extend_to(&mut self, n: usize) {
        self.residues.reserve(n.saturating_sub(self.residues.len()));
        while self.residues.len() < n {
            let last = *self.residues.last().unwrap();
            let next = self.g.mulx_mod(last as u64) as u32;
            if next == 1 && self.order.is_none() {
                self.order = Some(self.residues.len());
            }
            self.residues.push(next);
        }
    }

    /// Order of `g` if it has been reached by the materialized prefix.
    pub fn order_seen(&self) -> Option<usize> {
        self.order
    }

    pub fn residues(&self) -> &[u32] {
        &self.residues
    }

    pub fn generator(&self) -> Gf2Poly {
        self.g
    }
}

/// Histogram of the first `n` columns over the `2^p` possible residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSpectrum {
    pub n: usize,
    pub counts: Vec<i32>,
}

impl DualSpectrum {
    pub fn from_columns(p: u32, columns: &[u32]) -> Self {
        let mut counts = vec![0i32; 1 << p];
        for &c in columns {
            counts[c as usize] += 1;
        }
        DualSpectrum {
            n: columns.len(),
            counts,
        }
    }
}

/// `weights[w]` is the number of dual codewords of Hamming weight `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualWeightDistribution {
    pub n: usize,
    pub p: u32,
    pub weights: Vec<u64>,
}

impl DualWeightDistribution {
    /// `(w, count)` pairs with nonzero count.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(w, &b)| (w, b))
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }
}

/// In-place unnormalized Walsh-Hadamard transform. `data.len()` must be a
/// power of two.
pub fn fwht(data: &mut [i32]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// `K_i(w; n) = sum_j (-1)^j C(w, j) C(n - w, i - j)`, evaluated directly.
pub fn krawtchouk(i: usize, w: usize, n: usize) -> BigInt {
    let mut sum = BigInt::zero();
    for j in 0..=i {
        if j > w || i - j > n.saturating_sub(w) {
            continue;
        }
        let term = binomial(w, j) * binomial(n - w, i - j);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u8);
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}

/// Reusable minimum-distance evaluator for one generator. Owns the `2^p`
/// scratch spectrum, which is reused across every queried length.
pub struct DistanceEngine {
    columns: ColumnStream,
    scratch: Vec<i32>,
    evaluations: usize,
}

impl DistanceEngine {
    pub fn new(g: Gf2Poly) -> Result<Self> {
        Ok(DistanceEngine {
            columns: ColumnStream::new(g)?,
            scratch: Vec::new(),
            evaluations: 0,
        })
    }

    /// Switches to a new generator, keeping the scratch allocation.
    pub fn reset(&mut self, g: Gf2Poly) -> Result<()> {
        check_engine_degree(g)?;
        self.columns.g = g;
        self.columns.residues.clear();
        self.columns.residues.push(1);
        self.columns.order = None;
        Ok(())
    }

    pub fn generator(&self) -> Gf2Poly {
        self.columns.g
    }

    /// Number of transform-based evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Pre-materialize columns for lengths up to `n`.
    pub fn reserve_length(&mut self, n: usize) {
        self.columns.extend_to(n);
    }

    pub fn dual_weight_distribution(&mut self, n: usize) -> Result<DualWeightDistribution> {
        let g = self.columns.g;
        let p = g.degree();
        check_length(g, n)?;
        self.columns.extend_to(n);

        let size = 1usize << p;
        if self.scratch.len() != size {
            self.scratch = vec![0; size];
        } else {
            self.scratch.fill(0);
        }
        for &c in &self.columns.residues[..n] {
            self.scratch[c as usize] += 1;
        }
        fwht(&mut self.scratch);

        let mut weights = vec![0u64; n + 1];
        let n_i = n as i64;
        for &t in &self.scratch {
            // dual word for mask a has weight (n - T[a]) / 2
            let w = (n_i - t as i64) / 2;
            weights[w as usize] += 1;
        }
        Ok(DualWeightDistribution { n, p, weights })
    }

    /// Minimum distance of the `[n, n - p]` shortened code.
    pub fn min_distance(&mut self, n: usize) -> Result<u32> {
        let g = self.columns.g;
        check_length(g, n)?;
        if n == g.degree() as usize + 1 {
            return Ok(g.weight());
        }
        self.columns.extend_to(n);
        if let Some(order) = self.columns.order_seen() {
            if n > order {
                // x^{n_c} + 1 is a codeword
                return Ok(2);
            }
        }
        let dual = self.dual_weight_distribution(n)?;
        self.evaluations += 1;
        first_nonzero_weight(&dual)
    }
}

/// Smallest `i >= 1` with `A_i > 0`, where
/// `A_i = 2^-p sum_w B_w K_i(w; n)`.
pub fn first_nonzero_weight(dual: &DualWeightDistribution) -> Result<u32> {
    let terms: Vec<(usize, u64)> = dual.nonzero().collect();
    check_dual_total(dual)?;
    match first_nonzero_i128(dual, &terms) {
        Some(d) => d,
        None => first_nonzero_big(dual, &terms),
    }
}

fn check_dual_total(dual: &DualWeightDistribution) -> Result<()> {
    if dual.weights.first() != Some(&1) || dual.total() != 1u64 << dual.p {
        return Err(Error::Internal(format!(
            "dual weight distribution does not describe a {}-dimensional code (B_0 = {:?}, total {})",
            dual.p,
            dual.weights.first(),
            dual.total()
        )));
    }
    Ok(())
}

// Fixed-width fast path. Returns None on any overflow so the caller can redo
// the work in unbounded integers.
fn first_nonzero_i128(dual: &DualWeightDistribution, terms: &[(usize, u64)]) -> Option<Result<u32>> {
    let n = dual.n as i128;
    let p = dual.p;
    let mut state: Vec<(i128, i128)> = terms
        .iter()
        .map(|&(w, _)| (1i128, n - 2 * w as i128))
        .collect();
    let max_i = dual.n.min(p as usize + 1);
    for i in 1..=max_i {
        if i > 1 {
            // (i) K_i = (n - 2w) K_{i-1} - (n - i + 2) K_{i-2}
            let ii = i as i128;
            for (&(w, _), st) in terms.iter().zip(state.iter_mut()) {
                let a = (n - 2 * w as i128).checked_mul(st.1)?;
                let b = (n - ii + 2).checked_mul(st.0)?;
                let next = a.checked_sub(b)?;
                debug_assert_eq!(next % ii, 0);
                *st = (st.1, next / ii);
            }
        }
        let mut sum = 0i128;
        for (&(_, b), st) in terms.iter().zip(state.iter()) {
            sum = sum.checked_add((b as i128).checked_mul(st.1)?)?;
        }
        if sum != 0 {
            return Some(check_coefficient_i128(sum, p, i));
        }
    }
    Some(Err(no_codeword(dual)))
}

fn check_coefficient_i128(sum: i128, p: u32, i: usize) -> Result<u32> {
    if sum < 0 || sum & ((1i128 << p) - 1) != 0 {
        return Err(Error::Internal(format!(
            "A_{i} * 2^{p} = {sum} is not a nonnegative multiple of 2^{p}"
        )));
    }
    Ok(i as u32)
}

fn first_nonzero_big(dual: &DualWeightDistribution, terms: &[(usize, u64)]) -> Result<u32> {
    let n = dual.n;
    let p = dual.p;
    let max_i = n.min(p as usize + 1);
    let mut state: Vec<(BigInt, BigInt)> = terms
        .iter()
        .map(|&(w, _)| (BigInt::from(1u8), BigInt::from(n as i64 - 2 * w as i64)))
        .collect();
    for i in 1..=max_i {
        if i > 1 {
            for (&(w, _), st) in terms.iter().zip(state.iter_mut()) {
                let next = (&st.1 * (n as i64 - 2 * w as i64)
                    - &st.0 * (n as i64 - i as i64 + 2))
                    / i as i64;
                st.0 = std::mem::replace(&mut st.1, next);
            }
        }
        let sum: BigInt = terms
            .iter()
            .zip(state.iter())
            .map(|(&(_, b), st)| &st.1 * b)
            .sum();
        if !sum.is_zero() {
            let modulus = BigInt::from(1u8) << p;
            if sum.is_negative() || !(&sum % &modulus).is_zero() {
                return Err(Error::Internal(format!(
                    "A_{i} * 2^{p} = {sum} is not a nonnegative multiple of 2^{p}"
                )));
            }
            return Ok(i as u32);
        }
    }
    Err(no_codeword(dual))
}

fn no_codeword(dual: &DualWeightDistribution) -> Error {
    Error::Internal(format!(
        "no nonzero codeword of weight <= p + 1 found at n = {}",
        dual.n
    ))
}

/// Full weight distribution `A_0..=A_n` of the code via MacWilliams, with
/// every coefficient checked for integrality.
pub fn code_weight_distribution(dual: &DualWeightDistribution) -> Result<Vec<BigInt>> {
    check_dual_total(dual)?;
    let n = dual.n;
    let modulus = BigInt::from(1u8) << dual.p;
    (0..=n)
        .map(|i| {
            let sum: BigInt = dual
                .nonzero()
                .map(|(w, b)| krawtchouk(i, w, n) * b)
                .sum();
            if sum.is_negative() || !(&sum % &modulus).is_zero() {
                return Err(Error::Internal(format!(
                    "A_{i} * 2^{} = {sum} is not a nonnegative multiple",
                    dual.p
                )));
            }
            Ok(sum / &modulus)
        })
        .collect()
}

pub fn dual_weight_distribution(g: Gf2Poly, n: usize) -> Result<DualWeightDistribution> {
    DistanceEngine::new(g)?.dual_weight_distribution(n)
}

/// One-shot minimum distance. Use [`DistanceEngine`] for repeated queries on
/// the same generator.
pub fn min_distance(g: Gf2Poly, n: usize) -> Result<u32> {
    DistanceEngine::new(g)?.min_distance(n)
}

/// Minimum weight over all nonzero multiples `i(x) g(x)` with
/// `deg i < n - p`, by Gray-code enumeration.
pub fn brute_force_min_distance(g: Gf2Poly, n: usize) -> Result<u32> {
    let p = g.degree() as usize;
    check_length(g, n)?;
    let k = n - p;
    if k > MAX_BRUTE_FORCE_DIMENSION || n > 128 {
        return Err(Error::Unsupported(format!(
            "brute force limited to dimension {MAX_BRUTE_FORCE_DIMENSION} and length 128 (got [{n}, {k}])"
        )));
    }
    let base = g.coeffs() as u128;
    let mut word = 0u128;
    let mut best = u32::MAX;
    for step in 1u64..(1u64 << k) {
        word ^= base << step.trailing_zeros();
        best = best.min(word.count_ones());
    }
    Ok(best)
}

fn check_length(g: Gf2Poly, n: usize) -> Result<()> {
    let p = g.degree() as usize;
    if n < p + 1 {
        return Err(Error::InvalidLength(format!(
            "length {n} is below p + 1 = {} for {}",
            p + 1,
            g
        )));
    }
    Ok(())
}

fn check_engine_degree(g: Gf2Poly) -> Result<()> {
    if g.degree() > MAX_ENGINE_DEGREE {
        return Err(Error::Unsupported(format!(
            "degree {} exceeds the transform limit of {MAX_ENGINE_DEGREE}",
            g.degree()
        )));
    }
    Ok(())
}

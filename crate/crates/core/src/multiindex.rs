//! Multi-indices, their graded-lexicographic enumeration and multinomial
//! weights.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An exponent vector `α = (α₁, …, αₙ)`.
///
/// Ordering is graded-lexicographic: lower total degree first, and within a
/// degree the lexicographically larger vector first, so `(3,0) < (2,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_j`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Number of coordinates with a nonzero exponent.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&a| a != 0).count()
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `α! = α₁!⋯αₙ!` in floating point.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial_f64(a)).product()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// All multi-indices of dimension `n` and total degree `k`, in
/// graded-lexicographic order. The list has `C(k+n-1, n-1)` entries.
pub fn enumerate_degree(n: usize, k: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut current, 0, k, &mut out);
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(current, pos + 1, remaining - a, out);
    }
}

/// All multi-indices of dimension `n` with degree at most `max_degree`,
/// degree by degree.
pub fn enumerate_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|k| enumerate_degree(n, k)).collect()
}

/// Number of multi-indices of dimension `n` and degree `k`.
pub fn count_degree(n: usize, k: u32) -> u128 {
    binomial(k as u128 + n as u128 - 1, n as u128 - 1).expect("count overflow")
}

/// Exact `|α|! / α!`. Overflow is reported, never wrapped.
pub fn multinomial(alpha: &MultiIndex) -> Result<u128> {
    let mut total: u128 = 0;
    let mut acc: u128 = 1;
    for &a in alpha.entries() {
        total += a as u128;
        let c =
            binomial(total, a as u128).ok_or_else(|| Error::CapacityExceeded { alpha: alpha.entries().to_vec() })?;
        acc = acc.checked_mul(c).ok_or_else(|| Error::CapacityExceeded { alpha: alpha.entries().to_vec() })?;
    }
    Ok(acc)
}

/// `|α|! / α!` as a float; exact whenever the integer value is below 2^53.
pub fn multinomial_f64(alpha: &MultiIndex) -> f64 {
    match multinomial(alpha) {
        Ok(m) => m as f64,
        Err(_) => {
            // Product of binomials in floating point; each factor is
            // accurate to a few ulps.
            let mut total = 0u32;
            let mut acc = 1.0;
            for &a in alpha.entries() {
                total += a;
                acc *= binomial_f64(total, a);
            }
            acc
        }
    }
}

/// Checked binomial coefficient.
pub fn binomial(m: u128, j: u128) -> Option<u128> {
    if j > m {
        return Some(0);
    }
    let j = j.min(m - j);
    let mut c: u128 = 1;
    for i in 0..j {
        // c * (m - i) is divisible by (i + 1); strip the common factor first
        // so the intermediate product stays as small as possible.
        let num = m - i;
        let den = i + 1;
        let g = gcd(c, den);
        let (c_red, den_red) = (c / g, den / g);
        c = c_red.checked_mul(num / den_red)?;
    }
    Some(c)
}

fn binomial_f64(m: u32, j: u32) -> f64 {
    let j = j.min(m - j);
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn factorial_f64(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

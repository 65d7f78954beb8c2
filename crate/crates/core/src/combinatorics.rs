//! Partitions, the cycle-type law on `S_k`, and exact counting oracles.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `k` accepted by [`partitions_of`].
pub const MAX_PARTITION_K: usize = 30;

/// A partition of `k`, parts nonincreasing.
///
/// Ordered reverse-lexicographically: `(3) < (2,1) < (1,1,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        other.parts.cmp(&self.parts)
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Partition {
    /// Sorts `parts` into nonincreasing order; every part must be positive.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("zero part".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// The one-part partition `(k)`.
    pub fn single(k: usize) -> Self {
        assert!(k > 0);
        Partition { parts: vec![k] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.iter().sum()
    }

    /// part size -> number of parts of that size
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &part in &self.parts {
            *out.entry(part).or_insert(0) += 1;
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&body.join("+"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split('+')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("malformed part in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// All partitions of `k`, in reverse-lexicographic order.
pub fn partitions_of(k: usize) -> Result<Vec<Partition>> {
    if k == 0 || k > MAX_PARTITION_K {
        return Err(Error::OutOfRange(format!(
            "k = {k} outside 1..={MAX_PARTITION_K}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fill_partitions(k, k, &mut current, &mut out);
    Ok(out)
}

fn fill_partitions(
    rest: usize,
    max_part: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if rest == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(rest)).rev() {
        current.push(part);
        fill_partitions(rest - part, part, current, out);
        current.pop();
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `C(n, r)` exactly.
pub fn binomial(n: &BigUint, r: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..r {
        if *n < BigUint::from(i + 1) {
            return BigUint::zero();
        }
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// Probability that a uniform permutation of `S_k` has cycle type `lambda`:
/// `1 / prod_i (i^{m_i} m_i!)`.
pub fn cycle_type_probability(lambda: &Partition) -> BigRational {
    let denominator = lambda
        .multiplicities()
        .into_iter()
        .fold(BigUint::one(), |acc, (part, mult)| {
            acc * BigUint::from(part).pow(mult as u32) * factorial(mult)
        });
    BigRational::new(BigInt::one(), BigInt::from(denominator))
}

pub fn moebius(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    let mut n = n;
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Number of monic primes of degree `k` over `F_q`:
/// `(1/k) sum_{d | k} mu(d) q^{k/d}`.
pub fn exact_prime_count(q: u64, k: u32) -> BigUint {
    assert!(k > 0, "degree must be positive");
    let q = BigInt::from(q);
    let sum = divisors(k as u64)
        .into_iter()
        .fold(BigInt::zero(), |acc, d| {
            acc + BigInt::from(moebius(d)) * q.pow(k / d as u32)
        });
    let count = sum / BigInt::from(k);
    debug_assert!(!count.is_negative());
    count.magnitude().clone()
}

/// Number of monic degree-`k` polynomials over `F_q` with factorization type
/// `lambda`: each part size `i` with multiplicity `m_i` picks a multiset of
/// `m_i` primes of degree `i`.
pub fn exact_type_count(q: u64, lambda: &Partition) -> BigUint {
    lambda
        .multiplicities()
        .into_iter()
        .fold(BigUint::one(), |acc, (part, mult)| {
            let primes = exact_prime_count(q, part as u32);
            acc * binomial(&(primes + BigUint::from(mult) - BigUint::one()), mult)
        })
}

/// `sigma(k) - k`, the sum of the proper co-divisors `k/d` for `d | k, d > 1`.
pub fn divisor_excess(k: u64) -> u64 {
    divisors(k)
        .into_iter()
        .filter(|&d| d > 1)
        .map(|d| k / d)
        .sum()
}

/// Euler's totient of an integer.
pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            while n % d == 0 {
                n /= d;
            }
            result -= result / d;
        }
        d += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

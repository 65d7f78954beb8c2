//! Counting objects over short intervals `I(f, m) = f + P_{<=m}` and
//! arithmetic progressions `{f + D g}`: factorization-type censuses, the
//! polynomial totient, von Mangoldt sums and radical sets.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::combinatorics::{divisors, partitions_of, Partition};
use crate::error::{Error, Result};
use crate::exec::{fold_range, map_range, power, ScanOptions};
use crate::gf::FieldSpec;
use crate::polyring::{
    self, factor, factorization_type, is_irreducible, prime_power_decomposition, Poly,
};

/// The short interval `I(f, m)`, stored with `f`'s coefficients of degree
/// `0..=m` zeroed so equal intervals compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalSpec {
    center: Poly,
    m: usize,
}

impl IntervalSpec {
    pub fn new(f: &Poly, m: usize) -> Result<Self> {
        let k = f.degree().ok_or(Error::ZeroPolynomial)?;
        if !f.is_monic() {
            return Err(Error::Precondition("interval center must be monic".into()));
        }
        if m >= k {
            return Err(Error::OutOfRange(format!("m = {m} must be below k = {k}")));
        }
        Ok(IntervalSpec {
            center: f.truncate_below(m),
            m,
        })
    }

    /// The `cell`-th interval of `M(k, q)` in canonical order: the center's
    /// coefficients of degree `m+1..k` are the base-`q` digits of `cell`.
    pub fn canonical(field: &FieldSpec, k: usize, m: usize, cell: u64) -> Result<Self> {
        if m >= k {
            return Err(Error::OutOfRange(format!("m = {m} must be below k = {k}")));
        }
        let top = Poly::monic_from_index(field, k - m - 1, cell);
        let mut coeffs = vec![crate::gf::FieldElement::ZERO; m + 1];
        coeffs.extend_from_slice(top.coeffs());
        Ok(IntervalSpec {
            center: Poly::new(coeffs),
            m,
        })
    }

    /// Number of distinct intervals of length `m` in `M(k, q)`.
    pub fn cell_count(q: u64, k: usize, m: usize) -> u128 {
        power(q, (k - m - 1) as u32)
    }

    /// Canonical representative (coefficients `0..=m` zero).
    pub fn center(&self) -> &Poly {
        &self.center
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.center.degree().unwrap_or(0)
    }

    /// Position of this interval in canonical order.
    pub fn cell_id(&self, field: &FieldSpec) -> u64 {
        let q = field.q() as u64;
        self.center.coeffs()[self.m + 1..self.k()]
            .iter()
            .rev()
            .fold(0, |acc, c| acc * q + c.index() as u64)
    }

    pub fn contains(&self, field: &FieldSpec, g: &Poly) -> bool {
        polyring::sub(field, g, &self.center)
            .degree()
            .is_none_or(|d| d <= self.m)
    }

    /// `center + from_index(m + 1, offset)`.
    pub fn member(&self, field: &FieldSpec, offset: u64) -> Poly {
        polyring::add(
            field,
            &self.center,
            &Poly::from_index(field, self.m + 1, offset),
        )
    }
}

/// Degree-`k` members of the residue class `f mod D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionSpec {
    modulus: Poly,
    residue: Poly,
    k: usize,
}

impl ProgressionSpec {
    pub fn new(field: &FieldSpec, modulus: &Poly, residue: &Poly, k: usize) -> Result<Self> {
        let delta = modulus.degree().ok_or(Error::ZeroPolynomial)?;
        if !modulus.is_monic() || delta < 1 {
            return Err(Error::Precondition(
                "modulus must be monic of degree at least 1".into(),
            ));
        }
        if residue.degree().is_some_and(|d| d >= delta) {
            return Err(Error::Precondition(
                "residue must have degree below the modulus".into(),
            ));
        }
        if k <= delta {
            return Err(Error::OutOfRange(format!(
                "k = {k} must exceed deg D = {delta}"
            )));
        }
        if !polyring::poly_gcd(field, residue, modulus)?.is_one() {
            return Err(Error::NotCoprime);
        }
        Ok(ProgressionSpec {
            modulus: modulus.clone(),
            residue: residue.clone(),
            k,
        })
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn residue(&self) -> &Poly {
        &self.residue
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of members, `q^(k - deg D)`.
    pub fn size(&self, q: u64) -> u128 {
        power(q, (self.k - self.modulus.degree().unwrap()) as u32)
    }
}

/// Counts by factorization type. Zero counts are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypeCensus {
    counts: BTreeMap<Partition, u64>,
}

impl TypeCensus {
    pub fn get(&self, lambda: &Partition) -> u64 {
        self.counts.get(lambda).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, u64)> {
        self.counts.iter().map(|(l, &c)| (l, c))
    }

    /// Every partition of `k` with its count, zeros included.
    pub fn dense(&self, k: usize) -> Result<Vec<(Partition, u64)>> {
        Ok(partitions_of(k)?
            .into_iter()
            .map(|l| {
                let c = self.get(&l);
                (l, c)
            })
            .collect())
    }

    fn from_slots(partitions: &[Partition], slots: &[u64]) -> Self {
        let counts = partitions
            .iter()
            .zip(slots)
            .filter(|(_, &c)| c > 0)
            .map(|(l, &c)| (l.clone(), c))
            .collect();
        TypeCensus { counts }
    }
}

/// Dense indexing of the partitions of `k`.
pub(crate) struct PartitionIndex {
    partitions: Vec<Partition>,
    lookup: HashMap<Partition, usize>,
}

impl PartitionIndex {
    pub(crate) fn new(k: usize) -> Result<Self> {
        let partitions = partitions_of(k)?;
        let lookup = partitions
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(PartitionIndex { partitions, lookup })
    }

    pub(crate) fn len(&self) -> usize {
        self.partitions.len()
    }

    pub(crate) fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub(crate) fn slot(&self, lambda: &Partition) -> Option<usize> {
        self.lookup.get(lambda).copied()
    }

    fn slot_of(&self, field: &FieldSpec, f: &Poly) -> usize {
        let lambda = factorization_type(field, f).expect("nonconstant polynomial");
        self.lookup[&lambda]
    }
}

fn add_slots(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// For every `a in F_q^(m+1)`, the factorization type of
/// `f + g * (a_0 + a_1 t + .. + a_m t^m)`.
pub fn specialization_counts(
    field: &FieldSpec,
    f: &Poly,
    g: &Poly,
    m: usize,
    options: &ScanOptions,
) -> Result<TypeCensus> {
    let k = f.degree().ok_or(Error::ZeroPolynomial)?;
    let deg_g = g.degree().ok_or(Error::ZeroPolynomial)?;
    if k <= deg_g + m {
        return Err(Error::Precondition(format!(
            "deg f = {k} must exceed deg g + m = {}",
            deg_g + m
        )));
    }
    if !polyring::poly_gcd(field, f, g)?.is_one() {
        return Err(Error::NotCoprime);
    }
    let size = power(field.q() as u64, (m + 1) as u32);
    options.check_budget(size)?;
    let index = PartitionIndex::new(k)?;
    let slots = options.install(|| {
        fold_range(
            size as u64,
            || vec![0u64; index.len()],
            |acc, a| {
                let shift = Poly::from_index(field, m + 1, a);
                let h = polyring::add(field, f, &polyring::mul(field, g, &shift));
                acc[index.slot_of(field, &h)] += 1;
            },
            add_slots,
        )
    });
    Ok(TypeCensus::from_slots(index.partitions(), &slots))
}

/// `pi_q(I; lambda)` for every `lambda`.
pub fn interval_counts(
    field: &FieldSpec,
    interval: &IntervalSpec,
    options: &ScanOptions,
) -> Result<TypeCensus> {
    specialization_counts(
        field,
        interval.center(),
        &Poly::one(),
        interval.m(),
        options,
    )
}

/// `pi_q(k; D, f; lambda)` for every `lambda`.
pub fn progression_counts(
    field: &FieldSpec,
    progression: &ProgressionSpec,
    options: &ScanOptions,
) -> Result<TypeCensus> {
    let d = progression.modulus();
    let free = progression.k() - d.degree().unwrap();
    // f + D (t^free + lower) = (f + D t^free) + D * lower
    let base = polyring::add(
        field,
        progression.residue(),
        &polyring::mul(
            field,
            d,
            &Poly::monomial(crate::gf::FieldElement::ONE, free),
        ),
    );
    specialization_counts(field, &base, d, free - 1, options)
}

/// Number of units of `F_q[t]/(D)`: `prod_{P^e || D} |P|^(e-1) (|P| - 1)`.
pub fn poly_totient(field: &FieldSpec, d: &Poly) -> Result<BigUint> {
    let factorization = factor(field, d)?;
    let q = BigUint::from(field.q());
    Ok(factorization
        .factors
        .iter()
        .fold(BigUint::one(), |acc, (p, e)| {
            let norm = q.pow(p.degree().unwrap() as u32);
            acc * norm.pow(e - 1) * (norm - BigUint::one())
        }))
}

/// `Lambda(g) = deg P` if `g = c P^e`, else 0.
pub fn von_mangoldt(field: &FieldSpec, g: &Poly) -> Result<usize> {
    if g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(prime_power_decomposition(field, g).map_or(0, |(d, _)| d))
}

fn check_nu_range(f: &Poly, m: usize) -> Result<usize> {
    let k = f.degree().ok_or(Error::ZeroPolynomial)?;
    if m < 1 || m >= k {
        return Err(Error::OutOfRange(format!(
            "need 1 <= m < k, got m = {m}, k = {k}"
        )));
    }
    Ok(k)
}

/// `nu(f; m)`: the sum of `Lambda(g)` over `g in I(f, m)` with `g(0) != 0`.
pub fn nu(field: &FieldSpec, f: &Poly, m: usize, options: &ScanOptions) -> Result<u64> {
    check_nu_range(f, m)?;
    let interval = IntervalSpec::new(f, m)?;
    let size = power(field.q() as u64, (m + 1) as u32);
    options.check_budget(size)?;
    let q = field.q() as u64;
    Ok(options.install(|| {
        fold_range(
            size as u64,
            || 0u64,
            |acc, offset| {
                if offset % q != 0 {
                    let g = interval.member(field, offset);
                    *acc += von_mangoldt(field, &g).unwrap() as u64;
                }
            },
            |a, b| a + b,
        )
    }))
}

/// Exact mean and variance of `nu(.; m)` over `M(k, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuMoments {
    pub mean: BigRational,
    pub variance: BigRational,
}

/// `nu(f; m)` for every canonical interval of `M(k, q)`, in cell order.
///
/// One pass over `M(k, q)`: `Lambda` is computed once per polynomial and
/// bucketed by interval.
pub fn nu_by_interval(
    field: &FieldSpec,
    k: usize,
    m: usize,
    options: &ScanOptions,
) -> Result<Vec<u64>> {
    if m < 1 || m >= k {
        return Err(Error::OutOfRange(format!(
            "need 1 <= m < k, got m = {m}, k = {k}"
        )));
    }
    let q = field.q() as u64;
    let size = power(q, k as u32);
    options.check_budget(size)?;
    let lambdas: Vec<u8> = options.install(|| {
        map_range(size as u64, |i| {
            if i % q == 0 {
                return 0;
            }
            let g = Poly::monic_from_index(field, k, i);
            prime_power_decomposition(field, &g).map_or(0, |(d, _)| d as u8)
        })
    });
    let width = q.pow((m + 1) as u32) as usize;
    Ok(lambdas
        .chunks(width)
        .map(|bucket| bucket.iter().map(|&l| l as u64).sum())
        .collect())
}

pub fn mean_variance_nu(
    field: &FieldSpec,
    k: usize,
    m: usize,
    options: &ScanOptions,
) -> Result<NuMoments> {
    let values = nu_by_interval(field, k, m, options)?;
    Ok(moments(&values))
}

pub(crate) fn moments(values: &[u64]) -> NuMoments {
    let n = BigInt::from(values.len());
    let sum: BigInt = values.iter().map(|&v| BigInt::from(v)).sum();
    let sum_sq: BigInt = values
        .iter()
        .map(|&v| BigInt::from(v) * BigInt::from(v))
        .sum();
    let mean = BigRational::new(sum, n.clone());
    let variance = BigRational::new(sum_sq, n) - &mean * &mean;
    NuMoments { mean, variance }
}

/// `I^(1/d) = {g in M(k/d, q) : g^d in I}`, sorted.
pub fn radical_set(
    field: &FieldSpec,
    interval: &IntervalSpec,
    d: usize,
    options: &ScanOptions,
) -> Result<Vec<Poly>> {
    let k = interval.k();
    if d <= 1 || k % d != 0 {
        return Err(Error::OutOfRange(format!(
            "d = {d} must be a divisor of k = {k} above 1"
        )));
    }
    let root_degree = k / d;
    let size = power(field.q() as u64, root_degree as u32);
    options.check_budget(size)?;
    let members: Vec<Option<Poly>> = options.install(|| {
        map_range(size as u64, |i| {
            let g = Poly::monic_from_index(field, root_degree, i);
            interval
                .contains(field, &polyring::pow(field, &g, d as u64))
                .then_some(g)
        })
    });
    Ok(members.into_iter().flatten().collect())
}

/// `nu(f; m) = k pi_q(I) + sum_{d | k, d > 1} (k/d) pi_q(I^(1/d)) - epsilon`,
/// with every term computed separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuDecomposition {
    pub k_pi: u64,
    /// `d -> (k/d) * #{primes in I^(1/d)}`
    pub proper_terms: BTreeMap<u64, u64>,
    /// 1 iff `t^k` lies in the interval.
    pub epsilon: u8,
    /// Sum of the terms minus `epsilon`.
    pub reconstructed: i64,
    /// Sum of the terms plus `epsilon`, kept for comparison.
    pub reconstructed_plus_epsilon: i64,
    pub nu: u64,
}

pub fn nu_decomposition(
    field: &FieldSpec,
    f: &Poly,
    m: usize,
    options: &ScanOptions,
) -> Result<NuDecomposition> {
    let k = check_nu_range(f, m)?;
    let interval = IntervalSpec::new(f, m)?;
    let size = power(field.q() as u64, (m + 1) as u32);
    options.check_budget(size)?;
    let primes_in_interval = options.install(|| {
        fold_range(
            size as u64,
            || 0u64,
            |acc, offset| {
                let g = interval.member(field, offset);
                *acc += is_irreducible(field, &g).unwrap() as u64;
            },
            |a, b| a + b,
        )
    });
    let mut proper_terms = BTreeMap::new();
    for d in divisors(k as u64).into_iter().filter(|&d| d > 1) {
        let roots = radical_set(field, &interval, d as usize, options)?;
        let primes = roots
            .iter()
            .filter(|g| is_irreducible(field, g).unwrap())
            .count() as u64;
        proper_terms.insert(d, (k as u64 / d) * primes);
    }
    let t_k = Poly::monomial(crate::gf::FieldElement::ONE, k);
    let epsilon = interval.contains(field, &t_k) as u8;
    let k_pi = k as u64 * primes_in_interval;
    let sum = (k_pi + proper_terms.values().sum::<u64>()) as i64;
    Ok(NuDecomposition {
        k_pi,
        proper_terms,
        epsilon,
        reconstructed: sum - epsilon as i64,
        reconstructed_plus_epsilon: sum + epsilon as i64,
        nu: nu(field, f, m, options)?,
    })
}

/// Factorization type of every polynomial in `M(k, q)`, by index.
pub struct TypeTable {
    field: FieldSpec,
    k: usize,
    index: PartitionIndex,
    slots: Vec<u16>,
}

impl TypeTable {
    pub fn build(field: &FieldSpec, k: usize, options: &ScanOptions) -> Result<Self> {
        let size = power(field.q() as u64, k as u32);
        options.check_budget(size)?;
        let index = PartitionIndex::new(k)?;
        let slots = options.install(|| {
            map_range(size as u64, |i| {
                index.slot_of(field, &Poly::monic_from_index(field, k, i)) as u16
            })
        });
        Ok(TypeTable {
            field: field.clone(),
            k,
            index,
            slots,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn partitions(&self) -> &[Partition] {
        self.index.partitions()
    }

    pub(crate) fn slot(&self, lambda: &Partition) -> Option<usize> {
        self.index.slot(lambda)
    }

    /// Slot of the polynomial with the given index in `M(k, q)`.
    pub(crate) fn slot_at(&self, i: u64) -> usize {
        self.slots[i as usize] as usize
    }

    pub fn type_at(&self, i: u64) -> &Partition {
        &self.index.partitions()[self.slot_at(i)]
    }

    /// Census of all of `M(k, q)`.
    pub fn census(&self) -> TypeCensus {
        let mut slots = vec![0u64; self.index.len()];
        for &s in &self.slots {
            slots[s as usize] += 1;
        }
        TypeCensus::from_slots(self.index.partitions(), &slots)
    }
}

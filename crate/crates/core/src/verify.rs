//! Hypothesis coverage, deviation scans over every interval or residue
//! class, the small-`m` counterexamples, and the variance trend.
//!
//! Scans never assert a bound: they record the worst deviation from the
//! main term over covered cells, normalized by `q^(m + 1/2)`, and keep
//! excluded cells in separate aggregates.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::combinatorics::{cycle_type_probability, euler_phi, exact_type_count, Partition};
use crate::error::{Error, Result};
use crate::exec::{map_range, power, ScanOptions};
use crate::gf::{FieldElement, FieldSpec};
use crate::polyring::{self, is_irreducible, rational_derivative_is_constant, Poly};
use crate::render::{normalized_text, rational_text, serialize_rational};
use crate::statistics::{mean_variance_nu, poly_totient, IntervalSpec, TypeTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoverageStatus {
    Covered,
    ExcludedSmallM,
    ExcludedCharDividesKKminus1,
    ExcludedChar2LowDerivative,
    ExcludedChar2ConstantRationalDerivative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub status: CoverageStatus,
    pub detail: String,
}

impl Coverage {
    fn new(status: CoverageStatus, detail: impl Into<String>) -> Self {
        Coverage {
            status,
            detail: detail.into(),
        }
    }

    pub fn is_covered(&self) -> bool {
        self.status == CoverageStatus::Covered
    }
}

/// Classifies `I(f, m)` for monic `f` of degree `k`. `f` is taken as given;
/// in characteristic 2 with `m <= 2` the test `deg f' <= 1` does not depend
/// on the representative anyway.
pub fn check_hypotheses_interval(
    field: &FieldSpec,
    k: usize,
    m: usize,
    f: &Poly,
) -> Result<Coverage> {
    if f.degree() != Some(k) || !f.is_monic() {
        return Err(Error::Precondition(format!(
            "f must be monic of degree {k}"
        )));
    }
    if m >= k {
        return Err(Error::OutOfRange(format!("m = {m} must be below k = {k}")));
    }
    let p = field.p() as usize;
    if m < 1 {
        return Ok(Coverage::new(CoverageStatus::ExcludedSmallM, "m = 0"));
    }
    if (k * (k - 1)) % p == 0 && m < 2 {
        return Ok(Coverage::new(
            CoverageStatus::ExcludedCharDividesKKminus1,
            format!("p = {p} divides k(k-1) = {} and m < 2", k * (k - 1)),
        ));
    }
    let df = polyring::derivative(field, f);
    if p == 2 && df.degree().is_none_or(|d| d <= 1) && m < 3 {
        return Ok(Coverage::new(
            CoverageStatus::ExcludedChar2LowDerivative,
            "p = 2, deg f' <= 1 and m < 3",
        ));
    }
    Ok(Coverage::new(
        CoverageStatus::Covered,
        "all hypotheses hold",
    ))
}

/// Classifies the progression `f mod D` with `deg D = k - m - 1`.
pub fn check_hypotheses_progression(
    field: &FieldSpec,
    k: usize,
    m: usize,
    d: &Poly,
    f: &Poly,
) -> Result<Coverage> {
    if !d.is_monic() {
        return Err(Error::Precondition("modulus must be monic".into()));
    }
    if m + 1 >= k || d.degree() != Some(k - m - 1) {
        return Err(Error::OutOfRange(format!(
            "deg D = {:?} must equal k - m - 1 >= 1 for k = {k}, m = {m}",
            d.degree()
        )));
    }
    let constant = rational_derivative_is_constant(field, f, d)?;
    if m < 2 {
        return Ok(Coverage::new(
            CoverageStatus::ExcludedSmallM,
            format!("m = {m} < 2"),
        ));
    }
    if field.p() == 2 && m == 2 && constant {
        return Ok(Coverage::new(
            CoverageStatus::ExcludedChar2ConstantRationalDerivative,
            "p = m = 2 and (f/D)' is constant",
        ));
    }
    Ok(Coverage::new(
        CoverageStatus::Covered,
        "all hypotheses hold",
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Interval,
    Progression,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellRecord {
    pub cell_id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    pub count: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub expected: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub abs_dev: BigRational,
    pub status: CoverageStatus,
}

impl CellRecord {
    pub fn covered(&self) -> bool {
        self.status == CoverageStatus::Covered
    }
}

/// Worst deviation over a group of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub cells: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub max_abs_dev: BigRational,
    /// `max_abs_dev / q^(m + 1/2)`, truncated decimal.
    pub normalized_constant: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationReport {
    pub mode: ScanMode,
    pub q: u64,
    pub k: usize,
    pub m: usize,
    pub lambda: Partition,
    pub cells: u64,
    pub covered_cells: u64,
    /// Aggregate over covered cells only.
    pub covered: Option<Deviation>,
    /// Aggregates over excluded cells, per exclusion.
    pub excluded: BTreeMap<CoverageStatus, Deviation>,
    /// Sum of the cell counts at `lambda`.
    pub total_count: u64,
    /// Every cell's census summed to its domain size.
    pub census_consistent: bool,
    /// Cells dropped by `max_cells`.
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<Vec<CellRecord>>,
}

impl DeviationReport {
    /// Aggregates `records`; consistency and truncation flags are left for
    /// the caller.
    fn assemble(
        mode: ScanMode,
        q: u64,
        k: usize,
        m: usize,
        lambda: &Partition,
        records: Vec<CellRecord>,
        keep_cells: bool,
    ) -> Self {
        let mut groups: BTreeMap<CoverageStatus, (u64, BigRational)> = BTreeMap::new();
        for r in &records {
            let entry = groups
                .entry(r.status)
                .or_insert_with(|| (0, BigRational::zero()));
            entry.0 += 1;
            if r.abs_dev > entry.1 {
                entry.1 = r.abs_dev.clone();
            }
        }
        let mut groups: BTreeMap<CoverageStatus, Deviation> = groups
            .into_iter()
            .map(|(status, (cells, max_abs_dev))| {
                let normalized_constant = normalized_text(&max_abs_dev, q, m as u32);
                (
                    status,
                    Deviation {
                        cells,
                        max_abs_dev,
                        normalized_constant,
                    },
                )
            })
            .collect();
        let covered = groups.remove(&CoverageStatus::Covered);
        DeviationReport {
            mode,
            q,
            k,
            m,
            lambda: lambda.clone(),
            cells: records.len() as u64,
            covered_cells: covered.as_ref().map_or(0, |d| d.cells),
            covered,
            excluded: groups,
            total_count: records.iter().map(|r| r.count).sum(),
            census_consistent: true,
            truncated: false,
            per_cell: keep_cells.then_some(records),
        }
    }

    /// Normalized constant over covered cells, if any.
    pub fn normalized_constant(&self) -> Option<&str> {
        self.covered
            .as_ref()
            .map(|d| d.normalized_constant.as_str())
    }
}

fn abs_dev(count: u64, expected: &BigRational) -> BigRational {
    (BigRational::from_integer(BigInt::from(count)) - expected).abs()
}

fn check_lambda(lambda: &Partition, k: usize) -> Result<()> {
    if lambda.k() != k {
        return Err(Error::InvalidPartition(format!(
            "{lambda} is not a partition of {k}"
        )));
    }
    Ok(())
}

/// Scans every interval `I(f, m)` of `M(k, q)` for the type `lambda`.
pub fn scan_intervals(
    field: &FieldSpec,
    k: usize,
    m: usize,
    lambda: &Partition,
    options: &ScanOptions,
) -> Result<DeviationReport> {
    check_lambda(lambda, k)?;
    if m < 1 || m >= k {
        return Err(Error::OutOfRange(format!(
            "need 1 <= m < k, got m = {m}, k = {k}"
        )));
    }
    let table = TypeTable::build(field, k, options)?;
    scan_intervals_with_table(&table, m, lambda, options)
}

/// As [`scan_intervals`], reusing a prebuilt type table.
pub fn scan_intervals_with_table(
    table: &TypeTable,
    m: usize,
    lambda: &Partition,
    options: &ScanOptions,
) -> Result<DeviationReport> {
    let field = table.field();
    let k = table.k();
    check_lambda(lambda, k)?;
    if m < 1 || m >= k {
        return Err(Error::OutOfRange(format!(
            "need 1 <= m < k, got m = {m}, k = {k}"
        )));
    }
    let q = field.q() as u64;
    let slot = table.slot(lambda).expect("partition of k");
    let width = q.pow((m + 1) as u32);
    let cells = IntervalSpec::cell_count(q, k, m) as u64;
    let expected = cycle_type_probability(lambda) * BigRational::from_integer(width.into());
    let slots = table.partitions().len();

    let rows: Vec<(CellRecord, bool)> = options.install(|| {
        map_range(cells, |cell| {
            let mut census = vec![0u64; slots];
            for i in cell * width..(cell + 1) * width {
                census[table.slot_at(i)] += 1;
            }
            let consistent = census.iter().sum::<u64>() == width;
            let interval = IntervalSpec::canonical(field, k, m, cell).expect("m < k");
            let coverage = check_hypotheses_interval(field, k, m, interval.center())
                .expect("canonical interval");
            let count = census[slot];
            let record = CellRecord {
                cell_id: cell,
                center: Some(interval.center().render(field)),
                modulus: None,
                residue: None,
                count,
                abs_dev: abs_dev(count, &expected),
                expected: expected.clone(),
                status: coverage.status,
            };
            (record, consistent)
        })
    });
    let consistent = rows.iter().all(|(_, c)| *c)
        && rows.iter().map(|(r, _)| r.count).sum::<u64>() == table.census().get(lambda);
    let records = rows.into_iter().map(|(r, _)| r).collect();
    let mut report = DeviationReport::assemble(
        ScanMode::Interval,
        q,
        k,
        m,
        lambda,
        records,
        options.per_cell,
    );
    report.census_consistent = consistent;
    Ok(report)
}

/// Residue of every polynomial of `M(k, q)` modulo `d`, as a base-`q` index.
struct ResidueMap {
    /// `t^j mod d` for `j = 0..=k`, dense with `deg d` entries.
    powers: Vec<Vec<FieldElement>>,
}

impl ResidueMap {
    fn new(field: &FieldSpec, d: &Poly, k: usize) -> Self {
        let delta = d.degree().unwrap();
        let powers = (0..=k)
            .map(|j| {
                let r = polyring::rem(field, &Poly::monomial(FieldElement::ONE, j), d);
                let mut dense = r.coeffs().to_vec();
                dense.resize(delta, FieldElement::ZERO);
                dense
            })
            .collect();
        ResidueMap { powers }
    }

    fn residue_index(
        &self,
        field: &FieldSpec,
        k: usize,
        mut index: u64,
        scratch: &mut [FieldElement],
    ) -> u64 {
        let q = field.q() as u64;
        scratch.copy_from_slice(&self.powers[k]);
        for power in &self.powers[..k] {
            let c = FieldElement::from_index_unchecked((index % q) as u32);
            index /= q;
            if c.is_zero() {
                continue;
            }
            for (s, &b) in scratch.iter_mut().zip(power) {
                *s = field.add(*s, field.mul(c, b));
            }
        }
        scratch
            .iter()
            .rev()
            .fold(0, |acc, c| acc * q + c.index() as u64)
    }
}

/// Scans residue classes `f mod D` over monic `D` of degree `k - m - 1`,
/// in canonical order, for the type `lambda`.
pub fn scan_progressions(
    field: &FieldSpec,
    k: usize,
    m: usize,
    lambda: &Partition,
    options: &ScanOptions,
) -> Result<DeviationReport> {
    check_lambda(lambda, k)?;
    if m + 1 >= k {
        return Err(Error::Precondition(format!(
            "deg D = k - m - 1 must be at least 1 (k = {k}, m = {m})"
        )));
    }
    let q = field.q() as u64;
    let delta = k - m - 1;
    let moduli = q.pow(delta as u32);
    let moduli_needed = options.max_cells.map_or(moduli, |c| c.min(moduli));
    options.check_budget(power(q, k as u32).saturating_mul(moduli_needed as u128))?;

    let table = TypeTable::build(field, k, options)?;
    let slot = table.slot(lambda).expect("partition of k");
    let type_total = BigRational::from_integer(BigInt::from(exact_type_count(q, lambda)));
    let width = q.pow((m + 1) as u32);

    // Cells in canonical order, truncated to max_cells.
    let mut plan: Vec<(Poly, Vec<u64>)> = Vec::new();
    let mut planned = 0u64;
    let mut truncated = false;
    'moduli: for di in 0..moduli {
        let d = Poly::monic_from_index(field, delta, di);
        let mut residues = Vec::new();
        for fi in 0..moduli {
            let f = Poly::from_index(field, delta, fi);
            if f.is_zero() || !polyring::poly_gcd(field, &f, &d)?.is_one() {
                continue;
            }
            if options.max_cells.is_some_and(|cap| planned >= cap) {
                truncated = true;
                if !residues.is_empty() {
                    plan.push((d, residues));
                }
                break 'moduli;
            }
            residues.push(fi);
            planned += 1;
        }
        plan.push((d, residues));
    }

    let rows: Vec<Vec<(CellRecord, bool)>> = options.install(|| {
        map_range(plan.len() as u64, |pi| {
            let (d, residues) = &plan[pi as usize];
            let map = ResidueMap::new(field, d, k);
            let mut at_lambda = vec![0u64; moduli as usize];
            let mut sizes = vec![0u64; moduli as usize];
            let mut scratch = vec![FieldElement::ZERO; delta];
            for i in 0..table.len() as u64 {
                let r = map.residue_index(field, k, i, &mut scratch) as usize;
                sizes[r] += 1;
                if table.slot_at(i) == slot {
                    at_lambda[r] += 1;
                }
            }
            let phi = poly_totient(field, d).expect("nonzero modulus");
            let expected = &type_total / BigRational::from_integer(BigInt::from(phi));
            let di = d.low_index(field, delta);
            residues
                .iter()
                .map(|&fi| {
                    let f = Poly::from_index(field, delta, fi);
                    let coverage =
                        check_hypotheses_progression(field, k, m, d, &f).expect("coprime residue");
                    let count = at_lambda[fi as usize];
                    let record = CellRecord {
                        cell_id: di * moduli + fi,
                        center: None,
                        modulus: Some(d.render(field)),
                        residue: Some(f.render(field)),
                        count,
                        abs_dev: abs_dev(count, &expected),
                        expected: expected.clone(),
                        status: coverage.status,
                    };
                    (record, sizes[fi as usize] == width)
                })
                .collect()
        })
    });
    let rows: Vec<(CellRecord, bool)> = rows.into_iter().flatten().collect();
    let consistent = rows.iter().all(|(_, c)| *c);
    let records = rows.into_iter().map(|(r, _)| r).collect();
    let mut report = DeviationReport::assemble(
        ScanMode::Progression,
        q,
        k,
        m,
        lambda,
        records,
        options.per_cell,
    );
    report.census_consistent = consistent;
    report.truncated = truncated;
    Ok(report)
}

/// Number of primes among `t^k + a`, against the closed form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallIntervalCheck {
    pub q: u64,
    pub k: usize,
    pub expected: u64,
    pub actual: u64,
    pub agrees: bool,
}

/// Primes in `I(t^k, 0)`: `phi(k)(q-1)/k` when `q = 1 mod k`, else none.
pub fn counterexample_m0(field: &FieldSpec, k: usize) -> Result<SmallIntervalCheck> {
    if k < 2 {
        return Err(Error::OutOfRange(format!("k = {k} must exceed 1")));
    }
    let q = field.q() as u64;
    let kk = k as u64;
    let expected = if q % kk == 1 {
        euler_phi(kk) * (q - 1) / kk
    } else {
        0
    };
    let actual = field
        .elements()
        .filter(|&a| {
            let mut coeffs = vec![FieldElement::ZERO; k + 1];
            coeffs[0] = a;
            coeffs[k] = FieldElement::ONE;
            is_irreducible(field, &Poly::new(coeffs)).unwrap()
        })
        .count() as u64;
    Ok(SmallIntervalCheck {
        q,
        k,
        expected,
        actual,
        agrees: expected == actual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum M1Variant {
    /// `k = p^2`
    #[serde(rename = "p2")]
    PSquared,
    /// `k = p^2 + 1`
    #[serde(rename = "p2+1")]
    PSquaredPlusOne,
}

impl M1Variant {
    pub fn degree(self, p: u64) -> usize {
        match self {
            M1Variant::PSquared => (p * p) as usize,
            M1Variant::PSquaredPlusOne => (p * p + 1) as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearIntervalCheck {
    pub p: u64,
    pub n: u32,
    pub q: u64,
    pub k: usize,
    pub variant: M1Variant,
    /// Known value; none for `k = p^2 + 1`.
    pub expected: Option<u64>,
    pub actual: u64,
    pub agrees: Option<bool>,
}

/// Primes in `I(t^k, 1)` over `F_{p^(2n)}`; there are none when `k = p^2`.
pub fn counterexample_m1(
    p: u64,
    n: u32,
    variant: M1Variant,
    options: &ScanOptions,
) -> Result<LinearIntervalCheck> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let order = power(p, 2 * n);
    options.check_budget(order.saturating_mul(order))?;
    let field = FieldSpec::new(p, 2 * n, options.budget)?;
    let q = field.q() as u64;
    let k = variant.degree(p);
    let interval = IntervalSpec::new(&Poly::monomial(FieldElement::ONE, k), 1)?;
    let actual: u64 = options.install(|| {
        map_range(q * q, |offset| {
            is_irreducible(&field, &interval.member(&field, offset)).unwrap() as u64
        })
        .into_iter()
        .sum()
    });
    let expected = (variant == M1Variant::PSquared).then_some(0);
    Ok(LinearIntervalCheck {
        p,
        n,
        q,
        k,
        variant,
        expected,
        actual,
        agrees: expected.map(|e| e == actual),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrendPoint {
    pub q: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub variance: BigRational,
    /// `Var nu / q^(m+1)`
    #[serde(serialize_with = "serialize_rational")]
    pub ratio: BigRational,
    /// `|ratio - (k - m - 2)|`
    #[serde(serialize_with = "serialize_rational")]
    pub gap: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarianceTrend {
    pub k: usize,
    pub m: usize,
    pub limit: i64,
    pub per_q: Vec<TrendPoint>,
}

/// Exact `Var nu(.; m) / q^(m+1)` for each `q`, next to the limit `k - m - 2`.
pub fn variance_trend(
    k: usize,
    m: usize,
    qs: &[u64],
    options: &ScanOptions,
) -> Result<VarianceTrend> {
    if m < 1 || m + 3 >= k {
        return Err(Error::OutOfRange(format!(
            "the variance limit needs 1 <= m < k - 3, got k = {k}, m = {m}"
        )));
    }
    for &q in qs {
        options.check_budget(power(q, k as u32))?;
    }
    let limit = BigRational::from_integer(BigInt::from(k as i64 - m as i64 - 2));
    let per_q = qs
        .iter()
        .map(|&q| {
            let field = FieldSpec::from_order(q, options.budget)?;
            let moments = mean_variance_nu(&field, k, m, options)?;
            let ratio = &moments.variance
                / BigRational::from_integer(BigInt::from(BigUint::from(q).pow((m + 1) as u32)));
            let gap = (&ratio - &limit).abs();
            Ok(TrendPoint {
                q,
                variance: moments.variance,
                ratio,
                gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceTrend {
        k,
        m,
        limit: k as i64 - m as i64 - 2,
        per_q,
    })
}

/// One-line summary used in diagnostics.
pub fn describe(report: &DeviationReport) -> String {
    format!(
        "q={} k={} m={} lambda={} cells={} covered={} max_dev={}",
        report.q,
        report.k,
        report.m,
        report.lambda,
        report.cells,
        report.covered_cells,
        report
            .covered
            .as_ref()
            .map_or("-".to_string(), |d| rational_text(&d.max_abs_dev)),
    )
}

//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ffstat_core::combinatorics::{
    cycle_type_probability, divisors, exact_prime_count, exact_type_count, partitions_of,
};
use ffstat_core::polyring::is_irreducible;
use ffstat_core::render::rational_text;
use ffstat_core::statistics::{
    mean_variance_nu, nu_decomposition, progression_counts, radical_set, von_mangoldt,
    IntervalSpec, ProgressionSpec, TypeTable,
};
use ffstat_core::verify::{
    counterexample_m0, counterexample_m1, scan_intervals, scan_intervals_with_table,
    scan_progressions, variance_trend, DeviationReport, M1Variant,
};
use ffstat_core::{polyring, FieldSpec, Partition, Poly, ScanOptions};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn field(q: u64) -> FieldSpec {
    FieldSpec::from_order(q, 1 << 16).unwrap()
}

fn opts() -> ScanOptions {
    ScanOptions::default()
}

fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pow_q(q: u64, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn ppt_identity() -> Outcome {
    let mut checked = 0;
    for q in [2u64, 3, 4, 5] {
        let f = field(q);
        for k in 1..=6usize {
            let total: u64 = (0..q.pow(k as u32))
                .map(|i| von_mangoldt(&f, &Poly::monic_from_index(&f, k, i)).unwrap() as u64)
                .sum();
            ensure(total == q.pow(k as u32), || {
                format!("q={q} k={k}: sum Lambda = {total}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (q, k) pairs"))
}

fn mean_identity() -> Outcome {
    let mut checked = 0;
    for q in [2u64, 3, 5] {
        let f = field(q);
        for k in 2..=6usize {
            for m in 1..k {
                let moments = mean_variance_nu(&f, k, m, &opts()).map_err(|e| e.to_string())?;
                let closed = BigRational::from_integer(BigInt::from(pow_q(q, m + 1)))
                    * (BigRational::one()
                        - BigRational::new(BigInt::one(), BigInt::from(pow_q(q, k))));
                ensure(moments.mean == closed, || {
                    format!("q={q} k={k} m={m}: mean {} vs {}", moments.mean, closed)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (q, k, m) triples"))
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for q in [2u64, 3, 4, 5] {
        let f = field(q);
        for k in 1..=6usize {
            let primes = (0..q.pow(k as u32))
                .filter(|&i| is_irreducible(&f, &Poly::monic_from_index(&f, k, i)).unwrap())
                .count();
            ensure(
                BigUint::from(primes) == exact_prime_count(q, k as u32),
                || format!("q={q} k={k}: {primes} primes"),
            )?;
            let census = TypeTable::build(&f, k, &opts()).unwrap().census();
            for lambda in partitions_of(k).unwrap() {
                let count = census.get(&lambda);
                ensure(BigUint::from(count) == exact_type_count(q, &lambda), || {
                    format!("q={q} k={k} lambda={lambda}: census {count}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (q, lambda) censuses"))
}

fn cycle_type(perm: &[usize]) -> Partition {
    let mut seen = vec![false; perm.len()];
    let mut parts = Vec::new();
    for start in 0..perm.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len > 0 {
            parts.push(len);
        }
    }
    Partition::new(parts).unwrap()
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn cycle_law() -> Outcome {
    let mut checked = 0;
    for k in 1..=7usize {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut census: BTreeMap<Partition, u64> = BTreeMap::new();
        let mut total = 0u64;
        loop {
            *census.entry(cycle_type(&perm)).or_default() += 1;
            total += 1;
            if !next_permutation(&mut perm) {
                break;
            }
        }
        for lambda in partitions_of(k).unwrap() {
            let observed = BigRational::new(
                BigInt::from(census.get(&lambda).copied().unwrap_or(0)),
                BigInt::from(total),
            );
            ensure(observed == cycle_type_probability(&lambda), || {
                format!("k={k} lambda={lambda}: {observed}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} partitions"))
}

fn m0_closed_form() -> Outcome {
    let mut nonzero = 0;
    let mut checked = 0;
    for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13] {
        let f = field(q);
        for k in 2..=6usize {
            let r = counterexample_m0(&f, k).map_err(|e| e.to_string())?;
            ensure(r.agrees, || {
                format!("q={q} k={k}: expected {} actual {}", r.expected, r.actual)
            })?;
            nonzero += (r.expected > 0) as u32;
            checked += 1;
        }
    }
    let r = counterexample_m0(&field(7), 3).unwrap();
    ensure(r.actual == 4, || format!("q=7 k=3 gave {}", r.actual))?;
    Ok(format!("{checked} cases, {nonzero} in the nonzero branch"))
}

fn m1_vanishing() -> Outcome {
    for (p, n) in [(2u64, 1u32), (2, 2), (3, 1)] {
        let r = counterexample_m1(p, n, M1Variant::PSquared, &opts()).map_err(|e| e.to_string())?;
        ensure(r.actual == 0 && r.agrees == Some(true), || {
            format!("p={p} n={n}: {} primes", r.actual)
        })?;
    }
    Ok("(2,1), (2,2), (3,1) all vanish".into())
}

fn radical_bound() -> Outcome {
    let mut checked = 0u64;
    // The bound is stated for m >= 1; at m = 0 it fails when p | d, and those
    // intervals are only counted.
    let mut beyond_at_m0 = 0u64;
    for q in [2u64, 3, 4] {
        let f = field(q);
        for k in 2..=6usize {
            for d in divisors(k as u64).into_iter().filter(|&d| d > 1) {
                for m in 0..k {
                    let bound = q.pow(m as u32) as usize;
                    for cell in 0..IntervalSpec::cell_count(q, k, m) as u64 {
                        let interval = IntervalSpec::canonical(&f, k, m, cell).unwrap();
                        let roots = radical_set(&f, &interval, d as usize, &opts()).unwrap();
                        if m == 0 {
                            beyond_at_m0 += (roots.len() > bound) as u64;
                            continue;
                        }
                        ensure(roots.len() <= bound, || {
                            format!("q={q} k={k} m={m} d={d} cell={cell}: {} roots", roots.len())
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{checked} (interval, d) pairs with m >= 1; {beyond_at_m0} at m = 0 exceed 1"
    ))
}

fn nu_decomposition_identity() -> Outcome {
    let f2 = field(2);
    let hand = nu_decomposition(
        &f2,
        &Poly::monomial(ffstat_core::FieldElement::ONE, 2),
        1,
        &opts(),
    )
    .unwrap();
    ensure(
        hand.nu == 3 && hand.reconstructed == 3 && hand.epsilon == 1,
        || format!("hand case q=2 k=2 m=1: {hand:?}"),
    )?;
    let mut checked = 0u64;
    let mut with_epsilon = 0u64;
    for q in [2u64, 3, 4] {
        let f = field(q);
        for k in 2..=6usize {
            for m in 1..k {
                for cell in 0..IntervalSpec::cell_count(q, k, m) as u64 {
                    let interval = IntervalSpec::canonical(&f, k, m, cell).unwrap();
                    let r = nu_decomposition(&f, interval.center(), m, &opts()).unwrap();
                    ensure(r.reconstructed == r.nu as i64, || {
                        format!("q={q} k={k} m={m} cell={cell}: {r:?}")
                    })?;
                    with_epsilon += r.epsilon as u64;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} intervals, {with_epsilon} with epsilon = 1"
    ))
}

fn baseline_rows() -> BTreeMap<(u64, usize, usize), String> {
    data("interval_constants.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("q\t"))
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let key = (
                cols[0].parse().unwrap(),
                cols[1].parse().unwrap(),
                cols[2].parse().unwrap(),
            );
            (key, l.to_string())
        })
        .collect()
}

fn baseline_line(r: &DeviationReport) -> String {
    let (dev, constant) = match &r.covered {
        Some(d) => (rational_text(&d.max_abs_dev), d.normalized_constant.clone()),
        None => ("-".into(), "-".into()),
    };
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        r.q, r.k, r.m, r.cells, r.covered_cells, dev, constant
    )
}

fn scan_properties() -> Outcome {
    // (a) census totals and partition sums
    let mut scans = 0u64;
    for q in [2u64, 3, 4, 5, 7, 9] {
        let f = field(q);
        for k in 2..=6usize {
            let table = TypeTable::build(&f, k, &opts()).unwrap();
            for m in 1..k {
                let mut sum = BigUint::from(0u32);
                for lambda in partitions_of(k).unwrap() {
                    let r = scan_intervals_with_table(&table, m, &lambda, &opts()).unwrap();
                    ensure(r.census_consistent, || {
                        format!("q={q} k={k} m={m}: inconsistent census")
                    })?;
                    ensure(
                        BigUint::from(r.total_count) == exact_type_count(q, &lambda),
                        || format!("q={q} k={k} m={m} lambda={lambda}: total {}", r.total_count),
                    )?;
                    ensure(r.covered_cells <= r.cells, || {
                        "covered exceeds cells".into()
                    })?;
                    sum += r.total_count;
                    scans += 1;
                }
                ensure(sum == pow_q(q, k), || {
                    format!("q={q} k={k} m={m}: partition sum {sum}")
                })?;
            }
        }
    }

    // (b) snapshot of normalized constants, 1 worker and 4 workers
    let baseline = baseline_rows();
    let mut pinned = 0;
    for workers in [1usize, 4] {
        let options = ScanOptions::with_workers(workers);
        for q in [2u64, 3, 4, 5, 7, 9] {
            let f = field(q);
            for k in 2..=6usize {
                let table = TypeTable::build(&f, k, &options).unwrap();
                for m in 1..k {
                    let r = scan_intervals_with_table(&table, m, &Partition::single(k), &options)
                        .unwrap();
                    let line = baseline_line(&r);
                    let stored = baseline.get(&(q, k, m)).cloned().unwrap_or_default();
                    ensure(line == stored, || {
                        format!("workers={workers}: got `{line}`, stored `{stored}`")
                    })?;
                    pinned += 1;
                }
            }
        }
    }
    ensure(pinned == 2 * baseline.len(), || {
        format!("baseline has {} rows", baseline.len())
    })?;

    // (c) residue classes partition the primes
    let mut moduli = 0u64;
    for q in [2u64, 3, 5] {
        let f = field(q);
        for delta in 1..=2usize {
            for k in delta + 1..=5 {
                let m = k - delta - 1;
                let options = ScanOptions {
                    per_cell: true,
                    ..opts()
                };
                let lambda = Partition::single(k);
                let r = scan_progressions(&f, k, m, &lambda, &options).unwrap();
                ensure(!r.truncated && r.census_consistent, || {
                    format!("q={q} k={k} m={m}")
                })?;
                let mut per_modulus: BTreeMap<String, u64> = BTreeMap::new();
                for cell in r.per_cell.as_ref().unwrap() {
                    let modulus = cell.modulus.clone().unwrap();
                    let d = polyring::parse_poly(&f, &modulus).unwrap();
                    let residue = polyring::parse_poly(&f, cell.residue.as_ref().unwrap()).unwrap();
                    let spec = ProgressionSpec::new(&f, &d, &residue, k).unwrap();
                    let direct = progression_counts(&f, &spec, &opts()).unwrap().get(&lambda);
                    ensure(direct == cell.count, || {
                        format!(
                            "q={q} k={k} D={modulus}: scan {} direct {direct}",
                            cell.count
                        )
                    })?;
                    *per_modulus.entry(modulus).or_default() += cell.count;
                }
                let primes = exact_prime_count(q, k as u32);
                ensure(per_modulus.len() as u64 == q.pow(delta as u32), || {
                    "missing moduli".into()
                })?;
                for (d, total) in &per_modulus {
                    ensure(BigUint::from(*total) == primes, || {
                        format!("q={q} k={k} D={d}: {total} primes over residues")
                    })?;
                }
                moduli += per_modulus.len() as u64;
            }
        }
    }
    Ok(format!(
        "{scans} scans exact, {pinned} snapshots match, {moduli} moduli partition the primes"
    ))
}

fn variance_limit() -> Outcome {
    let trend = variance_trend(5, 1, &[3, 5, 7, 11, 13], &opts()).map_err(|e| e.to_string())?;
    let first = &trend.per_q[0];
    let last = trend.per_q.last().unwrap();
    ensure(trend.limit == 2, || format!("limit {}", trend.limit))?;
    ensure(last.gap <= first.gap, || {
        format!("gap at 13 = {} exceeds gap at 3 = {}", last.gap, first.gap)
    })?;
    let stored = data("variance_gap_k5_m1_q13.txt");
    let stored = stored
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap_or("")
        .trim();
    let got = rational_text(&last.gap);
    ensure(got == stored, || {
        format!("gap at 13 = {got}, stored {stored}")
    })?;
    let ratios: Vec<String> = trend
        .per_q
        .iter()
        .map(|p| format!("q={}: {:.4}", p.q, ratio_f64(&p.ratio)))
        .collect();
    Ok(format!("ratios {}", ratios.join(", ")))
}

fn ratio_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn json(report: &impl serde::Serialize) -> Vec<u8> {
    serde_json::to_vec(report).unwrap()
}

fn determinism() -> Outcome {
    let run = |workers: usize| -> Vec<Vec<u8>> {
        let options = ScanOptions {
            per_cell: true,
            ..ScanOptions::with_workers(workers)
        };
        vec![
            json(&scan_intervals(&field(5), 5, 2, &Partition::single(5), &options).unwrap()),
            json(&scan_intervals(&field(4), 6, 3, &"2+2+1+1".parse().unwrap(), &options).unwrap()),
            json(&scan_progressions(&field(3), 5, 2, &Partition::single(5), &options).unwrap()),
        ]
    };
    let one = run(1);
    for workers in [2usize, 4, 8] {
        let many = run(workers);
        for (i, (a, b)) in one.iter().zip(&many).enumerate() {
            ensure(a == b, || {
                format!("configuration {i} differs at {workers} workers")
            })?;
        }
    }
    Ok("3 configurations, 1 vs 2/4/8 workers".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "sum of Lambda over M(k,q) is q^k",
            Duration::from_secs(30),
            ppt_identity,
        ),
        (
            "mean of nu is q^(m+1)(1 - q^-k)",
            Duration::from_secs(120),
            mean_identity,
        ),
        (
            "exhaustive counts match closed forms",
            Duration::from_secs(120),
            oracle_equivalence,
        ),
        (
            "cycle-type law matches S_k census",
            Duration::from_secs(10),
            cycle_law,
        ),
        ("m = 0 closed form", Duration::from_secs(30), m0_closed_form),
        (
            "m = 1 vanishing at k = p^2",
            Duration::from_secs(60),
            m1_vanishing,
        ),
        (
            "radical sets bounded by q^m",
            Duration::from_secs(120),
            radical_bound,
        ),
        (
            "nu decomposition with epsilon subtracted",
            Duration::from_secs(120),
            nu_decomposition_identity,
        ),
        (
            "scan totals, snapshots, progression partition",
            Duration::MAX,
            scan_properties,
        ),
        (
            "variance ratio approaches k - m - 2",
            Duration::from_secs(300),
            variance_limit,
        ),
        (
            "scans identical across worker counts",
            Duration::from_secs(60),
            determinism,
        ),
    ];
    let mut failures = 0;
    for (n, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!(
                "{detail}; took {:.1}s, limit {}s",
                elapsed.as_secs_f64(),
                limit.as_secs()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2}: PASS  {name} ({detail}; {:.2}s)",
                n + 1,
                elapsed.as_secs_f64()
            ),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2}: FAIL  {name} ({detail})", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

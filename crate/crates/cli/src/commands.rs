use ffstat_core::combinatorics::{
    cycle_type_probability, divisor_excess, exact_prime_count, exact_type_count,
};
use ffstat_core::exec::power;
use ffstat_core::gf::DEFAULT_MAX_ORDER;
use ffstat_core::polyring::{is_irreducible, parse_poly, render_poly};
use ffstat_core::render::rational_text;
use ffstat_core::statistics::{
    interval_counts, mean_variance_nu, nu, nu_decomposition, poly_totient, progression_counts,
    radical_set, IntervalSpec, ProgressionSpec, TypeCensus, TypeTable,
};
use ffstat_core::verify::{
    check_hypotheses_interval, check_hypotheses_progression, counterexample_m0, counterexample_m1,
    scan_intervals, scan_progressions, variance_trend, DeviationReport, M1Variant,
};
use ffstat_core::{Error, FieldSpec, Partition, Poly, ScanOptions};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::args::{Command, Counterexample, FieldArgs, Variant};

/// Everything a command produces before it is formatted.
pub struct Outcome {
    pub field: Option<FieldSpec>,
    pub params: Value,
    pub result: Value,
    pub excluded: Value,
    /// Short form for `--format text`.
    pub headline: String,
    /// Scan reports, for `--format csv`.
    pub scan: Option<DeviationReport>,
    /// Set when a computed value contradicts its known closed form.
    pub disagreement: Option<String>,
}

impl Outcome {
    fn new(field: Option<FieldSpec>, params: Value, result: Value, headline: String) -> Self {
        Outcome {
            field,
            params,
            result,
            excluded: json!({}),
            headline,
            scan: None,
            disagreement: None,
        }
    }
}

pub struct Context {
    pub options: ScanOptions,
    pub dry_run: bool,
    pub want_cells: bool,
}

fn make_field(args: &FieldArgs) -> Result<FieldSpec, Error> {
    FieldSpec::new(args.p, args.nu, DEFAULT_MAX_ORDER)
}

fn q_of(field: &FieldSpec) -> u64 {
    field.q() as u64
}

fn poly(field: &FieldSpec, text: &str) -> Result<Poly, Error> {
    parse_poly(field, text)
}

fn census_json(census: &TypeCensus, k: usize) -> Result<Value, Error> {
    let dense: serde_json::Map<String, Value> = census
        .dense(k)?
        .into_iter()
        .map(|(l, c)| (l.to_string(), json!(c)))
        .collect();
    Ok(Value::Object(dense))
}

fn rational(r: &BigRational) -> Value {
    Value::String(rational_text(r))
}

/// Exact integers that overflow `u64` are emitted as strings.
fn integer(n: impl Into<BigInt>) -> Value {
    let n: BigInt = n.into();
    match u64::try_from(&n) {
        Ok(v) => json!(v),
        Err(_) => Value::String(n.to_string()),
    }
}

fn to_value(x: &impl serde::Serialize) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn check_k(k: usize) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::OutOfRange("k must be positive".into()));
    }
    Ok(())
}

fn check_lambda(lambda: &Partition, k: usize) -> Result<(), Error> {
    if lambda.k() != k {
        return Err(Error::InvalidPartition(format!(
            "{lambda} is not a partition of {k}"
        )));
    }
    Ok(())
}

fn degree_of(f: &Poly, k: usize, what: &str) -> Result<(), Error> {
    if f.degree() != Some(k) || !f.is_monic() {
        return Err(Error::Precondition(format!(
            "{what} must be monic of degree {k}"
        )));
    }
    Ok(())
}

fn dry(field: Option<FieldSpec>, params: Value, projected: u128) -> Outcome {
    let mut out = Outcome::new(
        field,
        params,
        json!({ "projected_cells": integer(projected) }),
        projected.to_string(),
    );
    out.excluded = Value::Null;
    out
}

/// Projected enumeration size, checked against the budget unless dry.
fn gate(
    ctx: &Context,
    field: &Option<FieldSpec>,
    params: &Value,
    projected: u128,
) -> Result<Option<Outcome>, Error> {
    if ctx.dry_run {
        return Ok(Some(dry(field.clone(), params.clone(), projected)));
    }
    ctx.options.check_budget(projected)?;
    Ok(None)
}

pub fn run(command: &Command, ctx: &Context) -> Result<Outcome, Error> {
    let options = &ctx.options;
    match command {
        Command::Pi {
            field,
            k,
            enumerate,
        } => {
            let spec = make_field(field)?;
            check_k(*k)?;
            let q = q_of(&spec);
            let params = json!({ "k": k, "enumerate": enumerate });
            let projected = if *enumerate { power(q, *k as u32) } else { 0 };
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, projected)? {
                return Ok(out);
            }
            let closed = exact_prime_count(q, *k as u32);
            let mut result = json!({ "count": integer(closed.clone()) });
            let mut out_disagreement = None;
            if *enumerate {
                let table = TypeTable::build(&spec, *k, options)?;
                let counted = table.census().get(&Partition::single(*k));
                result["enumerated"] = json!(counted);
                if num_bigint::BigUint::from(counted) != closed {
                    out_disagreement = Some(format!("enumerated {counted}, closed form {closed}"));
                }
            }
            let mut out = Outcome::new(fs, params, result, closed.to_string());
            out.disagreement = out_disagreement;
            Ok(out)
        }
        Command::PiType {
            field,
            k,
            lambda,
            enumerate,
        } => {
            let spec = make_field(field)?;
            check_k(*k)?;
            check_lambda(lambda, *k)?;
            let q = q_of(&spec);
            let params = json!({ "k": k, "lambda": lambda.to_string(), "enumerate": enumerate });
            let projected = if *enumerate { power(q, *k as u32) } else { 0 };
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, projected)? {
                return Ok(out);
            }
            let closed = exact_type_count(q, lambda);
            let mut result = json!({ "count": integer(closed.clone()) });
            let mut disagreement = None;
            if *enumerate {
                let counted = TypeTable::build(&spec, *k, options)?.census().get(lambda);
                result["enumerated"] = json!(counted);
                if num_bigint::BigUint::from(counted) != closed {
                    disagreement = Some(format!("enumerated {counted}, closed form {closed}"));
                }
            }
            let mut out = Outcome::new(fs, params, result, closed.to_string());
            out.disagreement = disagreement;
            Ok(out)
        }
        Command::Interval {
            field,
            k,
            m,
            f,
            lambda,
        } => {
            let spec = make_field(field)?;
            let center = poly(&spec, f)?;
            degree_of(&center, *k, "f")?;
            if let Some(l) = lambda {
                check_lambda(l, *k)?;
            }
            let interval = IntervalSpec::new(&center, *m)?;
            let params = json!({
                "k": k, "m": m, "f": render_poly(&spec, &center),
                "lambda": lambda.as_ref().map(|l| l.to_string()),
            });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, power(q_of(&spec), *m as u32 + 1))? {
                return Ok(out);
            }
            let census = interval_counts(&spec, &interval, options)?;
            let mut result = json!({
                "census": census_json(&census, *k)?,
                "total": census.total(),
                "cell_id": interval.cell_id(&spec),
            });
            let headline = match lambda {
                Some(l) => {
                    let count = census.get(l);
                    let expected = cycle_type_probability(l)
                        * BigRational::from_integer(integer_big(power(q_of(&spec), *m as u32 + 1)));
                    result["count"] = json!(count);
                    result["expected"] = rational(&expected);
                    count.to_string()
                }
                None => census.total().to_string(),
            };
            Ok(Outcome::new(fs, params, result, headline))
        }
        Command::Progression {
            field,
            k,
            d,
            f,
            lambda,
        } => {
            let spec = make_field(field)?;
            let modulus = poly(&spec, d)?;
            let residue = poly(&spec, f)?;
            if let Some(l) = lambda {
                check_lambda(l, *k)?;
            }
            let progression = ProgressionSpec::new(&spec, &modulus, &residue, *k)?;
            let params = json!({
                "k": k, "d": render_poly(&spec, &modulus), "f": render_poly(&spec, &residue),
                "lambda": lambda.as_ref().map(|l| l.to_string()),
            });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, progression.size(q_of(&spec)))? {
                return Ok(out);
            }
            let census = progression_counts(&spec, &progression, options)?;
            let mut result = json!({
                "census": census_json(&census, *k)?,
                "total": census.total(),
            });
            let headline = match lambda {
                Some(l) => {
                    let count = census.get(l);
                    let phi = poly_totient(&spec, &modulus)?;
                    let expected =
                        BigRational::new(exact_type_count(q_of(&spec), l).into(), phi.into());
                    result["count"] = json!(count);
                    result["expected"] = rational(&expected);
                    count.to_string()
                }
                None => census.total().to_string(),
            };
            Ok(Outcome::new(fs, params, result, headline))
        }
        Command::ScanIntervals {
            field,
            k,
            m,
            lambda,
            per_cell,
        } => {
            let spec = make_field(field)?;
            check_lambda(lambda, *k)?;
            let params =
                json!({ "k": k, "m": m, "lambda": lambda.to_string(), "per_cell": per_cell });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, power(q_of(&spec), *k as u32))? {
                return Ok(out);
            }
            let options = ScanOptions {
                per_cell: *per_cell || ctx.want_cells,
                ..options.clone()
            };
            let report = scan_intervals(&spec, *k, *m, lambda, &options)?;
            Ok(scan_outcome(fs, params, report, *per_cell))
        }
        Command::ScanProgressions {
            field,
            k,
            m,
            lambda,
            per_cell,
            max_cells,
        } => {
            let spec = make_field(field)?;
            check_lambda(lambda, *k)?;
            if m + 1 >= *k {
                return Err(Error::Precondition(format!(
                    "deg D = k - m - 1 must be at least 1 (k = {k}, m = {m})"
                )));
            }
            let params = json!({
                "k": k, "m": m, "lambda": lambda.to_string(), "per_cell": per_cell,
                "max_cells": max_cells,
            });
            let q = q_of(&spec);
            let moduli = power(q, (k - m - 1) as u32);
            let moduli = max_cells.map_or(moduli, |c| moduli.min(c as u128));
            let fs = Some(spec.clone());
            if let Some(out) = gate(
                ctx,
                &fs,
                &params,
                power(q, *k as u32).saturating_mul(moduli),
            )? {
                return Ok(out);
            }
            let options = ScanOptions {
                per_cell: *per_cell || ctx.want_cells,
                max_cells: *max_cells,
                ..options.clone()
            };
            let report = scan_progressions(&spec, *k, *m, lambda, &options)?;
            Ok(scan_outcome(fs, params, report, *per_cell))
        }
        Command::MeanVariance { field, k, m } => {
            let spec = make_field(field)?;
            let params = json!({ "k": k, "m": m });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, power(q_of(&spec), *k as u32))? {
                return Ok(out);
            }
            let moments = mean_variance_nu(&spec, *k, *m, options)?;
            let q = BigInt::from(q_of(&spec));
            let closed = BigRational::from_integer(q.pow(*m as u32 + 1))
                * (BigRational::from_integer(1.into())
                    - BigRational::new(1.into(), q.pow(*k as u32)));
            let result = json!({
                "mean": rational(&moments.mean),
                "variance": rational(&moments.variance),
                "mean_closed_form": rational(&closed),
            });
            let mut out = Outcome::new(
                fs,
                params,
                result,
                format!(
                    "{} {}",
                    rational_text(&moments.mean),
                    rational_text(&moments.variance)
                ),
            );
            if moments.mean != closed {
                out.disagreement = Some("mean differs from q^(m+1)(1 - q^-k)".into());
            }
            Ok(out)
        }
        Command::VarianceTrend { k, m, qs } => {
            let params = json!({ "k": k, "m": m, "qs": qs });
            let projected = qs
                .iter()
                .fold(0u128, |acc, &q| acc.saturating_add(power(q, *k as u32)));
            if ctx.dry_run {
                return Ok(dry(None, params, projected));
            }
            let trend = variance_trend(*k, *m, qs, options)?;
            let headline = trend
                .per_q
                .iter()
                .map(|p| format!("{} {}", p.q, rational_text(&p.ratio)))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome::new(None, params, to_value(&trend), headline))
        }
        Command::Radical { field, f, m, d } => {
            let spec = make_field(field)?;
            let center = poly(&spec, f)?;
            let interval = IntervalSpec::new(&center, *m)?;
            let k = interval.k();
            if *d <= 1 || k % d != 0 {
                return Err(Error::OutOfRange(format!(
                    "d = {d} must be a divisor of k = {k} above 1"
                )));
            }
            let params = json!({ "f": render_poly(&spec, &center), "m": m, "d": d });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, power(q_of(&spec), (k / d) as u32))? {
                return Ok(out);
            }
            let roots = radical_set(&spec, &interval, *d, options)?;
            let primes = roots
                .iter()
                .filter(|g| is_irreducible(&spec, g).unwrap_or(false))
                .count();
            let bound = integer_big(power(q_of(&spec), *m as u32));
            let result = json!({
                "roots": roots.iter().map(|g| render_poly(&spec, g)).collect::<Vec<_>>(),
                "size": roots.len(),
                "primes": primes,
                "bound": integer(bound),
            });
            Ok(Outcome::new(fs, params, result, roots.len().to_string()))
        }
        Command::Nu {
            field,
            f,
            m,
            decompose,
        } => {
            let spec = make_field(field)?;
            let center = poly(&spec, f)?;
            if !center.is_monic() {
                return Err(Error::Precondition("f must be monic".into()));
            }
            let params =
                json!({ "f": render_poly(&spec, &center), "m": m, "decompose": decompose });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, power(q_of(&spec), *m as u32 + 1))? {
                return Ok(out);
            }
            if *decompose {
                let parts = nu_decomposition(&spec, &center, *m, options)?;
                let mut out = Outcome::new(fs, params, to_value(&parts), parts.nu.to_string());
                if parts.reconstructed != parts.nu as i64 {
                    out.disagreement = Some(format!(
                        "reconstructed {} differs from nu = {}",
                        parts.reconstructed, parts.nu
                    ));
                }
                return Ok(out);
            }
            let value = nu(&spec, &center, *m, options)?;
            Ok(Outcome::new(
                fs,
                params,
                json!({ "nu": value }),
                value.to_string(),
            ))
        }
        Command::Counterexample(Counterexample::M0 { field, k }) => {
            let spec = make_field(field)?;
            let params = json!({ "k": k });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, q_of(&spec) as u128)? {
                return Ok(out);
            }
            let r = counterexample_m0(&spec, *k)?;
            let mut out = Outcome::new(
                fs,
                params,
                to_value(&r),
                format!("expected {} actual {}", r.expected, r.actual),
            );
            if !r.agrees {
                out.disagreement = Some(format!("expected {}, found {}", r.expected, r.actual));
            }
            Ok(out)
        }
        Command::Counterexample(Counterexample::M1 { p, n, variant }) => {
            let variant = match variant {
                Variant::P2 => M1Variant::PSquared,
                Variant::P2Plus1 => M1Variant::PSquaredPlusOne,
            };
            let params = json!({ "p": p, "n": n, "variant": to_value(&variant) });
            let order = power(*p, 2 * n);
            let fs = if order <= DEFAULT_MAX_ORDER as u128 {
                FieldSpec::new(*p, 2 * n, DEFAULT_MAX_ORDER).ok()
            } else {
                None
            };
            if let Some(out) = gate(ctx, &fs, &params, order.saturating_mul(order))? {
                return Ok(out);
            }
            let r = counterexample_m1(*p, *n, variant, options)?;
            let headline = match r.expected {
                Some(e) => format!("expected {e} actual {}", r.actual),
                None => format!("actual {}", r.actual),
            };
            let mut out = Outcome::new(fs, params, to_value(&r), headline);
            if r.agrees == Some(false) {
                out.disagreement = Some(format!("expected 0, found {}", r.actual));
            }
            Ok(out)
        }
        Command::Hypotheses { field, k, m, f, d } => {
            let spec = make_field(field)?;
            let f = poly(&spec, f)?;
            let (params, coverage) = match d {
                None => (
                    json!({ "k": k, "m": m, "f": render_poly(&spec, &f) }),
                    check_hypotheses_interval(&spec, *k, *m, &f)?,
                ),
                Some(d) => {
                    let d = poly(&spec, d)?;
                    (
                        json!({ "k": k, "m": m, "f": render_poly(&spec, &f), "d": render_poly(&spec, &d) }),
                        check_hypotheses_progression(&spec, *k, *m, &d, &f)?,
                    )
                }
            };
            let fs = Some(spec);
            if let Some(out) = gate(ctx, &fs, &params, 1)? {
                return Ok(out);
            }
            let headline = to_value(&coverage.status)
                .as_str()
                .unwrap_or_default()
                .to_string();
            Ok(Outcome::new(fs, params, to_value(&coverage), headline))
        }
        Command::Totient { field, d } => {
            let spec = make_field(field)?;
            let d = poly(&spec, d)?;
            let params = json!({ "d": render_poly(&spec, &d) });
            let fs = Some(spec.clone());
            if let Some(out) = gate(ctx, &fs, &params, 1)? {
                return Ok(out);
            }
            let phi = poly_totient(&spec, &d)?;
            Ok(Outcome::new(
                fs,
                params,
                json!({ "totient": integer(phi.clone()) }),
                phi.to_string(),
            ))
        }
        Command::PartitionProb { lambda } => {
            let params = json!({ "lambda": lambda.to_string() });
            if ctx.dry_run {
                return Ok(dry(None, params, 1));
            }
            let probability = cycle_type_probability(lambda);
            let result = json!({
                "k": lambda.k(),
                "probability": rational(&probability),
                "divisor_excess": divisor_excess(lambda.k() as u64),
            });
            Ok(Outcome::new(
                None,
                params,
                result,
                rational_text(&probability),
            ))
        }
    }
}

fn integer_big(n: u128) -> BigInt {
    BigInt::from(n)
}

fn scan_outcome(
    field: Option<FieldSpec>,
    params: Value,
    report: DeviationReport,
    per_cell: bool,
) -> Outcome {
    let mut result = to_value(&report);
    let excluded = result
        .as_object_mut()
        .and_then(|o| o.remove("excluded"))
        .unwrap_or(Value::Null);
    if !per_cell {
        if let Some(o) = result.as_object_mut() {
            o.remove("per_cell");
        }
    }
    let headline = report
        .covered
        .as_ref()
        .map_or("-".to_string(), |d| d.normalized_constant.clone());
    let mut out = Outcome::new(field, params, result, headline);
    out.excluded = excluded;
    if !report.census_consistent {
        out.disagreement = Some("cell censuses do not sum to the cell sizes".into());
    }
    out.scan = Some(report);
    out
}

//! Dense univariate polynomials over `F_q` and their factorization.
//!
//! Polynomials carry no reference to their field; every operation takes the
//! [`FieldSpec`] explicitly. The factorizer runs square-free decomposition,
//! distinct-degree splitting through a Frobenius matrix, and a derandomized
//! equal-degree split. [`IrreducibleTable`] is an independent trial-division
//! backend used to cross-check it.

use std::cmp::Ordering;

use crate::combinatorics::Partition;
use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldSpec};

/// Coefficients low-to-high with no trailing zeros. The zero polynomial has
/// no coefficients and degree `None`, which orders below every `Some(d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<FieldElement>,
}

impl Ord for Poly {
    /// Degree first, then the coefficient vector read as a base-`q` integer.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(FieldElement::ONE)
    }

    pub fn constant(c: FieldElement) -> Self {
        Poly::new(vec![c])
    }

    /// The indeterminate `t`.
    pub fn t() -> Self {
        Poly::monomial(FieldElement::ONE, 1)
    }

    pub fn monomial(c: FieldElement, n: usize) -> Self {
        let mut coeffs = vec![FieldElement::ZERO; n + 1];
        coeffs[n] = c;
        Poly::new(coeffs)
    }

    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Checks every coefficient against `field`.
    pub fn checked(field: &FieldSpec, coeffs: Vec<FieldElement>) -> Result<Self> {
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(Poly::new(coeffs))
    }

    /// Polynomial of degree `< len` whose coefficients are the base-`q`
    /// digits of `index`, low-to-high.
    pub fn from_index(field: &FieldSpec, len: usize, mut index: u64) -> Self {
        let q = field.q() as u64;
        let mut coeffs = Vec::with_capacity(len + 1);
        for _ in 0..len {
            coeffs.push(FieldElement::from_index_unchecked((index % q) as u32));
            index /= q;
        }
        Poly::new(coeffs)
    }

    /// `t^k + from_index(k, index)`; `index` ranges over `[0, q^k)`.
    pub fn monic_from_index(field: &FieldSpec, k: usize, index: u64) -> Self {
        let mut f = Poly::from_index(field, k, index);
        f.coeffs.resize(k, FieldElement::ZERO);
        f.coeffs.push(FieldElement::ONE);
        f
    }

    /// Base-`q` value of the coefficients below degree `len`.
    pub fn low_index(&self, field: &FieldSpec, len: usize) -> u64 {
        let q = field.q() as u64;
        self.coeffs
            .iter()
            .take(len)
            .rev()
            .fold(0, |acc, c| acc * q + c.index() as u64)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    /// Zeroes the coefficients of degree `0..=m`.
    pub fn truncate_below(&self, m: usize) -> Poly {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().take(m + 1) {
            *c = FieldElement::ZERO;
        }
        Poly::new(coeffs)
    }

    pub fn render(&self, field: &FieldSpec) -> String {
        render_poly(field, self)
    }
}

pub fn add(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    let (long, short) = if a.coeffs.len() >= b.coeffs.len() {
        (a, b)
    } else {
        (b, a)
    };
    let mut coeffs = long.coeffs.clone();
    for (c, &s) in coeffs.iter_mut().zip(&short.coeffs) {
        *c = field.add(*c, s);
    }
    Poly::new(coeffs)
}

pub fn neg(field: &FieldSpec, a: &Poly) -> Poly {
    Poly {
        coeffs: a.coeffs.iter().map(|&c| field.neg(c)).collect(),
    }
}

pub fn sub(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    let n = a.coeffs.len().max(b.coeffs.len());
    let coeffs = (0..n).map(|i| field.sub(a.coeff(i), b.coeff(i))).collect();
    Poly::new(coeffs)
}

pub fn scale(field: &FieldSpec, a: &Poly, c: FieldElement) -> Poly {
    if c.is_zero() {
        return Poly::zero();
    }
    Poly {
        coeffs: a.coeffs.iter().map(|&x| field.mul(x, c)).collect(),
    }
}

pub fn mul(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let mut coeffs = vec![FieldElement::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            coeffs[i + j] = field.add(coeffs[i + j], field.mul(x, y));
        }
    }
    Poly::new(coeffs)
}

pub fn pow(field: &FieldSpec, a: &Poly, mut n: u64) -> Poly {
    let mut base = a.clone();
    let mut acc = Poly::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(field, &acc, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(field, &base, &base);
        }
    }
    acc
}

/// `a = quotient * b + remainder` with `deg remainder < deg b`.
pub fn poly_divrem(field: &FieldSpec, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
    let lead = b.leading().ok_or(Error::DivisionByZero)?;
    let inv = field.inv(lead)?;
    let n = b.coeffs.len() - 1;
    if a.coeffs.len() <= n {
        return Ok((Poly::zero(), a.clone()));
    }
    let mut rem = a.coeffs.clone();
    let mut quot = vec![FieldElement::ZERO; a.coeffs.len() - n];
    for top in (n..rem.len()).rev() {
        let c = rem[top];
        if c.is_zero() {
            continue;
        }
        let factor = field.mul(c, inv);
        quot[top - n] = factor;
        for (i, &bc) in b.coeffs.iter().enumerate() {
            let idx = top - n + i;
            rem[idx] = field.sub(rem[idx], field.mul(factor, bc));
        }
    }
    rem.truncate(n);
    Ok((Poly::new(quot), Poly::new(rem)))
}

/// Remainder modulo a nonzero `b`.
pub fn rem(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    let lead = b.leading().expect("nonzero divisor");
    let n = b.coeffs.len() - 1;
    if a.coeffs.len() <= n {
        return a.clone();
    }
    let inv = if lead.is_one() {
        lead
    } else {
        field.inv(lead).expect("nonzero leading coefficient")
    };
    let mut r = a.coeffs.clone();
    for top in (n..r.len()).rev() {
        let c = r[top];
        if c.is_zero() {
            continue;
        }
        let factor = field.mul(c, inv);
        for (i, &bc) in b.coeffs.iter().enumerate() {
            let idx = top - n + i;
            r[idx] = field.sub(r[idx], field.mul(factor, bc));
        }
    }
    r.truncate(n);
    Poly::new(r)
}

/// Exact quotient; panics in debug builds if `b` does not divide `a`.
fn div_exact(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    let (q, r) = poly_divrem(field, a, b).expect("nonzero divisor");
    debug_assert!(r.is_zero());
    q
}

pub fn mulmod(field: &FieldSpec, a: &Poly, b: &Poly, modulus: &Poly) -> Poly {
    rem(field, &mul(field, a, b), modulus)
}

pub fn powmod(field: &FieldSpec, a: &Poly, mut n: u64, modulus: &Poly) -> Poly {
    let mut base = rem(field, a, modulus);
    let mut acc = rem(field, &Poly::one(), modulus);
    while n > 0 {
        if n & 1 == 1 {
            acc = mulmod(field, &acc, &base, modulus);
        }
        n >>= 1;
        if n > 0 {
            base = mulmod(field, &base, &base, modulus);
        }
    }
    acc
}

/// Scales a nonzero polynomial to leading coefficient 1.
pub fn make_monic(field: &FieldSpec, a: &Poly) -> Poly {
    match a.leading() {
        None => Poly::zero(),
        Some(c) if c.is_one() => a.clone(),
        Some(c) => scale(field, a, field.inv(c).expect("nonzero")),
    }
}

/// Monic greatest common divisor.
pub fn poly_gcd(field: &FieldSpec, a: &Poly, b: &Poly) -> Result<Poly> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(gcd(field, a, b))
}

fn gcd(field: &FieldSpec, a: &Poly, b: &Poly) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let r = rem(field, &x, &y);
        x = y;
        y = r;
    }
    make_monic(field, &x)
}

/// Formal derivative.
pub fn derivative(field: &FieldSpec, f: &Poly) -> Poly {
    if f.coeffs.len() <= 1 {
        return Poly::zero();
    }
    let coeffs = f.coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| field.mul(field.from_int((i as i64 + 1) % field.p() as i64), c))
        .collect();
    Poly::new(coeffs)
}

/// First and second Hasse-Schmidt derivatives: the coefficients of `u` and
/// `u^2` in `f(t + u)`.
pub fn hasse_derivatives(field: &FieldSpec, f: &Poly) -> (Poly, Poly) {
    let p = field.p() as u64;
    let first = derivative(field, f);
    let second = if f.coeffs.len() <= 2 {
        Poly::zero()
    } else {
        let coeffs = f.coeffs[2..]
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let n = i as u64 + 2;
                let binom = (n * (n - 1) / 2) % p;
                field.mul(field.from_int(binom as i64), c)
            })
            .collect();
        Poly::new(coeffs)
    };
    (first, second)
}

/// Horner evaluation.
pub fn poly_eval(field: &FieldSpec, f: &Poly, x: FieldElement) -> FieldElement {
    f.coeffs.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
        field.add(field.mul(acc, x), c)
    })
}

/// Unique `g` with `g^p = f`, for `f` whose derivative vanishes.
fn pth_root_poly(field: &FieldSpec, f: &Poly) -> Poly {
    let p = field.p() as usize;
    let coeffs = f
        .coeffs
        .iter()
        .step_by(p)
        .map(|&c| field.pth_root(c))
        .collect();
    Poly::new(coeffs)
}

/// Square-free decomposition of a monic `f`: pairwise coprime square-free
/// monic parts with the multiplicity shared by all their prime factors.
pub fn squarefree_decomposition(field: &FieldSpec, f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    squarefree_into(field, f, 1, &mut out);
    out
}

fn squarefree_into(field: &FieldSpec, f: &Poly, scale_by: u32, out: &mut Vec<(Poly, u32)>) {
    if f.is_constant() {
        return;
    }
    let p = field.p();
    let df = derivative(field, f);
    if df.is_zero() {
        squarefree_into(field, &pth_root_poly(field, f), scale_by * p, out);
        return;
    }
    let mut c = gcd(field, f, &df);
    let mut w = div_exact(field, f, &c);
    let mut i = 1;
    while !w.is_constant() {
        let y = gcd(field, &w, &c);
        let z = div_exact(field, &w, &y);
        if !z.is_constant() {
            out.push((z, i * scale_by));
        }
        i += 1;
        c = div_exact(field, &c, &y);
        w = y;
    }
    if !c.is_constant() {
        squarefree_into(field, &pth_root_poly(field, &c), scale_by * p, out);
    }
}

/// The `q`-th power map on `F_q[t]/(f)` as a matrix: column `i` holds
/// `t^(i q) mod f`. Since coefficients are fixed by Frobenius,
/// `h^q = sum h_i t^(i q)`.
struct Frobenius<'a> {
    field: &'a FieldSpec,
    columns: Vec<Vec<FieldElement>>,
}

impl<'a> Frobenius<'a> {
    fn new(field: &'a FieldSpec, modulus: &Poly) -> Self {
        let n = modulus.degree().expect("nonconstant modulus");
        let xq = powmod(field, &Poly::t(), field.q() as u64, modulus);
        let mut columns = Vec::with_capacity(n);
        let mut col = rem(field, &Poly::one(), modulus);
        for _ in 0..n {
            let mut dense = col.coeffs.clone();
            dense.resize(n, FieldElement::ZERO);
            columns.push(dense);
            col = mulmod(field, &col, &xq, modulus);
        }
        Frobenius { field, columns }
    }

    fn apply(&self, h: &Poly) -> Poly {
        let n = self.columns.len();
        let mut out = vec![FieldElement::ZERO; n];
        for (&hi, col) in h.coeffs.iter().zip(&self.columns) {
            if hi.is_zero() {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(col) {
                *o = self.field.add(*o, self.field.mul(hi, c));
            }
        }
        Poly::new(out)
    }
}

/// Splits a square-free monic `f` into `(d, product of its prime factors of
/// degree d)`, ascending in `d`.
pub fn distinct_degree_factorization(field: &FieldSpec, f: &Poly) -> Vec<(usize, Poly)> {
    let n = match f.degree() {
        None | Some(0) => return Vec::new(),
        Some(n) => n,
    };
    if n == 1 {
        return vec![(1, f.clone())];
    }
    let frob = Frobenius::new(field, f);
    let t = Poly::t();
    let mut h = rem(field, &t, f);
    let mut rest = f.clone();
    let mut out = Vec::new();
    let mut d = 0;
    while rest.coeffs.len() > 2 * (d + 1) {
        d += 1;
        h = frob.apply(&h);
        let g = gcd(field, &sub(field, &h, &t), &rest);
        if !g.is_constant() {
            rest = div_exact(field, &rest, &g);
            out.push((d, g));
        }
    }
    if let Some(deg) = rest.degree().filter(|&deg| deg > 0) {
        out.push((deg, rest));
    }
    out
}

/// Splits a square-free monic `f`, all of whose prime factors have degree
/// `d`, into those factors. Candidates are tried in canonical order.
pub fn equal_degree_factorization(field: &FieldSpec, f: &Poly, d: usize) -> Vec<Poly> {
    let mut out = Vec::new();
    equal_degree_into(field, f, d, &mut out);
    out.sort();
    out
}

fn equal_degree_into(field: &FieldSpec, f: &Poly, d: usize, out: &mut Vec<Poly>) {
    let n = f.degree().expect("nonzero");
    if n <= d {
        out.push(f.clone());
        return;
    }
    let split = find_split(field, f, d);
    let other = div_exact(field, f, &split);
    equal_degree_into(field, &split, d, out);
    equal_degree_into(field, &other, d, out);
}

fn find_split(field: &FieldSpec, f: &Poly, d: usize) -> Poly {
    let n = f.degree().expect("nonzero");
    let q = field.q() as u64;
    let frob = Frobenius::new(field, f);
    let proper = |g: &Poly| g.degree().is_some_and(|e| e > 0 && e < n);
    // Skip constants; they map to the same value in every CRT component.
    let mut index = q;
    loop {
        let a = Poly::from_index(field, n, index);
        index += 1;
        let common = gcd(field, &a, f);
        if proper(&common) {
            return common;
        }
        let probe = if field.p() == 2 {
            // Absolute trace F_{q^d} -> F_2: a + a^2 + .. + a^(2^(nu d - 1)).
            let steps = field.nu() as usize * d;
            let mut acc = a.clone();
            let mut sq = a;
            for _ in 1..steps {
                sq = mulmod(field, &sq, &sq, f);
                acc = add(field, &acc, &sq);
            }
            acc
        } else {
            // a^((q^d - 1)/2) = (a^(1 + q + .. + q^(d-1)))^((q - 1)/2).
            let mut norm = a.clone();
            let mut conj = a;
            for _ in 1..d {
                conj = frob.apply(&conj);
                norm = mulmod(field, &norm, &conj, f);
            }
            let b = powmod(field, &norm, (q - 1) / 2, f);
            sub(field, &b, &Poly::one())
        };
        let g = gcd(field, &probe, f);
        if proper(&g) {
            return g;
        }
    }
}

/// `unit * prod factor^multiplicity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FieldElement,
    /// Monic primes with multiplicities, sorted by [`Poly`]'s order.
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn expand(&self, field: &FieldSpec) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(self.unit), |acc, (p, e)| {
                mul(field, &acc, &pow(field, p, *e as u64))
            })
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(p, e)| p.degree().unwrap_or(0) * *e as usize)
            .sum()
    }

    pub fn partition(&self) -> Option<Partition> {
        let parts = self
            .factors
            .iter()
            .flat_map(|(p, e)| std::iter::repeat_n(p.degree().unwrap_or(0), *e as usize))
            .collect();
        Partition::new(parts).ok()
    }
}

/// Complete factorization into monic primes.
pub fn factor(field: &FieldSpec, f: &Poly) -> Result<Factorization> {
    let unit = f.leading().ok_or(Error::ZeroPolynomial)?;
    let monic = make_monic(field, f);
    let mut factors = Vec::new();
    for (part, e) in squarefree_decomposition(field, &monic) {
        for (d, block) in distinct_degree_factorization(field, &part) {
            for prime in equal_degree_factorization(field, &block, d) {
                factors.push((prime, e));
            }
        }
    }
    factors.sort();
    Ok(Factorization { unit, factors })
}

/// Degrees of the prime factors with multiplicity, without splitting
/// equal-degree blocks.
fn factor_degrees(field: &FieldSpec, f: &Poly) -> Vec<usize> {
    let monic = make_monic(field, f);
    let mut parts = Vec::with_capacity(f.coeffs.len());
    for (part, e) in squarefree_decomposition(field, &monic) {
        for (d, block) in distinct_degree_factorization(field, &part) {
            let count = block.degree().unwrap_or(0) / d;
            parts.extend(std::iter::repeat_n(d, count * e as usize));
        }
    }
    parts
}

/// The factorization type `lambda_f`.
pub fn factorization_type(field: &FieldSpec, f: &Poly) -> Result<Partition> {
    match f.degree() {
        None => Err(Error::ZeroPolynomial),
        Some(0) => Err(Error::ConstantPolynomial),
        Some(_) => Partition::new(factor_degrees(field, f)),
    }
}

/// If `f = c P^e` with `P` prime, returns `(deg P, e)`.
pub fn prime_power_decomposition(field: &FieldSpec, f: &Poly) -> Option<(usize, u32)> {
    if f.is_constant() {
        return None;
    }
    let monic = make_monic(field, f);
    let parts = squarefree_decomposition(field, &monic);
    match parts.as_slice() {
        [(part, e)] if irreducible(field, part) => Some((part.degree()?, *e)),
        _ => None,
    }
}

/// Rabin's test.
pub fn is_irreducible(field: &FieldSpec, f: &Poly) -> Result<bool> {
    match f.degree() {
        None => Err(Error::ZeroPolynomial),
        Some(0) => Err(Error::ConstantPolynomial),
        Some(_) => Ok(irreducible(field, &make_monic(field, f))),
    }
}

fn irreducible(field: &FieldSpec, monic: &Poly) -> bool {
    let n = monic.degree().unwrap_or(0);
    if n <= 1 {
        return n == 1;
    }
    let frob = Frobenius::new(field, monic);
    let t = Poly::t();
    let mut powers = Vec::with_capacity(n + 1);
    let mut h = rem(field, &t, monic);
    powers.push(h.clone());
    for _ in 0..n {
        h = frob.apply(&h);
        powers.push(h.clone());
    }
    // powers[i] = t^(q^i) mod f
    if powers[n] != powers[0] {
        return false;
    }
    prime_divisors(n).into_iter().all(|r| {
        let g = gcd(field, &sub(field, &powers[n / r], &t), monic);
        g.is_one()
    })
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Whether `(f/D)' = (f'D - fD')/D^2` is an element of `F_q`.
pub fn rational_derivative_is_constant(field: &FieldSpec, f: &Poly, d: &Poly) -> Result<bool> {
    if d.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !gcd(field, f, d).is_one() {
        return Err(Error::NotCoprime);
    }
    let numerator = sub(
        field,
        &mul(field, &derivative(field, f), d),
        &mul(field, f, &derivative(field, d)),
    );
    let d2 = mul(field, d, d);
    if numerator.is_zero() {
        return Ok(true);
    }
    if numerator.degree() != d2.degree() {
        return Ok(false);
    }
    let c = field.div(numerator.leading().unwrap(), d2.leading().unwrap())?;
    Ok(scale(field, &d2, c) == numerator)
}

/// Monic primes of each degree up to a bound, found by sieving.
pub struct IrreducibleTable {
    field: FieldSpec,
    by_degree: Vec<Vec<Poly>>,
}

impl IrreducibleTable {
    pub fn new(field: &FieldSpec, max_degree: usize) -> Self {
        let mut by_degree: Vec<Vec<Poly>> = vec![Vec::new(); max_degree + 1];
        let q = field.q() as u64;
        for d in 1..=max_degree {
            let count = q.pow(d as u32);
            let primes: Vec<Poly> = (0..count)
                .map(|i| Poly::monic_from_index(field, d, i))
                .filter(|f| {
                    by_degree[1..=d / 2]
                        .iter()
                        .flatten()
                        .all(|p| !rem(field, f, p).is_zero())
                })
                .collect();
            by_degree[d] = primes;
        }
        IrreducibleTable {
            field: field.clone(),
            by_degree,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len() - 1
    }

    pub fn primes_of_degree(&self, d: usize) -> &[Poly] {
        &self.by_degree[d]
    }

    /// Factorization by trial division; every prime factor must have degree
    /// at most `max_degree`.
    pub fn factor(&self, f: &Poly) -> Result<Factorization> {
        let field = &self.field;
        let unit = f.leading().ok_or(Error::ZeroPolynomial)?;
        let mut rest = make_monic(field, f);
        let mut factors = Vec::new();
        for primes in &self.by_degree[1..] {
            let Some(d) = primes.first().and_then(Poly::degree) else {
                continue;
            };
            // Once deg rest < 2d, rest is constant or prime.
            if rest.degree().unwrap_or(0) < 2 * d {
                break;
            }
            for p in primes {
                let mut e = 0;
                loop {
                    let (quot, r) = poly_divrem(field, &rest, p)?;
                    if !r.is_zero() {
                        break;
                    }
                    rest = quot;
                    e += 1;
                }
                if e > 0 {
                    factors.push((p.clone(), e));
                }
            }
        }
        if !rest.is_constant() {
            let deg = rest.degree().unwrap();
            if deg > self.max_degree() {
                return Err(Error::OutOfRange(format!(
                    "cofactor of degree {deg} exceeds the table"
                )));
            }
            factors.push((rest, 1));
        }
        factors.sort();
        Ok(Factorization { unit, factors })
    }
}

/// Comma-separated coefficients, low-to-high; `0` for the zero polynomial.
pub fn render_poly(field: &FieldSpec, f: &Poly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let items: Vec<String> = f.coeffs.iter().map(|&c| field.render(c)).collect();
    items.join(",")
}

/// Parses the comma-separated coefficient list. Extension-field
/// coefficients are bracketed digit lists and may omit trailing zero digits.
pub fn parse_poly(field: &FieldSpec, text: &str) -> Result<Poly> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    if text == "0" {
        return Ok(Poly::zero());
    }
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse(format!("unbalanced `]` in `{text}`")))?
            }
            ',' if depth == 0 => {
                items.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced `[` in `{text}`")));
    }
    items.push(&text[start..]);
    let coeffs = items
        .into_iter()
        .map(|item| parse_coefficient(field, item))
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(coeffs))
}

fn parse_coefficient(field: &FieldSpec, item: &str) -> Result<FieldElement> {
    let item = item.trim();
    match item.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        Some(body) => {
            let mut digits = body
                .split(',')
                .map(|d| {
                    d.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("malformed digit in `{item}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if digits.len() > field.nu() as usize {
                return Err(Error::Parse(format!(
                    "`{item}` has more than {} components",
                    field.nu()
                )));
            }
            digits.resize(field.nu() as usize, 0);
            field.from_digits(&digits)
        }
        None => field.parse_element(item),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::exact_prime_count;
    use crate::gf::make_field;
    use proptest::prelude::*;

    fn poly(field: &FieldSpec, text: &str) -> Poly {
        parse_poly(field, text).unwrap()
    }

    #[test]
    fn divrem_examples() {
        let f3 = make_field(3, 1).unwrap();
        let (q, r) = poly_divrem(&f3, &poly(&f3, "1,0,1"), &poly(&f3, "1,1")).unwrap();
        assert_eq!((q, r), (poly(&f3, "2,1"), poly(&f3, "2")));

        let f2 = make_field(2, 1).unwrap();
        let (q, r) = poly_divrem(&f2, &poly(&f2, "0,0,0,1"), &poly(&f2, "0,0,1")).unwrap();
        assert_eq!((q, r), (Poly::t(), Poly::zero()));

        let f5 = make_field(5, 1).unwrap();
        let a = poly(&f5, "1,2,3,4");
        let (q, r) = poly_divrem(&f5, &a, &poly(&f5, "3")).unwrap();
        assert_eq!(q, scale(&f5, &a, f5.inv(f5.from_int(3)).unwrap()));
        assert!(r.is_zero());
        assert_eq!(
            poly_divrem(&f5, &a, &Poly::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn gcd_examples() {
        let f5 = make_field(5, 1).unwrap();
        let g = poly_gcd(&f5, &poly(&f5, "4,0,1"), &poly(&f5, "4,1")).unwrap();
        assert_eq!(g, poly(&f5, "4,1"));
        let f = poly(&f5, "2,0,3");
        assert_eq!(
            poly_gcd(&f5, &f, &Poly::zero()).unwrap(),
            make_monic(&f5, &f)
        );
        assert_eq!(
            poly_gcd(&f5, &Poly::zero(), &Poly::zero()),
            Err(Error::ZeroPolynomial)
        );
        let f2 = make_field(2, 1).unwrap();
        assert!(poly_gcd(&f2, &poly(&f2, "1,1,1"), &poly(&f2, "1,1"))
            .unwrap()
            .is_one());
    }

    #[test]
    fn hasse_examples() {
        let f2 = make_field(2, 1).unwrap();
        let (d1, d2) = hasse_derivatives(&f2, &poly(&f2, "0,0,0,1"));
        assert_eq!((d1, d2), (poly(&f2, "0,0,1"), Poly::t()));
        let (d1, d2) = hasse_derivatives(&f2, &poly(&f2, "0,0,0,0,1"));
        assert!(d1.is_zero() && d2.is_zero());
        let f3 = make_field(3, 1).unwrap();
        let (d1, d2) = hasse_derivatives(&f3, &poly(&f3, "0,0,1"));
        assert_eq!((d1, d2), (poly(&f3, "0,2"), Poly::one()));
    }

    #[test]
    fn eval_examples() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(
            poly_eval(&f2, &poly(&f2, "1,1,1"), FieldElement::ONE),
            FieldElement::ONE
        );
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(
            poly_eval(&f3, &poly(&f3, "1,0,1"), FieldElement::ONE),
            f3.from_int(2)
        );
        let f = poly(&f3, "2,1,1");
        assert_eq!(poly_eval(&f3, &f, FieldElement::ZERO), f3.from_int(2));
    }

    #[test]
    fn factor_examples() {
        let f2 = make_field(2, 1).unwrap();
        let fac = factor(&f2, &poly(&f2, "0,0,1,0,1")).unwrap();
        assert_eq!(fac.unit, FieldElement::ONE);
        assert_eq!(fac.factors, vec![(Poly::t(), 2), (poly(&f2, "1,1"), 2)]);

        let f3 = make_field(3, 1).unwrap();
        let fac = factor(&f3, &poly(&f3, "1,0,1")).unwrap();
        assert_eq!(fac.factors, vec![(poly(&f3, "1,0,1"), 1)]);

        let c = Poly::constant(f3.from_int(2));
        let fac = factor(&f3, &c).unwrap();
        assert_eq!(fac.unit, f3.from_int(2));
        assert!(fac.factors.is_empty());
        assert_eq!(factor(&f3, &Poly::zero()), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn type_and_irreducibility_examples() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(
            factorization_type(&f2, &poly(&f2, "0,1,0,1"))
                .unwrap()
                .to_string(),
            "1+1+1"
        );
        assert_eq!(
            factorization_type(&f2, &poly(&f2, "1,1,0,0,1"))
                .unwrap()
                .to_string(),
            "4"
        );
        assert!(is_irreducible(&f2, &poly(&f2, "1,1,1")).unwrap());
        assert!(!is_irreducible(&f2, &poly(&f2, "1,0,1")).unwrap());
        assert_eq!(
            is_irreducible(&f2, &Poly::one()),
            Err(Error::ConstantPolynomial)
        );
        assert_eq!(
            factorization_type(&f2, &Poly::one()),
            Err(Error::ConstantPolynomial)
        );
        let f9 = make_field(3, 2).unwrap();
        for c in f9.elements() {
            for a in f9.elements().filter(|a| !a.is_zero()) {
                let linear = Poly::new(vec![c, a]);
                assert!(is_irreducible(&f9, &linear).unwrap());
            }
        }
    }

    #[test]
    fn rational_derivative_examples() {
        for (p, nu) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let f = make_field(p, nu).unwrap();
            assert!(!rational_derivative_is_constant(&f, &Poly::one(), &Poly::t()).unwrap());
            assert!(rational_derivative_is_constant(&f, &Poly::t(), &Poly::one()).unwrap());
        }
        let f2 = make_field(2, 1).unwrap();
        assert!(rational_derivative_is_constant(&f2, &poly(&f2, "0,0,1"), &Poly::one()).unwrap());
        assert_eq!(
            rational_derivative_is_constant(&f2, &Poly::t(), &Poly::zero()),
            Err(Error::ZeroPolynomial)
        );
        assert_eq!(
            rational_derivative_is_constant(&f2, &Poly::t(), &poly(&f2, "0,1,1")),
            Err(Error::NotCoprime)
        );
        // (t/(t+1))' = 1/(t+1)^2 is not constant; (t^2 + t)/1 over F_2 has derivative 1.
        assert!(!rational_derivative_is_constant(&f2, &Poly::t(), &poly(&f2, "1,1")).unwrap());
        assert!(rational_derivative_is_constant(&f2, &poly(&f2, "0,1,1"), &Poly::one()).unwrap());
    }

    #[test]
    fn exhaustive_factorization_grid() {
        for (p, nu) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let field = make_field(p, nu).unwrap();
            let q = field.q() as u64;
            let table = IrreducibleTable::new(&field, 6);
            for k in 1..=6usize {
                let mut primes = 0u64;
                for i in 0..q.pow(k as u32) {
                    let f = Poly::monic_from_index(&field, k, i);
                    let fac = factor(&field, &f).unwrap();
                    assert_eq!(fac.expand(&field), f);
                    assert_eq!(fac.degree(), k);
                    assert_eq!(fac, table.factor(&f).unwrap(), "{}", f.render(&field));
                    for w in fac.factors.windows(2) {
                        assert!(w[0].0 < w[1].0);
                    }
                    let lambda = factorization_type(&field, &f).unwrap();
                    assert_eq!(Some(lambda.clone()), fac.partition());
                    let irreducible = is_irreducible(&field, &f).unwrap();
                    assert_eq!(irreducible, lambda.parts() == [k]);
                    primes += irreducible as u64;
                }
                assert_eq!(primes, exact_prime_count(q, k as u32).try_into().unwrap());
                assert_eq!(table.primes_of_degree(k).len() as u64, primes);
            }
        }
    }

    #[test]
    fn factors_non_monic_and_inseparable() {
        let f9 = make_field(3, 2).unwrap();
        let x = f9.from_digits(&[0, 1]).unwrap();
        // x * (t^3 + x)^3 * (t + 1)^2: the cube has zero derivative.
        let cube = pow(
            &f9,
            &Poly::new(vec![
                x,
                FieldElement::ZERO,
                FieldElement::ZERO,
                FieldElement::ONE,
            ]),
            3,
        );
        let f = mul(
            &f9,
            &scale(&f9, &cube, x),
            &pow(&f9, &poly(&f9, "[1],[1]"), 2),
        );
        let fac = factor(&f9, &f).unwrap();
        assert_eq!(fac.unit, x);
        assert_eq!(fac.expand(&f9), f);
        assert_eq!(fac.degree(), 11);
    }

    /// Coefficients of `f(t + u)` as `c[i][j]` for `t^i u^j`, by Horner in two
    /// variables.
    fn shifted(field: &FieldSpec, f: &Poly) -> Vec<Vec<FieldElement>> {
        let n = f.coeffs().len().max(1);
        let mut acc = vec![vec![FieldElement::ZERO; n]; n];
        for &c in f.coeffs().iter().rev() {
            let mut next = vec![vec![FieldElement::ZERO; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let a = acc[i][j];
                    if a.is_zero() {
                        continue;
                    }
                    if i + 1 < n {
                        next[i + 1][j] = field.add(next[i + 1][j], a);
                    }
                    if j + 1 < n {
                        next[i][j + 1] = field.add(next[i][j + 1], a);
                    }
                }
            }
            next[0][0] = field.add(next[0][0], c);
            acc = next;
        }
        acc
    }

    fn arb_poly(max_index: u32, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0..max_index, 0..=max_len)
    }

    proptest! {
        #[test]
        fn hasse_matches_shift_expansion(pnu in prop::sample::select(vec![(2u64, 1u32), (3, 1), (2, 2), (5, 1), (3, 2)]), raw in arb_poly(9, 7)) {
            let field = make_field(pnu.0, pnu.1).unwrap();
            let f = Poly::new(raw.iter().map(|&i| field.element(i % field.q()).unwrap()).collect());
            let (d1, d2) = hasse_derivatives(&field, &f);
            let grid = shifted(&field, &f);
            let column = |j: usize| Poly::new(grid.iter().map(|row| row.get(j).copied().unwrap_or_default()).collect());
            prop_assert_eq!(column(0), f.clone());
            prop_assert_eq!(d1.clone(), column(1));
            prop_assert_eq!(d2.clone(), column(2));
            if field.p() != 2 {
                let twice = scale(&field, &d2, field.from_int(2));
                prop_assert_eq!(twice, derivative(&field, &d1));
            }
        }

        #[test]
        fn factor_round_trip(pnu in prop::sample::select(vec![(2u64, 3u32), (7, 1), (3, 2), (2, 4), (13, 1)]), raw in arb_poly(16, 10)) {
            let field = make_field(pnu.0, pnu.1).unwrap();
            let f = Poly::new(raw.iter().map(|&i| field.element(i % field.q()).unwrap()).collect());
            prop_assume!(!f.is_zero());
            let fac = factor(&field, &f).unwrap();
            prop_assert_eq!(fac.expand(&field), f.clone());
            for (p, _) in &fac.factors {
                prop_assert!(is_irreducible(&field, p).unwrap());
            }
        }

        #[test]
        fn text_round_trip(pnu in prop::sample::select(vec![(2u64, 1u32), (5, 1), (2, 2), (3, 2)]), raw in arb_poly(9, 6)) {
            let field = make_field(pnu.0, pnu.1).unwrap();
            let f = Poly::new(raw.iter().map(|&i| field.element(i % field.q()).unwrap()).collect());
            prop_assert_eq!(parse_poly(&field, &f.render(&field)).unwrap(), f);
        }
    }

    #[test]
    fn text_forms() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(
            poly(&f2, "1,0,1"),
            add(&f2, &Poly::monomial(FieldElement::ONE, 2), &Poly::one())
        );
        assert!(parse_poly(&f2, "1,3").is_err());
        assert!(parse_poly(&f2, "").is_err());
        assert!(parse_poly(&f2, "1,,1").is_err());
        let f4 = make_field(2, 2).unwrap();
        let x = f4.from_digits(&[0, 1]).unwrap();
        let f = poly(&f4, "[1],[0,1],[1]");
        assert_eq!(f.coeffs(), &[FieldElement::ONE, x, FieldElement::ONE]);
        assert_eq!(f.render(&f4), "[1,0],[0,1],[1,0]");
        assert!(parse_poly(&f4, "[1,0,1]").is_err());
        assert!(parse_poly(&f4, "1,0").is_err());
        assert!(parse_poly(&f4, "[1,0").is_err());
        assert_eq!(Poly::zero().render(&f4), "0");
    }
}

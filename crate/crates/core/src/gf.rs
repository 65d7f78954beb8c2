//! Arithmetic in `F_q`, `q = p^nu`.
//!
//! Elements are stored as their index `d0 + d1*p + ... + d_{nu-1}*p^(nu-1)`,
//! where `(d0, .., d_{nu-1})` are the coordinates relative to the basis
//! `1, x, .., x^(nu-1)` of `F_p[x]/(modulus)`. The index doubles as the
//! canonical order of elements. Multiplication goes through discrete log
//! tables built once at construction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the field order.
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

/// Below this order addition is a table lookup.
const ADD_TABLE_MAX_ORDER: u32 = 256;

/// An element of some `F_q`. Only meaningful together with its [`FieldSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Position of the element in canonical order (its base-`p` digit value).
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub(crate) fn from_index_unchecked(index: u32) -> Self {
        FieldElement(index)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 1
    }
}

/// The finite field `F_{p^nu}` with a canonical defining modulus.
///
/// Cloning is cheap; the tables are shared.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

struct Inner {
    p: u32,
    nu: u32,
    q: u32,
    modulus: Vec<u32>,
    /// `exp[i] = g^i` for a primitive `g`, stored twice over so that
    /// `exp[log a + log b]` needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.inner.p)
            .field("nu", &self.inner.nu)
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.nu == other.inner.nu
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds `F_{p^nu}` with the default order cap.
pub fn make_field(p: u64, nu: u32) -> Result<FieldSpec> {
    FieldSpec::new(p, nu, DEFAULT_MAX_ORDER)
}

impl FieldSpec {
    /// Builds `F_{p^nu}`.
    ///
    /// The modulus is the least monic irreducible of degree `nu` over `F_p`,
    /// where `c0 + c1 x + .. + x^nu` is ranked by the base-`p` integer
    /// `c0 + c1 p + .. + c_{nu-1} p^(nu-1)`. For `nu = 1` the modulus is `x`.
    pub fn new(p: u64, nu: u32, max_order: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if nu == 0 {
            return Err(Error::InvalidExponent);
        }
        let order = (p as u128).checked_pow(nu).unwrap_or(u128::MAX);
        if order > max_order as u128 || order > u32::MAX as u128 {
            return Err(Error::FieldTooLarge {
                order,
                limit: max_order,
            });
        }
        let p = p as u32;
        let q = order as u32;
        let modulus = if nu == 1 {
            vec![0, 1]
        } else {
            least_irreducible(p, nu as usize)
        };
        Ok(Self {
            inner: Arc::new(Inner::build(p, nu, q, modulus)),
        })
    }

    /// Builds the field of the given prime-power order.
    pub fn from_order(q: u64, max_order: u64) -> Result<Self> {
        let (p, nu) =
            prime_power(q).ok_or_else(|| Error::OutOfRange(format!("{q} is not a prime power")))?;
        Self::new(p, nu, max_order)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.p
    }

    #[inline]
    pub fn nu(&self) -> u32 {
        self.inner.nu
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    /// Digits of the defining modulus, low-to-high, `nu + 1` entries.
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.q()).map(FieldElement)
    }

    pub fn element(&self, index: u32) -> Result<FieldElement> {
        if index < self.q() {
            Ok(FieldElement(index))
        } else {
            Err(Error::ForeignElement { q: self.q() })
        }
    }

    /// Embeds an integer through `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p() as i64) as u32)
    }

    pub fn from_digits(&self, digits: &[u32]) -> Result<FieldElement> {
        if digits.len() != self.nu() as usize {
            return Err(Error::Parse(format!(
                "expected {} components, found {}",
                self.nu(),
                digits.len()
            )));
        }
        let mut index = 0u32;
        for &d in digits.iter().rev() {
            if d >= self.p() {
                return Err(Error::Parse(format!(
                    "digit {d} is not below p = {}",
                    self.p()
                )));
            }
            index = index * self.p() + d;
        }
        Ok(FieldElement(index))
    }

    /// Coordinates of `a`, low-to-high, exactly `nu` entries.
    pub fn digits(&self, a: FieldElement) -> Vec<u32> {
        index_to_digits(a.0, self.p(), self.nu() as usize)
    }

    pub fn check(&self, a: FieldElement) -> Result<FieldElement> {
        self.element(a.0)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let inner = &*self.inner;
        if inner.nu == 1 {
            let s = a.0 + b.0;
            FieldElement(if s >= inner.p { s - inner.p } else { s })
        } else if inner.p == 2 {
            FieldElement(a.0 ^ b.0)
        } else if let Some(table) = &inner.add {
            FieldElement(table[(a.0 * inner.q + b.0) as usize])
        } else {
            FieldElement(digitwise_add(a.0, b.0, inner.p))
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.inner.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let inner = &*self.inner;
        let e = inner.log[a.0 as usize] + inner.log[b.0 as usize];
        FieldElement(inner.exp[e as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let inner = &*self.inner;
        let order = inner.q - 1;
        let l = inner.log[a.0 as usize];
        Ok(FieldElement(inner.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n` by square-and-multiply, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut n: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// The unique `b` with `b^p = a`.
    pub fn pth_root(&self, a: FieldElement) -> FieldElement {
        self.pow(a, (self.q() / self.p()) as u64)
    }

    /// Text form: bare integer for prime fields, `[d0,..]` otherwise.
    pub fn render(&self, a: FieldElement) -> String {
        if self.nu() == 1 {
            a.0.to_string()
        } else {
            render_digits(&self.digits(a))
        }
    }

    /// Text form `[d0,d1,..]` regardless of the field.
    pub fn render_bracketed(&self, a: FieldElement) -> String {
        render_digits(&self.digits(a))
    }

    /// Parses `[d0,d1,..]`; prime fields also accept a bare integer.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement> {
        let text = text.trim();
        if let Some(body) = text.strip_prefix('[') {
            let body = body
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("unterminated element `{text}`")))?;
            let digits = body
                .split(',')
                .map(parse_digit)
                .collect::<Result<Vec<_>>>()?;
            self.from_digits(&digits)
        } else if self.nu() == 1 {
            self.from_digits(&[parse_digit(text)?])
        } else {
            Err(Error::Parse(format!(
                "`{text}`: elements of F_{} need the bracketed form",
                self.q()
            )))
        }
    }
}

fn parse_digit(text: &str) -> Result<u32> {
    let text = text.trim();
    text.parse::<u32>()
        .map_err(|_| Error::Parse(format!("malformed digit `{text}`")))
}

fn render_digits(digits: &[u32]) -> String {
    let body: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    format!("[{}]", body.join(","))
}

/// Returns `(p, nu)` with `q = p^nu`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut nu = 0;
    while rest % p == 0 {
        rest /= p;
        nu += 1;
    }
    (rest == 1).then_some((p, nu))
}

fn index_to_digits(mut index: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(index % p);
        index /= p;
    }
    out
}

fn digits_to_index(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn digitwise_add(mut a: u32, mut b: u32, p: u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// Multiplies two residues modulo a monic `modulus` over `F_p`.
fn mulmod_raw(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for top in (n..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        prod[top] = 0;
        for (i, &m) in modulus[..n].iter().enumerate() {
            let idx = top - n + i;
            prod[idx] = (prod[idx] + (p as u64 - c) * m as u64) % p as u64;
        }
    }
    prod.truncate(n);
    prod.into_iter().map(|c| c as u32).collect()
}

/// True iff the monic `poly` has no monic factor of degree `1..=deg/2` over `F_p`.
fn irreducible_by_trial_division(poly: &[u32], p: u32) -> bool {
    let n = poly.len() - 1;
    for d in 1..=n / 2 {
        let count = p.pow(d as u32);
        for index in 0..count {
            let mut divisor = index_to_digits(index, p, d);
            divisor.push(1);
            if remainder_raw(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn remainder_raw(a: &[u32], monic: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let n = monic.len() - 1;
    let p = p as u64;
    for top in (n..r.len()).rev() {
        let c = r[top] % p;
        if c == 0 {
            continue;
        }
        for (i, &m) in monic.iter().enumerate() {
            let idx = top - n + i;
            r[idx] = (r[idx] + (p - c) * m as u64) % p;
        }
    }
    r.truncate(n);
    r.into_iter().map(|c| (c % p) as u32).collect()
}

fn least_irreducible(p: u32, nu: usize) -> Vec<u32> {
    let count = p.pow(nu as u32);
    (0..count)
        .map(|index| {
            let mut poly = index_to_digits(index, p, nu);
            poly.push(1);
            poly
        })
        .find(|poly| poly[0] != 0 && irreducible_by_trial_division(poly, p))
        .expect("irreducible polynomials exist in every degree")
}

impl Inner {
    fn build(p: u32, nu: u32, q: u32, modulus: Vec<u32>) -> Self {
        let n = nu as usize;
        let order = (q - 1) as usize;
        let times = |a: u32, b: u32| -> u32 {
            if nu == 1 {
                ((a as u64 * b as u64) % p as u64) as u32
            } else {
                let r = mulmod_raw(
                    &index_to_digits(a, p, n),
                    &index_to_digits(b, p, n),
                    &modulus,
                    p,
                );
                digits_to_index(&r, p)
            }
        };

        let mut exp = Vec::with_capacity(2 * order);
        let mut log = vec![0u32; q as usize];
        for g in 1..q {
            exp.clear();
            let mut x = 1u32;
            let mut primitive = true;
            for i in 0..order {
                if i > 0 && x == 1 {
                    primitive = false;
                    break;
                }
                exp.push(x);
                x = times(x, g);
            }
            if primitive {
                break;
            }
        }
        debug_assert_eq!(exp.len(), order);
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        exp.extend_from_within(..);

        let neg = (0..q)
            .map(|a| {
                let digits = index_to_digits(a, p, n);
                let negated: Vec<u32> = digits.iter().map(|&d| (p - d) % p).collect();
                digits_to_index(&negated, p)
            })
            .collect();

        let add = (nu > 1 && p != 2 && q <= ADD_TABLE_MAX_ORDER).then(|| {
            let mut table = Vec::with_capacity((q * q) as usize);
            for a in 0..q {
                for b in 0..q {
                    table.push(digitwise_add(a, b, p));
                }
            }
            table
        });

        Inner {
            p,
            nu,
            q,
            modulus,
            exp,
            log,
            neg,
            add,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(field: &FieldSpec) -> FieldElement {
        field.from_digits(&[0, 1]).unwrap()
    }

    #[test]
    fn canonical_moduli() {
        assert_eq!(make_field(2, 1).unwrap().modulus(), &[0, 1]);
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert_eq!(f4.q(), 4);
        let f9 = make_field(3, 2).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        assert_eq!(f9.q(), 9);
        assert_eq!(make_field(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(make_field(2, 4).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(make_field(1, 1).unwrap_err(), Error::NotPrime(1));
        assert_eq!(make_field(2, 0).unwrap_err(), Error::InvalidExponent);
        assert!(matches!(
            make_field(2, 17),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(make_field(2, 16).is_ok());
    }

    #[test]
    fn deterministic_construction() {
        for (p, nu) in [(2, 5), (3, 3), (5, 2), (7, 2)] {
            assert_eq!(make_field(p, nu).unwrap(), make_field(p, nu).unwrap());
        }
    }

    #[test]
    fn small_products_and_inverses() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(f5.mul(f5.from_int(3), f5.from_int(4)), f5.from_int(2));
        assert_eq!(f5.pow(f5.from_int(2), 4), FieldElement::ONE);

        let f7 = make_field(7, 1).unwrap();
        assert_eq!(f7.inv(f7.from_int(3)).unwrap(), f7.from_int(5));
        assert_eq!(f7.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(f7.inv(FieldElement::ZERO), Err(Error::DivisionByZero));

        let f4 = make_field(2, 2).unwrap();
        let xp1 = f4.from_digits(&[1, 1]).unwrap();
        assert_eq!(f4.mul(x(&f4), x(&f4)), xp1);
        assert_eq!(f4.inv(x(&f4)).unwrap(), xp1);
        assert_eq!(f4.pow(x(&f4), 3), FieldElement::ONE);
        for a in f4.elements() {
            assert_eq!(f4.mul(a, FieldElement::ONE), a);
            assert_eq!(f4.pow(a, 0), FieldElement::ONE);
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (p, nu) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (11, 1),
            (13, 1),
            (2, 4),
        ] {
            let f = make_field(p, nu).unwrap();
            let els: Vec<_> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                    assert_eq!(f.pow(a, (f.q() - 1) as u64), FieldElement::ONE);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.add(f.pow(a, p), f.pow(b, p)), f.pow(f.add(a, b), p));
                    for &c in &els {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn large_odd_field_uses_digitwise_addition() {
        let f = make_field(3, 6).unwrap();
        let a = f.element(500).unwrap();
        let b = f.element(228).unwrap();
        let da = f.digits(a);
        let db = f.digits(b);
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % 3).collect();
        assert_eq!(f.digits(f.add(a, b)), sum);
        assert_eq!(f.sub(f.add(a, b), b), a);
    }

    #[test]
    fn pth_roots() {
        for (p, nu) in [(2, 3), (3, 2), (5, 1)] {
            let f = make_field(p, nu).unwrap();
            for a in f.elements() {
                assert_eq!(f.pow(f.pth_root(a), p), a);
            }
        }
    }

    #[test]
    fn text_forms() {
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.render(x(&f4)), "[0,1]");
        assert_eq!(f4.parse_element(" [1, 1] ").unwrap().index(), 3);
        assert!(f4.parse_element("1").is_err());
        assert!(f4.parse_element("[1]").is_err());
        assert!(f4.parse_element("[2,0]").is_err());
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(f5.parse_element("4").unwrap(), f5.from_int(4));
        assert_eq!(f5.parse_element("[4]").unwrap(), f5.from_int(4));
        assert_eq!(f5.render_bracketed(f5.from_int(4)), "[4]");
        assert!(f5.parse_element("5").is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(13), Some((13, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}

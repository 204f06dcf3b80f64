//! Arithmetic in the binary extension field GF(2^m).
//!
//! Elements are polynomials over GF(2) packed into a bitmask (bit `i` is the
//! coefficient of `x^i`). A [`FieldContext`] owns the modulus, a fixed
//! primitive element and the exp/log tables built from it. Addition is a
//! plain exclusive-or and does not need the context at all.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GddError, Result};

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 3;
/// Largest supported extension degree; the tables hold `2 * 2^m` words.
pub const MAX_DEGREE: u32 = 20;

/// An element of GF(2^m), identified by its coefficient bitmask.
///
/// Ordering is ascending bitmask, which is the total order every canonical
/// listing in this crate uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct FieldElement(pub(crate) u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw bitmask. Field membership is checked by the context.
    pub const fn from_bits(bits: u32) -> Self {
        FieldElement(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

// Characteristic 2: addition is xor.
impl Add for FieldElement {
    type Output = FieldElement;

    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = FieldElement>>(iter: I) -> Self {
        iter.fold(FieldElement::ZERO, Add::add)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

// Hex bitmask is the machine form of an element in every structured export.
impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_hex(&s)
            .map(FieldElement)
            .ok_or_else(|| serde::de::Error::custom(format!("expected hex bitmask, got {s:?}")))
    }
}

fn parse_hex(s: &str) -> Option<u32> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    u32::from_str_radix(digits, 16).ok()
}

/// How an element is rendered for people and files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Notation {
    /// `g^i`, the power of the primitive element.
    #[default]
    Power,
    /// `0x..` coefficient bitmask.
    Hex,
    /// `x^2+x+1` style polynomial.
    Poly,
}

impl FromStr for Notation {
    type Err = GddError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Notation::Power),
            "hex" => Ok(Notation::Hex),
            "poly" => Ok(Notation::Poly),
            other => Err(GddError::Usage(format!(
                "unknown notation {other:?} (expected power, hex or poly)"
            ))),
        }
    }
}

impl fmt::Display for Notation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notation::Power => "power",
            Notation::Hex => "hex",
            Notation::Poly => "poly",
        })
    }
}

/// A fully built GF(2^m): modulus, primitive element and discrete-log tables.
///
/// Immutable after construction; share it freely between threads.
#[derive(Clone)]
pub struct FieldContext {
    m: u32,
    modulus: u32,
    alpha: FieldElement,
    exp_table: Vec<u32>,
    log_table: Vec<u32>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("m", &self.m)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

/// Builds GF(2^m).
///
/// Without an override the modulus is the irreducible polynomial of degree
/// `m` with the numerically least bitmask. The primitive element is `x` when
/// `x` generates the multiplicative group, otherwise the least primitive
/// element.
pub fn build_field(m: u32, modulus_override: Option<u32>) -> Result<FieldContext> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&m) {
        return Err(GddError::DegreeOutOfRange {
            m,
            min: MIN_DEGREE,
            max: MAX_DEGREE,
        });
    }
    let modulus = match modulus_override {
        Some(poly) => {
            if poly_degree(poly as u64) != Some(m) || poly & 1 == 0 {
                return Err(GddError::MalformedModulus {
                    modulus: poly as u64,
                    m,
                });
            }
            if !is_irreducible(poly as u64) {
                return Err(GddError::ReducibleModulus {
                    modulus: poly as u64,
                });
            }
            poly
        }
        None => least_irreducible(m),
    };

    let order = 1u32 << m;
    let group_order = (order - 1) as u64;
    let prime_factors = distinct_prime_factors(group_order);
    let is_primitive = |a: u32| {
        prime_factors
            .iter()
            .all(|&p| pow_direct(a, group_order / p, modulus, m) != 1)
    };
    let alpha = if is_primitive(2) {
        2
    } else {
        (2..order)
            .find(|&a| is_primitive(a))
            .expect("a finite field always has a primitive element")
    };

    let mut exp_table = Vec::with_capacity(group_order as usize);
    let mut log_table = vec![0u32; order as usize];
    let mut acc = 1u32;
    for i in 0..group_order as u32 {
        exp_table.push(acc);
        log_table[acc as usize] = i;
        acc = mul_direct(acc, alpha, modulus, m);
    }
    debug_assert_eq!(acc, 1);

    Ok(FieldContext {
        m,
        modulus,
        alpha: FieldElement(alpha),
        exp_table,
        log_table,
    })
}

impl FieldContext {
    pub fn new(m: u32) -> Result<Self> {
        build_field(m, None)
    }

    pub fn with_modulus(m: u32, modulus: u32) -> Result<Self> {
        build_field(m, Some(modulus))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn alpha(&self) -> FieldElement {
        self.alpha
    }

    /// Number of field elements, `2^m`.
    pub fn order(&self) -> u32 {
        1 << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    pub fn group_order(&self) -> u32 {
        self.order() - 1
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.order()
    }

    pub fn element(&self, bits: u32) -> Result<FieldElement> {
        let a = FieldElement(bits);
        self.check(a)?;
        Ok(a)
    }

    pub(crate) fn check(&self, a: FieldElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GddError::ElementOutOfField {
                bits: a.0 as u64,
                m: self.m,
            })
        }
    }

    /// `true` for members of X, the field without 0 and 1.
    pub fn in_point_set(&self, a: FieldElement) -> bool {
        a.0 >= 2 && self.contains(a)
    }

    /// The point set X = GF(2^m) \ {0, 1} in ascending order.
    pub fn point_set(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (2..self.order()).map(FieldElement)
    }

    /// `|X| = 2^m - 2`.
    pub fn point_count(&self) -> usize {
        self.order() as usize - 2
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a + b
    }

    /// Table-driven product.
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = self.group_order();
        let mut e = self.log_table[a.0 as usize] + self.log_table[b.0 as usize];
        if e >= n {
            e -= n;
        }
        FieldElement(self.exp_table[e as usize])
    }

    /// Carry-less product followed by reduction modulo the field polynomial.
    pub fn mul_direct(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(mul_direct(a.0, b.0, self.modulus, self.m))
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// `alpha^e`, any exponent reduced modulo `2^m - 1`.
    pub fn exp(&self, e: u64) -> FieldElement {
        FieldElement(self.exp_table[(e % self.group_order() as u64) as usize])
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if a.is_zero() {
            return if e == 0 {
                FieldElement::ONE
            } else {
                FieldElement::ZERO
            };
        }
        let n = self.group_order() as u64;
        let l = self.log_table[a.0 as usize] as u64;
        self.exp((l * (e % n)) % n)
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let l = self.dlog(a)?;
        Ok(self.exp((self.group_order() - l) as u64))
    }

    /// Discrete logarithm to base alpha, in `[0, 2^m - 2]`.
    pub fn dlog(&self, a: FieldElement) -> Result<u32> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GddError::ZeroHasNoLog);
        }
        Ok(self.log_table[a.0 as usize])
    }

    pub fn format_element(&self, a: FieldElement, style: Notation) -> Result<String> {
        self.check(a)?;
        Ok(match style {
            Notation::Power => format!("g^{}", self.dlog(a)?),
            Notation::Hex => a.to_string(),
            Notation::Poly => format_poly(a.0),
        })
    }

    /// Accepts `g^i`, `0x..` and polynomial strings such as `x^3+x+1`.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement> {
        let t = text.trim();
        let err = || GddError::ParseElement(text.to_string());
        let bits = if let Some(e) = t.strip_prefix("g^") {
            let e: u64 = e.parse().map_err(|_| err())?;
            self.exp(e).0
        } else if let Some(bits) = parse_hex(t) {
            bits
        } else {
            parse_poly(t).ok_or_else(err)?
        };
        self.element(bits)
    }

    /// Renders a slice of elements joined by `sep`.
    pub fn format_all(&self, elems: &[FieldElement], style: Notation, sep: &str) -> Result<String> {
        let parts = elems
            .iter()
            .map(|&a| self.format_element(a, style))
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.join(sep))
    }
}

fn format_poly(bits: u32) -> String {
    if bits == 0 {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for i in (0..32).rev() {
        if bits >> i & 1 == 1 {
            terms.push(match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            });
        }
    }
    terms.join("+")
}

fn parse_poly(s: &str) -> Option<u32> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Some(0);
    }
    let mut bits = 0u32;
    for term in compact.split('+') {
        let degree = match term {
            "1" => 0,
            "x" => 1,
            t => t.strip_prefix("x^")?.parse::<u32>().ok()?,
        };
        if degree >= 32 {
            return None;
        }
        bits ^= 1 << degree;
    }
    Some(bits)
}

/// Carry-less multiply of two field elements, reduced modulo `modulus`.
pub(crate) fn mul_direct(a: u32, b: u32, modulus: u32, m: u32) -> u32 {
    let product = clmul(a as u64, b as u64);
    poly_rem(product, modulus as u64) as u32 & ((1u32 << m) - 1)
}

fn pow_direct(a: u32, mut e: u64, modulus: u32, m: u32) -> u32 {
    let mut base = a;
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_direct(acc, base, modulus, m);
        }
        base = mul_direct(base, base, modulus, m);
        e >>= 1;
    }
    acc
}

/// Product of two GF(2)[x] polynomials (no reduction).
pub(crate) fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

fn poly_degree(p: u64) -> Option<u32> {
    (p != 0).then(|| 63 - p.leading_zeros())
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b).expect("division by the zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn poly_mulmod(a: u64, b: u64, f: u64) -> u64 {
    poly_rem(clmul(a, b), f)
}

/// Rabin's test: `f` of degree `m` is irreducible iff `x^(2^m) = x mod f` and
/// `gcd(x^(2^(m/p)) - x, f) = 1` for every prime `p` dividing `m`.
pub(crate) fn is_irreducible(f: u64) -> bool {
    let Some(m) = poly_degree(f) else {
        return false;
    };
    if m == 0 {
        return false;
    }
    if m > 31 {
        return false;
    }
    // x^(2^i) mod f for i = 0..=m
    let mut frob = Vec::with_capacity(m as usize + 1);
    let mut cur = poly_rem(0b10, f);
    frob.push(cur);
    for _ in 0..m {
        cur = poly_mulmod(cur, cur, f);
        frob.push(cur);
    }
    let x = poly_rem(0b10, f);
    if frob[m as usize] != x {
        return false;
    }
    distinct_prime_factors(m as u64)
        .into_iter()
        .all(|p| poly_gcd(f, frob[(m as u64 / p) as usize] ^ x) == 1)
}

fn least_irreducible(m: u32) -> u32 {
    ((1u32 << m) | 1..(1u32 << (m + 1)))
        .step_by(2)
        .find(|&p| is_irreducible(p as u64))
        .expect("irreducible polynomials exist in every degree")
}

pub(crate) fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_pow(ctx: &FieldContext, i: u64) -> FieldElement {
        ctx.exp(i)
    }

    #[test]
    fn default_moduli_for_m3_m4() {
        let f3 = FieldContext::new(3).unwrap();
        assert_eq!(f3.modulus(), 0b1011);
        assert_eq!(f3.alpha(), FieldElement(2));
        let f4 = FieldContext::new(4).unwrap();
        assert_eq!(f4.modulus(), 0b10011);
        assert_eq!(f4.alpha(), FieldElement(2));
    }

    #[test]
    fn reducible_override_is_rejected() {
        assert!(matches!(
            build_field(3, Some(0b1111)),
            Err(GddError::ReducibleModulus { .. })
        ));
        assert!(matches!(
            build_field(4, Some(0b1011)),
            Err(GddError::MalformedModulus { .. })
        ));
        assert!(matches!(
            build_field(4, Some(0b10010)),
            Err(GddError::MalformedModulus { .. })
        ));
        // x^4 + x^3 + 1 is irreducible and primitive, but x^4+x^3+x^2+x+1 is
        // irreducible with x of order 5.
        let f = build_field(4, Some(0b11111)).unwrap();
        assert_ne!(f.alpha(), FieldElement(2));
        assert_eq!(f.alpha(), FieldElement(3));
    }

    #[test]
    fn degree_guard() {
        assert!(build_field(2, None).is_err());
        assert!(build_field(21, None).is_err());
        assert!(build_field(20, None).is_ok());
    }

    #[test]
    fn irreducible_counts_per_degree() {
        // Number of monic irreducible polynomials of degree n over GF(2).
        let expected = [
            (1, 2),
            (2, 1),
            (3, 2),
            (4, 3),
            (5, 6),
            (6, 9),
            (7, 18),
            (8, 30),
        ];
        for (n, count) in expected {
            let found = (1u64 << n..1u64 << (n + 1))
                .filter(|&p| is_irreducible(p))
                .count();
            assert_eq!(found, count, "degree {n}");
        }
    }

    #[test]
    fn powers_for_m3_m4() {
        let f3 = FieldContext::new(3).unwrap();
        // gamma^3 = x + 1, gamma^6 = x^2 + 1
        assert_eq!(gamma_pow(&f3, 3), FieldElement(0b011));
        assert_eq!(
            f3.add(FieldElement(2), FieldElement::ONE),
            gamma_pow(&f3, 3)
        );
        assert_eq!(f3.dlog(FieldElement(0b101)).unwrap(), 6);
        assert_eq!(
            f3.mul(gamma_pow(&f3, 4), gamma_pow(&f3, 5)),
            gamma_pow(&f3, 2)
        );
        assert_eq!(
            f3.mul(gamma_pow(&f3, 1), gamma_pow(&f3, 2)),
            gamma_pow(&f3, 3)
        );

        let f4 = FieldContext::new(4).unwrap();
        assert_eq!(
            f4.add(gamma_pow(&f4, 1), gamma_pow(&f4, 2)),
            gamma_pow(&f4, 5)
        );
        assert_eq!(f4.dlog(FieldElement(0b1111)).unwrap(), 12);
        let table = [
            (2, 0b0100),
            (3, 0b1000),
            (4, 0b0011),
            (5, 0b0110),
            (6, 0b1100),
            (7, 0b1011),
            (8, 0b0101),
            (9, 0b1010),
            (10, 0b0111),
            (11, 0b1110),
            (12, 0b1111),
            (13, 0b1101),
            (14, 0b1001),
        ];
        for (i, bits) in table {
            assert_eq!(gamma_pow(&f4, i), FieldElement(bits), "gamma^{i}");
        }
    }

    #[test]
    fn dlog_of_one_and_zero() {
        let f = FieldContext::new(5).unwrap();
        assert_eq!(f.dlog(FieldElement::ONE).unwrap(), 0);
        assert!(matches!(
            f.dlog(FieldElement::ZERO),
            Err(GddError::ZeroHasNoLog)
        ));
        assert!(f.dlog(FieldElement(32)).is_err());
    }

    #[test]
    fn formatting() {
        let f3 = FieldContext::new(3).unwrap();
        let a = FieldElement(0b011);
        assert_eq!(
            f3.format_element(FieldElement::ONE, Notation::Power)
                .unwrap(),
            "g^0"
        );
        assert_eq!(f3.format_element(a, Notation::Poly).unwrap(), "x+1");
        assert_eq!(f3.format_element(a, Notation::Power).unwrap(), "g^3");
        assert_eq!(f3.format_element(a, Notation::Hex).unwrap(), "0x3");
        assert!(f3
            .format_element(FieldElement::ZERO, Notation::Power)
            .is_err());
        assert_eq!(
            f3.format_element(FieldElement::ZERO, Notation::Poly)
                .unwrap(),
            "0"
        );

        let f4 = FieldContext::new(4).unwrap();
        assert_eq!(
            f4.format_element(FieldElement(0b0110), Notation::Power)
                .unwrap(),
            "g^5"
        );
        assert_eq!(
            f4.format_element(FieldElement(0b1011), Notation::Poly)
                .unwrap(),
            "x^3+x+1"
        );
    }

    #[test]
    fn parsing_round_trips() {
        let f = FieldContext::new(6).unwrap();
        for a in (1..64).map(FieldElement) {
            for style in [Notation::Power, Notation::Hex, Notation::Poly] {
                let s = f.format_element(a, style).unwrap();
                assert_eq!(f.parse_element(&s).unwrap(), a, "{s}");
            }
        }
        assert!(f.parse_element("0x40").is_err());
        assert!(f.parse_element("y+1").is_err());
    }

    #[test]
    fn tables_are_inverse_bijections() {
        for m in MIN_DEGREE..=12 {
            let f = FieldContext::new(m).unwrap();
            assert_eq!(f.exp(0), FieldElement::ONE);
            for i in 0..f.group_order() {
                assert_eq!(f.dlog(f.exp(i as u64)).unwrap(), i);
            }
        }
    }

    #[test]
    fn alpha_has_full_order() {
        for m in MIN_DEGREE..=MAX_DEGREE {
            let f = FieldContext::new(m).unwrap();
            let n = f.group_order() as u64;
            let a = f.alpha();
            assert_eq!(pow_direct(a.0, n, f.modulus(), m), 1);
            for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
                if n / d > 1 && d < n && d <= 4096 {
                    assert_ne!(pow_direct(a.0, d, f.modulus(), m), 1, "m={m} d={d}");
                }
            }
            for p in distinct_prime_factors(n) {
                assert_ne!(pow_direct(a.0, n / p, f.modulus(), m), 1);
            }
        }
    }

    #[test]
    fn table_mul_matches_direct_mul_exhaustively() {
        for m in MIN_DEGREE..=8 {
            let f = FieldContext::new(m).unwrap();
            for a in 0..f.order() {
                for b in 0..f.order() {
                    let (a, b) = (FieldElement(a), FieldElement(b));
                    assert_eq!(f.mul(a, b), f.mul_direct(a, b));
                }
            }
        }
    }

    #[test]
    fn inverse() {
        let f = FieldContext::new(7).unwrap();
        for a in (1..f.order()).map(FieldElement) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }
}

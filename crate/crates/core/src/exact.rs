//! Exact scalars: rationals and rational multiples of square roots.
//!
//! A [`Surd`] is `coeff * sqrt(radicand)` with a square-free radicand. Every
//! unit dot product between lattice codes with different squared norms has
//! this form, and so do the Gegenbauer nodes for `m <= 3`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

/// Splits `r` into `(s, f)` with `r = s^2 * f` and `f` square-free.
pub fn square_free_split(mut r: u64) -> (u64, u64) {
    if r == 0 {
        return (0, 1);
    }
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= r {
        let mut e = 0u32;
        while r.is_multiple_of(p) {
            r /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    free *= r;
    (square, free)
}

/// Rational from a pair of machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `coeff * sqrt(radicand)`, kept canonical: radicand square-free and
/// radicand 1 whenever the value is rational (including zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    coeff: Rational,
    radicand: u64,
}

/// Canonical form of `c * sqrt(r)`.
pub fn normalize_surd(c: Rational, r: u64) -> Surd {
    if c.is_zero() || r == 0 {
        return Surd::zero();
    }
    let (s, f) = square_free_split(r);
    Surd {
        coeff: c * rint(s as i64),
        radicand: f,
    }
}

impl Surd {
    pub fn new(coeff: Rational, radicand: u64) -> Surd {
        normalize_surd(coeff, radicand)
    }

    pub fn zero() -> Surd {
        Surd {
            coeff: Rational::zero(),
            radicand: 1,
        }
    }

    pub fn one() -> Surd {
        Surd::rational(Rational::one())
    }

    pub fn rational(q: Rational) -> Surd {
        Surd {
            coeff: q,
            radicand: 1,
        }
    }

    /// `1 / sqrt(r)` written as `sqrt(r) / r`.
    pub fn inv_sqrt(r: u64) -> Surd {
        assert!(r > 0, "inverse square root of zero");
        normalize_surd(rat(1, r as i64), r)
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }

    /// Rational value when the radicand is 1.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.coeff)
    }

    pub fn signum(&self) -> i32 {
        match self.coeff.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// `value^2 = coeff^2 * radicand`, always rational.
    pub fn square(&self) -> Rational {
        &self.coeff * &self.coeff * rint(self.radicand as i64)
    }

    pub fn abs(&self) -> Surd {
        Surd {
            coeff: self.coeff.abs(),
            radicand: self.radicand,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }

    /// Exact sum; defined only when the radicands agree or one side is zero.
    pub fn checked_add(&self, other: &Surd) -> Result<Surd> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.radicand != other.radicand {
            return Err(Error::MixedRadicand(self.radicand, other.radicand));
        }
        Ok(normalize_surd(&self.coeff + &other.coeff, self.radicand))
    }

    pub fn checked_sub(&self, other: &Surd) -> Result<Surd> {
        self.checked_add(&-other.clone())
    }

    pub fn mul(&self, other: &Surd) -> Surd {
        let g = self.radicand.gcd(&other.radicand);
        // sqrt(a) sqrt(b) = g sqrt(a/g * b/g) keeps the product inside u64
        let r = (self.radicand / g) * (other.radicand / g);
        normalize_surd(&self.coeff * &other.coeff * rint(g as i64), r)
    }

    pub fn scale(&self, q: &Rational) -> Surd {
        normalize_surd(&self.coeff * q, self.radicand)
    }
}

impl std::ops::Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            coeff: -self.coeff,
            radicand: self.radicand,
        }
    }
}

/// Total order on real values: sign first, then squares.
pub fn surd_cmp(a: &Surd, b: &Surd) -> Ordering {
    let (sa, sb) = (a.signum(), b.signum());
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa == 0 {
        return Ordering::Equal;
    }
    let mag = a.square().cmp(&b.square());
    if sa > 0 {
        mag
    } else {
        mag.reverse()
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Surd) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Surd) -> Ordering {
        surd_cmp(self, other)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FromStr for Surd {
    type Err = Error;

    /// Accepts `p/q`, `p/q*sqrt(r)`, `sqrt(r)` and `-sqrt(r)`.
    fn from_str(s: &str) -> Result<Surd> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("not a surd: {s:?}"));
        let Some(pos) = s.find("sqrt(") else {
            return Ok(Surd::rational(parse_rational(s)?));
        };
        let inner = s[pos + 5..].strip_suffix(')').ok_or_else(bad)?;
        let r: u64 = inner.trim().parse().map_err(|_| bad())?;
        let head = s[..pos].trim();
        let coeff = match head {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            _ => parse_rational(head.strip_suffix('*').ok_or_else(bad)?)?,
        };
        Ok(normalize_surd(coeff, r))
    }
}

impl Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Surd {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Surd, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (Stern-Brocot descent), returned as `(p, q)`.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64) {
    let sign = if x < 0.0 { -1 } else { 1 };
    let x = x.abs();
    let whole = x.floor();
    let frac = x - whole;
    let (mut lo_n, mut lo_d, mut hi_n, mut hi_d) = (0u64, 1u64, 1u64, 1u64);
    let mut best = if frac < 0.5 { (0u64, 1u64) } else { (1, 1) };
    loop {
        let (mn, md) = (lo_n + hi_n, lo_d + hi_d);
        if md > max_den {
            break;
        }
        let m = mn as f64 / md as f64;
        if (m - frac).abs() < (best.0 as f64 / best.1 as f64 - frac).abs() {
            best = (mn, md);
        }
        if m < frac {
            lo_n = mn;
            lo_d = md;
        } else if m > frac {
            hi_n = mn;
            hi_d = md;
        } else {
            break;
        }
    }
    let n = whole as i64 * best.1 as i64 + best.0 as i64;
    (sign * n, best.1)
}

/// Recognizes `x` as `+-sqrt(p/q)` with `q <= max_den`, within `tol`.
pub fn recognize_surd(x: f64, max_den: u64, tol: f64) -> Option<Surd> {
    if x.abs() < tol {
        return Some(Surd::zero());
    }
    let (p, q) = best_rational(x * x, max_den);
    if p <= 0 {
        return None;
    }
    // sqrt(p/q) = sqrt(p q) / q
    let s = normalize_surd(rat(if x < 0.0 { -1 } else { 1 }, q as i64), p as u64 * q);
    ((s.to_f64() - x).abs() < tol).then_some(s)
}

/// A point `sqrt(radicand) * coords` with rational coordinates.
///
/// Unit points of a lattice code `v / sqrt(n)` and every dual point found in
/// exact mode have this shape. The representation is canonical (square-free
/// radicand, radicand 1 for the zero vector), so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactPoint {
    radicand: u64,
    coords: Vec<Rational>,
}

impl ExactPoint {
    pub fn new(radicand: u64, coords: Vec<Rational>) -> ExactPoint {
        if radicand == 0 || coords.iter().all(Zero::is_zero) {
            return ExactPoint {
                radicand: 1,
                coords: vec![Rational::zero(); coords.len()],
            };
        }
        let (s, f) = square_free_split(radicand);
        let s = rint(s as i64);
        ExactPoint {
            radicand: f,
            coords: coords.into_iter().map(|c| c * &s).collect(),
        }
    }

    /// `v / sqrt(norm_sq)`.
    pub fn from_lattice(v: &[i64], norm_sq: i64) -> ExactPoint {
        // v / sqrt(n) = sqrt(n) * v / n
        ExactPoint::new(
            norm_sq as u64,
            v.iter().map(|&x| rat(x, norm_sq)).collect(),
        )
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> Surd {
        normalize_surd(self.coords[i].clone(), self.radicand)
    }

    pub fn dot(&self, other: &ExactPoint) -> Surd {
        let s: Rational = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum();
        let g = self.radicand.gcd(&other.radicand);
        normalize_surd(
            s * rint(g as i64),
            (self.radicand / g) * (other.radicand / g),
        )
    }

    /// Dot product with `v / sqrt(norm_sq)`.
    pub fn dot_lattice(&self, v: &[i64], norm_sq: i64) -> Surd {
        let s: Rational = self
            .coords
            .iter()
            .zip(v)
            .filter(|(_, &x)| x != 0)
            .map(|(a, &x)| a * rint(x))
            .sum();
        let g = self.radicand.gcd(&(norm_sq as u64));
        normalize_surd(
            s * rat(g as i64, norm_sq),
            (self.radicand / g) * (norm_sq as u64 / g),
        )
    }

    pub fn norm_sq(&self) -> Rational {
        let s: Rational = self.coords.iter().map(|c| c * c).sum();
        s * rint(self.radicand as i64)
    }

    pub fn is_unit(&self) -> bool {
        self.norm_sq().is_one()
    }

    pub fn neg(&self) -> ExactPoint {
        ExactPoint {
            radicand: self.radicand,
            coords: self.coords.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let r = (self.radicand as f64).sqrt();
        self.coords
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN) * r)
            .collect()
    }

    /// Coordinates rendered as surd strings.
    pub fn render(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.coord(i).to_string()).collect()
    }

    /// Builds a point from per-coordinate surds, which must share a radicand.
    pub fn from_surds(coords: &[Surd]) -> Option<ExactPoint> {
        let r = coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(Surd::radicand)
            .next()
            .unwrap_or(1);
        if coords.iter().any(|c| !c.is_zero() && c.radicand() != r) {
            return None;
        }
        Some(ExactPoint::new(
            r,
            coords.iter().map(|c| c.coeff().clone()).collect(),
        ))
    }

    /// Integer vector `v` and `n` with `self = v / sqrt(n)`, when the point is
    /// a unit vector.
    pub fn to_lattice(&self) -> Option<(Vec<BigInt>, BigInt)> {
        if !self.is_unit() {
            return None;
        }
        // self = sqrt(r) * c; with L = lcm(denominators) * r the vector L c is
        // integral and |L c|^2 = L^2 / r.
        let mut l = BigInt::from(self.radicand);
        for c in &self.coords {
            l = l.lcm(c.denom());
        }
        let v: Vec<BigInt> = self
            .coords
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let n = &l * &l / BigInt::from(self.radicand);
        Some((v, n))
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.render().join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        let s = normalize_surd(rint(1), 8);
        assert_eq!((s.coeff().clone(), s.radicand()), (rint(2), 2));
        let s = normalize_surd(rat(3, 4), 1);
        assert_eq!((s.coeff().clone(), s.radicand()), (rat(3, 4), 1));
        let s = normalize_surd(rint(0), 7);
        assert_eq!((s.coeff().clone(), s.radicand()), (rint(0), 1));
    }

    #[test]
    fn cmp_examples() {
        let a = Surd::inv_sqrt(8);
        assert_eq!(surd_cmp(&a, &Surd::inv_sqrt(8)), Ordering::Equal);
        // 1/2 vs sqrt(2)/4 ~ 0.35355
        let half = Surd::rational(rat(1, 2));
        let q = normalize_surd(rat(1, 4), 2);
        assert_eq!(surd_cmp(&half, &q), Ordering::Greater);
        let neg = -Surd::inv_sqrt(22);
        assert_eq!(surd_cmp(&neg, &Surd::zero()), Ordering::Less);
    }

    #[test]
    fn mixed_radicand_addition_is_an_error() {
        let a = Surd::inv_sqrt(2);
        let b = Surd::inv_sqrt(3);
        assert!(matches!(a.checked_add(&b), Err(Error::MixedRadicand(2, 3))));
        let c = a.checked_add(&Surd::inv_sqrt(8)).unwrap();
        // 1/sqrt2 + 1/(2 sqrt2) = 3 sqrt2 / 4
        assert_eq!(c, normalize_surd(rat(3, 4), 2));
        assert_eq!(a.checked_add(&Surd::zero()).unwrap(), a);
    }

    #[test]
    fn products_and_squares() {
        let a = Surd::inv_sqrt(2);
        assert_eq!(a.mul(&a), Surd::rational(rat(1, 2)));
        assert_eq!(Surd::inv_sqrt(8).square(), rat(1, 8));
        let b = normalize_surd(rint(3), 6).mul(&normalize_surd(rint(1), 10));
        // 3 sqrt60 = 6 sqrt15
        assert_eq!(b, normalize_surd(rint(6), 15));
    }

    #[test]
    fn text_round_trip() {
        for s in ["3/4", "-2", "1/4*sqrt(2)", "-1/22*sqrt(22)", "0"] {
            let v: Surd = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        let v: Surd = "sqrt(8)".parse().unwrap();
        assert_eq!(v.to_string(), "2*sqrt(2)");
        let v: Surd = "-sqrt(3)".parse().unwrap();
        assert_eq!(v, -normalize_surd(rint(1), 3));
        assert!("1/0".parse::<Surd>().is_err());
        assert!("abc".parse::<Surd>().is_err());
    }

    #[test]
    fn recognizes_small_surds() {
        let s = recognize_surd(1.0 / 8f64.sqrt(), 64, 1e-12).unwrap();
        assert_eq!(s, Surd::inv_sqrt(8));
        let s = recognize_surd(-0.6, 64, 1e-12).unwrap();
        assert_eq!(s, Surd::rational(rat(-3, 5)));
        assert!(recognize_surd(std::f64::consts::PI / 4.0, 64, 1e-12).is_none());
    }

    #[test]
    fn exact_points() {
        let p = ExactPoint::from_lattice(&[2, 2, 0, 0, 0, 0, 0, 0], 8);
        assert!(p.is_unit());
        assert_eq!(p.radicand(), 2);
        let q = ExactPoint::from_lattice(&[3, 1, 1, 1, 1, 1, 1, 1], 16);
        assert_eq!(p.dot(&q), Surd::inv_sqrt(2));
        assert_eq!(p.dot_lattice(&[3, 1, 1, 1, 1, 1, 1, 1], 16), Surd::inv_sqrt(2));
        let (v, n) = p.to_lattice().unwrap();
        assert_eq!(n, BigInt::from(2));
        assert_eq!(v[0], BigInt::from(1));
        assert_eq!(p.neg().neg(), p);
        let z = ExactPoint::new(5, vec![rint(0), rint(0)]);
        assert_eq!(z.radicand(), 1);
    }

    fn surd_strategy() -> impl Strategy<Value = Surd> {
        (-50i64..50, 1i64..30, 0u64..60).prop_map(|(n, d, r)| normalize_surd(rat(n, d), r))
    }

    proptest! {
        #[test]
        fn cmp_antisymmetric(a in surd_strategy(), b in surd_strategy()) {
            prop_assert_eq!(surd_cmp(&a, &b), surd_cmp(&b, &a).reverse());
            prop_assert_eq!(surd_cmp(&a, &b) == Ordering::Equal, a == b);
        }

        #[test]
        fn cmp_agrees_with_floats(a in surd_strategy(), b in surd_strategy()) {
            let (x, y) = (a.to_f64(), b.to_f64());
            if (x - y).abs() > 1e-9 {
                prop_assert_eq!(surd_cmp(&a, &b), x.partial_cmp(&y).unwrap());
            }
        }

        #[test]
        fn normalize_idempotent(n in -50i64..50, d in 1i64..30, r in 0u64..500) {
            let s = normalize_surd(rat(n, d), r);
            let t = normalize_surd(s.coeff().clone(), s.radicand());
            prop_assert_eq!(&s, &t);
            prop_assert_eq!(square_free_split(s.radicand()).0, 1);
        }
    }
}

//! Dense univariate polynomials over any numeric scalar.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{FromPrimitive, Num, ToPrimitive};

use crate::Rational;

/// Coefficients in ascending degree; no trailing zeros (the zero polynomial
/// has no coefficients).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + Num> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Polynomial::new(vec![c])
    }

    /// `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        Polynomial { coeffs: c }
    }

    /// `t - root`.
    pub fn linear_factor(root: T) -> Self {
        Polynomial::new(vec![T::zero() - root, T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn map<U: Clone + Num>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Clone + Num + FromPrimitive> Polynomial<T> {
    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_usize(k).unwrap())
                .collect(),
        )
    }
}

impl Polynomial<Rational> {
    /// Coefficients converted to `f64`.
    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }

    /// Coefficients converted to any float type.
    pub fn to_float<F: num_traits::Float + FromPrimitive>(&self) -> Polynomial<F> {
        self.map(|c| F::from_f64(c.to_f64().unwrap_or(f64::NAN)).unwrap())
    }
}

impl<T: Clone + Num> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|i| get(self, i) + get(rhs, i)).collect())
    }
}

impl<T: Clone + Num> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|i| get(self, i) - get(rhs, i)).collect())
    }
}

impl<T: Clone + Num> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Clone + Num + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Parses a comma-separated ascending coefficient list such as `1,0,-3/2`.
impl std::str::FromStr for Polynomial<Rational> {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        let coeffs = s
            .split(',')
            .map(|c| {
                let v: crate::Surd = c.parse()?;
                v.as_rational().cloned().ok_or_else(|| {
                    crate::Error::InvalidArgument(format!("irrational coefficient {c:?}"))
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(Polynomial::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rint};

    #[test]
    fn arithmetic() {
        let p = Polynomial::new(vec![rint(-1), rint(0), rint(3)]);
        let q = Polynomial::linear_factor(rint(2));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(&rat(1, 2)), rat(-1, 4));
        let pq = &p * &q;
        assert_eq!(pq.eval(&rint(2)), rint(0));
        assert_eq!((&pq - &pq), Polynomial::zero());
        assert_eq!((&p + &q).coeffs(), &[rint(-3), rint(1), rint(3)]);
        assert_eq!(p.derivative().coeffs(), &[rint(0), rint(6)]);
    }

    #[test]
    fn generic_over_floats() {
        let p: Polynomial<f32> = Polynomial::new(vec![1.0, 2.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.eval(&0.5), 2.0);
        let r: Polynomial<Rational> = "1,0,-3/2".parse().unwrap();
        assert_eq!(r.to_f64().eval(&2.0), -5.0);
    }
}

//! Gegenbauer polynomials for `S^d`, built from exact moments of the weight
//! `w_d(t) ~ (1 - t^2)^{d/2 - 1}` on `[-1, 1]`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{normalize_surd, rat, rint, Surd};
use crate::{Poly64, RatPoly, Rational};

/// `int t^k w_d(t) dt` with `w_d` normalized to a probability density.
pub fn moment(d: u32, k: u32) -> Rational {
    assert!(d >= 1, "moment needs d >= 1");
    if k % 2 == 1 {
        return Rational::zero();
    }
    // mu_k = mu_{k-2} (k-1) / (k+d-1)
    (1..=k / 2).fold(Rational::one(), |acc, h| {
        let j = 2 * h as i64;
        acc * rat(j - 1, j + d as i64 - 1)
    })
}

fn moments_f64(d: u32, upto: usize) -> Vec<f64> {
    (0..=upto as u32)
        .map(|k| moment(d, k).to_f64().unwrap())
        .collect()
}

/// 0-th Gegenbauer coefficient: the mean of `q` against `w_d`.
pub fn a0(q: &RatPoly, d: u32) -> Rational {
    q.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| c * moment(d, k as u32))
        .sum()
}

/// `a0` for a float polynomial.
pub fn a0_f64(q: &Poly64, d: u32) -> f64 {
    let mu = moments_f64(d, q.coeffs().len());
    q.coeffs().iter().zip(mu).map(|(c, m)| c * m).sum()
}

fn cache() -> &'static Mutex<HashMap<u32, Vec<RatPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<RatPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact `P_n^{(d)}`: degree `n`, orthogonal to lower degrees under `w_d`,
/// and `P_n^{(d)}(1) = 1`. Gram-Schmidt over monomials, memoized per `d`.
pub fn gegenbauer_poly(d: u32, n: usize) -> RatPoly {
    assert!(d >= 1, "gegenbauer_poly needs d >= 1");
    let mut guard = cache().lock().unwrap();
    let table = guard
        .entry(d)
        .or_insert_with(|| vec![RatPoly::constant(Rational::one())]);
    while table.len() <= n {
        let k = table.len();
        let mut p = RatPoly::monomial(k);
        for q in table.iter() {
            let num = a0(&(&RatPoly::monomial(k) * q), d);
            if num.is_zero() {
                continue;
            }
            let den = a0(&(q * q), d);
            p = &p - &q.scale(&(num / den));
        }
        let at_one = p.eval(&Rational::one());
        assert!(!at_one.is_zero(), "P_{k}^({d}) vanishes at 1");
        table.push(p.scale(&(Rational::one() / at_one)));
    }
    table[n].clone()
}

/// Exact nodes and weights, present when every node is `b * sqrt(r)` for a
/// common `r` (always the case for `m <= 3`).
#[derive(Clone, Debug, PartialEq)]
pub struct ExactNodes {
    pub radicand: u64,
    pub nodes: Vec<Surd>,
    pub weights: Vec<Rational>,
}

/// Zeros `kappa_1 < ... < kappa_m` of `P_m^{(d)}` with the Gauss-Gegenbauer
/// weights `a0(phi_i)` of the fundamental polynomials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeSet {
    pub d: u32,
    pub m: u32,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(serialize_with = "ser_exact")]
    pub exact: Option<ExactNodes>,
}

fn ser_exact<S: serde::Serializer>(
    e: &Option<ExactNodes>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Repr {
        nodes: Vec<String>,
        weights: Vec<String>,
    }
    e.as_ref()
        .map(|e| Repr {
            nodes: e.nodes.iter().map(ToString::to_string).collect(),
            weights: e.weights.iter().map(ToString::to_string).collect(),
        })
        .serialize(s)
}

impl NodeSet {
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Pair of rational polynomials `A + sqrt(r) B`.
#[derive(Clone)]
struct SurdPoly {
    rat: RatPoly,
    irr: RatPoly,
    r: Rational,
}

impl SurdPoly {
    fn one(r: u64) -> SurdPoly {
        SurdPoly {
            rat: RatPoly::constant(Rational::one()),
            irr: RatPoly::zero(),
            r: rint(r as i64),
        }
    }

    /// Multiply by `t - b sqrt(r)`.
    fn mul_linear(&self, b: &Rational) -> SurdPoly {
        let t = RatPoly::monomial(1);
        let c = RatPoly::constant(-b.clone());
        // (A + sB)(t + s c) = (A t + r c B) + s (B t + c A)
        SurdPoly {
            rat: &(&self.rat * &t) + &(&self.irr * &c).scale(&self.r),
            irr: &(&self.irr * &t) + &(&self.rat * &c),
            r: self.r.clone(),
        }
    }

    /// Multiply by the scalar `f sqrt(r)`.
    fn mul_pure(&self, f: &Rational) -> SurdPoly {
        SurdPoly {
            rat: self.irr.scale(&(f * &self.r)),
            irr: self.rat.scale(f),
            r: self.r.clone(),
        }
    }
}

fn exact_weights(d: u32, radicand: u64, coeffs: &[Rational]) -> Result<Vec<Rational>> {
    let m = coeffs.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut phi = SurdPoly::one(radicand);
        for j in (0..m).filter(|&j| j != i) {
            phi = phi.mul_linear(&coeffs[j]);
            // 1 / ((b_i - b_j) sqrt r) = sqrt r / ((b_i - b_j) r)
            phi = phi.mul_pure(&(Rational::one() / ((&coeffs[i] - &coeffs[j]) * rint(radicand as i64))));
        }
        let (ra, ia) = (a0(&phi.rat, d), a0(&phi.irr, d));
        if radicand == 1 {
            out.push(ra + ia);
        } else if ia.is_zero() {
            out.push(ra);
        } else {
            return Err(Error::Precondition(format!(
                "irrational quadrature weight for P_{m}^({d})"
            )));
        }
    }
    Ok(out)
}

fn float_weights(d: u32, nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            let mut phi = Poly64::constant(1.0);
            for (j, &k) in nodes.iter().enumerate() {
                if j != i {
                    phi = &phi * &Poly64::new(vec![-k, 1.0]);
                    phi = phi.scale(&(1.0 / (nodes[i] - k)));
                }
            }
            a0_f64(&phi, d)
        })
        .collect()
}

fn sign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Isolates the `m` simple zeros of `p` in `(-1, 1)` by exact sign changes on
/// a rational grid, then bisects each bracket to width `2^-50`.
fn bisect_roots(p: &RatPoly, d: u32, m: u32) -> Result<Vec<f64>> {
    let mut grid = 64i64;
    let brackets = loop {
        let mut found: Vec<(Rational, Rational)> = Vec::new();
        let mut prev = (rat(-grid, grid), sign(&p.eval(&rat(-grid, grid))));
        for j in (-grid + 1)..=grid {
            let x = rat(j, grid);
            let s = sign(&p.eval(&x));
            if s == 0 {
                found.push((x.clone(), x.clone()));
            } else if prev.1 != 0 && s != prev.1 {
                found.push((prev.0.clone(), x.clone()));
            }
            prev = (x, s);
        }
        if found.len() == m as usize {
            break found;
        }
        grid *= 2;
        if grid > 1 << 16 {
            return Err(Error::RootIsolation { d, m });
        }
    };
    let eps = rat(1, 1 << 50);
    Ok(brackets
        .into_iter()
        .map(|(mut lo, mut hi)| {
            let s_lo = sign(&p.eval(&lo));
            while &hi - &lo > eps {
                let mid = (&lo + &hi) / rint(2);
                let s = sign(&p.eval(&mid));
                if s == 0 {
                    lo = mid.clone();
                    hi = mid;
                    break;
                }
                if s == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ((lo + hi) / rint(2)).to_f64().unwrap()
        })
        .collect())
}

/// Nodes and weights for `P_m^{(d)}`.
pub fn nodes(d: u32, m: u32) -> Result<NodeSet> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("nodes need d, m >= 1 (got {d}, {m})")));
    }
    let p = gegenbauer_poly(d, m as usize);
    if m <= 3 {
        // P_1 = c t; P_2 = a t^2 + c; P_3 = t (a t^2 + c)
        let (radicand, coeffs) = if m == 1 {
            (1, vec![Rational::zero()])
        } else {
            let c = p.coeffs();
            let k2 = -&c[m as usize - 2] / &c[m as usize];
            // sqrt(p/q) = sqrt(p q) / q
            let s = normalize_surd(
                Rational::one() / rint(k2.denom().to_i64().unwrap()),
                (k2.numer() * k2.denom()).to_u64().unwrap(),
            );
            let b = s.coeff().clone();
            let mut v = vec![-b.clone(), b];
            if m == 3 {
                v.insert(1, Rational::zero());
            }
            (s.radicand(), v)
        };
        let weights = exact_weights(d, radicand, &coeffs)?;
        let nodes: Vec<Surd> = coeffs
            .iter()
            .map(|b| normalize_surd(b.clone(), radicand))
            .collect();
        return Ok(NodeSet {
            d,
            m,
            nodes: nodes.iter().map(Surd::to_f64).collect(),
            weights: weights.iter().map(|w| w.to_f64().unwrap()).collect(),
            exact: Some(ExactNodes {
                radicand,
                nodes,
                weights,
            }),
        });
    }
    let nodes = if d == 1 {
        let mut v: Vec<f64> = (1..=m)
            .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())
            .collect();
        v.reverse();
        v
    } else {
        bisect_roots(&p, d, m)?
    };
    let weights = float_weights(d, &nodes);
    Ok(NodeSet {
        d,
        m,
        nodes,
        weights,
        exact: None,
    })
}

/// A node set supplied by the caller (e.g. a non-Gegenbauer dot set), with
/// no quadrature weights attached.
pub fn supplied_nodes(d: u32, nodes: &[Surd]) -> NodeSet {
    let mut sorted = nodes.to_vec();
    sorted.sort();
    sorted.dedup();
    let radicand = sorted
        .iter()
        .filter(|s| !s.is_zero())
        .map(Surd::radicand)
        .next()
        .unwrap_or(1);
    let common = sorted.iter().all(|s| s.is_zero() || s.radicand() == radicand);
    NodeSet {
        d,
        m: sorted.len() as u32,
        nodes: sorted.iter().map(Surd::to_f64).collect(),
        weights: Vec::new(),
        exact: common.then(|| ExactNodes {
            radicand,
            nodes: sorted,
            weights: Vec::new(),
        }),
    }
}

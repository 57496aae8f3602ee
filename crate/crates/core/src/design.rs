//! Design strength, index sets and dot-product spectra.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{int_dot, Code, LatticeCode};
use crate::error::{Error, Result};
use crate::exact::{rat, ExactPoint, Surd};
use crate::gegenbauer::{a0, gegenbauer_poly};
use crate::potential::random_unit;
use crate::{RatPoly, Rational};

/// Multiset of integer dot products `v_i . v_j` over all ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotMultiset {
    pub norm_sq: i64,
    pub counts: BTreeMap<i64, u64>,
}

impl DotMultiset {
    pub fn of(code: &LatticeCode) -> DotMultiset {
        let counts = code
            .points
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<i64, u64>, p| {
                for q in &code.points {
                    *acc.entry(int_dot(p, q)).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
        DotMultiset {
            norm_sq: code.norm_sq,
            counts: counts.into_iter().collect(),
        }
    }

    /// `sum_{i,j} q(x_i . x_j)`.
    pub fn sum_of(&self, q: &RatPoly) -> Rational {
        self.counts
            .iter()
            .map(|(&dot, &count)| q.eval(&rat(dot, self.norm_sq)) * Rational::from_integer(BigInt::from(count)))
            .sum()
    }

    /// Distinct unit dot values between distinct points.
    pub fn inner_values(&self) -> Vec<Rational> {
        self.counts
            .keys()
            .filter(|&&k| k != self.norm_sq)
            .map(|&k| rat(k, self.norm_sq))
            .collect()
    }
}

/// Exact `sum_{i,j} P_n^{(d)}(x_i . x_j)` with `d = ambient_dim - 1`.
pub fn pair_sum(code: &LatticeCode, n: usize) -> Rational {
    DotMultiset::of(code).sum_of(&gegenbauer_poly(code.sphere_dim() as u32, n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    pub code: String,
    pub checked_up_to: usize,
    pub index_set: Vec<usize>,
    pub strength: usize,
    pub exact: bool,
}

impl DesignReport {
    fn from_index_set(code: &str, n_max: usize, index_set: Vec<usize>, exact: bool) -> Self {
        let strength = (1..=n_max)
            .take_while(|n| index_set.contains(n))
            .last()
            .unwrap_or(0);
        DesignReport {
            code: code.to_string(),
            checked_up_to: n_max,
            index_set,
            strength,
            exact,
        }
    }

    pub fn is_design(&self, n: usize) -> bool {
        self.strength >= n
    }
}

/// Index set `{n <= n_max : pair sum vanishes}`; exact for lattice codes.
pub fn index_set(code: &Code, n_max: usize) -> DesignReport {
    match code {
        Code::Lattice(c) if c.exact => index_set_exact(c, n_max),
        _ => index_set_float(code, n_max),
    }
}

pub fn index_set_exact(code: &LatticeCode, n_max: usize) -> DesignReport {
    let d = code.sphere_dim() as u32;
    let ms = DotMultiset::of(code);
    let set = (1..=n_max)
        .filter(|&n| ms.sum_of(&gegenbauer_poly(d, n)).is_zero())
        .collect();
    DesignReport::from_index_set(&code.name, n_max, set, true)
}

/// Per-pair tolerance of the float design check.
pub const FLOAT_PAIR_TOL: f64 = 1e-10;

/// Float pair sums over all `N^2` pairs, accepted when `|sum| <= N^2 1e-10`.
pub fn index_set_float(code: &Code, n_max: usize) -> DesignReport {
    let d = code.sphere_dim() as u32;
    let polys: Vec<_> = (1..=n_max).map(|n| gegenbauer_poly(d, n).to_f64()).collect();
    let pts = code.unit_points();
    let sums = pts
        .par_iter()
        .map(|p| {
            let mut s = vec![0.0; n_max];
            for q in &pts {
                let t: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                for (k, poly) in polys.iter().enumerate() {
                    s[k] += poly.eval(&t);
                }
            }
            s
        })
        .reduce(
            || vec![0.0; n_max],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let n2 = (pts.len() * pts.len()) as f64;
    let set = (1..=n_max).filter(|&n| sums[n - 1].abs() <= n2 * FLOAT_PAIR_TOL).collect();
    DesignReport::from_index_set(code.name(), n_max, set, false)
}

/// A point probing a code: exact when it came from exact arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    Exact(ExactPoint),
    Float(Vec<f64>),
}

impl Probe {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Probe::Exact(p) => p.to_f64(),
            Probe::Float(p) => p.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Probe::Exact(p) => p.dim(),
            Probe::Float(p) => p.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DotValue {
    Exact(Surd),
    Float(f64),
}

impl DotValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DotValue::Exact(s) => s.to_f64(),
            DotValue::Float(x) => *x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub value: DotValue,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub probe: Vec<String>,
    pub entries: Vec<SpectrumEntry>,
    pub distinct_count: usize,
}

impl SpectrumReport {
    pub fn exact_values(&self) -> Option<Vec<Surd>> {
        self.entries
            .iter()
            .map(|e| match &e.value {
                DotValue::Exact(s) => Some(s.clone()),
                DotValue::Float(_) => None,
            })
            .collect()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value.to_f64()).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.multiplicity).collect()
    }
}

/// Sorted values grouped where consecutive gaps are at most `tol`; each group
/// is reported by its mean.
pub fn cluster_values(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some((sum, n, last)) if x - *last <= tol => {
                *sum += x;
                *n += 1;
                *last = x;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter().map(|(s, n, _)| (s / n as f64, n)).collect()
}

/// Exact dot values of an exact probe against a lattice code, in code order.
pub fn exact_dots(probe: &ExactPoint, code: &LatticeCode) -> Vec<Surd> {
    code.points
        .iter()
        .map(|v| probe.dot_lattice(v, code.norm_sq))
        .collect()
}

/// Distinct unit dot products of `probe` with the code and their counts.
pub fn spectrum(probe: &Probe, code: &Code) -> Result<SpectrumReport> {
    if probe.dim() != code.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "probe has dimension {}, code lives in R^{}",
            probe.dim(),
            code.ambient_dim()
        )));
    }
    if let (Probe::Exact(p), Code::Lattice(c)) = (probe, code) {
        if !p.is_unit() {
            return Err(Error::NotOnSphere(p.norm_sq().to_string()));
        }
        let mut counts: BTreeMap<Surd, usize> = BTreeMap::new();
        for s in exact_dots(p, c) {
            *counts.entry(s).or_default() += 1;
        }
        let entries: Vec<SpectrumEntry> = counts
            .into_iter()
            .map(|(value, multiplicity)| SpectrumEntry {
                value: DotValue::Exact(value),
                multiplicity,
            })
            .collect();
        return Ok(SpectrumReport {
            probe: p.render(),
            distinct_count: entries.len(),
            entries,
        });
    }
    let x = probe.to_f64();
    let n: f64 = x.iter().map(|a| a * a).sum();
    let tol = match code {
        Code::Float(c) => c.tolerance.max(1e-9),
        Code::Lattice(_) => 1e-9,
    };
    if (n - 1.0).abs() > tol {
        return Err(Error::NotOnSphere(n.to_string()));
    }
    let dots: Vec<f64> = code
        .unit_points()
        .iter()
        .map(|p| p.iter().zip(&x).map(|(a, b)| a * b).sum())
        .collect();
    let entries: Vec<SpectrumEntry> = cluster_values(&dots, 1e-9)
        .into_iter()
        .map(|(v, k)| SpectrumEntry {
            value: DotValue::Float(v),
            multiplicity: k,
        })
        .collect();
    Ok(SpectrumReport {
        probe: x.iter().map(|v| format!("{v}")).collect(),
        distinct_count: entries.len(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfCount {
    pub holds: bool,
    /// First index set (1-based) whose even/odd negative counts differ.
    pub violation: Option<Vec<usize>>,
}

/// 3-design test for subsets of the cube `{+-1}^d`: `N` even and, for every
/// index set `I` with `|I| <= 3`, as many points with an even number of
/// negative coordinates in `I` as with an odd number.
pub fn halfcount_3design(code: &LatticeCode) -> Result<HalfCount> {
    let d = code.ambient_dim;
    if d < 3 || code.norm_sq != d as i64 || code.points.iter().any(|p| p.iter().any(|x| x.abs() != 1)) {
        return Err(Error::Precondition(format!(
            "{} is not a subset of the {d}-cube",
            code.name
        )));
    }
    let balanced = |idx: &[usize]| {
        let odd = code
            .points
            .iter()
            .filter(|p| idx.iter().filter(|&&i| p[i] < 0).count() % 2 == 1)
            .count();
        2 * odd == code.len()
    };
    let mut sets: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
    for i in 0..d {
        for j in i + 1..d {
            sets.push(vec![i, j]);
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                sets.push(vec![i, j, k]);
            }
        }
    }
    let violation = sets
        .into_iter()
        .find(|s| !balanced(s))
        .map(|s| s.into_iter().map(|i| i + 1).collect());
    Ok(HalfCount {
        holds: violation.is_none() && code.len().is_multiple_of(2),
        violation,
    })
}

/// Largest deviation of `sum_i q(y . x_i)` from `a0(q) N` over random `y`.
pub fn constancy_check(code: &Code, q: &RatPoly, trials: usize, seed: u64) -> f64 {
    let d = code.sphere_dim() as u32;
    let target = a0(q, d).to_f64().unwrap() * code.len() as f64;
    let qf = q.to_f64();
    let pts = code.unit_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let y: Vec<f64> = random_unit(&mut rng, code.ambient_dim());
            let s: f64 = pts
                .iter()
                .map(|p| qf.eval(&p.iter().zip(&y).map(|(a, b)| a * b).sum()))
                .sum();
            (s - target).abs()
        })
        .fold(0.0, f64::max)
}

/// Distinct dot values between distinct points of an exact code.
pub fn inner_dot_values(code: &LatticeCode) -> Vec<Rational> {
    DotMultiset::of(code).inner_values()
}

/// Converts an exact count to `u64` for reporting.
pub fn count_u64(q: &Rational) -> Option<u64> {
    q.is_integer().then(|| q.to_integer().to_u64()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cross_polytope, cube, demicube, e8_roots, polytope_2_41, ngon, Parity};
    use crate::exact::{normalize_surd, rint};

    /// O(N^2) oracle for the pair sum.
    fn naive_pair_sum(code: &LatticeCode, n: usize) -> Rational {
        let p = gegenbauer_poly(code.sphere_dim() as u32, n);
        let mut s = Rational::zero();
        for i in 0..code.len() {
            for j in 0..code.len() {
                s += p.eval(&code.unit_dot(i, j));
            }
        }
        s
    }

    #[test]
    fn multiset_matches_naive_sum() {
        let codes = [
            cross_polytope(4).unwrap(),
            cube(3).unwrap(),
            cube(5).unwrap(),
            demicube(5, Parity::Even).unwrap(),
            demicube(6, Parity::Odd).unwrap(),
        ];
        for c in &codes {
            assert!(c.len() <= 64);
            for n in 1..=6 {
                assert_eq!(pair_sum(c, n), naive_pair_sum(c, n), "{} n={n}", c.name);
            }
        }
    }

    #[test]
    fn pair_sum_examples() {
        assert!(pair_sum(&cross_polytope(4).unwrap(), 1).is_zero());
        let c = polytope_2_41();
        assert!(pair_sum(&c, 10).is_zero());
        // brute-force value from an independent computation
        assert_eq!(pair_sum(&c, 8), rat(388_800, 143));
    }

    #[test]
    fn index_set_examples() {
        let r = index_set(&demicube(5, Parity::Even).unwrap().into(), 6);
        assert_eq!(r.strength, 3);
        assert!(r.exact);
        let r = index_set(&cube(3).unwrap().into(), 4);
        assert_eq!(r.strength, 3);
        assert_eq!(r.index_set, vec![1, 2, 3]);
        let r = index_set(&polytope_2_41().into(), 10);
        assert_eq!(r.index_set, vec![1, 2, 3, 4, 5, 6, 7, 9, 10]);
        assert_eq!(r.strength, 7);
    }

    #[test]
    fn antipodal_codes_have_odd_indices() {
        let codes: Vec<Code> = vec![
            cross_polytope(5).unwrap().into(),
            cube(4).unwrap().into(),
            e8_roots().into(),
            polytope_2_41().into(),
        ];
        for c in &codes {
            let r = index_set(c, 11);
            for n in (1..=11).step_by(2) {
                assert!(r.index_set.contains(&n), "{} n={n}", c.name());
            }
        }
    }

    #[test]
    fn float_index_set_agrees_on_polygons() {
        for n in 3..9 {
            let r = index_set(&ngon(n).unwrap().into(), n);
            assert!(!r.exact);
            assert_eq!(r.strength, n - 1);
        }
        let exact = index_set(&cube(4).unwrap().into(), 5);
        let float = index_set_float(&cube(4).unwrap().into(), 5);
        assert_eq!(exact.index_set, float.index_set);
    }

    #[test]
    fn spectrum_examples() {
        let d5: Code = demicube(5, Parity::Even).unwrap().into();
        let e1 = Probe::Exact(ExactPoint::from_lattice(&[1, 0, 0, 0, 0], 1));
        let s = spectrum(&e1, &d5).unwrap();
        let k = Surd::inv_sqrt(5);
        assert_eq!(s.exact_values().unwrap(), vec![-k.clone(), k]);
        assert_eq!(s.multiplicities(), vec![8, 8]);

        let c: Code = polytope_2_41().into();
        let root = Probe::Exact(ExactPoint::from_lattice(&[2, 2, 0, 0, 0, 0, 0, 0], 8));
        let s = spectrum(&root, &c).unwrap();
        let a = Surd::inv_sqrt(2);
        let b = normalize_surd(rat(1, 4), 2);
        assert_eq!(
            s.exact_values().unwrap(),
            vec![-a.clone(), -b.clone(), Surd::zero(), b, a]
        );
        assert_eq!(s.multiplicities(), vec![126, 576, 756, 576, 126]);

        let own = Probe::Exact(ExactPoint::from_lattice(&[4, 0, 0, 0, 0, 0, 0, 0], 16));
        let s = spectrum(&own, &c).unwrap();
        let want: Vec<Surd> = (-4..=4).map(|k| Surd::rational(rat(k, 4))).collect();
        assert_eq!(s.exact_values().unwrap(), want);
        assert_eq!(s.multiplicities(), vec![1, 64, 280, 448, 574, 448, 280, 64, 1]);

        let off = Probe::Exact(ExactPoint::new(1, vec![rint(1), rint(1), rint(0), rint(0), rint(0), rint(0), rint(0), rint(0)]));
        assert!(matches!(spectrum(&off, &c), Err(Error::NotOnSphere(_))));
    }

    #[test]
    fn float_spectrum_of_hexagon() {
        let h: Code = ngon(6).unwrap().into();
        let s = spectrum(&Probe::Float(vec![1.0, 0.0]), &h).unwrap();
        let v = s.values_f64();
        let want = [-1.0, -0.5, 0.5, 1.0];
        assert_eq!(v.len(), 4);
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.multiplicities(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn halfcount_examples() {
        let h = halfcount_3design(&demicube(6, Parity::Even).unwrap()).unwrap();
        assert!(h.holds);
        let single = LatticeCode::new("v", 5, 5, vec![vec![1; 5]]).unwrap();
        let h = halfcount_3design(&single).unwrap();
        assert!(!h.holds);
        assert_eq!(h.violation, Some(vec![1]));
        let d5 = demicube(5, Parity::Even).unwrap();
        assert!(halfcount_3design(&d5).unwrap().holds);
        assert!(index_set(&d5.clone().into(), 3).strength >= 3);
        assert!(halfcount_3design(&e8_roots()).is_err());
    }

    #[test]
    fn halfcount_agrees_with_index_set() {
        // every subset of the 4-cube of even size up to 8 points
        let cube4 = cube(4).unwrap();
        let mut checked = 0;
        for mask in 1u32..(1 << 16) {
            let k = mask.count_ones();
            if !(2..=8).contains(&k) {
                continue;
            }
            if mask % 7 != 0 {
                continue;
            }
            let pts: Vec<Vec<i64>> = (0..16).filter(|i| mask >> i & 1 == 1).map(|i| cube4.points[i].clone()).collect();
            let c = LatticeCode::new("s", 4, 4, pts).unwrap();
            let h = halfcount_3design(&c).unwrap().holds;
            assert_eq!(h, index_set_exact(&c, 3).strength >= 3, "mask {mask}");
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn constancy_examples() {
        let d5: Code = demicube(5, Parity::Even).unwrap().into();
        assert!(constancy_check(&d5, &gegenbauer_poly(4, 3), 100, 1) <= 1e-9);
        assert!(constancy_check(&d5, &RatPoly::constant(rint(1)), 10, 1) < 1e-12);
        let c: Code = polytope_2_41().into();
        assert!(constancy_check(&c, &RatPoly::monomial(8), 20, 2) > 1e-6);
        assert!(constancy_check(&c, &RatPoly::monomial(7), 20, 2) < 1e-8);
    }
}

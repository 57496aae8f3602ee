//! Dual configurations, m-stiffness certificates and related structure.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{code_from_exact_points, Code, LatticeCode};
use crate::config::caps;
use crate::design::{cluster_values, exact_dots, index_set, DesignReport};
use crate::error::{Error, Result};
use crate::exact::{recognize_surd, rint, ExactPoint, Surd};
use crate::field::{independent_rows, inverse, nullspace, rank};
use crate::gegenbauer::{nodes, supplied_nodes, NodeSet};
use crate::{Point64, Rational};

/// Residual and coincidence tolerance of the float dual search.
pub const FLOAT_TOL: f64 = 1e-9;
/// Largest denominator tried when recognizing float coordinates as surds.
pub const SURD_MAX_DEN: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact when both the code and the node set are exact.
    Auto,
    Exact,
    Float,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "auto" => Ok(Mode::Auto),
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    pub coords: Point64,
    pub exact: Option<ExactPoint>,
    /// Whether `exact` was checked in exact arithmetic against the code.
    pub verified: bool,
    /// Largest distance from a dot product to the nearest node.
    pub residual: f64,
}

impl DualPoint {
    fn exact(p: ExactPoint) -> DualPoint {
        DualPoint {
            coords: p.to_f64(),
            exact: Some(p),
            verified: true,
            residual: 0.0,
        }
    }

    pub fn neg(&self) -> DualPoint {
        DualPoint {
            coords: self.coords.iter().map(|x| -x).collect(),
            exact: self.exact.as_ref().map(ExactPoint::neg),
            verified: self.verified,
            residual: self.residual,
        }
    }
}

impl Serialize for DualPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            coords: &'a [f64],
            #[serde(skip_serializing_if = "Option::is_none")]
            exact: Option<Vec<String>>,
            verified: bool,
            residual: f64,
        }
        Repr {
            coords: &self.coords,
            exact: self.exact.as_ref().map(ExactPoint::render),
            verified: self.verified,
            residual: self.residual,
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualResult {
    pub m: u32,
    pub nodes: NodeSet,
    pub points: Vec<DualPoint>,
    /// Whether the search provably enumerated the whole dual.
    pub complete: bool,
    /// Whether the enumeration itself ran in exact arithmetic.
    pub exact: bool,
    /// Code indices of the linearly independent subset.
    pub basis: Vec<usize>,
    /// Dimension of the subsphere forming the dual when it is infinite.
    pub subsphere_dim: Option<usize>,
}

impl DualResult {
    pub fn float_points(&self) -> Vec<Point64> {
        self.points.iter().map(|p| p.coords.clone()).collect()
    }

    /// Exact points, when every dual point is exact and verified.
    pub fn exact_points(&self) -> Option<Vec<ExactPoint>> {
        self.points
            .iter()
            .map(|p| p.exact.clone().filter(|_| p.verified))
            .collect()
    }

    /// The dual as a code of its own.
    pub fn to_code(&self, name: &str) -> Result<Code> {
        match self.exact_points() {
            Some(pts) => code_from_exact_points(name, &pts),
            None => Ok(Code::Float(crate::FloatCode::new(name, self.nodes_dim(), self.float_points(), FLOAT_TOL)?)),
        }
    }

    fn nodes_dim(&self) -> usize {
        self.nodes.d as usize + 1
    }
}

fn enumeration_size(m: u32, dim: usize) -> Result<u128> {
    let total = (m as u128).checked_pow(dim as u32).ok_or(Error::Overflow)?;
    let cap = caps().enumeration;
    if total > cap {
        return Err(Error::SizeCap {
            requested: total,
            cap,
        });
    }
    Ok(total)
}

fn digits(mut k: u128, m: u32, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = (k % m as u128) as usize;
            k /= m as u128;
            d
        })
        .collect()
}

/// Points of the sphere whose dot products with the code all lie in the node
/// set of `P_m` (or in `supplied` nodes): solves every system `x_k . z =
/// kappa_{j_k}` over a fixed independent subset `x_1..x_{d+1}`.
pub fn dual_search(code: &Code, m: u32, mode: Mode, supplied: Option<&[Surd]>) -> Result<DualResult> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let dim = code.ambient_dim();
    let d = code.sphere_dim() as u32;
    let node_set = match supplied {
        Some(s) => {
            let ns = supplied_nodes(d, s);
            if ns.m != m {
                return Err(Error::InvalidArgument(format!(
                    "{} distinct supplied nodes for m = {m}",
                    ns.m
                )));
            }
            ns
        }
        None => nodes(d, m)?,
    };
    let basis = match code {
        Code::Lattice(c) => independent_rows(&lattice_rows(c)),
        Code::Float(c) => independent_rows(&c.points),
    };
    if basis.len() < dim {
        if m == 1 {
            let one = dual_1stiff(code)?;
            return Ok(DualResult {
                m,
                nodes: node_set,
                complete: one.pair.is_some(),
                exact: one.exact,
                basis,
                subsphere_dim: (one.complement_dim > 1).then_some(one.complement_dim - 1),
                points: one.pair.map(|p| p.to_vec()).unwrap_or_default(),
            });
        }
        return Err(Error::NotInGeneralPosition {
            rank: basis.len(),
            dim,
        });
    }
    enumeration_size(m, dim)?;
    let exact_possible = matches!(code, Code::Lattice(c) if c.exact) && node_set.exact.is_some();
    let use_exact = match mode {
        Mode::Auto => exact_possible,
        Mode::Exact if exact_possible => true,
        Mode::Exact => {
            return Err(Error::Precondition(
                "exact mode needs an exact code and exact nodes".into(),
            ))
        }
        Mode::Float => false,
    };
    let points = if use_exact {
        let Code::Lattice(c) = code else { unreachable!() };
        exact_enumeration(c, &node_set, &basis)?
    } else {
        let mut pts = float_enumeration(code, &node_set, &basis)?;
        upgrade_exactness(code, &node_set, &mut pts);
        pts
    };
    Ok(DualResult {
        m,
        nodes: node_set,
        points,
        complete: true,
        exact: use_exact,
        basis,
        subsphere_dim: None,
    })
}

fn lattice_rows(c: &LatticeCode) -> Vec<Vec<Rational>> {
    c.points
        .iter()
        .map(|p| p.iter().map(|&x| rint(x)).collect())
        .collect()
}

/// Integer determinant by fraction-free elimination.
fn bareiss_det(a: &[Vec<i128>]) -> Option<i128> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let p = (k + 1..n).find(|&i| m[i][k] != 0)?;
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].checked_mul(m[k][k])?.checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    Some(sign * m[n - 1][n - 1])
}

/// Unit `z = sqrt(n R) W / D` with integer `W`, where nodes are
/// `(A_j / Q) sqrt(R)` and `v_k . z / sqrt(n) = kappa_{j_k}`.
fn exact_enumeration(c: &LatticeCode, ns: &NodeSet, basis: &[usize]) -> Result<Vec<DualPoint>> {
    let ex = ns.exact.as_ref().unwrap();
    let dim = c.ambient_dim;
    let m = ns.m;
    let q = ex
        .nodes
        .iter()
        .fold(BigInt::one(), |l, s| l.lcm(s.coeff().denom()));
    let a: Vec<i128> = ex
        .nodes
        .iter()
        .map(|s| (s.coeff() * Rational::from_integer(q.clone())).to_integer().to_i128())
        .collect::<Option<_>>()
        .ok_or(Error::Overflow)?;
    let q = q.to_i128().ok_or(Error::Overflow)?;
    let radicand = ex.radicand as i128;
    let v: Vec<Vec<i128>> = basis
        .iter()
        .map(|&i| c.points[i].iter().map(|&x| x as i128).collect())
        .collect();
    let det = bareiss_det(&v).ok_or(Error::Overflow)?;
    let rows = lattice_rows(c);
    let vr: Vec<Vec<Rational>> = basis.iter().map(|&i| rows[i].clone()).collect();
    let inv = inverse(&vr).ok_or(Error::Singular)?;
    let adj: Vec<Vec<i128>> = inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| (x * rint(det as i64)).to_integer().to_i128())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<_>>()
        .ok_or(Error::Overflow)?;
    let big_d = det.checked_mul(q).ok_or(Error::Overflow)?;
    let unit = big_d.checked_mul(big_d).ok_or(Error::Overflow)?;
    let scale = (c.norm_sq as i128).checked_mul(radicand).ok_or(Error::Overflow)?;
    let targets: Vec<i128> = a.iter().map(|x| x * det).collect();
    let pts: Vec<i128> = c.points.iter().flatten().map(|&x| x as i128).collect();
    let total = (m as u128).pow(dim as u32);

    let mut found: Vec<Vec<i128>> = (0..total)
        .into_par_iter()
        .filter_map(|k| {
            let choice = digits(k, m, dim);
            let w: Vec<i128> = (0..dim)
                .map(|i| (0..dim).map(|j| adj[i][j] * a[choice[j]]).sum())
                .collect();
            let n2: i128 = w.iter().map(|x| x * x).sum();
            if n2.checked_mul(scale)? != unit {
                return None;
            }
            pts.chunks(dim)
                .all(|p| {
                    let s: i128 = p.iter().zip(&w).map(|(x, y)| x * y).sum();
                    targets.contains(&s)
                })
                .then_some(w)
        })
        .collect();
    found.sort();
    found.dedup();
    let denom = Rational::from_integer(BigInt::from(big_d));
    let mut out: Vec<ExactPoint> = found
        .into_iter()
        .map(|w| {
            ExactPoint::new(
                scale as u64,
                w.into_iter().map(|x| Rational::from_integer(x.into()) / &denom).collect(),
            )
        })
        .collect();
    out.sort();
    Ok(out.into_iter().map(DualPoint::exact).collect())
}

fn float_enumeration(code: &Code, ns: &NodeSet, basis: &[usize]) -> Result<Vec<DualPoint>> {
    let pts = code.unit_points();
    let dim = code.ambient_dim();
    let m = ns.m;
    let v: Vec<Vec<f64>> = basis.iter().map(|&i| pts[i].clone()).collect();
    let inv = inverse(&v).ok_or(Error::Singular)?;
    let total = (m as u128).pow(dim as u32);
    let mut found: Vec<DualPoint> = (0..total)
        .into_par_iter()
        .filter_map(|k| {
            let choice = digits(k, m, dim);
            let z: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| inv[i][j] * ns.nodes[choice[j]]).sum())
                .collect();
            let n2: f64 = z.iter().map(|x| x * x).sum();
            if (n2 - 1.0).abs() > FLOAT_TOL {
                return None;
            }
            let z: Vec<f64> = z.iter().map(|x| x / n2.sqrt()).collect();
            let mut residual: f64 = 0.0;
            for p in &pts {
                let t: f64 = p.iter().zip(&z).map(|(a, b)| a * b).sum();
                let r = ns.nodes.iter().map(|k| (k - t).abs()).fold(f64::INFINITY, f64::min);
                if r >= FLOAT_TOL {
                    return None;
                }
                residual = residual.max(r);
            }
            Some(DualPoint {
                coords: z,
                exact: None,
                verified: false,
                residual,
            })
        })
        .collect();
    found.sort_by(|a, b| a.coords.partial_cmp(&b.coords).unwrap());
    let mut out: Vec<DualPoint> = Vec::new();
    for p in found {
        if !out.iter().any(|q| dist(&q.coords, &p.coords) < FLOAT_TOL) {
            out.push(p);
        }
    }
    Ok(out)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Recognizes small-denominator surd coordinates of float dual points and
/// re-verifies them exactly against a lattice code.
fn upgrade_exactness(code: &Code, ns: &NodeSet, pts: &mut [DualPoint]) {
    for p in pts.iter_mut() {
        let Some(surds) = p
            .coords
            .iter()
            .map(|&x| recognize_surd(x, SURD_MAX_DEN, FLOAT_TOL))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let Some(e) = ExactPoint::from_surds(&surds) else { continue };
        if !e.is_unit() {
            continue;
        }
        match code {
            Code::Lattice(c) => {
                let dots: BTreeSet<Surd> = exact_dots(&e, c).into_iter().collect();
                let in_nodes = match &ns.exact {
                    Some(ex) => dots.iter().all(|t| ex.nodes.contains(t)),
                    None => dots.len() <= ns.m as usize,
                };
                if in_nodes {
                    p.coords = e.to_f64();
                    p.exact = Some(e);
                    p.verified = true;
                    p.residual = 0.0;
                }
            }
            Code::Float(_) => {
                if dist(&e.to_f64(), &p.coords) < FLOAT_TOL {
                    p.exact = Some(e);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StiffProperties {
    pub antipodal: bool,
    pub cardinality_bound: bool,
    pub double_dual_inclusion: bool,
    pub general_position: bool,
    pub frequencies_constant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StiffnessCertificate {
    pub code: String,
    pub m: u32,
    pub design: DesignReport,
    pub design_strength: usize,
    pub stiff: bool,
    pub dual: DualResult,
    pub dual_complete: bool,
    /// Per dual point, the number of code points at each node.
    pub frequency_table: Vec<Vec<usize>>,
    /// `a0(phi_j) N` per node, when weights are known.
    pub expected_frequencies: Option<Vec<String>>,
    pub frequencies_ok: Option<bool>,
    pub properties: StiffProperties,
}

impl StiffnessCertificate {
    /// All structural checks that apply hold.
    pub fn consistent(&self) -> bool {
        let p = &self.properties;
        p.antipodal
            && p.cardinality_bound
            && p.double_dual_inclusion
            && p.frequencies_constant
            && self.frequencies_ok != Some(false)
    }
}

/// Node index of each code dot product against one dual point.
fn frequencies(code: &Code, ns: &NodeSet, z: &DualPoint) -> Vec<usize> {
    let mut counts = vec![0; ns.m as usize];
    match (code, &z.exact, &ns.exact) {
        (Code::Lattice(c), Some(e), Some(ex)) if z.verified => {
            for t in exact_dots(e, c) {
                if let Some(j) = ex.nodes.iter().position(|k| *k == t) {
                    counts[j] += 1;
                }
            }
        }
        _ => {
            for p in code.unit_points() {
                let t: f64 = p.iter().zip(&z.coords).map(|(a, b)| a * b).sum();
                if let Some(j) = ns.nodes.iter().position(|k| (k - t).abs() < FLOAT_TOL) {
                    counts[j] += 1;
                }
            }
        }
    }
    counts
}

/// Whether every code point forms at most `m` distinct dot products with
/// the given points.
pub fn double_dual_inclusion(code: &Code, dual: &[DualPoint], m: u32) -> bool {
    if dual.is_empty() {
        return true;
    }
    let exact: Option<Vec<&ExactPoint>> = dual
        .iter()
        .map(|p| p.exact.as_ref().filter(|_| p.verified))
        .collect();
    match (code, exact) {
        (Code::Lattice(c), Some(ex)) => (0..c.len()).all(|i| {
            let x = c.exact_point(i);
            let s: BTreeSet<Surd> = ex.iter().map(|z| x.dot(z)).collect();
            s.len() <= m as usize
        }),
        _ => code.unit_points().iter().all(|x| {
            let t: Vec<f64> = dual
                .iter()
                .map(|z| x.iter().zip(&z.coords).map(|(a, b)| a * b).sum())
                .collect();
            cluster_values(&t, FLOAT_TOL).len() <= m as usize
        }),
    }
}

fn is_antipodal(points: &[DualPoint]) -> bool {
    points.iter().all(|p| {
        let n = p.neg();
        points.iter().any(|q| match (&q.exact, &n.exact) {
            (Some(a), Some(b)) => a == b,
            _ => dist(&q.coords, &n.coords) < FLOAT_TOL,
        })
    })
}

/// Design strength up to `2m`, the dual, frequency table and structural
/// property flags.
pub fn certify_stiff(code: &Code, m: u32, mode: Mode, supplied: Option<&[Surd]>) -> Result<StiffnessCertificate> {
    let design = index_set(code, 2 * m as usize);
    let dual = dual_search(code, m, mode, supplied)?;
    let n = code.len();
    let dim = code.ambient_dim();
    let frequency_table: Vec<Vec<usize>> = dual
        .points
        .iter()
        .map(|z| frequencies(code, &dual.nodes, z))
        .collect();
    let frequencies_constant = frequency_table.windows(2).all(|w| w[0] == w[1]);
    let (expected_frequencies, frequencies_ok) = if dual.nodes.weights.is_empty() || dual.points.is_empty() {
        (None, None)
    } else if let Some(ex) = &dual.nodes.exact {
        let want: Vec<Rational> = ex.weights.iter().map(|w| w * rint(n as i64)).collect();
        let ok = frequency_table
            .iter()
            .all(|row| row.iter().zip(&want).all(|(&c, w)| rint(c as i64) == *w));
        (Some(want.iter().map(ToString::to_string).collect()), Some(ok))
    } else {
        let want: Vec<f64> = dual.nodes.weights.iter().map(|w| w * n as f64).collect();
        let ok = frequency_table
            .iter()
            .all(|row| row.iter().zip(&want).all(|(&c, w)| (c as f64 - w).abs() < 1e-6));
        (Some(want.iter().map(ToString::to_string).collect()), Some(ok))
    };
    let general_position = {
        let rows: Vec<Vec<f64>> = dual.float_points();
        !rows.is_empty() && rank(&rows) == dim
    };
    let bound = (m as u128).pow(dim as u32);
    let properties = StiffProperties {
        antipodal: is_antipodal(&dual.points),
        cardinality_bound: !dual.complete || (dual.points.len() as u128) <= bound,
        double_dual_inclusion: double_dual_inclusion(code, &dual.points, m),
        general_position,
        frequencies_constant,
    };
    let strength = design.strength;
    Ok(StiffnessCertificate {
        code: code.name().to_string(),
        m,
        design_strength: strength,
        stiff: strength + 1 >= 2 * m as usize && !dual.points.is_empty(),
        dual_complete: dual.complete,
        design,
        dual,
        frequency_table,
        expected_frequencies,
        frequencies_ok,
        properties,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneStiff {
    pub holds: bool,
    pub centered: bool,
    pub rank: usize,
    /// Normal of a hyperplane containing the code.
    pub witness: Option<Vec<String>>,
}

/// Center of mass at the origin and rank at most `d`.
pub fn is_1stiff(code: &Code) -> OneStiff {
    let dim = code.ambient_dim();
    match code {
        Code::Lattice(c) => {
            let centered = (0..dim).all(|j| c.points.iter().map(|p| p[j] as i128).sum::<i128>() == 0);
            let rows = lattice_rows(c);
            let r = rank(&rows);
            let witness = nullspace(&rows, dim)
                .into_iter()
                .next()
                .map(|v| v.iter().map(ToString::to_string).collect());
            OneStiff {
                holds: centered && r < dim,
                centered,
                rank: r,
                witness,
            }
        }
        Code::Float(c) => {
            let centered = (0..dim)
                .map(|j| c.points.iter().map(|p| p[j]).sum::<f64>())
                .map(|s| s * s)
                .sum::<f64>()
                .sqrt()
                < 1e-12 * (c.len() as f64).max(1.0);
            let r = rank(&c.points);
            let witness = nullspace(&c.points, dim)
                .into_iter()
                .next()
                .map(|v| v.iter().map(ToString::to_string).collect());
            OneStiff {
                holds: centered && r < dim,
                centered,
                rank: r,
                witness,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OneStiffDual {
    /// `dim L^perp` for the span `L` of the code.
    pub complement_dim: usize,
    pub basis: Vec<Point64>,
    pub exact: bool,
    /// `{a, -a}` when the complement is a line.
    pub pair: Option<[DualPoint; 2]>,
}

/// The dual of a 1-stiff code: the unit sphere of the orthogonal complement
/// of its span.
pub fn dual_1stiff(code: &Code) -> Result<OneStiffDual> {
    let info = is_1stiff(code);
    if !info.holds {
        return Err(Error::Precondition(format!(
            "{} is not 1-stiff (centered: {}, rank {})",
            code.name(),
            info.centered,
            info.rank
        )));
    }
    let dim = code.ambient_dim();
    match code {
        Code::Lattice(c) => {
            let kernel = nullspace(&lattice_rows(c), dim);
            let mut basis = Vec::new();
            let mut exact_basis = Vec::new();
            for v in &kernel {
                // v / |v| = sqrt(|v|^2) v / |v|^2
                let q: Rational = v.iter().map(|x| x * x).sum();
                let num = (q.numer() * q.denom()).to_u64().ok_or(Error::Overflow)?;
                let den = q.denom().clone();
                let coords: Vec<Rational> = v
                    .iter()
                    .map(|x| x / (Rational::from_integer(den.clone()) * &q))
                    .collect();
                let p = ExactPoint::new(num, coords);
                basis.push(p.to_f64());
                exact_basis.push(p);
            }
            let pair = (kernel.len() == 1).then(|| {
                let a = DualPoint::exact(exact_basis[0].clone());
                let mut pair = [a.clone(), a.neg()];
                pair.sort_by(|x, y| x.exact.cmp(&y.exact));
                pair
            });
            Ok(OneStiffDual {
                complement_dim: kernel.len(),
                basis,
                exact: true,
                pair,
            })
        }
        Code::Float(c) => {
            let kernel = nullspace(&c.points, dim);
            let basis: Vec<Point64> = gram_schmidt(&kernel);
            let pair = (basis.len() == 1).then(|| {
                let a = DualPoint {
                    coords: basis[0].clone(),
                    exact: None,
                    verified: false,
                    residual: 0.0,
                };
                let mut pair = [a.clone(), a.neg()];
                pair.sort_by(|x, y| x.coords.partial_cmp(&y.coords).unwrap());
                pair
            });
            Ok(OneStiffDual {
                complement_dim: basis.len(),
                basis,
                exact: false,
                pair,
            })
        }
    }
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &out {
            let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(w.iter().map(|x| x / n).collect());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sharpness {
    pub inner_dot_count: usize,
    pub strength: usize,
    pub sharp: bool,
    pub strongly_sharp: bool,
}

/// Sharp: a `(2m'-1)`-design with `m'` inner dot values; strongly sharp:
/// additionally a `2m'`-design.
pub fn classify_sharp(code: &LatticeCode) -> Sharpness {
    let m = crate::design::inner_dot_values(code).len();
    let strength = crate::design::index_set_exact(code, 2 * m).strength;
    let sharp = m > 0 && strength + 1 >= 2 * m;
    Sharpness {
        inner_dot_count: m,
        strength,
        sharp,
        strongly_sharp: sharp && strength >= 2 * m,
    }
}

/// Spherical Fibonacci lattice with `n` points on `S^2`.
pub fn fibonacci_sphere(n: usize) -> Vec<Point64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Brute-force dual on `S^2`: scores `samples` quasi-random directions by the
/// smallest `N - m` gaps of their sorted dot products, and refines the best
/// percent by solving for a point whose dots take one value per group.
pub fn sampled_dual_s2(code: &Code, m: u32, samples: usize) -> Result<Vec<Point64>> {
    if code.ambient_dim() != 3 {
        return Err(Error::InvalidArgument("sampling oracle works on S^2 only".into()));
    }
    let m = m as usize;
    let pts = code.unit_points();
    let n = pts.len();
    if n <= m {
        return Err(Error::InvalidArgument("code too small for the sampling oracle".into()));
    }
    let dots = |y: &[f64]| -> Vec<f64> {
        let mut t: Vec<f64> = pts.iter().map(|p| p.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t
    };
    let mut scored: Vec<(f64, Point64)> = fibonacci_sphere(samples)
        .into_par_iter()
        .map(|y| {
            let t = dots(&y);
            let mut gaps: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (gaps[..n - m].iter().sum(), y)
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let keep = (samples / 100).max(10).min(scored.len());
    let refined: Vec<Point64> = scored[..keep]
        .par_iter()
        .filter_map(|(_, y)| refine_sample(&pts, y, m))
        .collect();
    let mut out: Vec<Point64> = Vec::new();
    for p in refined {
        if !out.iter().any(|q| dist(q, &p) < 1e-8) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Groups the dots of `y` into `m` runs split at the largest gaps and solves
/// `x_i . z = c_g` for all `i` in group `g`.
fn refine_sample(pts: &[Point64], y: &[f64], m: usize) -> Option<Point64> {
    let dim = y.len();
    let mut idx: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(y).map(|(a, b)| a * b).sum(), i))
        .collect();
    idx.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut cuts: Vec<(f64, usize)> = idx.windows(2).enumerate().map(|(k, w)| (w[1].0 - w[0].0, k + 1)).collect();
    cuts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut bounds: Vec<usize> = cuts.iter().take(m - 1).map(|c| c.1).collect();
    bounds.sort();
    let mut group = vec![0; pts.len()];
    let mut g = 0;
    for (pos, &(_, i)) in idx.iter().enumerate() {
        while g < bounds.len() && pos >= bounds[g] {
            g += 1;
        }
        group[i] = g;
    }
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = p.clone();
            r.extend((0..m).map(|k| if group[i] == k { -1.0 } else { 0.0 }));
            r
        })
        .collect();
    let kernel = nullspace(&rows, dim + m);
    if kernel.len() != 1 {
        return None;
    }
    let z = &kernel[0][..dim];
    let l = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if l < FLOAT_TOL {
        return None;
    }
    let mut z: Vec<f64> = z.iter().map(|x| x / l).collect();
    if z.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        z.iter_mut().for_each(|x| *x = -*x);
    }
    let t: Vec<f64> = pts.iter().map(|p| p.iter().zip(&z).map(|(a, b)| a * b).sum()).collect();
    (cluster_values(&t, FLOAT_TOL).len() <= m && dist(&z, y) < 0.2).then_some(z)
}

/// Largest count of distinct dot values one point forms with the code, as a
/// convenience for reports.
pub fn distinct_dots(code: &Code, z: &[f64], tol: f64) -> usize {
    let t: Vec<f64> = code.unit_points().iter().map(|p| p.iter().zip(z).map(|(a, b)| a * b).sum()).collect();
    cluster_values(&t, tol).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cross_polytope, cube, demicube, e8_roots, ngon, polytope_2_41, Parity};
    use crate::exact::{normalize_surd, rat};

    fn signed_basis(d: usize) -> BTreeSet<ExactPoint> {
        cross_polytope(d)
            .unwrap()
            .points
            .iter()
            .map(|p| ExactPoint::from_lattice(p, 1))
            .collect()
    }

    fn exact_set(r: &DualResult) -> BTreeSet<ExactPoint> {
        r.exact_points().unwrap().into_iter().collect()
    }

    #[test]
    fn demicube_dual_is_cross_polytope() {
        for d in 5..=7 {
            let c: Code = demicube(d, Parity::Even).unwrap().into();
            let r = dual_search(&c, 2, Mode::Auto, None).unwrap();
            assert!(r.exact && r.complete);
            assert_eq!(exact_set(&r), signed_basis(d), "d={d}");
        }
    }

    #[test]
    fn cross_polytope_dual_is_cube() {
        for d in 2..=6 {
            let r = dual_search(&cross_polytope(d).unwrap().into(), 2, Mode::Auto, None).unwrap();
            let cube: BTreeSet<ExactPoint> = cube(d)
                .unwrap()
                .points
                .iter()
                .map(|p| ExactPoint::from_lattice(p, d as i64))
                .collect();
            assert_eq!(exact_set(&r), cube);
        }
    }

    #[test]
    fn float_mode_agrees_and_upgrades() {
        let c: Code = demicube(5, Parity::Even).unwrap().into();
        let exact = dual_search(&c, 2, Mode::Exact, None).unwrap();
        let float = dual_search(&c, 2, Mode::Float, None).unwrap();
        assert!(!float.exact);
        assert_eq!(exact_set(&exact), exact_set(&float));
    }

    #[test]
    fn dual_of_2_41_with_e8_dot_nodes() {
        let a = Surd::inv_sqrt(2);
        let b = normalize_surd(rat(1, 4), 2);
        let nodes = [-a.clone(), -b.clone(), Surd::zero(), b, a];
        let r = dual_search(&polytope_2_41().into(), 5, Mode::Auto, Some(&nodes)).unwrap();
        assert_eq!(r.points.len(), 240);
        let roots: BTreeSet<ExactPoint> = e8_roots().points.iter().map(|p| ExactPoint::from_lattice(p, 8)).collect();
        assert_eq!(exact_set(&r), roots);
    }

    #[test]
    fn certificates() {
        for d in 5..=7 {
            let c: Code = demicube(d, Parity::Even).unwrap().into();
            let cert = certify_stiff(&c, 2, Mode::Auto, None).unwrap();
            assert!(cert.stiff);
            assert_eq!(cert.design_strength, 3);
            let half = 1 << (d - 2);
            assert!(cert.frequency_table.iter().all(|r| r == &vec![half, half]));
            assert_eq!(cert.frequencies_ok, Some(true));
            assert!(cert.consistent());
            assert!(cert.properties.general_position);
        }
        let cube3 = certify_stiff(&cube(3).unwrap().into(), 2, Mode::Auto, None).unwrap();
        assert!(cube3.stiff);
        assert_eq!(exact_set(&cube3.dual), signed_basis(3));
        let c241 = certify_stiff(&polytope_2_41().into(), 4, Mode::Auto, None).unwrap();
        assert!(c241.design_strength >= 7);
        assert!(c241.dual.points.is_empty());
        assert!(!c241.stiff);
    }

    #[test]
    fn triple_dual_identity() {
        let mut codes: Vec<Code> = vec![demicube(5, Parity::Even).unwrap().into()];
        codes.extend((2..=6).map(|d| cross_polytope(d).unwrap().into()));
        for c in codes {
            let d1 = dual_search(&c, 2, Mode::Auto, None).unwrap();
            let c1 = d1.to_code("d1").unwrap();
            let d2 = dual_search(&c1, 2, Mode::Auto, None).unwrap();
            let c2 = d2.to_code("d2").unwrap();
            let d3 = dual_search(&c2, 2, Mode::Auto, None).unwrap();
            assert_eq!(exact_set(&d1), exact_set(&d3), "{}", c.name());
            // code is inside its double dual
            let inside: BTreeSet<ExactPoint> = exact_set(&d2);
            let cl = c.as_lattice().unwrap();
            assert!((0..cl.len()).all(|i| inside.contains(&cl.exact_point(i))));
        }
    }

    #[test]
    fn structural_errors() {
        let flat = LatticeCode::new("sq", 3, 1, vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0]]).unwrap();
        assert!(matches!(
            dual_search(&flat.clone().into(), 2, Mode::Auto, None),
            Err(Error::NotInGeneralPosition { rank: 2, dim: 3 })
        ));
        let r = dual_search(&flat.into(), 1, Mode::Auto, None).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.points[1].coords, vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            dual_search(&polytope_2_41().into(), 9, Mode::Auto, None),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn one_stiff_examples() {
        let axis: Code = LatticeCode::new("e1", 3, 1, vec![vec![1, 0, 0], vec![-1, 0, 0]]).unwrap().into();
        assert!(is_1stiff(&axis).holds);
        let circle = dual_1stiff(&axis).unwrap();
        assert_eq!(circle.complement_dim, 2);
        assert!(circle.pair.is_none());
        for b in &circle.basis {
            assert!(b[0].abs() < 1e-15);
        }
        assert!(!is_1stiff(&cube(3).unwrap().into()).holds);
        let sq: Code = LatticeCode::new("sq", 3, 1, vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0]])
            .unwrap()
            .into();
        let info = is_1stiff(&sq);
        assert!(info.holds);
        assert_eq!(info.witness, Some(vec!["0".into(), "0".into(), "1".into()]));
        let pair = dual_1stiff(&sq).unwrap().pair.unwrap();
        let e3 = ExactPoint::from_lattice(&[0, 0, 1], 1);
        assert_eq!(pair[1].exact.as_ref(), Some(&e3));
        assert_eq!(pair[0].exact.as_ref(), Some(&e3.neg()));
        assert!(dual_1stiff(&cube(3).unwrap().into()).is_err());
        let hex: Code = ngon(6).unwrap().into();
        assert!(!is_1stiff(&hex).holds);
    }

    #[test]
    fn sharpness() {
        let s = classify_sharp(&demicube(5, Parity::Even).unwrap());
        assert_eq!((s.inner_dot_count, s.sharp, s.strongly_sharp), (2, true, false));
        let s = classify_sharp(&demicube(3, Parity::Even).unwrap());
        assert_eq!((s.inner_dot_count, s.sharp, s.strongly_sharp), (1, true, true));
        let s = classify_sharp(&cube(5).unwrap());
        assert_eq!((s.inner_dot_count, s.sharp), (5, false));
        let s = classify_sharp(&e8_roots());
        assert!(s.sharp);
    }

    #[test]
    fn sampling_oracle_matches_on_small_codes() {
        for c in [cube(3).unwrap(), cross_polytope(3).unwrap()] {
            let c: Code = c.into();
            let exact = dual_search(&c, 2, Mode::Auto, None).unwrap().float_points();
            let sampled = sampled_dual_s2(&c, 2, 20_000).unwrap();
            assert_eq!(sampled.len(), exact.len(), "{}", c.name());
            for (a, b) in sampled.iter().zip(&exact) {
                assert!(dist(a, b) < 1e-8);
            }
        }
    }

    #[test]
    fn bareiss_matches_rational_determinant() {
        let a = vec![vec![2i128, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(bareiss_det(&a), Some(18));
        let p = vec![vec![0i128, 1], vec![1, 0]];
        assert_eq!(bareiss_det(&p), Some(-1));
        assert_eq!(bareiss_det(&[vec![1i128, 2], vec![2, 4]]), None);
    }
}

//! Point configurations on spheres: exact constructors and JSON ingestion.

use std::collections::HashSet;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::config::caps;
use crate::error::{Error, Result};
use crate::exact::{rat, square_free_split, ExactPoint};
use crate::Rational;

/// Points stored as integer vectors sharing one squared norm; the unit point
/// is `v / sqrt(norm_sq)`, so within-code dot products are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCode {
    pub name: String,
    pub ambient_dim: usize,
    pub points: Vec<Vec<i64>>,
    pub norm_sq: i64,
    pub exact: bool,
}

/// Points with floating coordinates, each of unit length within `tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatCode {
    pub name: String,
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Code {
    Lattice(LatticeCode),
    Float(FloatCode),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

fn check_cap(n: u128) -> Result<()> {
    let cap = caps().size;
    if n > cap {
        return Err(Error::SizeCap {
            requested: n,
            cap,
        });
    }
    Ok(())
}

impl LatticeCode {
    /// Validated code; points keep the given order.
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        norm_sq: i64,
        points: Vec<Vec<i64>>,
    ) -> Result<LatticeCode> {
        if ambient_dim == 0 {
            return Err(Error::MalformedCode("ambient_dim must be positive".into()));
        }
        if norm_sq <= 0 {
            return Err(Error::MalformedCode("norm_sq must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::MalformedCode("no points".into()));
        }
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(Error::MalformedCode(format!(
                    "point {i} has {} coordinates, expected {ambient_dim}",
                    p.len()
                )));
            }
            let n: i128 = p.iter().map(|&x| x as i128 * x as i128).sum();
            if n != norm_sq as i128 {
                return Err(Error::NormMismatch {
                    index: i,
                    found: n.to_string(),
                    expected: norm_sq.to_string(),
                });
            }
            if let Some(j) = seen.insert(p.as_slice(), i) {
                return Err(Error::DuplicatePoint(j, i));
            }
        }
        Ok(LatticeCode {
            name: name.into(),
            ambient_dim,
            points,
            norm_sq,
            exact: true,
        })
    }

    fn build(name: String, dim: usize, norm_sq: i64, mut points: Vec<Vec<i64>>) -> LatticeCode {
        points.sort();
        LatticeCode::new(name, dim, norm_sq, points).expect("constructor produced an invalid code")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `d` for a code on `S^d`.
    pub fn sphere_dim(&self) -> usize {
        self.ambient_dim - 1
    }

    pub fn int_dot(&self, i: usize, j: usize) -> i64 {
        int_dot(&self.points[i], &self.points[j])
    }

    /// Exact unit dot product of points `i` and `j`.
    pub fn unit_dot(&self, i: usize, j: usize) -> Rational {
        rat(self.int_dot(i, j), self.norm_sq)
    }

    pub fn exact_point(&self, i: usize) -> ExactPoint {
        ExactPoint::from_lattice(&self.points[i], self.norm_sq)
    }

    pub fn unit_points(&self) -> Vec<Vec<f64>> {
        let s = (self.norm_sq as f64).sqrt();
        self.points
            .iter()
            .map(|p| p.iter().map(|&x| x as f64 / s).collect())
            .collect()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.points.iter().any(|p| p == v)
    }

    /// Same points as unit vectors.
    pub fn to_float(&self) -> FloatCode {
        FloatCode {
            name: self.name.clone(),
            ambient_dim: self.ambient_dim,
            points: self.unit_points(),
            tolerance: 1e-12,
        }
    }

    /// Points as a set, for order-insensitive comparisons.
    pub fn point_set(&self) -> HashSet<Vec<i64>> {
        self.points.iter().cloned().collect()
    }
}

pub fn int_dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl FloatCode {
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        points: Vec<Vec<f64>>,
        tolerance: f64,
    ) -> Result<FloatCode> {
        if ambient_dim == 0 || points.is_empty() {
            return Err(Error::MalformedCode("empty code".into()));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::MalformedCode("tolerance must be positive".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(Error::MalformedCode(format!(
                    "point {i} has {} coordinates, expected {ambient_dim}",
                    p.len()
                )));
            }
            let n: f64 = p.iter().map(|x| x * x).sum();
            if (n - 1.0).abs() > tolerance {
                return Err(Error::NormMismatch {
                    index: i,
                    found: n.to_string(),
                    expected: "1".into(),
                });
            }
        }
        let sep = tolerance.max(1e-12).sqrt() * 1e-3;
        for i in 0..points.len() {
            for j in 0..i {
                if dist(&points[i], &points[j]) <= sep {
                    return Err(Error::DuplicatePoint(j, i));
                }
            }
        }
        Ok(FloatCode {
            name: name.into(),
            ambient_dim,
            points,
            tolerance,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sphere_dim(&self) -> usize {
        self.ambient_dim - 1
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Code {
    pub fn name(&self) -> &str {
        match self {
            Code::Lattice(c) => &c.name,
            Code::Float(c) => &c.name,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Code::Lattice(c) => c.ambient_dim,
            Code::Float(c) => c.ambient_dim,
        }
    }

    pub fn sphere_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    pub fn len(&self) -> usize {
        match self {
            Code::Lattice(c) => c.len(),
            Code::Float(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Code::Lattice(c) if c.exact)
    }

    pub fn unit_points(&self) -> Vec<Vec<f64>> {
        match self {
            Code::Lattice(c) => c.unit_points(),
            Code::Float(c) => c.points.clone(),
        }
    }

    pub fn as_lattice(&self) -> Option<&LatticeCode> {
        match self {
            Code::Lattice(c) => Some(c),
            Code::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> FloatCode {
        match self {
            Code::Lattice(c) => c.to_float(),
            Code::Float(c) => c.clone(),
        }
    }
}

impl From<LatticeCode> for Code {
    fn from(c: LatticeCode) -> Code {
        Code::Lattice(c)
    }
}

impl From<FloatCode> for Code {
    fn from(c: FloatCode) -> Code {
        Code::Float(c)
    }
}

/// `+-e_i` in `R^d` (a code on `S^{d-1}`).
pub fn cross_polytope(d: usize) -> Result<LatticeCode> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("cross_polytope needs d >= 2, got {d}")));
    }
    check_cap(2 * d as u128)?;
    let mut pts = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1, -1] {
            let mut v = vec![0; d];
            v[i] = s;
            pts.push(v);
        }
    }
    Ok(LatticeCode::build(format!("cross_polytope({d})"), d, 1, pts))
}

fn sign_vectors(d: usize, keep: impl Fn(u32) -> bool) -> Vec<Vec<i64>> {
    (0u64..1 << d)
        .filter(|mask| keep(mask.count_ones()))
        .map(|mask| {
            (0..d)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

/// All `(+-1, ..., +-1)` in `R^d`.
pub fn cube(d: usize) -> Result<LatticeCode> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("cube needs d >= 2, got {d}")));
    }
    if d >= 64 {
        return Err(Error::SizeCap {
            requested: u128::MAX,
            cap: caps().size,
        });
    }
    check_cap(1u128 << d)?;
    Ok(LatticeCode::build(
        format!("cube({d})"),
        d,
        d as i64,
        sign_vectors(d, |_| true),
    ))
}

/// Sign vectors with an even (or odd) number of minus signs.
pub fn demicube(d: usize, parity: Parity) -> Result<LatticeCode> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("demicube needs d >= 2, got {d}")));
    }
    if d >= 64 {
        return Err(Error::SizeCap {
            requested: u128::MAX,
            cap: caps().size,
        });
    }
    check_cap(1u128 << (d - 1))?;
    let want = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let tag = match parity {
        Parity::Even => "even",
        Parity::Odd => "odd",
    };
    Ok(LatticeCode::build(
        format!("demicube({d},{tag})"),
        d,
        d as i64,
        sign_vectors(d, |neg| neg % 2 == want),
    ))
}

/// Places `vals` on every `k`-subset of positions in `R^8`.
fn placed(k: usize, vals: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for mask in 0u32..256 {
        if mask.count_ones() as usize != k {
            continue;
        }
        let pos: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
        for signs in 0u32..1 << k {
            let mut v = vec![0; 8];
            for (j, &p) in pos.iter().enumerate() {
                v[p] = if signs >> j & 1 == 1 { -vals[j] } else { vals[j] };
            }
            out.push(v);
        }
    }
    out
}

/// The 240 minimal vectors of E8, scaled by `2 sqrt 2`: permutations of
/// `(+-2, +-2, 0^6)` and `(+-1)^8` with an even number of minus signs.
pub fn e8_roots() -> LatticeCode {
    let mut pts = placed(2, &[2, 2]);
    pts.extend(sign_vectors(8, |neg| neg % 2 == 0));
    LatticeCode::build("e8_roots".into(), 8, 8, pts)
}

/// The 2160 vertices of the 2_41 polytope, scaled by 4.
pub fn polytope_2_41() -> LatticeCode {
    // type I: four coordinates +-2
    let mut pts = placed(4, &[2, 2, 2, 2]);
    // type II: one coordinate +-4
    pts.extend(placed(1, &[4]));
    // type III: seven +-1 and one +-3, odd number of negative coordinates
    for big in 0..8 {
        for v in sign_vectors(8, |neg| neg % 2 == 1) {
            let mut v = v;
            v[big] *= 3;
            pts.push(v);
        }
    }
    LatticeCode::build("polytope_2_41".into(), 8, 16, pts)
}

/// Regular `n`-gon `(cos 2 pi k / n, sin 2 pi k / n)` on `S^1`.
pub fn ngon(n: usize) -> Result<FloatCode> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("ngon needs n >= 2, got {n}")));
    }
    let pts = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    FloatCode::new(format!("ngon({n})"), 2, pts, 1e-12)
}

/// Packs unit exact points into one lattice code when they admit a common
/// integer scaling, otherwise into a float code.
pub fn code_from_exact_points(name: impl Into<String>, points: &[ExactPoint]) -> Result<Code> {
    let name = name.into();
    let Some(first) = points.first() else {
        return Err(Error::MalformedCode("no points".into()));
    };
    let dim = first.dim();
    let lattice = (|| {
        let mut parts = Vec::with_capacity(points.len());
        for p in points {
            parts.push(p.to_lattice()?);
        }
        // n_i = s_i^2 f with a shared square-free part f
        let mut f = None;
        let mut l = BigInt::from(1);
        let mut roots = Vec::with_capacity(parts.len());
        for (_, n) in &parts {
            let (s, fi) = square_free_split(n.to_u64()?);
            if *f.get_or_insert(fi) != fi {
                return None;
            }
            l = l.lcm(&BigInt::from(s));
            roots.push(BigInt::from(s));
        }
        let f = BigInt::from(f?);
        let norm = (&l * &l * &f).to_i64()?;
        let mut pts = Vec::with_capacity(parts.len());
        for ((v, _), s) in parts.iter().zip(&roots) {
            let k = &l / s;
            pts.push(v.iter().map(|x| (x * &k).to_i64()).collect::<Option<Vec<_>>>()?);
        }
        Some((norm, pts))
    })();
    match lattice {
        Some((norm, pts)) => Ok(Code::Lattice(LatticeCode::new(name, dim, norm, pts)?)),
        None => Ok(Code::Float(FloatCode::new(
            name,
            dim,
            points.iter().map(ExactPoint::to_f64).collect(),
            1e-12,
        )?)),
    }
}

#[derive(Serialize, Deserialize, Debug, Default)]
struct CodeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ambient_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm_sq: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points_decimal: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

/// Parses a code from its JSON text.
pub fn parse_code(text: &str) -> Result<Code> {
    let f: CodeFile = serde_json::from_str(text)?;
    match (f.points, f.points_decimal) {
        (Some(points), None) => {
            let dim = f
                .ambient_dim
                .or_else(|| points.first().map(Vec::len))
                .unwrap_or(0);
            let norm = f
                .norm_sq
                .ok_or_else(|| Error::MalformedCode("exact code without norm_sq".into()))?;
            Ok(Code::Lattice(LatticeCode::new(
                f.name.unwrap_or_else(|| "loaded".into()),
                dim,
                norm,
                points,
            )?))
        }
        (None, Some(points)) => {
            let dim = f
                .ambient_dim
                .or_else(|| points.first().map(Vec::len))
                .unwrap_or(0);
            Ok(Code::Float(FloatCode::new(
                f.name.unwrap_or_else(|| "loaded".into()),
                dim,
                points,
                f.tolerance.unwrap_or(1e-9),
            )?))
        }
        (Some(_), Some(_)) => Err(Error::MalformedCode(
            "both points and points_decimal present".into(),
        )),
        (None, None) => Err(Error::MalformedCode("no points".into())),
    }
}

pub fn load_code(path: impl AsRef<Path>) -> Result<Code> {
    parse_code(&std::fs::read_to_string(path)?)
}

/// JSON text of a code in the same schema `load_code` reads.
fn code_file(code: &Code) -> CodeFile {
    match code {
        Code::Lattice(c) => CodeFile {
            name: Some(c.name.clone()),
            ambient_dim: Some(c.ambient_dim),
            norm_sq: Some(c.norm_sq),
            points: Some(c.points.clone()),
            ..Default::default()
        },
        Code::Float(c) => CodeFile {
            name: Some(c.name.clone()),
            ambient_dim: Some(c.ambient_dim),
            points_decimal: Some(c.points.clone()),
            tolerance: Some(c.tolerance),
            ..Default::default()
        },
    }
}

pub fn code_to_json(code: &Code) -> Result<String> {
    Ok(serde_json::to_string_pretty(&code_file(code))?)
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        code_file(self).serialize(s)
    }
}

pub fn save_code(code: &Code, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, code_to_json(code)?)?;
    Ok(())
}

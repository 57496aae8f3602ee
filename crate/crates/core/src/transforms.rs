//! Constructions on codes: symmetrization, facets, gluing and the
//! rotated-cubes family.

use std::collections::HashSet;

use num_integer::Roots;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{code_from_exact_points, cube, Code, FloatCode, LatticeCode};
use crate::design::{cluster_values, index_set, DesignReport};
use crate::error::{Error, Result};
use crate::exact::{rat, rint, ExactPoint, Surd};
use crate::potential::random_unit;
use crate::stiffness::{certify_stiff, dual_search, is_1stiff, DualPoint, Mode, StiffnessCertificate};
use crate::{Point64, Rational};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `code` together with its negatives; rejects codes holding an antipodal
/// pair.
pub fn symmetrize(code: &Code) -> Result<Code> {
    match code {
        Code::Lattice(c) => {
            let set: HashSet<&Vec<i64>> = c.points.iter().collect();
            for (i, p) in c.points.iter().enumerate() {
                let n: Vec<i64> = p.iter().map(|x| -x).collect();
                if set.contains(&n) {
                    let j = c.points.iter().position(|q| *q == n).unwrap();
                    return Err(Error::AntipodalPair(i.min(j), i.max(j)));
                }
            }
            let mut pts = c.points.clone();
            pts.extend(c.points.iter().map(|p| p.iter().map(|x| -x).collect::<Vec<_>>()));
            Ok(Code::Lattice(LatticeCode::new(
                format!("sym({})", c.name),
                c.ambient_dim,
                c.norm_sq,
                pts,
            )?))
        }
        Code::Float(c) => {
            for (i, p) in c.points.iter().enumerate() {
                let n: Vec<f64> = p.iter().map(|x| -x).collect();
                if let Some(j) = c.points.iter().position(|q| dist(q, &n) < 1e-9) {
                    return Err(Error::AntipodalPair(i.min(j), i.max(j)));
                }
            }
            let mut pts = c.points.clone();
            pts.extend(c.points.iter().map(|p| p.iter().map(|x| -x).collect::<Vec<_>>()));
            Ok(Code::Float(FloatCode::new(
                format!("sym({})", c.name),
                c.ambient_dim,
                pts,
                c.tolerance,
            )?))
        }
    }
}

/// The points `y` with `x . y = t`, moved to `(y - t x) / sqrt(1 - t^2)` and
/// written in coordinates of the hyperplane `x^perp`.
///
/// A Householder reflection taking `x` to a signed basis vector supplies the
/// coordinates; it is rational when `x` is, which keeps lattice codes whose
/// squared norm is a perfect square exact.
pub fn facet_derive(code: &Code, x: usize, t: &Surd) -> Result<Code> {
    if x >= code.len() {
        return Err(Error::InvalidArgument(format!("no point {x} in {}", code.name())));
    }
    if t.abs() >= Surd::one() {
        return Err(Error::InvalidArgument(format!("t = {t} must lie strictly inside (-1, 1)")));
    }
    let name = format!("facet({}, {x}, {t})", code.name());
    if let (Code::Lattice(c), Some(tq)) = (code, t.as_rational()) {
        let root = (c.norm_sq as u64).sqrt();
        if root * root == c.norm_sq as u64 {
            return facet_exact(c, x, tq, root as i64, name);
        }
    }
    let pts = code.unit_points();
    let tf = t.to_f64();
    let tol = match code {
        Code::Float(c) => c.tolerance.max(1e-9),
        Code::Lattice(_) => 1e-12,
    };
    let xv = &pts[x];
    let chosen: Vec<&Point64> = pts.iter().filter(|y| (dot(xv, y) - tf).abs() <= tol).collect();
    if chosen.is_empty() {
        return Err(Error::Precondition(format!("t = {t} is not attained at point {x}")));
    }
    let (k, s) = householder_target(xv.iter().copied());
    let mut w = xv.clone();
    w[k] -= s;
    let ww = dot(&w, &w);
    let scale = (1.0 - tf * tf).sqrt();
    let derived: Vec<Point64> = chosen
        .iter()
        .map(|y| {
            let u: Vec<f64> = y.iter().zip(xv).map(|(a, b)| (a - tf * b) / scale).collect();
            let c = 2.0 * dot(&w, &u) / ww;
            u.iter()
                .zip(&w)
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, (a, b))| a - c * b)
                .collect()
        })
        .collect();
    Ok(Code::Float(FloatCode::new(name, code.ambient_dim() - 1, derived, 1e-9)?))
}

/// Coordinate of largest magnitude and the sign sending `x` away from it.
fn householder_target(x: impl Iterator<Item = f64>) -> (usize, f64) {
    let (k, v) = x
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    (k, if v > 0.0 { -1.0 } else { 1.0 })
}

fn facet_exact(c: &LatticeCode, x: usize, t: &Rational, root: i64, name: String) -> Result<Code> {
    let xv: Vec<Rational> = c.points[x].iter().map(|&a| rat(a, root)).collect();
    let chosen: Vec<&Vec<i64>> = c
        .points
        .iter()
        .filter(|y| rat(crate::codes::int_dot(&c.points[x], y), c.norm_sq) == *t)
        .collect();
    if chosen.is_empty() {
        return Err(Error::Precondition(format!("t = {t} is not attained at point {x}")));
    }
    let (k, s) = householder_target(xv.iter().map(|v| v.to_f64().unwrap()));
    let mut w = xv.clone();
    w[k] -= rint(s as i64);
    let ww: Rational = w.iter().map(|a| a * a).sum();
    // derived = H u / sqrt(1 - t^2) with u = y - t x rational
    let q = Rational::from_integer(1.into()) - t * t;
    let qr = q.numer() * q.denom();
    let radicand = qr.to_u64().ok_or(Error::Overflow)?;
    let inv = Rational::from_integer(q.numer().clone());
    let pts: Vec<ExactPoint> = chosen
        .iter()
        .map(|y| {
            let u: Vec<Rational> = y
                .iter()
                .zip(&xv)
                .map(|(&a, b)| rat(a, root) - t * b)
                .collect();
            let c = rint(2) * u.iter().zip(&w).map(|(a, b)| a * b).sum::<Rational>() / &ww;
            let hu: Vec<Rational> = u
                .iter()
                .zip(&w)
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, (a, b))| (a - &c * b) / &inv)
                .collect();
            ExactPoint::new(radicand, hu)
        })
        .collect();
    debug_assert!(pts.iter().all(ExactPoint::is_unit));
    code_from_exact_points(name, &pts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlueResult {
    pub code: Code,
    pub certificate: StiffnessCertificate,
    pub z1: Point64,
    pub z2: Point64,
    /// Reflection normal `a` orthogonal to `z2`.
    pub axis: Point64,
    pub attempts: usize,
    /// Whether `z2` is among the certified dual points of the union.
    pub z2_in_dual: bool,
}

const GLUE_RETRIES: usize = 64;

fn reflect(y: &[f64], u: &[f64]) -> Point64 {
    let c = 2.0 * dot(y, u);
    y.iter().zip(u).map(|(a, b)| a - c * b).collect()
}

/// Union of a reflected copy of `code1` with `code2`, arranged so that a
/// dual point of each coincides; the union is again m-stiff.
pub fn glue(code1: &Code, code2: &Code, m: u32, seed: u64) -> Result<GlueResult> {
    let dim = code1.ambient_dim();
    if dim != code2.ambient_dim() {
        return Err(Error::InvalidArgument("codes live on different spheres".into()));
    }
    if dim < 3 {
        return Err(Error::Precondition("gluing needs d >= 2".into()));
    }
    let c1 = certify_stiff(code1, m, Mode::Auto, None)?;
    let c2 = certify_stiff(code2, m, Mode::Auto, None)?;
    for c in [&c1, &c2] {
        if !c.stiff {
            return Err(Error::Precondition(format!("{} is not {m}-stiff", c.code)));
        }
    }
    let z1 = c1.dual.points[0].coords.clone();
    let mut z2 = c2.dual.points[0].coords.clone();
    if dist(&z1, &z2) < 1e-12 {
        z2.iter_mut().for_each(|x| *x = -*x);
    }
    let diff: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a - b).collect();
    let dn = dot(&diff, &diff).sqrt();
    let u: Vec<f64> = diff.iter().map(|x| x / dn).collect();
    let moved: Vec<Point64> = code1.unit_points().iter().map(|y| reflect(y, &u)).collect();
    let pts2 = code2.unit_points();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=GLUE_RETRIES {
        let r = random_unit(&mut rng, dim);
        let c = dot(&r, &z2);
        let a: Vec<f64> = r.iter().zip(&z2).map(|(x, z)| x - c * z).collect();
        let an = dot(&a, &a).sqrt();
        if an < 1e-6 {
            continue;
        }
        let a: Vec<f64> = a.iter().map(|x| x / an).collect();
        if pts2.iter().any(|w| dot(&a, w).abs() < 1e-6) {
            continue;
        }
        let image: Vec<Point64> = moved.iter().map(|y| reflect(y, &a)).collect();
        if image.iter().any(|v| pts2.iter().any(|w| dist(v, w) < 1e-6)) {
            continue;
        }
        let mut pts = image;
        pts.extend(pts2.iter().cloned());
        let glued = Code::Float(FloatCode::new(
            format!("glue({}, {})", code1.name(), code2.name()),
            dim,
            pts,
            1e-9,
        )?);
        let certificate = certify_stiff(&glued, m, Mode::Float, None)?;
        let z2_in_dual = certificate.dual.points.iter().any(|p| dist(&p.coords, &z2) < 1e-8);
        return Ok(GlueResult {
            code: glued,
            certificate,
            z1,
            z2,
            axis: a,
            attempts: attempt,
            z2_in_dual,
        });
    }
    Err(Error::RetriesExhausted(GLUE_RETRIES))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotatedCubes {
    pub code: Code,
    pub design: DesignReport,
    pub certificate: StiffnessCertificate,
    /// Exact dual coordinates recognized from the float search.
    pub dual_exact: Option<Vec<Vec<String>>>,
    pub dual_general_position: bool,
    pub dual_1stiff: bool,
}

/// `n` copies of the inscribed cube of `S^2` rotated about the vertical axis
/// by `pi k / (2n)`.
pub fn rotated_cubes(n: usize) -> Result<RotatedCubes> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one cube".into()));
    }
    let base = cube(3)?;
    let code = if n == 1 {
        Code::Lattice(base)
    } else {
        let s = 1.0 / 3f64.sqrt();
        let pts: Vec<Point64> = (0..n)
            .flat_map(|k| {
                let a = std::f64::consts::PI * k as f64 / (2 * n) as f64;
                let (sn, cs) = a.sin_cos();
                base.points
                    .iter()
                    .map(move |p| {
                        let (x, y, z) = (p[0] as f64 * s, p[1] as f64 * s, p[2] as f64 * s);
                        vec![cs * x - sn * y, sn * x + cs * y, z]
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Code::Float(FloatCode::new(format!("rotated_cubes({n})"), 3, pts, 1e-12)?)
    };
    let design = index_set(&code, 4);
    let certificate = certify_stiff(&code, 2, Mode::Auto, None)?;
    let dual_exact = certificate
        .dual
        .points
        .iter()
        .map(|p| p.exact.as_ref().map(ExactPoint::render))
        .collect();
    let dual_code = certificate.dual.to_code("dual")?;
    Ok(RotatedCubes {
        dual_general_position: certificate.properties.general_position,
        dual_1stiff: is_1stiff(&dual_code).holds,
        code,
        design,
        certificate,
        dual_exact,
    })
}

/// Sum of the `N - m` smallest gaps between sorted dot products; zero exactly
/// when at most `m` values occur.
pub fn gap_cost(points: &[Point64], y: &[f64], m: usize) -> f64 {
    let mut t: Vec<f64> = points.iter().map(|p| dot(p, y)).collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut g: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g[..points.len().saturating_sub(m)].iter().sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleDual {
    pub m: usize,
    pub resolution: usize,
    pub points: Vec<Point64>,
    pub angles: Vec<f64>,
    /// Smallest gap cost found over the scan.
    pub best_cost: f64,
}

/// Dual of a code on `S^1` by an angular scan at `resolution` steps, golden
/// section refinement of every local minimum of the gap cost, and a final
/// test for at most `m` distinct dot products within `tol`.
pub fn circle_dual(code: &Code, m: usize, resolution: usize, tol: f64) -> Result<CircleDual> {
    if code.ambient_dim() != 2 {
        return Err(Error::InvalidArgument("circle scan needs a code on S^1".into()));
    }
    if code.len() <= m {
        return Err(Error::InvalidArgument("code has at most m points".into()));
    }
    let pts = code.unit_points();
    let step = std::f64::consts::TAU / resolution as f64;
    let at = |a: f64| gap_cost(&pts, &[a.cos(), a.sin()], m);
    let costs: Vec<f64> = (0..resolution).into_par_iter().map(|k| at(k as f64 * step)).collect();
    let mut points: Vec<Point64> = Vec::new();
    let mut angles = Vec::new();
    let mut best = f64::INFINITY;
    for k in 0..resolution {
        let prev = costs[(k + resolution - 1) % resolution];
        let next = costs[(k + 1) % resolution];
        if costs[k] > prev || costs[k] > next {
            continue;
        }
        let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fa, mut fb) = (at(a), at(b));
        while hi - lo > 1e-13 {
            if fa <= fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = at(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = at(b);
            }
        }
        let theta = (0.5 * (lo + hi)).rem_euclid(std::f64::consts::TAU);
        let y = vec![theta.cos(), theta.sin()];
        best = best.min(at(theta));
        let t: Vec<f64> = pts.iter().map(|p| dot(p, &y)).collect();
        if cluster_values(&t, tol).len() <= m && !points.iter().any(|q| dist(q, &y) < 1e-8) {
            points.push(y);
            angles.push(theta);
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| angles[i].partial_cmp(&angles[j]).unwrap());
    Ok(CircleDual {
        m,
        resolution,
        points: order.iter().map(|&i| points[i].clone()).collect(),
        angles: order.iter().map(|&i| angles[i]).collect(),
        best_cost: best,
    })
}

/// Same dual point sets, compared exactly where both sides are exact.
pub fn dual_points_match(a: &[DualPoint], b: &[DualPoint]) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| {
            b.iter().any(|q| match (&p.exact, &q.exact) {
                (Some(x), Some(y)) if p.verified && q.verified => x == y,
                _ => dist(&p.coords, &q.coords) < 1e-9,
            })
        })
}

/// Dual of `symmetrize(code)` equals the dual of `code`.
pub fn symmetrization_keeps_dual(code: &Code, m: u32) -> Result<bool> {
    let a = dual_search(code, m, Mode::Auto, None)?;
    let b = dual_search(&symmetrize(code)?, m, Mode::Auto, None)?;
    Ok(dual_points_match(&a.points, &b.points))
}

/// Parent dot `u` mapped to the derived dot `(u - t^2) / (1 - t^2)`.
pub fn facet_dot(u: f64, t: f64) -> f64 {
    (u - t * t) / (1.0 - t * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cross_polytope, demicube, e8_roots, ngon, polytope_2_41, Parity};
    use crate::exact::normalize_surd;

    #[test]
    fn symmetrize_demicube_gives_cube() {
        for d in [3, 5] {
            let s = symmetrize(&demicube(d, Parity::Even).unwrap().into()).unwrap();
            let c = cube(d).unwrap();
            assert_eq!(s.as_lattice().unwrap().point_set(), c.point_set());
            assert_eq!(s.len(), 1 << d);
        }
        assert!(matches!(
            symmetrize(&cross_polytope(4).unwrap().into()),
            Err(Error::AntipodalPair(..))
        ));
        assert!(symmetrization_keeps_dual(&demicube(5, Parity::Even).unwrap().into(), 2).unwrap());
    }

    #[test]
    fn facet_of_cross_polytope() {
        for d in 3..7 {
            let c: Code = cross_polytope(d).unwrap().into();
            let x = c.as_lattice().unwrap().points.iter().position(|p| p[0] == 1).unwrap();
            let f = facet_derive(&c, x, &Surd::zero()).unwrap();
            assert!(f.is_exact());
            assert_eq!(f.ambient_dim(), d - 1);
            assert_eq!(f.as_lattice().unwrap().point_set(), cross_polytope(d - 1).unwrap().point_set());
        }
    }

    #[test]
    fn facet_dots_follow_the_mobius_map() {
        // 2_41 has norm 16, so the exact path applies
        let c: Code = polytope_2_41().into();
        for t in [rat(1, 4), rat(-1, 2), rat(0, 1)] {
            let ts = Surd::rational(t.clone());
            let f = facet_derive(&c, 0, &ts).unwrap();
            assert!(f.is_exact(), "t = {t}");
            let parent: Vec<Point64> = {
                let pts = c.unit_points();
                let x = pts[0].clone();
                pts.into_iter().filter(|y| (dot(&x, y) - ts.to_f64()).abs() < 1e-12).collect()
            };
            assert_eq!(f.len(), parent.len());
            let mut want: Vec<f64> = Vec::new();
            for a in &parent {
                for b in &parent {
                    want.push(facet_dot(dot(a, b), ts.to_f64()));
                }
            }
            let got_pts = f.unit_points();
            let mut got: Vec<f64> = Vec::new();
            for a in &got_pts {
                assert!((dot(a, a) - 1.0).abs() < 1e-12);
                for b in &got_pts {
                    got.push(dot(a, b));
                }
            }
            let cw: Vec<f64> = cluster_values(&want, 1e-9).iter().map(|v| v.0).collect();
            let cg: Vec<f64> = cluster_values(&got, 1e-9).iter().map(|v| v.0).collect();
            assert_eq!(cw.len(), cg.len());
            for (a, b) in cw.iter().zip(&cg) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // E8 roots have norm 8: float path
        let e8: Code = e8_roots().into();
        let f = facet_derive(&e8, 0, &Surd::rational(rat(1, 2))).unwrap();
        assert!(!f.is_exact());
        assert_eq!(f.len(), 56);
        assert!(facet_derive(&e8, 0, &Surd::one()).is_err());
        assert!(facet_derive(&e8, 0, &normalize_surd(rat(1, 3), 1)).is_err());
    }

    #[test]
    fn glue_examples() {
        let c3: Code = cross_polytope(3).unwrap().into();
        let g = glue(&c3, &c3, 2, 1).unwrap();
        assert_eq!(g.code.len(), 12);
        assert!(g.certificate.design_strength >= 3);
        assert!(g.certificate.stiff);
        assert!(g.z2_in_dual);
        let g = glue(&demicube(5, Parity::Even).unwrap().into(), &cross_polytope(5).unwrap().into(), 2, 4).unwrap();
        assert_eq!(g.code.len(), 26);
        assert!(g.certificate.stiff && g.z2_in_dual);
        assert!(glue(&ngon(4).unwrap().into(), &ngon(4).unwrap().into(), 2, 1).is_err());
    }

    #[test]
    fn rotated_cubes_family() {
        let r = rotated_cubes(1).unwrap();
        assert_eq!(r.certificate.dual.points.len(), 6);
        for n in 2..=3 {
            let r = rotated_cubes(n).unwrap();
            assert_eq!(r.code.len(), 8 * n);
            assert!(r.design.strength >= 3);
            assert!(r.certificate.stiff);
            let e3 = ExactPoint::from_lattice(&[0, 0, 1], 1);
            let got: Vec<ExactPoint> = r.certificate.dual.points.iter().map(|p| p.exact.clone().unwrap()).collect();
            assert_eq!(got, vec![e3.neg(), e3]);
            assert!(!r.dual_general_position);
            assert!(r.dual_1stiff);
            let s = 1.0 / 3f64.sqrt();
            assert!(r.code.unit_points().iter().all(|p| (p[2].abs() - s).abs() < 1e-12));
        }
    }

    #[test]
    fn circle_duals() {
        for m in 2..=4 {
            let c: Code = ngon(2 * m).unwrap().into();
            let r = circle_dual(&c, m, 100_000, 1e-8).unwrap();
            assert_eq!(r.points.len(), 2 * m, "m={m}");
            for (k, a) in r.angles.iter().enumerate() {
                let want = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64;
                assert!((a - want).abs() < 1e-8);
            }
            let odd: Code = ngon(2 * m + 1).unwrap().into();
            assert!(circle_dual(&odd, m, 100_000, 1e-8).unwrap().points.is_empty());
        }
    }
}

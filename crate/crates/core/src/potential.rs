//! Kernels, potentials of codes, and multistart minimization on the sphere.

use std::fmt;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{Code, LatticeCode};
use crate::design::{exact_dots, index_set_exact};
use crate::error::{Error, Result};
use crate::exact::{rint, ExactPoint, Surd};
use crate::{Point64, RatPoly, Rational};

/// Potential kernel `g(t)` of the dot product `t = x . y`.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// `(2 - 2t)^(-s/2)`, i.e. `|x - y|^(-s)`.
    Riesz(f64),
    /// `exp(-rate (2 - 2t))`.
    Gauss(f64),
    /// `-ln(2 - 2t) + 2`.
    Log,
    Poly(RatPoly),
}

impl KernelSpec {
    /// Value, first and second derivative in `t`; `None` where the kernel is
    /// singular.
    pub fn eval<F: Float + FromPrimitive>(&self, t: F) -> Option<(F, F, F)> {
        let two = F::from_f64(2.0).unwrap();
        let u = two - two * t;
        match self {
            KernelSpec::Riesz(s) => {
                if u <= F::zero() {
                    return None;
                }
                let s = F::from_f64(*s).unwrap();
                let g = u.powf(-s / two);
                Some((g, s * g / u, s * (s + two) * g / (u * u)))
            }
            KernelSpec::Gauss(a) => {
                let a = F::from_f64(*a).unwrap();
                let g = (-a * u).exp();
                Some((g, two * a * g, two * two * a * a * g))
            }
            KernelSpec::Log => {
                if u <= F::zero() {
                    return None;
                }
                Some((two - u.ln(), two / u, two * two / (u * u)))
            }
            KernelSpec::Poly(p) => {
                let p0 = p.to_float::<F>();
                let p1 = p0.derivative();
                let p2 = p1.derivative();
                Some((p0.eval(&t), p1.eval(&t), p2.eval(&t)))
            }
        }
    }

    /// Kernels whose argmin set must coincide with the dual.
    pub fn strictly_convex(&self) -> bool {
        matches!(self, KernelSpec::Riesz(_) | KernelSpec::Gauss(_))
    }

    pub fn parse_list(s: &str) -> Result<Vec<KernelSpec>> {
        s.split(';')
            .flat_map(|part| {
                if part.starts_with("poly:") {
                    vec![part]
                } else {
                    part.split(',').collect()
                }
            })
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse())
            .collect()
    }
}

impl FromStr for KernelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown kernel {s:?}"));
        let (family, param) = s.split_once(':').unwrap_or((s, ""));
        let positive = |p: &str| -> Result<f64> {
            let v: Surd = p.parse().map_err(|_| bad())?;
            let v = v.to_f64();
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::InvalidArgument(format!("kernel parameter must be positive in {s:?}")))
            }
        };
        match family {
            "riesz" => Ok(KernelSpec::Riesz(positive(param)?)),
            "gauss" | "gaussian" => Ok(KernelSpec::Gauss(positive(param)?)),
            "log" if param.is_empty() => Ok(KernelSpec::Log),
            "poly" => Ok(KernelSpec::Poly(param.parse()?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Riesz(s) => write!(f, "riesz:{s}"),
            KernelSpec::Gauss(a) => write!(f, "gauss:{a}"),
            KernelSpec::Log => write!(f, "log"),
            KernelSpec::Poly(p) => {
                let c: Vec<String> = p.coeffs().iter().map(ToString::to_string).collect();
                write!(f, "poly:{}", c.join(","))
            }
        }
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Uniform point on the unit sphere of `R^dim`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Neumaier compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Potential of a fixed code under one kernel.
#[derive(Clone, Debug)]
pub struct Potential {
    dim: usize,
    points: Vec<Point64>,
    kernel: KernelSpec,
}

struct Local {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
    scale: f64,
}

impl Potential {
    pub fn new(code: &Code, kernel: &KernelSpec) -> Potential {
        Potential {
            dim: code.ambient_dim(),
            points: code.unit_points(),
            kernel: kernel.clone(),
        }
    }

    pub fn from_points(points: Vec<Point64>, kernel: &KernelSpec) -> Potential {
        Potential {
            dim: points.first().map_or(0, Vec::len),
            points,
            kernel: kernel.clone(),
        }
    }

    pub fn points(&self) -> &[Point64] {
        &self.points
    }

    /// `sum_i g(x . x_i)`; compensated once the code has 1000 points.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let terms: Option<Vec<f64>> = self
            .points
            .iter()
            .map(|p| self.kernel.eval(dot(x, p).min(1.0)).map(|e| e.0))
            .collect();
        let terms = terms.ok_or(Error::Singular)?;
        if terms.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(if terms.len() >= 1000 {
            compensated_sum(terms.into_iter())
        } else {
            terms.iter().sum()
        })
    }

    fn local(&self, x: &[f64]) -> Option<Local> {
        let n = self.dim;
        let mut value = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = vec![vec![0.0; n]; n];
        let mut scale = 0.0;
        for p in &self.points {
            let (g, g1, g2) = self.kernel.eval(dot(x, p).min(1.0))?;
            if !g.is_finite() || !g1.is_finite() || !g2.is_finite() {
                return None;
            }
            value += g;
            scale += g1.abs();
            for i in 0..n {
                grad[i] += g1 * p[i];
                for j in 0..=i {
                    hess[i][j] += g2 * p[i] * p[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                hess[j][i] = hess[i][j];
            }
        }
        Some(Local {
            value,
            grad,
            hess,
            scale,
        })
    }

    /// Gradient of the potential restricted to the sphere at `x`.
    pub fn tangent_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let l = self.local(x).ok_or(Error::Singular)?;
        let r = dot(x, &l.grad);
        Ok(l.grad.iter().zip(x).map(|(g, xi)| g - r * xi).collect())
    }

    /// Riemannian Newton descent with a gradient fallback.
    pub fn descend(&self, start: &[f64], max_iter: usize) -> Descent {
        let mut x = normalized(start);
        let mut iterations = 0;
        let mut converged = false;
        let mut last = None;
        let mut last_gnorm = f64::INFINITY;
        let mut polish = 0;
        while iterations < max_iter {
            let Some(l) = self.local(&x) else { break };
            let radial = dot(&x, &l.grad);
            let basis = tangent_basis(&x);
            let g: Vec<f64> = basis.iter().map(|b| dot(b, &l.grad)).collect();
            let gnorm = norm(&g);
            last = Some(l.value);
            last_gnorm = gnorm;
            let k = basis.len();
            let hb: Vec<Vec<f64>> = basis.iter().map(|b| mat_vec(&l.hess, b)).collect();
            let h: Vec<Vec<f64>> = (0..k)
                .map(|a| {
                    (0..k)
                        .map(|b| dot(&basis[a], &hb[b]) - if a == b { radial } else { 0.0 })
                        .collect()
                })
                .collect();
            let newton = cholesky_solve(&h, &g);
            if gnorm <= GRADIENT_TOL {
                polish += 1;
                if polish > POLISH_STEPS || newton.as_ref().is_none_or(|v| norm(v) <= 1e-12) {
                    converged = true;
                    break;
                }
            }
            if gnorm == 0.0 {
                converged = true;
                break;
            }
            iterations += 1;
            let mut step = match newton {
                Some(v) => v.iter().map(|c| -c).collect::<Vec<f64>>(),
                None => g.iter().map(|c| -c / gnorm).collect(),
            };
            let len = norm(&step);
            if len > 0.5 {
                step.iter_mut().for_each(|c| *c *= 0.5 / len);
            }
            let slope = dot(&step, &g);
            let dir: Vec<f64> = (0..x.len())
                .map(|i| basis.iter().zip(&step).map(|(b, c)| b[i] * c).sum())
                .collect();
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial = normalized(&x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect::<Vec<_>>());
                if let Ok(v) = self.value(&trial) {
                    let accept = v <= l.value + 1e-4 * alpha * slope
                        || (alpha == 1.0
                            && v <= l.value + 1e-13 * l.scale.max(1.0)
                            && self.tangent_gradient(&trial).is_ok_and(|t| norm(&t) < 0.5 * gnorm));
                    if accept {
                        moved = trial != x;
                        x = trial;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                // roundoff floor
                converged = gnorm <= GRADIENT_TOL || gnorm <= 1e-7 * l.scale.max(1.0);
                break;
            }
        }
        converged |= last_gnorm <= GRADIENT_TOL;
        let value = self.value(&x).ok().or(last).unwrap_or(f64::INFINITY);
        Descent {
            point: x,
            value,
            converged,
            iterations,
        }
    }
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| dot(r, v)).collect()
}

/// Orthonormal basis of the tangent space `x^perp`.
fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap());
    for &j in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        for _ in 0..2 {
            let c = dot(&v, x);
            v.iter_mut().zip(x).for_each(|(a, b)| *a -= c * b);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
            }
        }
        let l = norm(&v);
        if l > 0.1 {
            basis.push(v.iter().map(|a| a / l).collect());
        }
    }
    basis
}

/// Solves `H v = g` for symmetric positive definite `H`.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = h.len();
    let mut l = vec![vec![0.0; n]; n];
    let diag_scale = h.iter().enumerate().map(|(i, r)| r[i].abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h[i][i] - s;
                if d <= 1e-12 * diag_scale.max(1e-300) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (g[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut v = vec![0.0; n];
    for i in (0..n).rev() {
        v[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * v[k]).sum::<f64>()) / l[i][i];
    }
    Some(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Descent {
    pub point: Point64,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `sum_i g(x . x_i)` for a unit `x`.
pub fn potential_eval(x: &[f64], code: &Code, kernel: &KernelSpec) -> Result<f64> {
    if (norm(x) - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnSphere(format!("|x| = {}", norm(x))));
    }
    if x.len() != code.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "point has dimension {}, code lives in R^{}",
            x.len(),
            code.ambient_dim()
        )));
    }
    Potential::new(code, kernel).value(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Random,
    Antipode,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimizationReport {
    pub kernel: KernelSpec,
    pub global_min_value: f64,
    pub argmin_cluster: Vec<Point64>,
    pub dual_match: bool,
    /// Best value over non-candidate starts minus best value at the candidates.
    pub gap: Option<f64>,
    pub candidate_value: Option<f64>,
    pub restarts: usize,
    pub starts: usize,
    pub unconverged: usize,
    pub seed: u64,
    pub tolerance: f64,
}

pub const GRADIENT_TOL: f64 = 1e-10;
pub const CLUSTER_TOL: f64 = 1e-6;
const POLISH_STEPS: usize = 4;
const MAX_ITER: usize = 300;

/// Greedy clustering: each point joins the first representative within `tol`.
pub fn cluster_points(points: &[Point64], tol: f64) -> Vec<Point64> {
    let mut reps: Vec<Point64> = Vec::new();
    for p in points {
        if !reps.iter().any(|r| distance(r, p) <= tol) {
            reps.push(p.clone());
        }
    }
    reps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    reps
}

/// Multistart descent from `restarts` seeded random starts, every code
/// antipode that is not itself a code point, and the given candidates.
pub fn minimize_potential(
    code: &Code,
    kernel: &KernelSpec,
    restarts: usize,
    seed: u64,
    candidates: &[Point64],
) -> Result<MinimizationReport> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let pot = Potential::new(code, kernel);
    let dim = code.ambient_dim();
    let mut starts: Vec<(StartKind, Point64)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (StartKind::Random, random_unit(&mut rng, dim))
        })
        .collect();
    for p in pot.points() {
        let a: Point64 = p.iter().map(|x| -x).collect();
        if pot.points().iter().all(|q| distance(q, &a) > 1e-9) {
            starts.push((StartKind::Antipode, a));
        }
    }
    starts.extend(candidates.iter().map(|c| (StartKind::Candidate, normalized(c))));

    let results: Vec<(StartKind, Descent)> = starts
        .par_iter()
        .map(|(k, s)| (*k, pot.descend(s, MAX_ITER)))
        .collect();
    let finite: Vec<&(StartKind, Descent)> = results.iter().filter(|(_, d)| d.value.is_finite()).collect();
    let global = finite.iter().map(|(_, d)| d.value).fold(f64::INFINITY, f64::min);
    let tol = 1e-8 * global.abs().max(1.0);
    let winners: Vec<Point64> = finite
        .iter()
        .filter(|(_, d)| d.value <= global + tol)
        .map(|(_, d)| d.point.clone())
        .collect();
    let argmin_cluster = cluster_points(&winners, CLUSTER_TOL);

    let candidate_value = if candidates.is_empty() {
        None
    } else {
        let vals: Result<Vec<f64>> = candidates.iter().map(|c| pot.value(&normalized(c))).collect();
        vals.ok().map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
    };
    let others = finite
        .iter()
        .filter(|(k, _)| *k != StartKind::Candidate)
        .map(|(_, d)| d.value)
        .fold(f64::INFINITY, f64::min);
    let gap = candidate_value.map(|c| others - c);
    let dual_match = gap.is_some_and(|g| g >= -tol)
        && argmin_cluster
            .iter()
            .all(|a| candidates.iter().any(|c| distance(a, &normalized(c)) <= 1e-5));
    Ok(MinimizationReport {
        kernel: kernel.clone(),
        global_min_value: global,
        argmin_cluster,
        dual_match,
        gap,
        candidate_value,
        restarts,
        starts: starts.len(),
        unconverged: results.iter().filter(|(_, d)| !d.converged).count(),
        seed,
        tolerance: GRADIENT_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelVerdict {
    pub kernel: KernelSpec,
    pub dual_value: f64,
    /// Largest relative deviation of the potential across dual points.
    pub dual_spread: f64,
    pub global_min: f64,
    /// Dual value minus global minimum; positive means something beat the dual.
    pub margin: f64,
    /// Largest distance from a global argmin to the nearest dual point.
    pub argmin_distance: f64,
    pub equal_ok: bool,
    pub min_ok: bool,
    pub argmin_ok: Option<bool>,
    pub pass: bool,
    pub report: MinimizationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniversalMinimumReport {
    pub code: String,
    pub m: u32,
    pub dual_size: usize,
    pub verdicts: Vec<KernelVerdict>,
    pub pass: bool,
}

/// Allowed excess of the dual value over the multistart minimum is
/// `abs + rel |dual value|`; global argmins must lie within `argmin` of a
/// dual point for strictly convex kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinTolerance {
    pub abs: f64,
    pub rel: f64,
    pub argmin: f64,
}

impl Default for MinTolerance {
    fn default() -> Self {
        MinTolerance {
            abs: 1e-8,
            rel: 0.0,
            argmin: 1e-5,
        }
    }
}

/// Checks that the dual points attain the minimum of every kernel's
/// potential: equal values at all dual points (relative 1e-9), no multistart
/// value meaningfully below the dual value, and for strictly convex kernels
/// every global argmin next to a dual point.
pub fn verify_universal_minimum_with(
    code: &Code,
    m: u32,
    dual: &[Point64],
    kernels: &[KernelSpec],
    restarts: usize,
    seed: u64,
    tol: MinTolerance,
) -> Result<UniversalMinimumReport> {
    if dual.is_empty() {
        return Err(Error::Precondition("dual is empty".into()));
    }
    let mut verdicts = Vec::new();
    for kernel in kernels {
        let pot = Potential::new(code, kernel);
        let values = dual
            .iter()
            .map(|z| pot.value(&normalized(z)))
            .collect::<Result<Vec<f64>>>()?;
        let dual_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let dual_spread = (hi - dual_value) / dual_value.abs().max(f64::MIN_POSITIVE);
        let report = minimize_potential(code, kernel, restarts, seed, dual)?;
        let margin = dual_value - report.global_min_value;
        let argmin_distance = report
            .argmin_cluster
            .iter()
            .map(|a| {
                dual.iter()
                    .map(|z| distance(a, &normalized(z)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let equal_ok = dual_spread <= 1e-9;
        let min_ok = margin <= tol.abs + tol.rel * dual_value.abs();
        let argmin_ok = kernel.strictly_convex().then_some(argmin_distance <= tol.argmin);
        verdicts.push(KernelVerdict {
            kernel: kernel.clone(),
            dual_value,
            dual_spread,
            global_min: report.global_min_value,
            margin,
            argmin_distance,
            equal_ok,
            min_ok,
            argmin_ok,
            pass: equal_ok && min_ok && argmin_ok != Some(false),
            report,
        });
    }
    Ok(UniversalMinimumReport {
        code: code.name().to_string(),
        m,
        dual_size: dual.len(),
        pass: verdicts.iter().all(|v| v.pass),
        verdicts,
    })
}

/// `verify_universal_minimum_with` at the default tolerances.
pub fn verify_universal_minimum(
    code: &Code,
    m: u32,
    dual: &[Point64],
    kernels: &[KernelSpec],
    restarts: usize,
    seed: u64,
) -> Result<UniversalMinimumReport> {
    verify_universal_minimum_with(code, m, dual, kernels, restarts, seed, MinTolerance::default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkipOneAddTwo {
    pub index_ok: bool,
    pub sum_ok: bool,
    pub sumsq_ok: bool,
    /// Whether some supplied candidate forms only dot products from the list.
    pub dual_nonempty: bool,
    pub sum: Surd,
    pub sumsq_value: String,
    pub bound: String,
    pub sum_margin: f64,
    pub sumsq_margin: f64,
}

impl SkipOneAddTwo {
    pub fn pass(&self) -> bool {
        self.index_ok && self.sum_ok && self.sumsq_ok && self.dual_nonempty
    }
}

/// Hypotheses of the skip-one-add-two bound for an exact code and a
/// candidate dot set `t_1 < ... < t_m`.
pub fn skip_one_add_two_check(
    code: &LatticeCode,
    m: usize,
    t_list: &[Surd],
    candidates: &[ExactPoint],
) -> Result<SkipOneAddTwo> {
    if t_list.len() != m || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "expected {m} values (m >= 2), got {}",
            t_list.len()
        )));
    }
    let one = Surd::one();
    if t_list.windows(2).any(|w| w[0] >= w[1]) || t_list.iter().any(|t| *t <= -one.clone() || *t >= one) {
        return Err(Error::InvalidArgument("t_list must increase strictly inside (-1, 1)".into()));
    }
    let d = code.sphere_dim() as i64;
    let n = 2 * m;
    let report = index_set_exact(code, n);
    let index_ok = (1..=n)
        .filter(|&k| k != 2 * m - 2)
        .all(|k| report.index_set.contains(&k));

    let mut sum = Surd::zero();
    for t in t_list {
        sum = sum.checked_add(t)?;
    }
    let half_last = t_list[m - 1].scale(&Rational::new(1.into(), 2.into()));
    let sum_ok = sum < half_last;
    let sumsq: Rational = t_list.iter().map(Surd::square).sum();
    let value = &sumsq - rint(2) * sum.square();
    let mi = m as i64;
    let bound = Rational::new((mi * (2 * mi - 1)).into(), (4 * mi + d - 3).into());
    let sumsq_ok = value < bound;
    let dual_nonempty = candidates.iter().any(|z| {
        z.is_unit()
            && exact_dots(z, code)
                .iter()
                .all(|v| t_list.contains(v))
    });
    Ok(SkipOneAddTwo {
        index_ok,
        sum_ok,
        sumsq_ok,
        dual_nonempty,
        sum_margin: half_last.to_f64() - sum.to_f64(),
        sumsq_margin: (&bound - &value).to_f64().unwrap_or(f64::NAN),
        sum,
        sumsq_value: value.to_string(),
        bound: bound.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cross_polytope, cube, demicube, polytope_2_41, Parity};
    use crate::exact::{normalize_surd, rat};
    use crate::gegenbauer::gegenbauer_poly;

    fn e(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    #[test]
    fn parse_and_render() {
        let ks = KernelSpec::parse_list("riesz:1,riesz:2,gauss:1,log").unwrap();
        assert_eq!(
            ks,
            vec![KernelSpec::Riesz(1.0), KernelSpec::Riesz(2.0), KernelSpec::Gauss(1.0), KernelSpec::Log]
        );
        assert_eq!(ks[1].to_string(), "riesz:2");
        let p: KernelSpec = "poly:1,0,3/2".parse().unwrap();
        assert_eq!(p.to_string(), "poly:1,0,3/2");
        assert!("riesz:-1".parse::<KernelSpec>().is_err());
        assert!("cauchy:1".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn riesz_on_demicube_matches_closed_form() {
        let c: Code = demicube(5, Parity::Even).unwrap().into();
        let k = 1.0 / 5f64.sqrt();
        // independent closed-form values
        for (s, want) in [(1.0, 12.310734148701012), (2.0, 10.0), (3.0, 8.506508083520398)] {
            let v = potential_eval(&e(5, 0), &c, &KernelSpec::Riesz(s)).unwrap();
            assert!((v - want).abs() < 1e-12, "s={s}: {v}");
            let f = 8.0 * (2.0 - 2.0 * k).powf(-s / 2.0) + 8.0 * (2.0 + 2.0 * k).powf(-s / 2.0);
            assert!((v - f).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_kernel_and_singularity() {
        let c: Code = cube(4).unwrap().into();
        let one = KernelSpec::Poly(RatPoly::constant(rint(1)));
        assert_eq!(potential_eval(&e(4, 2), &c, &one).unwrap(), 16.0);
        let p = c.unit_points()[3].clone();
        assert!(matches!(potential_eval(&p, &c, &KernelSpec::Riesz(1.0)), Err(Error::Singular)));
        assert!(matches!(potential_eval(&p, &c, &KernelSpec::Log), Err(Error::Singular)));
        assert!(potential_eval(&p, &c, &KernelSpec::Gauss(1.0)).is_ok());
        assert!(potential_eval(&[1.0, 1.0, 0.0, 0.0], &c, &one).is_err());
    }

    #[test]
    fn generic_kernel_evaluation() {
        for k in [KernelSpec::Riesz(2.0), KernelSpec::Gauss(1.5), KernelSpec::Log] {
            let (a, b, c) = k.eval(0.3f64).unwrap();
            let (x, y, z) = k.eval(0.3f32).unwrap();
            assert!(((x as f64) - a).abs() < 1e-5 * a.abs().max(1.0));
            assert!(((y as f64) - b).abs() < 1e-5 * b.abs().max(1.0));
            assert!(((z as f64) - c).abs() < 1e-5 * c.abs().max(1.0));
            // derivatives by central differences
            let h = 1e-5;
            let (gp, _, _) = k.eval(0.3 + h).unwrap();
            let (gm, _, _) = k.eval(0.3 - h).unwrap();
            assert!(((gp - gm) / (2.0 * h) - b).abs() < 1e-6 * b.abs().max(1.0));
            let (_, dp, _) = k.eval(0.3 + h).unwrap();
            let (_, dm, _) = k.eval(0.3 - h).unwrap();
            assert!(((dp - dm) / (2.0 * h) - c).abs() < 1e-6 * c.abs().max(1.0));
        }
    }

    #[test]
    fn tangent_gradient_matches_finite_differences() {
        let code: Code = demicube(5, Parity::Even).unwrap().into();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kernel in [KernelSpec::Riesz(1.0), KernelSpec::Riesz(4.0), KernelSpec::Gauss(1.0), KernelSpec::Log] {
            let pot = Potential::new(&code, &kernel);
            for _ in 0..100 {
                let x = random_unit(&mut rng, 5);
                let g = pot.tangent_gradient(&x).unwrap();
                let u = random_unit(&mut rng, 5);
                let c = dot(&u, &x);
                let t = normalized(&u.iter().zip(&x).map(|(a, b)| a - c * b).collect::<Vec<_>>());
                let h = 1e-6;
                let step = |s: f64| -> Vec<f64> {
                    x.iter().zip(&t).map(|(a, b)| a * s.cos() + b * s.sin()).collect()
                };
                let fd = (pot.value(&step(h)).unwrap() - pot.value(&step(-h)).unwrap()) / (2.0 * h);
                let an = dot(&g, &t);
                assert!((fd - an).abs() <= 1e-5 * norm(&g).max(1.0), "{kernel}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn design_invariance_for_polynomial_kernels() {
        let code: Code = demicube(5, Parity::Even).unwrap().into();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = &gegenbauer_poly(4, 3) + &RatPoly::monomial(2);
        let pot = Potential::new(&code, &KernelSpec::Poly(q));
        let base = pot.value(&e(5, 0)).unwrap();
        for _ in 0..100 {
            let v = pot.value(&random_unit(&mut rng, 5)).unwrap();
            assert!((v - base).abs() <= 1e-9 * 16.0);
        }
    }

    #[test]
    fn antipodal_symmetry() {
        let code: Code = polytope_2_41().into();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [KernelSpec::Riesz(2.0), KernelSpec::Gauss(1.0)] {
            for _ in 0..5 {
                let x = random_unit(&mut rng, 8);
                let y: Vec<f64> = x.iter().map(|a| -a).collect();
                let a = potential_eval(&x, &code, &k).unwrap();
                let b = potential_eval(&y, &code, &k).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }
    }

    #[test]
    fn minimum_decreases_with_riesz_exponent() {
        let code: Code = demicube(5, Parity::Even).unwrap().into();
        let mins: Vec<f64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&s| minimize_potential(&code, &KernelSpec::Riesz(s), 40, 5, &[]).unwrap().global_min_value)
            .collect();
        assert!(mins[0] > mins[1] && mins[1] > mins[2], "{mins:?}");
        assert!((mins[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn minimizer_finds_cross_polytope_for_demicube() {
        let code: Code = demicube(5, Parity::Even).unwrap().into();
        let dual: Vec<Point64> = (0..5).flat_map(|i| [e(5, i), e(5, i).iter().map(|x| -x).collect()]).collect();
        let r = minimize_potential(&code, &KernelSpec::Riesz(2.0), 200, 1, &dual).unwrap();
        assert_eq!(r.argmin_cluster.len(), 10);
        assert!(r.dual_match);
        assert!((r.global_min_value - potential_eval(&e(5, 0), &code, &KernelSpec::Riesz(2.0)).unwrap()).abs() < 1e-9);
        assert!(r.gap.unwrap() >= -1e-8);
        let again = minimize_potential(&code, &KernelSpec::Riesz(2.0), 200, 1, &dual).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn cross_polytope_minima_at_cube_vertices() {
        let code: Code = cross_polytope(3).unwrap().into();
        let r = minimize_potential(&code, &KernelSpec::Gauss(1.0), 100, 2, &[]).unwrap();
        assert_eq!(r.argmin_cluster.len(), 8);
        let s = 1.0 / 3f64.sqrt();
        for p in &r.argmin_cluster {
            assert!(p.iter().all(|x| (x.abs() - s).abs() < 1e-6));
        }
    }

    #[test]
    fn universal_minimum_examples() {
        let code: Code = demicube(6, Parity::Even).unwrap().into();
        let dual: Vec<Point64> = (0..6).flat_map(|i| [e(6, i), e(6, i).iter().map(|x| -x).collect()]).collect();
        let ks = [KernelSpec::Riesz(1.0), KernelSpec::Riesz(2.0), KernelSpec::Gauss(1.0)];
        let r = verify_universal_minimum(&code, 2, &dual, &ks, 100, 9).unwrap();
        assert!(r.pass, "{r:#?}");

        let cube5: Code = cube(5).unwrap().into();
        let dual5: Vec<Point64> = (0..5).flat_map(|i| [e(5, i), e(5, i).iter().map(|x| -x).collect()]).collect();
        assert!(verify_universal_minimum(&cube5, 2, &dual5, &ks, 100, 9).unwrap().pass);

        // code points are maxima of the gaussian potential, not minima
        let wrong = cube5.unit_points();
        let r = verify_universal_minimum(&cube5, 2, &wrong, &[KernelSpec::Gauss(1.0)], 50, 9).unwrap();
        assert!(!r.pass);
        assert!(r.verdicts[0].margin > 0.0);
        assert!(verify_universal_minimum(&cube5, 2, &[], &ks, 1, 1).is_err());
    }

    #[test]
    fn skip_one_add_two_on_2_41() {
        let c = polytope_2_41();
        let a = Surd::inv_sqrt(2);
        let b = normalize_surd(rat(1, 4), 2);
        let t = vec![-a.clone(), -b.clone(), Surd::zero(), b, a];
        let root = ExactPoint::from_lattice(&[2, 2, 0, 0, 0, 0, 0, 0], 8);
        let r = skip_one_add_two_check(&c, 5, &t, &[root]).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.sum.is_zero());
        assert_eq!(r.sumsq_value, "5/4");
        assert_eq!(r.bound, "15/8");
    }

    #[test]
    fn skip_one_add_two_rejects_demicube() {
        let c = demicube(5, Parity::Even).unwrap();
        let k = Surd::inv_sqrt(6);
        let r = skip_one_add_two_check(&c, 2, &[-k.clone(), k], &[]).unwrap();
        assert!(!r.index_ok);
        assert!(r.sum_ok);
        assert!(skip_one_add_two_check(&c, 2, &[Surd::one(), Surd::zero()], &[]).is_err());
        assert!(skip_one_add_two_check(&c, 3, &[Surd::zero()], &[]).is_err());
    }
}

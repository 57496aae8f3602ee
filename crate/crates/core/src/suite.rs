//! The acceptance battery: twelve checks, each returning pass/fail with a
//! one-line detail.

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::codes::{cross_polytope, cube, demicube, e8_roots, ngon, polytope_2_41, Code, Parity};
use crate::design::{index_set, index_set_float, pair_sum, spectrum, Probe};
use crate::error::Result;
use crate::exact::{normalize_surd, rat, ExactPoint, Surd};
use crate::gegenbauer::{a0, gegenbauer_poly, nodes};
use crate::potential::{skip_one_add_two_check, verify_universal_minimum_with, KernelSpec, MinTolerance};
use crate::stiffness::{certify_stiff, dual_search, sampled_dual_s2, DualResult, Mode};
use crate::transforms::{circle_dual, dual_points_match, glue, rotated_cubes, symmetrize};
use crate::Point64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} {:>8.2}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const TITLES: [&str; 12] = [
    "exact design identities of 2_41",
    "demicube stiffness",
    "dual of 2_41 is the E8 roots",
    "node frequencies",
    "Gegenbauer exactness",
    "universal minima (numerical)",
    "minimum of the 2_41 potential",
    "skip-one-add-two hypotheses",
    "transforms",
    "structure on S^1",
    "structural properties of duals",
    "sampling oracle on S^2",
];

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let out = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(seed),
        7 => c7(seed),
        8 => c8(),
        9 => c9(seed),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("?"),
        pass,
        detail,
        seconds,
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=12).map(|id| run_criterion(id, seed)).collect()
}

type Check = Result<(bool, String)>;

fn signed_basis(d: usize) -> BTreeSet<ExactPoint> {
    (0..d)
        .flat_map(|i| {
            let mut v = vec![0; d];
            v[i] = 1;
            let p = ExactPoint::from_lattice(&v, 1);
            [p.neg(), p]
        })
        .collect()
}

fn exact_set(r: &DualResult) -> Option<BTreeSet<ExactPoint>> {
    r.exact_points().map(|v| v.into_iter().collect())
}

fn e8_dot_nodes() -> Vec<Surd> {
    let a = Surd::inv_sqrt(2);
    let b = normalize_surd(rat(1, 4), 2);
    vec![-a.clone(), -b.clone(), Surd::zero(), b, a]
}

fn c1() -> Check {
    let t = Instant::now();
    let c = polytope_2_41();
    let sums: Vec<_> = (1..=10).map(|n| pair_sum(&c, n)).collect();
    let secs = t.elapsed().as_secs_f64();
    let zeros: Vec<usize> = (1..=10).filter(|&n| sums[n - 1].is_zero()).collect();
    let ok = zeros == [1, 2, 3, 4, 5, 6, 7, 9, 10] && secs < 10.0;
    Ok((ok, format!("zero at n = {zeros:?}; n=8 sum = {}; {secs:.2}s", sums[7])))
}

fn c2() -> Check {
    let mut ok = true;
    let mut strengths = Vec::new();
    for d in 4..=8 {
        let s = index_set(&demicube(d, Parity::Even)?.into(), 4).strength;
        strengths.push(s);
        ok &= s >= 3;
    }
    let mut t7 = 0.0;
    for d in 5..=7 {
        let t = Instant::now();
        let r = dual_search(&demicube(d, Parity::Even)?.into(), 2, Mode::Exact, None)?;
        if d == 7 {
            t7 = t.elapsed().as_secs_f64();
        }
        ok &= r.complete && exact_set(&r) == Some(signed_basis(d));
    }
    ok &= t7 < 60.0;
    Ok((ok, format!("strengths d=4..8: {strengths:?}; duals = signed bases for d=5..7; d=7 in {t7:.3}s")))
}

fn c3() -> Check {
    let t = Instant::now();
    let code = polytope_2_41();
    let r = dual_search(&code.clone().into(), 5, Mode::Exact, Some(&e8_dot_nodes()))?;
    let secs = t.elapsed().as_secs_f64();
    let roots: BTreeSet<ExactPoint> = e8_roots()
        .points
        .iter()
        .map(|p| ExactPoint::from_lattice(p, 8))
        .collect();
    let found = exact_set(&r);
    let want: Vec<Surd> = {
        let mut v = e8_dot_nodes();
        v.sort();
        v
    };
    let code: Code = code.into();
    let mut spectra_ok = true;
    for p in found.iter().flatten() {
        let s = spectrum(&Probe::Exact(p.clone()), &code)?;
        spectra_ok &= s.exact_values().as_deref() == Some(&want[..]);
    }
    let ok = found.as_ref() == Some(&roots) && spectra_ok && secs < 600.0;
    Ok((
        ok,
        format!("{} dual points, E8 roots: {}, spectra ok: {spectra_ok}; {secs:.2}s", r.points.len(), found.as_ref() == Some(&roots)),
    ))
}

fn stiff2_corpus() -> Result<Vec<Code>> {
    let mut v: Vec<Code> = Vec::new();
    for d in 5..=7 {
        v.push(demicube(d, Parity::Even)?.into());
    }
    for d in 3..=6 {
        v.push(cross_polytope(d)?.into());
    }
    for d in 3..=5 {
        v.push(cube(d)?.into());
    }
    Ok(v)
}

fn c4() -> Check {
    let mut ok = true;
    let mut rows = Vec::new();
    for c in stiff2_corpus()? {
        let cert = certify_stiff(&c, 2, Mode::Exact, None)?;
        let half = c.len() / 2;
        let weights_half = cert.dual.nodes.exact.as_ref().is_some_and(|e| e.weights.iter().all(|w| *w == rat(1, 2)));
        let freq = cert.stiff
            && weights_half
            && cert.frequencies_ok == Some(true)
            && cert.frequency_table.iter().all(|r| r == &vec![half, half]);
        ok &= freq;
        rows.push(format!("{}:{}", c.name(), if freq { "ok" } else { "bad" }));
    }
    Ok((ok, rows.join(" ")))
}

fn c5() -> Check {
    let mut ok = true;
    for d in 1..=9u32 {
        let ps: Vec<_> = (0..=12).map(|n| gegenbauer_poly(d, n)).collect();
        for i in 0..=12 {
            ok &= ps[i].eval(&crate::Rational::one()).is_one();
            for j in i + 1..=12 {
                ok &= a0(&(&ps[i] * &ps[j]), d).is_zero();
            }
        }
        let ns = nodes(d, 2)?;
        let k = Surd::inv_sqrt(d as u64 + 1);
        ok &= ns.exact.as_ref().is_some_and(|e| e.nodes == vec![-k.clone(), k]);
    }
    Ok((ok, "orthogonality, P_n(1) = 1 for d <= 9, n <= 12; nodes(d,2) = +-1/sqrt(d+1)".into()))
}

fn e(dim: usize, i: usize, s: f64) -> Point64 {
    let mut v = vec![0.0; dim];
    v[i] = s;
    v
}

fn signed_basis_f64(d: usize) -> Vec<Point64> {
    (0..d).flat_map(|i| [e(d, i, 1.0), e(d, i, -1.0)]).collect()
}

fn c6(seed: u64) -> Check {
    let kernels = KernelSpec::parse_list("riesz:1,riesz:2,riesz:4,gauss:1")?;
    let cp4: Code = cross_polytope(4)?.into();
    let cube_dual = dual_search(&cp4, 2, Mode::Exact, None)?.float_points();
    let cases: Vec<(Code, Vec<Point64>)> = vec![
        (demicube(5, Parity::Even)?.into(), signed_basis_f64(5)),
        (demicube(6, Parity::Even)?.into(), signed_basis_f64(6)),
        (cp4, cube_dual),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (code, dual) in cases {
        let t = Instant::now();
        let r = verify_universal_minimum_with(&code, 2, &dual, &kernels, 200, seed, MinTolerance::default())?;
        let secs = t.elapsed().as_secs_f64();
        let worst = r.verdicts.iter().map(|v| v.margin).fold(f64::NEG_INFINITY, f64::max);
        ok &= r.pass && secs < 120.0;
        parts.push(format!("{}: {} (worst margin {worst:.1e}, {secs:.1}s)", code.name(), if r.pass { "ok" } else { "FAIL" }));
    }
    Ok((ok, parts.join("; ")))
}

fn c7(seed: u64) -> Check {
    let t = Instant::now();
    let code: Code = polytope_2_41().into();
    let roots = e8_roots().unit_points();
    let kernels = KernelSpec::parse_list("riesz:2,gauss:1")?;
    let tol = MinTolerance {
        abs: 0.0,
        rel: 1e-8,
        argmin: 1e-4,
    };
    let r = verify_universal_minimum_with(&code, 5, &roots, &kernels, 1000, seed, tol)?;
    let secs = t.elapsed().as_secs_f64();
    let parts: Vec<String> = r
        .verdicts
        .iter()
        .map(|v| {
            format!(
                "{}: min {:.12} vs root {:.12}, {} argmins",
                v.kernel,
                v.global_min,
                v.dual_value,
                v.report.argmin_cluster.len()
            )
        })
        .collect();
    Ok((r.pass && secs < 900.0, format!("{}; {secs:.1}s", parts.join("; "))))
}

fn c8() -> Check {
    let root = ExactPoint::from_lattice(&[2, 2, 0, 0, 0, 0, 0, 0], 8);
    let r = skip_one_add_two_check(&polytope_2_41(), 5, &e8_dot_nodes(), &[root])?;
    let ok = r.pass() && r.sum.is_zero() && r.sumsq_value == "5/4" && r.bound == "15/8";
    Ok((
        ok,
        format!(
            "sum t = {} < t5/2; sum t^2 - 2 (sum t)^2 = {} < {}; index set ok: {}",
            r.sum, r.sumsq_value, r.bound, r.index_ok
        ),
    ))
}

fn c9(seed: u64) -> Check {
    let d5: Code = demicube(5, Parity::Even)?.into();
    let sym = symmetrize(&d5)?;
    let same_set = sym.as_lattice().map(|c| c.point_set()) == Some(cube(5)?.point_set());
    let a = dual_search(&d5, 2, Mode::Exact, None)?;
    let b = dual_search(&sym, 2, Mode::Exact, None)?;
    let same_dual = dual_points_match(&a.points, &b.points);

    let c3: Code = cross_polytope(3)?.into();
    let g = glue(&c3, &c3, 2, seed)?;
    let glue_ok = g.code.len() == 12 && g.certificate.design_strength >= 3 && !g.certificate.dual.points.is_empty();

    let rc = rotated_cubes(3)?;
    let e3 = ExactPoint::from_lattice(&[0, 0, 1], 1);
    let got: Option<Vec<ExactPoint>> = rc.certificate.dual.points.iter().map(|p| p.exact.clone()).collect();
    let rc_ok = got == Some(vec![e3.neg(), e3]) && rc.certificate.stiff;
    Ok((
        same_set && same_dual && glue_ok && rc_ok,
        format!(
            "sym(demicube(5)) = cube(5): {same_set}, same dual: {same_dual}; glue: {} points, strength {}, |D_2| = {}; rotated_cubes(3) dual = +-e3: {rc_ok}",
            g.code.len(),
            g.certificate.design_strength,
            g.certificate.dual.points.len()
        ),
    ))
}

fn c10() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 2..=4usize {
        let even: Code = ngon(2 * m)?.into();
        let strength = index_set_float(&even, 2 * m - 1).strength;
        let r = circle_dual(&even, m, 1_000_000, 1e-8)?;
        let midpoints = r.angles.len() == 2 * m
            && r.angles.iter().enumerate().all(|(k, a)| {
                (a - std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64).abs() < 1e-8
            });
        let odd: Code = ngon(2 * m + 1)?.into();
        let o = circle_dual(&odd, m, 1_000_000, 1e-8)?;
        let pass = strength >= 2 * m - 1 && midpoints && o.points.is_empty();
        ok &= pass;
        parts.push(format!(
            "m={m}: strength {strength}, {} dual directions, odd {}-gon dual size {}",
            r.points.len(),
            2 * m + 1,
            o.points.len()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c11() -> Check {
    let mut ok = true;
    let mut bad = Vec::new();
    let mut corpus = stiff2_corpus()?;
    corpus.push(symmetrize(&demicube(5, Parity::Even)?.into())?);
    for c in &corpus {
        let cert = certify_stiff(c, 2, Mode::Exact, None)?;
        let p = &cert.properties;
        if !(p.antipodal && p.cardinality_bound && p.double_dual_inclusion) {
            ok = false;
            bad.push(c.name().to_string());
        }
    }
    let mut triple: Vec<Code> = vec![demicube(5, Parity::Even)?.into()];
    for d in 2..=6 {
        triple.push(cross_polytope(d)?.into());
    }
    for c in &triple {
        let d1 = dual_search(c, 2, Mode::Exact, None)?;
        let d2 = dual_search(&d1.to_code("d1")?, 2, Mode::Exact, None)?;
        let d3 = dual_search(&d2.to_code("d2")?, 2, Mode::Exact, None)?;
        if exact_set(&d1).is_none() || exact_set(&d1) != exact_set(&d3) {
            ok = false;
            bad.push(format!("triple {}", c.name()));
        }
    }
    Ok((
        ok,
        format!(
            "{} certified codes, {} triple-dual checks; failures: {bad:?}",
            corpus.len(),
            triple.len()
        ),
    ))
}

fn c12() -> Check {
    let codes: Vec<Code> = vec![
        cube(3)?.into(),
        cross_polytope(3)?.into(),
        symmetrize(&demicube(3, Parity::Even)?.into())?,
        rotated_cubes(2)?.code,
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for c in &codes {
        for m in 1..=2u32 {
            let exact = match dual_search(c, m, Mode::Auto, None) {
                Ok(r) => r.float_points(),
                Err(e) => return Ok((false, format!("{}: {e}", c.name()))),
            };
            let sampled = sampled_dual_s2(c, m, 100_000)?;
            let same = exact.len() == sampled.len()
                && exact
                    .iter()
                    .all(|p| sampled.iter().any(|q| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < 1e-8));
            ok &= same;
            parts.push(format!("{} m={m}: {}/{}", c.name(), sampled.len(), exact.len()));
        }
    }
    Ok((ok, parts.join(", ")))
}

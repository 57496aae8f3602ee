use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use stiffkit::codes::{self, Parity};
use stiffkit::design::{self, Probe, FLOAT_PAIR_TOL};
use stiffkit::potential::{self, KernelSpec, MinTolerance, CLUSTER_TOL, GRADIENT_TOL};
use stiffkit::stiffness::{self, Mode, StiffnessCertificate, FLOAT_TOL, SURD_MAX_DEN};
use stiffkit::{suite, transforms, Code, Error, ExactPoint, Point64, Surd, VERSION};

const DEFAULT_SEED: u64 = 20240601;

#[derive(Parser)]
#[command(name = "stiffkit", version, about = "Spherical designs, stiff codes, their duals and potentials")]
struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named configuration: cross-polytope D, cube D, demicube D
    /// [--odd], e8, 2_41, ngon N, rotated-cubes N.
    Construct {
        name: String,
        params: Vec<String>,
        /// Odd half of the cube (demicube only).
        #[arg(long)]
        odd: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Indices n <= nmax for which the code is an n-design.
    CheckDesign {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, conflicts_with = "float")]
        exact: bool,
        #[arg(long)]
        float: bool,
    },
    /// Dual configuration and stiffness certificate.
    Dual {
        file: PathBuf,
        #[arg(short = 'm')]
        m: u32,
        #[arg(long, default_value = "auto")]
        mode: Mode,
        /// Comma-separated node values used instead of the roots of P_m.
        #[arg(long, allow_hyphen_values = true)]
        nodes: Option<String>,
        /// Write the dual points as a code.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Multistart check that the dual points minimize each potential.
    VerifyMin {
        file: PathBuf,
        #[arg(short = 'm')]
        m: u32,
        /// Dual points as a code file; searched for when omitted.
        #[arg(long)]
        dual: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        nodes: Option<String>,
        #[arg(long, default_value = "riesz:1,riesz:2,gauss:1")]
        kernels: String,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        argmin_tol: Option<f64>,
    },
    /// Distinct dot products between a probe and the code.
    Spectrum {
        file: PathBuf,
        /// A point index, or comma-separated coordinates such as 1/2,1/2,1/2,1/2.
        #[arg(long, allow_hyphen_values = true)]
        probe: String,
    },
    /// Union of the code with its antipodes.
    Symmetrize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Points at dot product t with a chosen code point, projected to its
    /// orthogonal sphere.
    Facet {
        file: PathBuf,
        #[arg(long)]
        point: usize,
        #[arg(long, allow_hyphen_values = true)]
        t: Surd,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Glue two m-stiff codes along a shared dual point.
    Glue {
        first: PathBuf,
        second: PathBuf,
        #[arg(short = 'm')]
        m: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// n rotated copies of the cube in S^2.
    RotatedCubes {
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance battery.
    Suite {
        /// Every criterion (the default when --criteria is absent).
        #[arg(long)]
        paper: bool,
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

struct Outcome {
    command: &'static str,
    seed: Option<u64>,
    tolerances: Value,
    pass: bool,
    report: Value,
    summary: Vec<(String, String)>,
}

impl Outcome {
    fn new(command: &'static str, pass: bool, report: Value) -> Outcome {
        Outcome {
            command,
            seed: None,
            tolerances: json!({}),
            pass,
            report,
            summary: Vec::new(),
        }
    }

    fn row(mut self, key: &str, value: impl ToString) -> Outcome {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(out) => {
            let doc = json!({
                "tool": "stiffkit",
                "version": VERSION,
                "command": out.command,
                "seed": out.seed,
                "tolerances": out.tolerances,
                "pass": out.pass,
                "report": out.report,
            });
            let text = serde_json::to_string_pretty(&doc).expect("report is valid JSON");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            print_summary(&out.summary);
            eprintln!("{}", if out.pass { "PASS" } else { "FAIL" });
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NotInGeneralPosition { .. }
            | Error::AntipodalPair(..)
            | Error::RetriesExhausted(_)
            | Error::Singular
            | Error::RootIsolation { .. }
            | Error::Precondition(_),
        ) => 1,
        _ => 2,
    }
}

fn print_summary(rows: &[(String, String)]) {
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        eprintln!("{k:<w$}  {v}");
    }
}

fn load(path: &Path) -> Result<Code> {
    codes::load_code(path).with_context(|| format!("reading {}", path.display()))
}

fn save(code: &Code, path: Option<&PathBuf>) -> Result<Value> {
    match path {
        Some(p) => {
            codes::save_code(code, p).with_context(|| format!("writing {}", p.display()))?;
            Ok(json!(p.display().to_string()))
        }
        None => Ok(Value::Null),
    }
}

fn code_summary(code: &Code) -> Value {
    json!({
        "name": code.name(),
        "size": code.len(),
        "ambient_dim": code.ambient_dim(),
        "exact": code.is_exact(),
    })
}

fn parse_surds(s: &str) -> Result<Vec<Surd>> {
    Ok(s.split(',').map(|p| p.trim().parse()).collect::<stiffkit::Result<_>>()?)
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Construct {
            name,
            params,
            odd,
            output,
        } => {
            let code = construct(&name, &params, odd)?;
            let written = save(&code, output.as_ref())?;
            let mut report = json!({ "code": code_summary(&code), "output": written });
            if output.is_none() {
                report["points"] = serde_json::to_value(&code)?;
            }
            Ok(Outcome::new("construct", true, report)
                .row("code", code.name())
                .row("points", code.len())
                .row("ambient dim", code.ambient_dim())
                .row("exact", code.is_exact()))
        }
        Command::CheckDesign {
            file,
            nmax,
            exact,
            float,
        } => {
            let code = load(&file)?;
            let rep = if exact {
                let l = code.as_lattice().context("--exact needs a code with integer coordinates")?;
                design::index_set_exact(l, nmax)
            } else if float {
                design::index_set_float(&code, nmax)
            } else {
                design::index_set(&code, nmax)
            };
            let n = code.len() as f64;
            let mut out = Outcome::new("check-design", true, serde_json::to_value(&rep)?);
            out.tolerances = if rep.exact {
                json!({ "mode": "exact" })
            } else {
                json!({ "mode": "float", "pair_sum": n * n * FLOAT_PAIR_TOL })
            };
            Ok(out
                .row("code", code.name())
                .row("points", code.len())
                .row("index set", format!("{:?}", rep.index_set))
                .row("strength", rep.strength)
                .row("exact", rep.exact))
        }
        Command::Dual {
            file,
            m,
            mode,
            nodes,
            output,
        } => {
            let code = load(&file)?;
            let supplied = nodes.as_deref().map(parse_surds).transpose()?;
            let cert = stiffness::certify_stiff(&code, m, mode, supplied.as_deref())?;
            let written = match &output {
                Some(_) if cert.dual.points.is_empty() => bail!("the dual is empty; nothing to write"),
                Some(_) => save(&cert.dual.to_code(&format!("dual({})", code.name()))?, output.as_ref())?,
                None => Value::Null,
            };
            let pass = cert.stiff && cert.consistent();
            let mut report = serde_json::to_value(&cert)?;
            report["output"] = written;
            let mut out = Outcome::new("dual", pass, report);
            out.tolerances = json!({ "float_residual": FLOAT_TOL, "surd_max_denominator": SURD_MAX_DEN });
            Ok(certificate_rows(out, &code, &cert))
        }
        Command::VerifyMin {
            file,
            m,
            dual,
            nodes,
            kernels,
            restarts,
            seed,
            rel_tol,
            argmin_tol,
        } => {
            let code = load(&file)?;
            let kernels = KernelSpec::parse_list(&kernels)?;
            let dual: Vec<Point64> = match &dual {
                Some(p) => load(p)?.unit_points(),
                None => {
                    let supplied = nodes.as_deref().map(parse_surds).transpose()?;
                    stiffness::dual_search(&code, m, Mode::Auto, supplied.as_deref())?.float_points()
                }
            };
            if dual.iter().any(|z| z.len() != code.ambient_dim()) {
                bail!("dual points and code live in different dimensions");
            }
            let mut tol = MinTolerance::default();
            if let Some(r) = rel_tol {
                tol.rel = r;
            }
            if let Some(a) = argmin_tol {
                tol.argmin = a;
            }
            let rep = potential::verify_universal_minimum_with(&code, m, &dual, &kernels, restarts, seed, tol)?;
            let mut out = Outcome::new("verify-min", rep.pass, serde_json::to_value(&rep)?);
            out.seed = Some(seed);
            out.tolerances = json!({
                "gradient": GRADIENT_TOL,
                "cluster": CLUSTER_TOL,
                "dual_spread": 1e-9,
                "min_abs": tol.abs,
                "min_rel": tol.rel,
                "argmin": tol.argmin,
            });
            out = out
                .row("code", code.name())
                .row("dual points", rep.dual_size)
                .row("restarts", restarts);
            for v in &rep.verdicts {
                let argmin = match v.argmin_ok {
                    Some(ok) => format!("argmin dist {:.1e} {}", v.argmin_distance, ok),
                    None => "argmin n/a".into(),
                };
                out = out.row(
                    &v.kernel.to_string(),
                    format!(
                        "dual {:.12} min {:.12} margin {:+.1e} {}  {}",
                        v.dual_value,
                        v.global_min,
                        v.margin,
                        argmin,
                        if v.pass { "ok" } else { "FAIL" }
                    ),
                );
            }
            Ok(out)
        }
        Command::Spectrum { file, probe } => {
            let code = load(&file)?;
            let p = parse_probe(&code, &probe)?;
            let rep = design::spectrum(&p, &code)?;
            let mut out = Outcome::new("spectrum", true, serde_json::to_value(&rep)?)
                .row("code", code.name())
                .row("probe", rep.probe.join(", "))
                .row("distinct", rep.distinct_count);
            if let Probe::Float(_) = p {
                out.tolerances = json!({ "cluster": FLOAT_TOL });
            }
            for e in &rep.entries {
                let v = match &e.value {
                    design::DotValue::Exact(s) => s.to_string(),
                    design::DotValue::Float(x) => format!("{x:.12}"),
                };
                out = out.row(&v, e.multiplicity);
            }
            Ok(out)
        }
        Command::Symmetrize { file, output } => {
            let code = load(&file)?;
            let sym = transforms::symmetrize(&code)?;
            transformed("symmetrize", &code, &sym, output.as_ref())
        }
        Command::Facet {
            file,
            point,
            t,
            output,
        } => {
            let code = load(&file)?;
            let derived = transforms::facet_derive(&code, point, &t)?;
            let out = transformed("facet", &code, &derived, output.as_ref())?;
            Ok(out.row("t", &t))
        }
        Command::Glue {
            first,
            second,
            m,
            seed,
            output,
        } => {
            let (a, b) = (load(&first)?, load(&second)?);
            let r = transforms::glue(&a, &b, m, seed)?;
            let written = save(&r.code, output.as_ref())?;
            let pass = r.certificate.stiff && r.certificate.consistent() && r.z2_in_dual;
            let mut report = serde_json::to_value(&r)?;
            report["output"] = written;
            let mut out = Outcome::new("glue", pass, report);
            out.seed = Some(seed);
            out.tolerances = json!({ "float_residual": FLOAT_TOL });
            Ok(certificate_rows(out, &r.code, &r.certificate)
                .row("attempts", r.attempts)
                .row("shared dual point", r.z2_in_dual))
        }
        Command::RotatedCubes { n, output } => {
            let r = transforms::rotated_cubes(n)?;
            let written = save(&r.code, output.as_ref())?;
            let pass = r.certificate.stiff && r.certificate.consistent();
            let mut report = serde_json::to_value(&r)?;
            report["output"] = written;
            let mut out = Outcome::new("rotated-cubes", pass, report);
            out.tolerances = json!({ "float_residual": FLOAT_TOL, "pair_sum": FLOAT_PAIR_TOL });
            Ok(certificate_rows(out, &r.code, &r.certificate)
                .row("dual general position", r.dual_general_position)
                .row("dual 1-stiff", r.dual_1stiff))
        }
        Command::Suite { paper, criteria, seed } => {
            let ids: Vec<u8> = if criteria.is_empty() || paper {
                (1..=suite::TITLES.len() as u8).collect()
            } else {
                criteria
            };
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i as usize > suite::TITLES.len()) {
                bail!("no criterion {bad}");
            }
            let results: Vec<_> = ids
                .iter()
                .map(|&id| {
                    let r = suite::run_criterion(id, seed);
                    eprintln!("{}", r.line());
                    r
                })
                .collect();
            let pass = results.iter().all(|r| r.pass);
            let passed = results.iter().filter(|r| r.pass).count();
            let mut out = Outcome::new("suite", pass, serde_json::to_value(&results)?);
            out.seed = Some(seed);
            out.tolerances = json!({
                "gradient": GRADIENT_TOL,
                "cluster": CLUSTER_TOL,
                "float_residual": FLOAT_TOL,
            });
            Ok(out.row("criteria", format!("{passed}/{} passed", results.len())))
        }
    }
}

fn construct(name: &str, params: &[String], odd: bool) -> Result<Code> {
    let size = || -> Result<usize> {
        let p = params.first().with_context(|| format!("{name} needs a size parameter"))?;
        p.parse().with_context(|| format!("bad size {p:?}"))
    };
    Ok(match name {
        "cross-polytope" | "cross_polytope" => codes::cross_polytope(size()?)?.into(),
        "cube" => codes::cube(size()?)?.into(),
        "demicube" => codes::demicube(size()?, if odd { Parity::Odd } else { Parity::Even })?.into(),
        "e8" | "e8-roots" => codes::e8_roots().into(),
        "2_41" | "2-41" => codes::polytope_2_41().into(),
        "ngon" => codes::ngon(size()?)?.into(),
        "rotated-cubes" => transforms::rotated_cubes(size()?)?.code,
        _ => bail!("unknown configuration {name:?}"),
    })
}

fn parse_probe(code: &Code, s: &str) -> Result<Probe> {
    if let Ok(i) = s.trim().parse::<usize>() {
        if i >= code.len() {
            bail!("probe index {i} out of range for {} points", code.len());
        }
        return Ok(match code.as_lattice() {
            Some(l) => Probe::Exact(l.exact_point(i)),
            None => Probe::Float(code.unit_points().swap_remove(i)),
        });
    }
    if let Ok(surds) = parse_surds(s) {
        if let Some(p) = ExactPoint::from_surds(&surds) {
            return Ok(Probe::Exact(p));
        }
        return Ok(Probe::Float(surds.iter().map(Surd::to_f64).collect()));
    }
    let x = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("cannot read probe {s:?}"))?;
    Ok(Probe::Float(x))
}

fn transformed(command: &'static str, input: &Code, result: &Code, output: Option<&PathBuf>) -> Result<Outcome> {
    let written = save(result, output)?;
    let mut report = json!({
        "input": code_summary(input),
        "code": code_summary(result),
        "output": written,
    });
    if output.is_none() {
        report["points"] = serde_json::to_value(result)?;
    }
    Ok(Outcome::new(command, true, report)
        .row("input", format!("{} ({} points)", input.name(), input.len()))
        .row("result", format!("{} ({} points)", result.name(), result.len()))
        .row("exact", result.is_exact()))
}

fn certificate_rows(out: Outcome, code: &Code, cert: &StiffnessCertificate) -> Outcome {
    let p = &cert.properties;
    out.row("code", format!("{} ({} points)", code.name(), code.len()))
        .row("m", cert.m)
        .row("design strength", cert.design_strength)
        .row("dual points", cert.dual.points.len())
        .row("dual exact", cert.dual.exact)
        .row("dual complete", cert.dual_complete)
        .row("stiff", cert.stiff)
        .row("antipodal", p.antipodal)
        .row("cardinality bound", p.cardinality_bound)
        .row("double dual inclusion", p.double_dual_inclusion)
        .row("general position", p.general_position)
        .row("frequencies constant", p.frequencies_constant)
}

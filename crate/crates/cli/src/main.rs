//! `aip`: command-line front end for affine invariant points, John and Löwner
//! ellipsoids, symmetry groups and symmetry measures.
//!
//! Exit codes: 0 success, 1 verification failure or solver error, 2 usage or
//! input error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aip_core::body::{AffineMap, ConvexBody};
use aip_core::config::Config;
use aip_core::constructions::{
    body_c, body_k, contact_system_k, phi_jl_cd_closed_form, FamilyParams,
};
use aip_core::ellipsoids::{john_with, loewner_with, verify_contact_system, EllipsoidOptions, EllipsoidResult};
use aip_core::error::GeomError;
use aip_core::linalg::{Matrix, Vector};
use aip_core::measures::{dual_zero_search, phi_measure, point_distance_estimate};
use aip_core::points::PointMap;
use aip_core::schema::{parse_body, BODY_SCHEMA};
use aip_core::symmetry::{fixed_space, symmetry_group_with};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "aip", version, about = "Affine invariant points of convex bodies")]
struct Cli {
    /// Print the body JSON schema and exit.
    #[arg(long)]
    schema: bool,

    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

/// Run configuration; every flag also reads an `AIP_*` environment variable.
#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config file with `tol`, `samples`, `seed`, `max_iter` keys.
    #[arg(long, global = true, env = "AIP_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "AIP_SEED")]
    seed: Option<u64>,
    #[arg(long = "tol-boundary", global = true, env = "AIP_TOL_BOUNDARY")]
    tol_boundary: Option<f64>,
    #[arg(long = "tol-solver", global = true, env = "AIP_TOL_SOLVER")]
    tol_solver: Option<f64>,
    #[arg(long = "tol-group", global = true, env = "AIP_TOL_GROUP")]
    tol_group: Option<f64>,
    #[arg(long = "samples-centroid", global = true, env = "AIP_SAMPLES_CENTROID")]
    samples_centroid: Option<usize>,
    #[arg(long = "samples-net", global = true, env = "AIP_SAMPLES_NET")]
    samples_net: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json", env = "AIP_FORMAT")]
    format: Format,
    /// Progress and timing on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// John or Löwner ellipsoid of a body.
    Ellipsoid {
        #[arg(value_enum)]
        kind: EllipsoidKind,
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        /// Initial support samples (Löwner) or constraint directions (John).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Affine invariant points g, s, j, l.
    Points {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "g,s,j,l")]
        which: Vec<String>,
        /// Santaló step tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Affine symmetry group and fixed space of a polytope.
    Symmetry {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Symmetry measure φ_{p1,p2}.
    Phi {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value = "j")]
        p1: String,
        #[arg(long, default_value = "l")]
        p2: String,
    },
    /// Zeros of z ↦ p((C − z)°).
    Dualzeros {
        #[arg(long)]
        point: String,
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 33)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Lower-bound estimate of dist(p, q) over bodies between B_2 and d·B_2.
    Dist {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        bodies: usize,
    },
    /// Checks on the explicit extremal families.
    Paper {
        #[command(subcommand)]
        task: FamilyTask,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum EllipsoidKind {
    John,
    Loewner,
}

#[derive(Subcommand, Debug)]
enum FamilyTask {
    /// Contact-point certificates of K_d, or Löwner ellipsoids of K_d.
    Verify {
        #[arg(long, value_enum, default_value = "contact")]
        lemma: Lemma,
        #[arg(long, default_value_t = 2)]
        dmin: usize,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Table of φ_{j,l}(C_d) with columns d, phi, bound, ratio.
    PhiTable {
        #[arg(long, value_enum, default_value = "cd")]
        family: Family,
        #[arg(long, default_value_t = 3)]
        dmin: usize,
        #[arg(long, default_value_t = 20)]
        dmax: usize,
        /// Compute φ with the ellipsoid solvers instead of the closed form.
        #[arg(long)]
        numeric: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Lemma {
    Contact,
    Loewner,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Family {
    #[value(name = "cd", alias = "Cd")]
    Cd,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Verification(Value),
    Solver(String),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::InvalidBody(_) | GeomError::DimensionMismatch { .. } | GeomError::NotMinimal(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Solver(other.to_string()),
        }
    }
}

/// A report: a JSON document, or a table that can also go out as CSV.
enum Report {
    Json(Value),
    Table { header: Vec<&'static str>, rows: Vec<Vec<Value>>, extra: Value },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.schema {
        println!("{BODY_SCHEMA}");
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(2);
    };
    let cfg = match build_config(&cli.run) {
        Ok(c) => c,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    let start = std::time::Instant::now();
    let outcome = dispatch(command, &cfg, cli.run.verbose);
    if cli.run.verbose > 0 {
        eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(report) => match emit(&report, cli.run.format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(v)) => {
            let _ = emit(&Report::Json(v), Format::Json);
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}

fn build_config(run: &RunArgs) -> Result<Config, String> {
    let mut cfg = match &run.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Config::default(),
    };
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(t) = run.tol_boundary {
        cfg.tol.boundary = t;
    }
    if let Some(t) = run.tol_solver {
        cfg.tol.solver = t;
    }
    if let Some(t) = run.tol_group {
        cfg.tol.group = t;
    }
    if let Some(n) = run.samples_centroid {
        cfg.samples.centroid = n;
    }
    if let Some(n) = run.samples_net {
        cfg.samples.net = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_body(path: &Path) -> Result<ConvexBody, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_body(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn point_map(name: &str, cfg: &Config) -> Result<PointMap, Failure> {
    PointMap::by_name(name, cfg).ok_or_else(|| Failure::Usage(format!("unknown point {name:?}; use g, s, j or l")))
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn mat_json(m: &Matrix) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn map_json(t: &AffineMap) -> Value {
    json!({ "linear": mat_json(t.linear_part()), "translation": vec_json(t.translation_part()) })
}

fn ellipsoid_json(r: &EllipsoidResult) -> Value {
    let contacts = r.contact.as_ref().map(|c| {
        let (_, res) = verify_contact_system(c, r.tol);
        json!({
            "points": c.points,
            "weights": c.weights,
            "identity_residual": res.identity,
            "mean_residual": res.mean,
        })
    });
    json!({
        "center": vec_json(r.ellipsoid.center()),
        "shape": mat_json(r.ellipsoid.shape()),
        "volume": r.ellipsoid.volume(),
        "residual": r.residual,
        "certificate": r.certificate,
        "iterations": r.iterations,
        "tol": r.tol,
        "contacts": contacts,
    })
}

fn dispatch(command: Command, cfg: &Config, verbose: u8) -> Result<Report, Failure> {
    match command {
        Command::Ellipsoid { kind, body, tol, samples } => {
            let b = load_body(&body)?;
            let default = match kind {
                EllipsoidKind::John => cfg.samples.john,
                EllipsoidKind::Loewner => cfg.samples.loewner,
            };
            let mut opts = EllipsoidOptions::from_config(cfg, samples.unwrap_or(default));
            if let Some(t) = tol {
                if !(t > 0.0) {
                    return Err(Failure::Usage("--tol must be positive".into()));
                }
                opts.tol = t;
            }
            let r = match kind {
                EllipsoidKind::John => john_with(&b, &opts)?,
                EllipsoidKind::Loewner => loewner_with(&b, &opts)?,
            };
            let mut v = ellipsoid_json(&r);
            v["kind"] = json!(if kind == EllipsoidKind::John { "john" } else { "loewner" });
            Ok(Report::Json(v))
        }
        Command::Points { body, which, tol } => {
            let b = load_body(&body)?;
            let mut out = serde_json::Map::new();
            for name in &which {
                let m = match name.as_str() {
                    "s" => {
                        let c = *cfg;
                        PointMap::new("s", true, move |b| {
                            let p = aip_core::points::santalo_with(b, tol, &c)?;
                            Ok(aip_core::points::PointEstimate { point: p, error: tol })
                        })
                    }
                    other => point_map(other, cfg)?,
                };
                if verbose > 0 {
                    eprintln!("evaluating {name}");
                }
                let e = m.estimate(&b)?;
                out.insert(name.clone(), json!({ "point": vec_json(&e.point), "error": e.error }));
            }
            Ok(Report::Json(Value::Object(out)))
        }
        Command::Symmetry { body, tol } => {
            let b = load_body(&body)?;
            let tol = tol.unwrap_or(cfg.tol.group);
            let p = b
                .polytope_form()
                .ok_or_else(|| Failure::Usage("symmetry needs a polytope body".into()))?
                .into_owned();
            let g = symmetry_group_with(&p, tol, cfg.symmetry_vertex_limit)?;
            let f = fixed_space(&g, tol)?;
            Ok(Report::Json(json!({
                "order": g.order(),
                "elements": g.elements().iter().map(map_json).collect::<Vec<_>>(),
                "permutations": g.permutations(),
                "fixed_space": {
                    "base": vec_json(&f.base),
                    "basis": f.basis.iter().map(vec_json).collect::<Vec<_>>(),
                    "dim": f.dim,
                    "residual": f.residual,
                },
                "tol": tol,
            })))
        }
        Command::Phi { body, p1, p2 } => {
            let b = load_body(&body)?;
            let (m1, m2) = (point_map(&p1, cfg)?, point_map(&p2, cfg)?);
            let e1 = m1.estimate(&b)?;
            let e2 = m2.estimate(&b)?;
            let r = aip_core::measures::phi_from_points(&b, e1.point, e2.point)?;
            Ok(Report::Json(json!({
                "p1": p1, "p2": p2,
                "phi": r.phi, "delta": r.delta, "chord_length": r.chord_length,
                "p1_val": vec_json(&r.p1_val), "p2_val": vec_json(&r.p2_val),
                "p1_error": e1.error, "p2_error": e2.error,
                "merge_tol": aip_core::measures::MERGE_TOL,
            })))
        }
        Command::Dualzeros { point, body, grid, tol } => {
            let b = load_body(&body)?;
            let m = point_map(&point, cfg)?;
            let r = dual_zero_search(&m, &b, grid, tol, cfg)?;
            Ok(Report::Json(json!({
                "point": point,
                "zeros": r.zeros.iter().map(vec_json).collect::<Vec<_>>(),
                "residuals": r.residuals,
                "count": r.zeros.len(),
                "grid": r.grid,
                "tol": r.tol,
                "cluster_radius": r.cluster_radius,
            })))
        }
        Command::Dist { p, q, dim, bodies } => {
            if dim < 2 {
                return Err(Failure::Usage("--dim must be at least 2".into()));
            }
            let (mp, mq) = (point_map(&p, cfg)?, point_map(&q, cfg)?);
            let r = point_distance_estimate(&mp, &mq, dim, bodies, cfg.seed)?;
            Ok(Report::Json(json!({
                "p": p, "q": q, "dim": dim, "bodies": bodies, "seed": cfg.seed,
                "lower_bound": r.value, "argmax": r.argmax,
            })))
        }
        Command::Paper { task } => families(task, cfg, verbose),
    }
}

fn families(task: FamilyTask, cfg: &Config, verbose: u8) -> Result<Report, Failure> {
    match task {
        FamilyTask::Verify { lemma, dmin, dmax, tol } => {
            if dmin < 2 || dmax < dmin {
                return Err(Failure::Usage("need 2 ≤ dmin ≤ dmax".into()));
            }
            let mut rows = Vec::new();
            let mut all_ok = true;
            for d in dmin..=dmax {
                if verbose > 0 {
                    eprintln!("d = {d}");
                }
                match lemma {
                    Lemma::Contact => {
                        let p = FamilyParams::new(d)?;
                        let (ok, r) = verify_contact_system(&contact_system_k(d)?, tol);
                        let eq = p.residuals().iter().fold(0.0f64, |a, x| a.max(x.abs()));
                        let ok = ok && p.t1 > 0.0 && p.t2 > 0.0 && eq <= tol;
                        all_ok &= ok;
                        rows.push(vec![
                            json!(d),
                            json!(p.epsilon),
                            json!(p.t1),
                            json!(p.t2),
                            json!(r.identity),
                            json!(r.mean),
                            json!(eq),
                            json!(ok),
                        ]);
                    }
                    Lemma::Loewner => {
                        let opts = EllipsoidOptions::from_config(cfg, cfg.samples.loewner);
                        let r = loewner_with(&body_k(d)?, &opts)?;
                        let c = r.ellipsoid.center().norm();
                        let a = (r.ellipsoid.shape() - Matrix::identity(d + 1, d + 1)).norm();
                        let ok = c <= tol.max(1e-2) && a <= tol.max(2e-2);
                        all_ok &= ok;
                        rows.push(vec![json!(d), json!(c), json!(a), json!(r.certificate), json!(ok)]);
                    }
                }
            }
            let header = match lemma {
                Lemma::Contact => vec!["d", "epsilon", "t1", "t2", "identity_residual", "mean_residual", "equation_residual", "ok"],
                Lemma::Loewner => vec!["d", "center_norm", "shape_error", "certificate", "ok"],
            };
            let extra = json!({ "lemma": format!("{lemma:?}").to_lowercase(), "tol": tol, "ok": all_ok });
            if !all_ok {
                return Err(Failure::Verification(table_json(&header, &rows, &extra)));
            }
            Ok(Report::Table { header, rows, extra })
        }
        FamilyTask::PhiTable { family: Family::Cd, dmin, dmax, numeric } => {
            if dmin < 2 || dmax < dmin {
                return Err(Failure::Usage("need 2 ≤ dmin ≤ dmax".into()));
            }
            let mut rows = Vec::new();
            for d in dmin..=dmax {
                if verbose > 0 {
                    eprintln!("d = {d}");
                }
                let phi = if numeric {
                    phi_measure(&PointMap::john(cfg), &PointMap::loewner(cfg), &body_c(d)?)?.phi
                } else {
                    phi_jl_cd_closed_form(d)?.phi
                };
                let bound = 2.0 / (d as f64 + 1.0);
                rows.push(vec![json!(d), json!(phi), json!(bound), json!(phi / bound)]);
            }
            let extra = json!({ "family": "Cd", "method": if numeric { "numeric" } else { "closed_form" } });
            Ok(Report::Table { header: vec!["d", "phi", "bound", "ratio"], rows, extra })
        }
    }
}

fn table_json(header: &[&str], rows: &[Vec<Value>], extra: &Value) -> Value {
    let mut v = extra.clone();
    v["rows"] = json!(rows
        .iter()
        .map(|r| header.iter().zip(r).map(|(h, x)| ((*h).to_string(), x.clone())).collect::<serde_json::Map<_, _>>())
        .collect::<Vec<_>>());
    v
}

fn emit(report: &Report, format: Format) -> Result<(), String> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match (report, format) {
        (Report::Json(v), _) if format == Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap()).map_err(|e| e.to_string())
        }
        (Report::Json(_), _) => Err("csv output is only available for table reports (paper verify, paper phi-table)".into()),
        (Report::Table { header, rows, extra }, Format::Json) => {
            writeln!(out, "{}", serde_json::to_string_pretty(&table_json(header, rows, extra)).unwrap())
                .map_err(|e| e.to_string())
        }
        (Report::Table { header, rows, .. }, Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header).map_err(|e| e.to_string())?;
            for r in rows {
                let cells: Vec<String> = r
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                w.write_record(&cells).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())
        }
    }
}

//! `landscape`: experiment runner for critical families of two-layer ReLU
//! student-teacher networks.
//!
//! Every command writes a JSON report (plus CSV for tables) and a run
//! manifest into the output directory (`--out`, or `LANDSCAPE_OUT`), and
//! prints a short human-readable summary.
//!
//! Exit codes: 0 success, 2 usage error, 3 convergence failure, 4 domain error.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use landscape::extras;
use landscape::fps;
use landscape::solver::{self, StepPolicy};
use landscape::spectrum::{self, Irrep, Method, TableMode};
use landscape::symmetry::{self, ReducedPoint};
use landscape::{Error, FamilyId, FamilyType};

#[derive(Parser)]
#[command(name = "landscape", version, about = "Critical points, series coefficients and Hessian spectra of ReLU student-teacher losses")]
struct Cli {
    /// Output directory for reports and manifests.
    #[arg(long, global = true, env = "LANDSCAPE_OUT", default_value = "landscape-out")]
    out: PathBuf,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a family at one d.
    Solve {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        d: f64,
        /// Residual tolerance (default scales with d).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Series coefficients, from the direct systems or from a path fit.
    Fps {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = FpsMethod::Direct)]
        method: FpsMethod,
        /// Highest order kept (fit: fitted order, default 6).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 1e2)]
        d_lo: f64,
        #[arg(long, default_value_t = 1e6)]
        d_hi: f64,
    },
    /// Hessian spectrum split by isotypic component.
    Spectrum {
        #[command(flatten)]
        family: FamilyArgs,
        /// A value or a grid `start:end[:points]`.
        #[arg(long)]
        d: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Adapted)]
        method: MethodArg,
        #[arg(long, default_value = "all")]
        irrep: String,
    },
    /// Trivial and standard branches of type II, k=d and k=d+1, fitted over a grid.
    Table1 {
        #[arg(long, default_value_t = 1e2)]
        d_lo: f64,
        #[arg(long, default_value_t = 1e4)]
        d_hi: f64,
    },
    /// Trivial and standard spectra of type I, k=d+1 and k=d+2, at one d.
    Table2 {
        #[arg(long, default_value_t = 10.0)]
        d: f64,
        /// Defaults to dense when the matrix has at most 4000 entries.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Monte-Carlo check of the Xavier-initialization bracket.
    Xavier {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Global-minimum complex of an over-parameterized student.
    Fossil {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Interlacing certificate of type II, k=d+2, fitted over a grid.
    Interlace {
        #[arg(long, default_value = "100:1000:10")]
        d_grid: String,
        /// Also check the inequality on the full Hessian at this d.
        #[arg(long)]
        dense_d: Option<usize>,
    },
}

#[derive(Args, Clone, Copy)]
struct FamilyArgs {
    /// Family type, I or II.
    #[arg(long = "type", value_parser = parse_family_type)]
    family_type: FamilyType,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    m: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum FpsMethod {
    Direct,
    Fit,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Dense,
    Adapted,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dense => Method::Dense,
            MethodArg::Adapted => Method::Adapted,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_convergence() => 3,
            Failure::Core(Error::Unsupported(_)) => 2,
            Failure::Core(_) | Failure::Io(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) => write!(f, "usage error: {s}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Provenance of one run; numeric outputs depend only on command,
/// parameters and seed.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    parameters: Value,
    seed: Option<u64>,
    version: String,
    wall_time_s: f64,
    outputs: Vec<String>,
}

/// What a command produced.
struct Report {
    name: &'static str,
    parameters: Value,
    seed: Option<u64>,
    json: Value,
    csv: Option<String>,
    summary: String,
}

fn parse_family_type(s: &str) -> std::result::Result<FamilyType, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl FamilyArgs {
    fn id(&self) -> Outcome<FamilyId> {
        FamilyId::new(self.family_type, self.p, self.m).map_err(|e| Failure::Usage(e.to_string()))
    }
}

/// `start:end[:points]` with geometric spacing (10 points by default), or a
/// single value.
fn parse_grid(s: &str) -> Outcome<Vec<f64>> {
    let bad = || Failure::Usage(format!("bad d grid {s:?}; expected a value or start:end[:points]"));
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b] | [a, b, _] => {
            let (a, b) = (num(a)?, num(b)?);
            let n = match parts.get(2) {
                Some(t) => t.trim().parse::<usize>().map_err(|_| bad())?,
                None => 10,
            };
            if !(a > 0.0 && b > a) || n < 2 {
                return Err(bad());
            }
            let r = (b / a).ln();
            Ok((0..n).map(|i| a * (r * i as f64 / (n - 1) as f64).exp()).collect())
        }
        _ => Err(bad()),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn solve_point(f: FamilyId, d: f64) -> Outcome<ReducedPoint> {
    Ok(solver::solve_family(f, d, &StepPolicy::default())?.point)
}

fn cmd_solve(fa: FamilyArgs, d: f64, tol: Option<f64>) -> Outcome<Report> {
    let f = fa.id()?;
    f.descriptor(d).map_err(|e| Failure::Usage(e.to_string()))?;
    let policy = StepPolicy { tol, ..Default::default() };
    let r = solver::solve_family(f, d, &policy)?;
    let loss = symmetry::reduced_loss(&r.point)?;
    let classified = solver::classify_type(&r.point).ok();
    let summary = format!(
        "{f} at d = {d}: residual {:.2e} after {} iterations, ξ₁ = {:.12}, loss = {loss:.12e}",
        r.residual, r.iterations, r.point.xi[0]
    );
    Ok(Report {
        name: "solve",
        parameters: json!({ "family": f, "d": d, "tol": tol }),
        seed: None,
        json: json!({
            "family": f,
            "d": d,
            "xi": r.point.xi,
            "residual": r.residual,
            "iterations": r.iterations,
            "history": r.history,
            "loss": loss,
            "classified_type": classified,
        }),
        csv: None,
        summary,
    })
}

fn named(names: &[&str], values: &[f64]) -> Value {
    Value::Object(names.iter().zip(values).map(|(n, v)| (n.to_string(), json!(v))).collect())
}

fn table_csv(rows: &[fps::CoeffEntry]) -> String {
    let mut s = String::from("coordinate,order,value,determined,stderr\n");
    for r in rows {
        let e = r.stderr.map(|x| format!("{x:.6e}")).unwrap_or_default();
        s.push_str(&format!("{},{},{:.17e},{},{}\n", r.coordinate, r.order, r.value, r.determined, e));
    }
    s
}

fn cmd_fps(fa: FamilyArgs, method: FpsMethod, order: Option<usize>, d_lo: f64, d_hi: f64) -> Outcome<Report> {
    use FamilyType::*;
    let f = fa.id()?;
    let parameters = json!({ "family": f, "method": method, "order": order, "d_lo": d_lo, "d_hi": d_hi });
    let (json, csv, summary) = match method {
        FpsMethod::Direct => match (f.family_type, f.p, f.m) {
            (II, 1, 2) => {
                let r = fps::type2_kd2_coeffs()?;
                let s = fps::TYPE2_KD2_NAMES
                    .iter()
                    .zip(r.values)
                    .map(|(n, v)| format!("{n} = {v:.16}"))
                    .collect::<Vec<_>>()
                    .join("\n");
                let j = json!({ "family": f, "system": "type2_kd2", "values": named(&fps::TYPE2_KD2_NAMES, &r.values), "report": r });
                (j, None, s)
            }
            (II, 1, 1) => {
                let r = fps::type2_kd1_coeffs()?;
                let mut s = format!("ϑ = {:.16}\np(ϑ) = {:.3e}\np′(ϑ) = {:.6}", r.theta, r.p_value, r.p_derivative);
                for (n, v) in fps::TYPE2_KD1_NAMES.iter().zip(r.values) {
                    s.push_str(&format!("\n{n} = {v:.16}"));
                }
                let j = json!({ "family": f, "system": "type2_kd1", "theta": r.theta, "values": named(&fps::TYPE2_KD1_NAMES, &r.values), "report": r });
                (j, None, s)
            }
            (I, 1, 1) => {
                let r = fps::type1_kd1_coeffs()?;
                let s = format!("g3 = {:.16}\nh1 = {:.16}\norder residual = {:.2e}", r.g3, r.h1, r.order_residual);
                (json!({ "family": f, "system": "type1_kd1", "report": r }), None, s)
            }
            (I, 1, 2) => {
                let r = fps::type1_kd2_coeffs()?;
                let s = fps::TYPE1_KD2_NAMES
                    .iter()
                    .zip(r.values)
                    .map(|(n, v)| format!("{n} = {v:.16}"))
                    .collect::<Vec<_>>()
                    .join("\n");
                let j = json!({ "family": f, "system": "type1_kd2", "values": named(&fps::TYPE1_KD2_NAMES, &r.values), "report": r });
                (j, None, s)
            }
            _ => {
                let exp = fps::series_expansion(f)?;
                let mut rows = fps::coefficient_table(&exp);
                if let Some(j) = order {
                    rows.retain(|r| r.order <= j);
                }
                let s = format!("{f}: {} coefficients from the order-by-order solve (κ = {})", rows.len(), exp.kappa);
                let j = json!({ "family": f, "system": "series", "kappa": exp.kappa, "coefficients": rows, "warnings": exp.warnings });
                (j, Some(table_csv(&rows)), s)
            }
        },
        FpsMethod::Fit => {
            let order = order.unwrap_or(6);
            let kappa = fps::family_spec(f).kappa;
            let policy = StepPolicy { samples_per_decade: 10.0, ..Default::default() };
            let path = solver::continue_family(f, d_lo, d_hi, &policy)?;
            let exp = fps::fit_coeffs_from_path(&path, kappa, order)?;
            let rows = fps::coefficient_table(&exp);
            let s = format!("{f}: fitted order {order} in d^(-1/{kappa}) over {} samples", path.samples.len());
            let j = json!({ "family": f, "system": "path_fit", "kappa": kappa, "coefficients": rows, "warnings": exp.warnings });
            (j, Some(table_csv(&rows)), s)
        }
    };
    Ok(Report { name: "fps", parameters, seed: None, json, csv, summary })
}

fn spectrum_at(f: FamilyId, d: f64, method: Method) -> Outcome<spectrum::SpectrumReport> {
    let pt = solve_point(f, d)?;
    Ok(match method {
        Method::Adapted => spectrum::adapted_spectrum(&pt)?,
        Method::Dense => spectrum::full_spectrum(&symmetry::embed(&pt)?, &pt.descriptor)?,
    })
}

fn cmd_spectrum(fa: FamilyArgs, d: &str, method: MethodArg, irrep: &str) -> Outcome<Report> {
    let f = fa.id()?;
    let grid = parse_grid(d)?;
    let keep: Vec<Irrep> = if irrep == "all" {
        spectrum::IRREPS.to_vec()
    } else {
        vec![irrep.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?]
    };
    let mut reports = Vec::new();
    let mut csv = String::from("d,irrep,label,value,multiplicity,copies\n");
    let mut summary = Vec::new();
    for &dv in &grid {
        let mut rep = spectrum_at(f, dv, method.into())?;
        rep.groups.retain(|g| keep.contains(&g.irrep));
        for line in rep.to_csv().lines().skip(1) {
            csv.push_str(&format!("{dv},{line}\n"));
        }
        let lows: Vec<String> = rep
            .groups
            .iter()
            .filter_map(|g| g.eigenvalues.first().map(|e| format!("{}: {:.6}", g.irrep, e.value)))
            .collect();
        summary.push(format!("d = {dv}: smallest per irrep {}", lows.join(", ")));
        reports.push(json!({ "d": dv, "report": rep }));
    }
    Ok(Report {
        name: "spectrum",
        parameters: json!({ "family": f, "d": grid, "method": method, "irrep": irrep }),
        seed: None,
        json: json!({ "family": f, "spectra": reports }),
        csv: Some(csv),
        summary: summary.join("\n"),
    })
}

fn tables(name: &'static str, families: &[FamilyId], mode: TableMode, parameters: Value) -> Outcome<Report> {
    let mut reports = Vec::new();
    let mut csv = String::from("family,irrep,branch,kind,value,slope,stderr,rms,flagged\n");
    let mut summary = Vec::new();
    for &f in families {
        let r = spectrum::table_report(f, mode)?;
        for line in r.to_csv().lines().skip(1) {
            csv.push_str(&format!("\"{f}\",{line}\n"));
        }
        for irrep in [Irrep::T, Irrep::S] {
            let vals: Vec<String> = r
                .rows_of(irrep)
                .iter()
                .map(|row| match row.slope {
                    Some(sl) => format!("{sl:.4}d{:+.4}", row.value),
                    None => format!("{:.5}", row.value),
                })
                .collect();
            summary.push(format!("{f} {irrep}: {}", vals.join(", ")));
        }
        reports.push(r);
    }
    Ok(Report { name, parameters, seed: None, json: json!({ "tables": reports }), csv: Some(csv), summary: summary.join("\n") })
}

fn cmd_table1(d_lo: f64, d_hi: f64) -> Outcome<Report> {
    let fams = [FamilyId::new(FamilyType::II, 1, 0)?, FamilyId::new(FamilyType::II, 1, 1)?];
    tables("table1", &fams, TableMode::Asymptotic { d_lo, d_hi }, json!({ "d_lo": d_lo, "d_hi": d_hi }))
}

fn cmd_table2(d: f64, method: Option<MethodArg>) -> Outcome<Report> {
    let fams = [FamilyId::new(FamilyType::I, 1, 1)?, FamilyId::new(FamilyType::I, 1, 2)?];
    let method = method.unwrap_or(if (d + 3.0) * d <= spectrum::DENSE_MAX as f64 { MethodArg::Dense } else { MethodArg::Adapted });
    tables("table2", &fams, TableMode::Exact { d, method: method.into() }, json!({ "d": d, "method": method }))
}

fn cmd_xavier(d: usize, samples: usize, seed: u64) -> Outcome<Report> {
    let e = extras::xavier_mc(d, samples, seed)?;
    let within = e.within(0.0);
    let summary = format!(
        "d = {d}: E[2L] = {:.5} ± {:.5}, bracket [{:.5}, {:.5}], within: {within}; E[L] = {:.5}",
        e.estimate, e.stderr, e.lo, e.hi, e.loss_mean
    );
    Ok(Report {
        name: "xavier",
        parameters: json!({ "d": d, "samples": samples }),
        seed: Some(seed),
        json: json!({ "estimate": e, "within_bounds": within, "within_3sigma": e.within(3.0) }),
        csv: None,
        summary,
    })
}

fn cmd_fossil(k: usize, d: usize, samples: usize, seed: u64) -> Outcome<Report> {
    let r = extras::global_min_complex_check(k, d, samples, seed)?;
    let summary = format!(
        "Δ★({k},{d}): {} vertices, {} edges, connected: {}, cycle: {}; max sampled loss {:.2e} over {} points",
        r.vertices.len(),
        r.edges.len(),
        r.connected,
        r.is_cycle,
        r.max_sample_loss,
        r.samples
    );
    Ok(Report {
        name: "fossil",
        parameters: json!({ "k": k, "d": d, "samples": samples }),
        seed: Some(seed),
        json: to_json(&r),
        csv: None,
        summary,
    })
}

fn cmd_interlace(d_grid: &str, dense_d: Option<usize>) -> Outcome<Report> {
    let f = FamilyId::new(FamilyType::II, 1, 2)?;
    let grid = parse_grid(d_grid)?;
    let mut certs = Vec::new();
    for &d in &grid {
        certs.push(spectrum::interlacing_block(&solve_point(f, d)?)?);
    }
    let mut csv = String::from("d,lambda_hi,lambda_lo,verdict\n");
    for c in &certs {
        csv.push_str(&format!("{},{:.15e},{:.15e},{:?}\n", c.d, c.eigenvalues[0], c.eigenvalues[1], c.verdict));
    }
    let mut fits = Vec::new();
    if grid.len() >= 6 {
        let kappa = fps::family_spec(f).kappa;
        let terms = if kappa == 4 { 4 } else { 3 };
        for b in 0..2 {
            let vals: Vec<f64> = certs.iter().map(|c| c.eigenvalues[b]).collect();
            fits.push(spectrum::fit_branch(&grid, &vals, kappa, terms));
        }
    }
    let dense = match dense_d {
        Some(d) => {
            let pt = solve_point(f, d as f64)?;
            Some(spectrum::interlacing_certificate(&symmetry::embed(&pt)?, &pt.descriptor)?)
        }
        None => None,
    };
    let mut summary = match fits.as_slice() {
        [a, b] => format!("fitted 2×2 constants: ({:.4}, {:.4})", a.value, b.value),
        _ => format!("{} grid points (at least 6 needed for a fit)", grid.len()),
    };
    if let Some(c) = &dense {
        summary.push_str(&format!(
            "\nd = {}: min eig Ĥ = {:.6}, min eig H = {}, interlacing holds: {:?}",
            c.d,
            c.submatrix_min.unwrap_or(f64::NAN),
            c.hessian_min.map(|h| format!("{h:.6}")).unwrap_or_else(|| "n/a".into()),
            c.interlacing_holds
        ));
    }
    Ok(Report {
        name: "interlace",
        parameters: json!({ "d_grid": grid, "dense_d": dense_d }),
        seed: None,
        json: json!({ "family": f, "certificates": certs, "fits": fits, "dense": dense }),
        csv: Some(csv),
        summary,
    })
}

fn write_outputs(dir: &Path, report: &Report, command: &str, started: Instant) -> Outcome<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut outputs = Vec::new();
    let json_path = dir.join(format!("{}.json", report.name));
    std::fs::write(&json_path, serde_json::to_string_pretty(&report.json).expect("json") + "\n")?;
    outputs.push(json_path);
    if let Some(csv) = &report.csv {
        let p = dir.join(format!("{}.csv", report.name));
        std::fs::write(&p, csv)?;
        outputs.push(p);
    }
    let manifest = RunManifest {
        command: command.to_string(),
        parameters: report.parameters.clone(),
        seed: report.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mp = dir.join(format!("{}.manifest.json", report.name));
    std::fs::write(&mp, serde_json::to_string_pretty(&manifest).expect("json") + "\n")?;
    outputs.push(mp);
    Ok(outputs)
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let started = Instant::now();
    let report = match cli.command {
        Command::Solve { family, d, tol } => cmd_solve(family, d, tol)?,
        Command::Fps { family, method, order, d_lo, d_hi } => cmd_fps(family, method, order, d_lo, d_hi)?,
        Command::Spectrum { family, d, method, irrep } => cmd_spectrum(family, &d, method, &irrep)?,
        Command::Table1 { d_lo, d_hi } => cmd_table1(d_lo, d_hi)?,
        Command::Table2 { d, method } => cmd_table2(d, method)?,
        Command::Xavier { d, samples, seed } => cmd_xavier(d, samples, seed)?,
        Command::Fossil { k, d, samples, seed } => cmd_fossil(k, d, samples, seed)?,
        Command::Interlace { d_grid, dense_d } => cmd_interlace(&d_grid, dense_d)?,
    };
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let outputs = write_outputs(&cli.out, &report, &command, started)?;
    println!("{}", report.summary);
    for p in outputs {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

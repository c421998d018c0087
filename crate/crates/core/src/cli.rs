//! Command-line front end. Every command writes files only; the exit code
//! carries the verdict: 0 success, 1 property failure, 2 usage error,
//! 3 numerical abort.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::branes::{orientation_flows, separate_brane, string_spectrum, symmetry_report, BraneStack, Orientation};
use crate::checks::{correspondence_residual, pbw_confluence, star_associativity};
use crate::cohomology::{build_cocycle, gji_residual, multibracket_tensor};
use crate::dynamics::{evolve_classical, evolve_quantum, order_check, FlowProblem, HamiltonianSlot, Trajectory};
use crate::enveloping::{gutt_star, star_truncated, Enveloping, PolyMatrix, Polynomial, DEFAULT_MAX_DEGREE};
use crate::error::Error;
use crate::lie_core::{build_root_system, build_su, LieAlgebraData};
use crate::linalg::{max_abs_diff, random_unit_vector, CMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Abort(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Abort(_) => EXIT_ABORT,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { step, t, last_good } => CliError::Abort(format!(
                "non-finite state at step {step} (t = {t}); last finite state at step {} (t = {}):\n{}",
                last_good.step,
                last_good.t,
                format_matrix(&last_good.f)
            )),
            e @ (Error::DegreeOverflow { .. } | Error::FlowDegreeOverflow { .. }) => CliError::Abort(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "liebrane", version, about = "Multibrackets, star products and brane flows on su(n)")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output path; each command has its own default.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Pass/fail tolerance override for `check`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// ħ truncation order for star products and quantum flows.
    #[arg(long = "hbar-order", global = true)]
    pub hbar_order: Option<usize>,
    /// Degree cap for enveloping-algebra and polynomial arithmetic.
    #[arg(long = "max-degree", global = true, default_value_t = DEFAULT_MAX_DEGREE)]
    pub max_degree: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dump basis and structure constants of su(n).
    Algebra {
        #[arg(long)]
        n: usize,
    },
    /// Emit the cocycle of the given order.
    Cocycle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        order: usize,
    },
    /// Run an identity check and report its residuals.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        what: CheckKind,
        /// Cocycle order for `gji` (default 3).
        #[arg(long)]
        order: Option<usize>,
        /// Break the structure constants or tensor before checking.
        #[arg(long)]
        corrupt: bool,
    },
    /// Star product of two polynomials in the text format.
    Star {
        #[arg(long)]
        n: usize,
        /// Left factor, e.g. `(1,0) * x1^1`.
        #[arg(long)]
        f: String,
        /// Right factor.
        #[arg(long)]
        g: String,
    },
    /// Integrate a flow scenario to CSV plus a summary JSON.
    Evolve {
        /// Scenario JSON: n, positions, flow and F0.
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Symmetry report and string spectrum of a brane scenario.
    Branes {
        /// Scenario JSON: n, positions and an optional separation.
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Jacobi,
    Gji,
    Pbw,
    StarAssoc,
    Correspondence,
}

/// Matrix entry in scenario files: a real number or `[re, im]`.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Matrix(Vec<Vec<Entry>>),
    /// `"random-seed:<int>"`: a seeded random unit element of su(n).
    Tagged(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    #[default]
    Classical,
    Quantum,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowSpec {
    pub orientation: Orientation,
    #[serde(rename = "T")]
    pub duration: f64,
    pub h: f64,
    #[serde(default = "default_truncation")]
    pub hbar_truncation: usize,
    #[serde(default)]
    pub mode: FlowMode,
    /// Replaces the orientation slots by single generators (1-based indices).
    #[serde(default)]
    pub generators: Option<Vec<usize>>,
}

fn default_truncation() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Separation {
    pub brane: usize,
    pub displacement: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub positions: Vec<Vec<f64>>,
    #[serde(default)]
    pub flow: Option<FlowSpec>,
    #[serde(rename = "F0", default)]
    pub f0: Option<InitialState>,
    #[serde(default)]
    pub separate: Option<Separation>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("LIEBRANE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn execute(cli: &Cli) -> CliResult<i32> {
    let out = |default: &str| cli.out.clone().unwrap_or_else(|| PathBuf::from(default));
    match &cli.command {
        Command::Algebra { n } => {
            let g = build_su(*n)?;
            write_json(&out("algebra.json"), &g.to_dump())?;
            Ok(EXIT_OK)
        }
        Command::Cocycle { n, order } => {
            let g = build_su(*n)?;
            write_json(&out("cocycle.json"), &build_cocycle(&g, *order)?.to_json())?;
            Ok(EXIT_OK)
        }
        Command::Check { n, what, order, corrupt } => {
            let report = run_check(cli, *n, *what, *order, *corrupt)?;
            let pass = report["pass"].as_bool().unwrap_or(false);
            write_json(&out("check.json"), &report)?;
            if !pass {
                eprintln!("check {what:?} failed: {}", report["residuals"]);
            }
            Ok(if pass { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Star { n, f, g } => {
            let alg = build_su(*n)?;
            let env = Enveloping::with_max_degree(&alg, cli.max_degree);
            let (pf, pg) = (Polynomial::parse(f, alg.dim())?, Polynomial::parse(g, alg.dim())?);
            let product = match cli.hbar_order {
                Some(k) => star_truncated(&env, &pf, &pg, k)?,
                None => gutt_star(&env, &pf, &pg)?,
            };
            let report = json!({
                "n": n,
                "f": pf.to_text(),
                "g": pg.to_text(),
                "hbar_order": cli.hbar_order,
                "product": product.to_text(),
            });
            write_json(&out("star.json"), &report)?;
            Ok(EXIT_OK)
        }
        Command::Evolve { scenario } => {
            let sc = read_scenario(scenario)?;
            run_evolve(cli, &sc, &out("trajectory.csv"))
        }
        Command::Branes { scenario } => {
            let sc = read_scenario(scenario)?;
            let mut stack = BraneStack::new(sc.positions.clone())?;
            if stack.n() != sc.n {
                return Err(CliError::Usage(format!("n = {} but {} positions given", sc.n, stack.n())));
            }
            let report = match &sc.separate {
                Some(s) => {
                    let (moved, r) = separate_brane(&stack, s.brane, &s.displacement)?;
                    stack = moved;
                    r
                }
                None => symmetry_report(&stack),
            };
            let strings = string_spectrum(&stack, false);
            let stretched = strings.iter().filter(|s| s.stretched).count();
            let doc = json!({
                "positions": stack.positions(),
                "symmetry": report,
                "strings": strings,
                "stretched_count": stretched,
            });
            write_json(&out("branes.json"), &doc)?;
            Ok(EXIT_OK)
        }
    }
}

fn run_check(cli: &Cli, n: usize, what: CheckKind, order: Option<usize>, corrupt: bool) -> CliResult<serde_json::Value> {
    let g = build_su(n)?;
    let seed = cli.seed;
    let mut residuals = BTreeMap::new();
    let tol = match what {
        CheckKind::Jacobi => {
            let mut f = g.structure().clone();
            if corrupt {
                // [T_1, T_2] gains a T_1 component.
                f.set_raw(0, 1, 0, f.get(0, 1, 0) + 1.0);
                f.set_raw(1, 0, 0, f.get(1, 0, 0) - 1.0);
            }
            residuals.insert("jacobi", f.jacobi_residual());
            1e-10
        }
        CheckKind::Gji => {
            let order = order.unwrap_or(3);
            let mut t = multibracket_tensor(&build_cocycle(&g, order)?, &g)?;
            if corrupt {
                let lower = t.entries().keys().next().cloned().expect("tensors are nonzero");
                t.add_component(&lower, lower[0], 1.0);
            }
            residuals.insert("gji", gji_residual(&t, 20, seed));
            1e-8
        }
        CheckKind::Pbw => {
            let env = Enveloping::with_max_degree(&g, cli.max_degree);
            residuals.insert("pbw_confluence", pbw_confluence(&env, 200, 5.min(cli.max_degree), seed)?);
            1e-12
        }
        CheckKind::StarAssoc => {
            let env = Enveloping::with_max_degree(&g, cli.max_degree);
            residuals.insert("star_associativity", star_associativity(&env, 100, 3, seed)?);
            1e-12
        }
        CheckKind::Correspondence => {
            let env = Enveloping::with_max_degree(&g, cli.max_degree);
            let mut t = multibracket_tensor(&build_cocycle(&g, 3)?, &g)?;
            if corrupt {
                let lower = t.entries().keys().next().cloned().expect("tensors are nonzero");
                t.add_component(&lower, lower[0], 1.0);
            }
            residuals.insert("correspondence", correspondence_residual(&g, &env, &t, 100, 3, seed)?);
            1e-10
        }
    };
    let tol = cli.tol.unwrap_or(tol);
    let pass = residuals.values().all(|r| r.is_finite() && *r < tol);
    Ok(json!({
        "what": what.to_possible_value().map(|v| v.get_name().to_string()),
        "n": n,
        "order": order,
        "seed": seed,
        "corrupted": corrupt,
        "tolerance": tol,
        "residuals": residuals,
        "pass": pass,
    }))
}

fn read_scenario(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn initial_state(g: &LieAlgebraData, f0: Option<&InitialState>, seed: u64) -> CliResult<CMatrix> {
    let d = g.rep_dim();
    match f0 {
        None => Ok(g.basis()[0].clone()),
        Some(InitialState::Matrix(rows)) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(CliError::Usage(format!("F0 must be {d}×{d}")));
            }
            Ok(CMatrix::from_fn(d, d, |i, j| match rows[i][j] {
                Entry::Real(x) => Complex64::new(x, 0.0),
                Entry::Complex([re, im]) => Complex64::new(re, im),
            }))
        }
        Some(InitialState::Tagged(tag)) => {
            let s = tag
                .strip_prefix("random-seed:")
                .and_then(|s| s.trim().parse::<u64>().ok())
                .ok_or_else(|| CliError::Usage(format!("F0 tag {tag:?} is not random-seed:<int>")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.wrapping_add(seed));
            Ok(g.element(&random_unit_vector(g.dim(), &mut rng)))
        }
    }
}

fn flow_problem(g: &LieAlgebraData, spec: &FlowSpec) -> CliResult<FlowProblem> {
    match &spec.generators {
        Some(gens) => {
            let hams = gens
                .iter()
                .map(|&a| {
                    if a == 0 {
                        return Err(CliError::Usage("generator indices are 1-based".into()));
                    }
                    Ok(HamiltonianSlot::generator(g, a - 1)?)
                })
                .collect::<CliResult<Vec<_>>>()?;
            let order = 2 * hams.len() + 1;
            let t = multibracket_tensor(&build_cocycle(g, order)?, g)?;
            Ok(FlowProblem::new(g, &t, hams)?)
        }
        None => Ok(orientation_flows(g, &build_root_system(g), spec.orientation)?),
    }
}

fn run_evolve(cli: &Cli, sc: &Scenario, csv_path: &Path) -> CliResult<i32> {
    let spec = sc
        .flow
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no flow section".into()))?;
    if sc.positions.len() != sc.n {
        return Err(CliError::Usage(format!("n = {} but {} positions given", sc.n, sc.positions.len())));
    }
    let g = build_su(sc.n)?;
    let problem = flow_problem(&g, spec)?;
    let f0 = initial_state(&g, sc.f0.as_ref(), cli.seed)?;
    let classical = evolve_classical(&problem, &f0, spec.duration, spec.h)?;
    // Richardson ratio on a coarse grid where truncation error dominates roundoff.
    let ratio = order_check(&problem, &f0, spec.duration, (spec.duration / 50.0).max(spec.h))?;
    let mut summary = json!({
        "conservation": classical.conservation(),
        "order_check": ratio,
        "residual_warnings": classical.residual_warnings,
        "steps": classical.states.len() - 1,
        "slots": problem.hamiltonians().iter().map(|h| h.label.clone()).collect::<Vec<_>>(),
    });
    match spec.mode {
        FlowMode::Classical => write_atomic(csv_path, classical_csv(&classical)?.as_bytes())?,
        FlowMode::Quantum => {
            let k = cli.hbar_order.unwrap_or(spec.hbar_truncation);
            let env = Enveloping::with_max_degree(&g, cli.max_degree);
            let q = evolve_quantum(&problem, &env, &PolyMatrix::from_matrix(&f0, g.dim()), spec.duration, spec.h, k)?;
            let gap = q
                .states
                .iter()
                .zip(&classical.states)
                .map(|(a, b)| max_abs_diff(&a.evaluate_ones(0), b))
                .fold(0.0, f64::max);
            summary["hbar_truncation"] = json!(k);
            summary["hbar0_vs_classical"] = json!(gap);
            write_atomic(csv_path, quantum_csv(&q.times, &q.states, k)?.as_bytes())?;
        }
    }
    write_json(&csv_path.with_extension("summary.json"), &summary)?;
    Ok(EXIT_OK)
}

fn entry_headers(d: usize, prefix: &str) -> Vec<String> {
    let mut h = Vec::with_capacity(2 * d * d);
    for i in 1..=d {
        for j in 1..=d {
            h.push(format!("{prefix}re_{i}{j}"));
            h.push(format!("{prefix}im_{i}{j}"));
        }
    }
    h
}

fn push_entries(row: &mut Vec<String>, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(format!("{:e}", m[(i, j)].re));
            row.push(format!("{:e}", m[(i, j)].im));
        }
    }
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Columns: `t`, Re/Im of each entry, then every monitor.
pub fn classical_csv(tr: &Trajectory) -> CliResult<String> {
    let d = tr.states[0].nrows();
    let mut header = vec!["t".to_string()];
    header.extend(entry_headers(d, ""));
    header.extend(tr.monitors.iter().map(|(n, _)| n.clone()));
    let rows = (0..tr.states.len())
        .map(|s| {
            let mut row = vec![format!("{:e}", tr.times[s])];
            push_entries(&mut row, &tr.states[s]);
            row.extend(tr.monitors.iter().map(|(_, v)| format!("{:e}", v[s])));
            row
        })
        .collect();
    csv_bytes(header, rows)
}

/// Columns: `t`, then for each `ħ^k`, `k ≤ K`, Re/Im of each entry of that
/// channel evaluated at `x = (1, …, 1)`.
pub fn quantum_csv(times: &[f64], states: &[PolyMatrix], k: usize) -> CliResult<String> {
    let d = states[0].d();
    let mut header = vec!["t".to_string()];
    for p in 0..=k {
        header.extend(entry_headers(d, &format!("hbar{p}_")));
    }
    let rows = times
        .iter()
        .zip(states)
        .map(|(t, s)| {
            let mut row = vec![format!("{t:e}")];
            for p in 0..=k {
                push_entries(&mut row, &s.evaluate_ones(p));
            }
            row
        })
        .collect();
    csv_bytes(header, rows)
}

fn format_matrix(m: &CMatrix) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| format!("({:e},{:e})", m[(i, j)].re, m[(i, j)].im))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes next to the target and renames into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

//! Command-line front end for `stefan1d`.
//!
//! Exit codes: 0 success, 1 parse or I/O error, 2 domain error, 3 failed
//! verification, 4 simulation stopped with unfrozen walkers, 5 a repro
//! scenario failed.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use stefan1d::maximal::solve;
use stefan1d::particles::{compare_to_formula, run, FormulaComparison, RunReport, SimConfig};
use stefan1d::potential1d::{dominates, order_leq_sh_open, potential, PiecewiseQuadratic};
use stefan1d::repro::{run_manifest, ReproManifest, ReproOptions};
use stefan1d::stability::{
    lipschitz_ratio, monotonicity_report, weak_convergence_experiment, LipschitzFamilyParams,
};
use stefan1d::{Error, OpenSet1D, OrderCertificate, StepMeasure, DEFAULT_TOL};

use output::{emit, fmt_num, to_json, Cell, Csv};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Domain(Error),
    Verification(Error),
    Incomplete(String),
    Repro,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Incomplete(_) => 4,
            CliError::Repro => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Verification { .. } => CliError::Verification(e),
            other => CliError::Domain(other),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Verification(e) => write!(f, "{e}"),
            CliError::Incomplete(m) => write!(f, "{m}"),
            CliError::Repro => write!(f, "one or more repro scenarios failed"),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "stefan1d", version, about = "Maximal solutions of the 1D supercooled Stefan problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Io {
    /// JSON input file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute and certify the maximal target.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Block endpoints as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check subharmonic order between two measures.
    Order {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact Newtonian potential of a measure.
    Potential {
        #[command(flatten)]
        io: Io,
        /// Samples of the potential as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Number of sample points for --csv.
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Run the particle system and compare with the closed form.
    Simulate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: Option<u64>,
        /// Frozen-walker histogram as CSV.
        #[arg(long)]
        hist: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Stability experiments.
    Stability {
        #[arg(long, value_enum)]
        family: Family,
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reproduce the reference values.
    Repro {
        /// Machine-readable manifest.
        #[arg(long)]
        json: bool,
        /// Replace every tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Lipschitz,
    Monotone,
    Weak,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Io(e.to_string()))?,
    };
    serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    emit(Some(path), text)
}

#[derive(Deserialize)]
struct SolveInput {
    measure: StepMeasure,
    open_set: OpenSet1D,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct SolveOutput {
    blocks: Vec<[f64; 4]>,
    k_n: Vec<f64>,
    beta_n: Vec<f64>,
    certificate: Option<OrderCertificate>,
}

fn cmd_solve(io: &Io, csv: Option<&Path>, tol: Option<f64>) -> CliResult {
    let input: SolveInput = read_json(io.input.as_deref())?;
    let tol = tol.or(input.tol).unwrap_or(DEFAULT_TOL);
    let sol = solve(&input.measure, &input.open_set, tol)?;
    let out = SolveOutput {
        blocks: sol.blocks.iter().map(|b| [b.c, b.e, b.f, b.d]).collect(),
        k_n: sol.provenance.iter().map(|m| m.k).collect(),
        beta_n: sol.provenance.iter().map(|m| m.beta).collect(),
        certificate: sol.certificate,
    };
    if let Some(path) = csv {
        let mut table = Csv::new(&["component", "c", "e", "f", "d"]);
        for (i, [c, e, f, d]) in out.blocks.iter().enumerate() {
            table.row(&[Cell::Int(i), Cell::Num(*c), Cell::Num(*e), Cell::Num(*f), Cell::Num(*d)]);
        }
        write_file(path, table.as_str())?;
    }
    emit(io.out.as_deref(), &to_json(&out)?)
}

#[derive(Deserialize)]
struct OrderInput {
    mu: StepMeasure,
    nu: StepMeasure,
    /// Checked on all of ℝ when absent.
    #[serde(default)]
    open_set: Option<OpenSet1D>,
    #[serde(default)]
    tol: Option<f64>,
}

fn cmd_order(io: &Io, tol: Option<f64>) -> CliResult {
    let input: OrderInput = read_json(io.input.as_deref())?;
    let tol = tol.or(input.tol).unwrap_or(DEFAULT_TOL);
    let cert = match &input.open_set {
        Some(o) => order_leq_sh_open(&input.mu, &input.nu, o, tol)?,
        None => dominates(&input.mu, &input.nu, tol),
    };
    emit(io.out.as_deref(), &to_json(&cert)?)
}

#[derive(Deserialize)]
struct PotentialInput {
    measure: StepMeasure,
}

fn cmd_potential(io: &Io, csv: Option<&Path>, points: usize) -> CliResult {
    let input: PotentialInput = read_json(io.input.as_deref())?;
    let u: PiecewiseQuadratic = potential(&input.measure);
    if let Some(path) = csv {
        let (lo, hi) = input.measure.support_hull().unwrap_or((-1.0, 1.0));
        let pad = 0.25 * (hi - lo).max(1.0);
        let (lo, hi) = (lo - pad, hi + pad);
        let n = points.max(2);
        let mut table = Csv::new(&["y", "U"]);
        for i in 0..n {
            let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            table.row(&[Cell::Num(y), Cell::Num(u.eval(y))]);
        }
        write_file(path, table.as_str())?;
    }
    emit(io.out.as_deref(), &to_json(&u)?)
}

#[derive(Deserialize)]
struct SimulateInput {
    measure: StepMeasure,
    open_set: OpenSet1D,
    config: SimConfig,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOutput {
    report: RunReport,
    comparison: Vec<FormulaComparison>,
}

fn cmd_simulate(io: &Io, seed: Option<u64>, hist: Option<&Path>, tol: Option<f64>) -> CliResult {
    let mut input: SimulateInput = read_json(io.input.as_deref())?;
    if let Some(s) = seed {
        input.config.seed = s;
    }
    let tol = tol.or(input.tol).unwrap_or(DEFAULT_TOL);
    let report = run(&input.measure, &input.open_set, &input.config)?;
    let sol = solve(&input.measure, &input.open_set, tol)?;
    let comparison = compare_to_formula(&report, &sol)?;
    if let Some(path) = hist {
        let mut table = Csv::new(&["component", "bin_lo", "bin_hi", "density", "target"]);
        for (i, (comp, pair)) in report.components.iter().zip(&sol.blocks).enumerate() {
            let target = pair.to_measure()?;
            let edges = comp.histogram.edges();
            for (j, dens) in comp.histogram.density.iter().enumerate() {
                let (a, b) = (edges[j], edges[j + 1]);
                table.row(&[
                    Cell::Int(i),
                    Cell::Num(a),
                    Cell::Num(b),
                    Cell::Num(*dens),
                    Cell::Num(target.mass_on(a, b) / (b - a)),
                ]);
            }
        }
        write_file(path, table.as_str())?;
    }
    let all_frozen = report.all_frozen;
    let unfrozen: usize = report.components.iter().map(|c| c.unfrozen).sum();
    emit(io.out.as_deref(), &to_json(&SimulateOutput { report, comparison })?)?;
    if !all_frozen {
        return Err(CliError::Incomplete(format!(
            "{unfrozen} walkers still moving at t_max"
        )));
    }
    Ok(())
}

/// Ladder towards the blow-up corner: `1 − rx` shrinks tenfold per rung and
/// `y` stays small enough for the endpoint shift to fit in the middle gap.
fn default_lipschitz_ladder() -> Vec<LipschitzFamilyParams> {
    (1..=3)
        .map(|j| {
            let x = 1.0 - 10f64.powi(-j);
            let r = x;
            LipschitzFamilyParams {
                x,
                y: 0.5 * (1.0 - r * x).powi(2),
                r,
                c: 1.0 - 10f64.powi(-j - 1),
            }
        })
        .collect()
}

#[derive(Deserialize)]
struct StabilityInput {
    #[serde(default)]
    params: Vec<LipschitzFamilyParams>,
    #[serde(default)]
    pairs: Vec<(StepMeasure, StepMeasure)>,
    #[serde(default)]
    open_set: Option<OpenSet1D>,
    #[serde(default)]
    sequence: Vec<StepMeasure>,
    #[serde(default)]
    limit: Option<StepMeasure>,
}

#[derive(Serialize)]
struct LipschitzRow {
    params: LipschitzFamilyParams,
    input_l1_gap: f64,
    output_l1_gap: f64,
    ratio: Option<f64>,
    closed_form_ratio: Option<f64>,
}

#[derive(Serialize)]
struct MonotoneRow {
    index: usize,
    input_l1_gap: f64,
    output_l1_gap: f64,
    monotone_in: bool,
    monotone_out: bool,
}

fn cmd_stability(family: Family, io: &Io, csv: Option<&Path>, tol: Option<f64>) -> CliResult {
    let input: StabilityInput = match &io.input {
        Some(p) => read_json(Some(p))?,
        None => StabilityInput {
            params: Vec::new(),
            pairs: Vec::new(),
            open_set: None,
            sequence: Vec::new(),
            limit: None,
        },
    };
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let domain = match input.open_set {
        Some(o) => o,
        None => OpenSet1D::interval(-1.0, 1.0)?,
    };
    let (json, table) = match family {
        Family::Lipschitz => {
            let params = if input.params.is_empty() {
                default_lipschitz_ladder()
            } else {
                input.params
            };
            let mut table = Csv::new(&[
                "x", "y", "r", "c", "input_gap", "output_gap", "ratio", "closed_form_ratio",
            ]);
            let mut rows = Vec::with_capacity(params.len());
            for p in params {
                let rep = lipschitz_ratio(&p)?;
                table.row(&[
                    Cell::Num(p.x),
                    Cell::Num(p.y),
                    Cell::Num(p.r),
                    Cell::Num(p.c),
                    Cell::Num(rep.input_l1_gap),
                    Cell::Num(rep.output_l1_gap),
                    Cell::Num(rep.ratio.unwrap_or(f64::NAN)),
                    Cell::Num(p.closed_form_ratio()),
                ]);
                rows.push(LipschitzRow {
                    params: p,
                    input_l1_gap: rep.input_l1_gap,
                    output_l1_gap: rep.output_l1_gap,
                    ratio: rep.ratio,
                    closed_form_ratio: rep.closed_form_ratio,
                });
            }
            (to_json(&rows)?, table)
        }
        Family::Monotone => {
            let pairs = if input.pairs.is_empty() {
                vec![
                    (
                        StepMeasure::indicator(-0.9, 0.0)?,
                        StepMeasure::indicator(-1.0, 0.0)?,
                    ),
                    (
                        StepMeasure::scaled_indicator(0.99, 0.0, 0.75f64.sqrt())?,
                        StepMeasure::scaled_indicator(0.99, -0.5, 1.0)?,
                    ),
                ]
            } else {
                input.pairs
            };
            let mut table = Csv::new(&[
                "index", "input_gap", "output_gap", "monotone_in", "monotone_out",
            ]);
            let mut rows = Vec::with_capacity(pairs.len());
            for (index, (mu1, mu2)) in pairs.iter().enumerate() {
                let rep = monotonicity_report(mu1, mu2, &domain, tol)?;
                table.row(&[
                    Cell::Int(index),
                    Cell::Num(rep.input_l1_gap),
                    Cell::Num(rep.output_l1_gap),
                    Cell::Bool(rep.monotone_in),
                    Cell::Bool(rep.monotone_out),
                ]);
                rows.push(MonotoneRow {
                    index,
                    input_l1_gap: rep.input_l1_gap,
                    output_l1_gap: rep.output_l1_gap,
                    monotone_in: rep.monotone_in,
                    monotone_out: rep.monotone_out,
                });
            }
            (to_json(&rows)?, table)
        }
        Family::Weak => {
            let limit = match input.limit {
                Some(m) => m,
                None => StepMeasure::indicator(-0.5, 0.5)?,
            };
            let sequence = if input.sequence.is_empty() {
                (2..=64)
                    .map(|l| limit.scale(1.0 - 1.0 / l as f64))
                    .collect::<stefan1d::Result<Vec<_>>>()?
            } else {
                input.sequence
            };
            let result = weak_convergence_experiment(&sequence, &limit, &domain, tol)?;
            let mut table = Csv::new(&["index", "mass_gap", "moment_gap", "l1_gap", "bound"]);
            for r in &result.rows {
                table.row(&[
                    Cell::Int(r.index),
                    Cell::Num(r.mass_gap),
                    Cell::Num(r.moment_gap),
                    Cell::Num(r.l1_gap),
                    Cell::Num(result.constant * (r.mass_gap + r.moment_gap)),
                ]);
            }
            (to_json(&result)?, table)
        }
    };
    if let Some(path) = csv {
        write_file(path, table.as_str())?;
    }
    emit(io.out.as_deref(), &json)
}

fn repro_table(m: &ReproManifest) -> String {
    let mut s = String::new();
    for sc in &m.scenarios {
        let verdict = if sc.pass { "PASS" } else { "FAIL" };
        s += &format!("== {} [{verdict}]  {}\n", sc.name, sc.inputs);
        if let Some(err) = &sc.error {
            s += &format!("   error: {err}\n");
        }
        for r in &sc.rows {
            let mark = if r.pass { "ok  " } else { "FAIL" };
            let source = serde_json::to_value(r.source)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            s += &format!(
                "   {mark} {:<52} expected {:>20}  computed {:>20}  tol {:>8}  ({source})\n",
                r.quantity,
                fmt_num(r.expected),
                fmt_num(r.computed),
                fmt_num(r.tolerance),
            );
        }
    }
    s += if m.pass { "all scenarios pass\n" } else { "some scenarios FAIL\n" };
    s
}

fn cmd_repro(json: bool, tol: Option<f64>, seed: Option<u64>, out: Option<&Path>) -> CliResult {
    let mut opts = ReproOptions {
        tol_override: tol,
        ..ReproOptions::default()
    };
    if let Some(s) = seed {
        opts.seed = s;
    }
    let manifest = run_manifest(&opts);
    let text = if json {
        to_json(&manifest)?
    } else {
        repro_table(&manifest)
    };
    emit(out, &text)?;
    if manifest.pass {
        Ok(())
    } else {
        Err(CliError::Repro)
    }
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Solve { io, csv, tol } => cmd_solve(&io, csv.as_deref(), tol),
        Command::Order { io, tol } => cmd_order(&io, tol),
        Command::Potential { io, csv, points } => cmd_potential(&io, csv.as_deref(), points),
        Command::Simulate {
            io,
            seed,
            hist,
            tol,
        } => cmd_simulate(&io, seed, hist.as_deref(), tol),
        Command::Stability {
            family,
            io,
            csv,
            tol,
        } => cmd_stability(family, &io, csv.as_deref(), tol),
        Command::Repro {
            json,
            tol,
            seed,
            out,
        } => cmd_repro(json, tol, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stefan1d: {e}");
            ExitCode::from(e.code())
        }
    }
}

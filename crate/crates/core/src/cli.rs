//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    corollary_numerical_bound, corollary_salzer_bound, lebesgue_constant,
    replicate_numerical_chain, replicate_salzer_chain, theorem_main_bounds, ChainReport, COROLLARY_EPS,
    COROLLARY_MIN_N, LEBESGUE_OFFSET, LEBESGUE_SLOPE,
};
use crate::experiments::{
    fit_loglog, run_tables, salzer_certificates, select_indexes, DegreeRun, ExperimentRow, FitColumn,
    Setup, TableConfig, WeightKind, DEFAULT_N_VALUES, DEFAULT_TRIAL_COUNT, TABLE_EPS,
};
use crate::error::Error;
use crate::nodes::{chebyshev_nodes, lambda_weights, perturb_nodes, salzer_weights, Precision};
use crate::perturbation::max_abs;

/// Exit status for a run where a checked invariant failed.
pub const EXIT_VIOLATION: i32 = 2;
/// Exit status for usage, runtime and hypothesis errors.
pub const EXIT_ERROR: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "barylab", version, about = "Backward-error experiments for barycentric interpolation")]
pub struct Cli {
    /// Worker threads for the parallel parts.
    #[arg(long, global = true, env = "BARYLAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Salzer,
    Numerical,
}

impl From<Kind> for WeightKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Salzer => WeightKind::Salzer,
            Kind::Numerical => WeightKind::Numerical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Column {
    Beta,
    Zeta,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rounded Chebyshev points of the second kind.
    Nodes {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Relative perturbation magnitude applied to every node.
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Barycentric weights for the rounded Chebyshev points.
    Weights {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = Kind::Salzer)]
        kind: Kind,
    },
    /// Lebesgue constant estimate on [-1, 1].
    Lebesgue {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Samples per gap between consecutive nodes.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Kind::Salzer)]
        kind: Kind,
    },
    /// Maximum backward error table.
    Table {
        /// Comma separated even degrees.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Kind::Salzer)]
        kind: Kind,
        #[arg(long, default_value_t = DEFAULT_TRIAL_COUNT)]
        trials: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Permit degrees above 10^4.
        #[arg(long)]
        allow_large: bool,
    },
    /// Upper bounds on the backward error.
    Bounds {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = Kind::Salzer)]
        kind: Kind,
        #[arg(long, default_value_t = COROLLARY_EPS)]
        eps: f64,
        /// Use measured weight errors and Lebesgue constant instead of the cited constants.
        #[arg(long)]
        measured: bool,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Search for lower-bound certificates with Salzer's weights.
    Certificate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
    },
    /// Log-log least squares fit of a table produced by `table`.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Column::Beta)]
        column: Column,
    },
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation(Vec<String>),
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(Status::Ok) => 0,
        Ok(Status::Violation(v)) => {
            for line in v {
                eprintln!("violation: {line}");
            }
            EXIT_VIOLATION
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<Status> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Nodes { n, perturb, seed } => cmd_nodes(n as usize, perturb, seed, out),
        Command::Weights { n, kind } => cmd_weights(n as usize, kind, out),
        Command::Lebesgue { n, grid, kind } => cmd_lebesgue(n as usize, grid, kind, out),
        Command::Table { n, kind, trials, out: path, format, allow_large } => {
            let config = TableConfig {
                n_values: n.unwrap_or_else(|| DEFAULT_N_VALUES.to_vec()),
                kinds: vec![kind.into()],
                trial_count: trials,
                allow_large,
            };
            cmd_table(&config, path.as_deref(), format, out)
        }
        Command::Bounds { n, kind, eps, measured, grid } => cmd_bounds(n as usize, kind, eps, measured, grid, out),
        Command::Certificate { n } => cmd_certificate(n as usize, out),
        Command::Fit { input, column } => cmd_fit(&input, column, out),
    }
}

fn cmd_nodes(n: usize, perturb: Option<f64>, seed: u64, out: &mut dyn Write) -> anyhow::Result<Status> {
    let mut family = chebyshev_nodes(n)?;
    if let Some(m) = perturb {
        family = perturb_nodes(&family, m, seed)?;
    }
    writeln!(out, "k,working,extended")?;
    for (k, (x, xh)) in family.nodes_wk().iter().zip(family.nodes_hi()).enumerate() {
        writeln!(out, "{k},{x:e},{}", xh.to_decimal(32))?;
    }
    Ok(Status::Ok)
}

fn cmd_weights(n: usize, kind: Kind, out: &mut dyn Write) -> anyhow::Result<Status> {
    let family = chebyshev_nodes(n)?.rounded();
    let (working, extended) = match kind {
        Kind::Salzer => {
            let w = salzer_weights(n)?;
            (w.clone(), w)
        }
        Kind::Numerical => (
            lambda_weights(&family, Precision::Working, 2.0)?,
            lambda_weights(&family, Precision::Extended, 2.0)?,
        ),
    };
    writeln!(out, "k,working,extended")?;
    for (k, (w, wh)) in working.working().iter().zip(extended.extended()).enumerate() {
        writeln!(out, "{k},{w:e},{}", wh.to_decimal(32))?;
    }
    Ok(Status::Ok)
}

fn cmd_lebesgue(n: usize, grid: usize, kind: Kind, out: &mut dyn Write) -> anyhow::Result<Status> {
    if grid < 2 {
        bail!("--grid must be at least 2, got {grid}");
    }
    let family = chebyshev_nodes(n)?.rounded();
    let w = match kind {
        Kind::Salzer => salzer_weights(n)?,
        Kind::Numerical => lambda_weights(&family, Precision::Working, 2.0)?,
    };
    let est = lebesgue_constant(family.nodes_wk(), &w, -1.0, 1.0, grid)?;
    writeln!(out, "estimate = {est:.6}")?;
    if n < 2 {
        return Ok(Status::Ok);
    }
    let cited = LEBESGUE_SLOPE * (n as f64).ln() + LEBESGUE_OFFSET;
    writeln!(out, "bound {LEBESGUE_SLOPE} ln n + {LEBESGUE_OFFSET} = {cited:.6}")?;
    if est > cited {
        return Ok(Status::Violation(vec![format!("estimate {est} exceeds {cited}")]));
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct TableReport<'a> {
    kind: WeightKind,
    eps: f64,
    trial_count: usize,
    rows: Vec<ExperimentRow>,
    runs: &'a [DegreeRun],
}

fn corollary(kind: WeightKind, n: usize) -> Option<f64> {
    if n < COROLLARY_MIN_N {
        return None;
    }
    match kind {
        WeightKind::Salzer => corollary_salzer_bound(n, TABLE_EPS).ok(),
        WeightKind::Numerical => corollary_numerical_bound(n, TABLE_EPS).ok(),
    }
}

/// Ratio law, domination and certificate linkage for one finished degree.
pub fn run_violations(run: &DegreeRun) -> Vec<String> {
    let mut v = Vec::new();
    for r in &run.results {
        let row = r.row;
        let tag = format!("n = {} ({:?})", row.n, r.kind);
        if !(1.0..=4.0).contains(&row.ratio) {
            v.push(format!("{tag}: ratio {} outside [1, 4]", row.ratio));
        }
        if let Some(b) = corollary(r.kind, row.n) {
            if row.beta > b {
                v.push(format!("{tag}: beta {} exceeds corollary bound {b}", row.beta));
            }
        }
        for c in &r.certificates {
            if !c.holds {
                v.push(format!(
                    "{tag}: certificate at k = {}, j = {} guarantees {} but measured {}",
                    c.certificate.k, c.certificate.j, c.certificate.guaranteed_beta, c.measured_beta
                ));
            }
        }
        if !r.certificates.is_empty() && row.beta < 0.16 * row.zeta_inf {
            v.push(format!("{tag}: certified row has beta below 0.16 zeta"));
        }
    }
    v
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(io::stdout()),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                if !dir.is_dir() {
                    bail!("output directory {} does not exist", dir.display());
                }
            }
            Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
    })
}

fn cmd_table(config: &TableConfig, path: Option<&Path>, format: Format, out: &mut dyn Write) -> anyhow::Result<Status> {
    if config.trial_count == 0 {
        bail!("--trials must be positive");
    }
    let kind = config.kinds[0];
    let mut sink = open_output(path)?;
    let mut violations = Vec::new();
    let runs = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            let runs = run_tables(config, |run| {
                w.serialize(run.results[0].row).map_err(|e| Error::Output(e.to_string()))?;
                w.flush().map_err(|e| Error::Output(e.to_string()))?;
                Ok(())
            })?;
            w.flush()?;
            runs
        }
        Format::Json => {
            let runs = run_tables(config, |_| Ok(()))?;
            let report = TableReport {
                kind,
                eps: TABLE_EPS,
                trial_count: config.trial_count,
                rows: runs.iter().map(|r| r.results[0].row).collect(),
                runs: &runs,
            };
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
            runs
        }
    };
    sink.flush()?;
    for run in &runs {
        violations.extend(run_violations(run));
    }
    if path.is_some() {
        writeln!(out, "wrote {} rows", runs.len())?;
    }
    Ok(if violations.is_empty() { Status::Ok } else { Status::Violation(violations) })
}

fn print_chain(c: &ChainReport, out: &mut dyn Write) -> anyhow::Result<()> {
    writeln!(out, "zeta bound = {:.4e}", c.zeta_bound)?;
    writeln!(out, "lebesgue bound = {:.6}", c.lebesgue_bound)?;
    writeln!(out, "corollary = {:.4e}", c.corollary)?;
    Ok(())
}

fn cmd_bounds(
    n: usize,
    kind: Kind,
    eps: f64,
    measured: bool,
    grid: usize,
    out: &mut dyn Write,
) -> anyhow::Result<Status> {
    let report = if measured {
        if grid < 2 {
            bail!("--grid must be at least 2, got {grid}");
        }
        let setup = Setup::new(n)?;
        let (used, zeta) = match kind {
            Kind::Salzer => (&setup.salzer, &setup.zeta_s),
            Kind::Numerical => (&setup.numerical, &setup.zeta_r),
        };
        let zeta_inf = max_abs(zeta);
        let exact = chebyshev_nodes(n)?;
        let node_error = exact.rounding_error();
        let leb = lebesgue_constant(setup.family.nodes_wk(), used, -1.0, 1.0, grid)?;
        writeln!(out, "measured zeta = {zeta_inf:.4e}")?;
        writeln!(out, "measured lebesgue = {leb:.6}")?;
        theorem_main_bounds(n, eps, zeta_inf, 0.0, leb, node_error, (0.0, 0.0))
    } else {
        let chain = match kind {
            Kind::Salzer => replicate_salzer_chain(n, eps)?,
            Kind::Numerical => replicate_numerical_chain(n, eps)?,
        };
        print_chain(&chain, out)?;
        chain.report
    };
    match (&report.z, &report.bounds) {
        (Some(z), Some(b)) => {
            writeln!(out, "Z = {z:.4e}")?;
            writeln!(out, "nu = {:.4e}", b.nu)?;
            writeln!(out, "alpha = {:.4e}", b.alpha)?;
            writeln!(out, "beta = {:.4e}", b.beta)?;
            writeln!(out, "node displacement = {:.4e}", b.x_displacement)?;
            Ok(Status::Ok)
        }
        _ => bail!("hypothesis failed: {}", report.violated.unwrap_or_default()),
    }
}

fn cmd_certificate(n: usize, out: &mut dyn Write) -> anyhow::Result<Status> {
    if n % 2 == 1 {
        bail!("n must be even");
    }
    let setup = Setup::new(n)?;
    let selected = select_indexes(&setup.zeta_r, &setup.zeta_s, n)?;
    let records = salzer_certificates(&setup, &selected)?;
    if records.is_empty() {
        bail!("no certificate issued for n = {n}");
    }
    writeln!(out, "j,k,x,s,guaranteed_beta,measured_beta,holds")?;
    let mut violations = Vec::new();
    for r in &records {
        let c = &r.certificate;
        writeln!(out, "{},{},{:e},{:e},{:e},{:e},{}", c.j, c.k, c.x, c.s, c.guaranteed_beta, r.measured_beta, r.holds)?;
        if !r.holds {
            violations.push(format!("j = {}, k = {}: measured {} below {}", c.j, c.k, r.measured_beta, c.guaranteed_beta));
        }
    }
    Ok(if violations.is_empty() { Status::Ok } else { Status::Violation(violations) })
}

fn cmd_fit(input: &Path, column: Column, out: &mut dyn Write) -> anyhow::Result<Status> {
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let rows = rdr.deserialize().collect::<Result<Vec<ExperimentRow>, _>>()?;
    let col = match column {
        Column::Beta => FitColumn::Beta,
        Column::Zeta => FitColumn::Zeta,
    };
    let fit = fit_loglog(&rows, col)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&fit)?)?;
    Ok(Status::Ok)
}

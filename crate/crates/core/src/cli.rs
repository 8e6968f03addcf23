//! Batch driver behind the `auxamg` binary: build or load a problem, set up
//! the hierarchy, solve, and write CSV or JSON-lines reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::cycle::{solve, CycleOptions};
use crate::error::{AmgError, Result};
use crate::hierarchy::{setup_hierarchy, HierarchyOptions, HierarchyStats, LocalityMode};
use crate::problems::{self, LinearSystem};
use crate::sparse::read_matrix_market;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// 5-point Poisson, `n` cells per side.
    Poisson2d,
    /// P1 elements on the split unit square, `n` cells per side.
    FemSquare,
    /// P1 elements on a graded, jittered unit square, `n` cells per side.
    Graded,
    /// P1 elements on the unit disk with `n` rings.
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

/// `pre,post` smoothing sweep counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sweeps {
    pub pre: usize,
    pub post: usize,
}

impl FromStr for Sweeps {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected 'pre,post', got '{s}'"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"));
        Ok(Sweeps {
            pre: parse(a)?,
            post: parse(b)?,
        })
    }
}

impl fmt::Display for Sweeps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.pre, self.post)
    }
}

/// Solve one or more SPD systems with auxiliary-grid AMG.
#[derive(Debug, Clone, Parser)]
#[command(name = "auxamg", version)]
pub struct RunConfig {
    /// Built-in problem generator.
    #[arg(long, value_enum, group = "source")]
    pub gen: Option<Generator>,

    /// Problem size(s) for --gen; a comma list runs a sweep.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    pub n: Vec<usize>,

    /// Matrix Market file (needs --coords).
    #[arg(long, group = "source", requires = "coords")]
    pub matrix: Option<PathBuf>,

    /// One `x y` line per unknown of --matrix.
    #[arg(long, requires = "matrix")]
    pub coords: Option<PathBuf>,

    /// Triangle mesh file; solves -Δu = 1 with zero boundary values.
    #[arg(long, group = "source")]
    pub mesh: Option<PathBuf>,

    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,

    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,

    /// Inner flexible CG steps per coarse correction.
    #[arg(long, default_value_t = 2)]
    pub inner: usize,

    #[arg(long, default_value = "1,1")]
    pub sweeps: Sweeps,

    #[arg(long, default_value_t = 64)]
    pub coarsest_size: usize,

    /// Keep at most this many outer search directions.
    #[arg(long)]
    pub max_directions: Option<usize>,

    /// Fail if a fine coupling spans non-neighboring auxiliary cells.
    #[arg(long, conflicts_with = "lump_dropped")]
    pub strict_locality: bool,

    /// Add such couplings to the diagonal instead of dropping them.
    #[arg(long)]
    pub lump_dropped: bool,

    /// Report file; residual histories go next to it.
    #[arg(long)]
    pub report: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: ReportFormat,

    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl RunConfig {
    pub fn cycle_options(&self) -> CycleOptions {
        CycleOptions {
            n_inner: self.inner,
            pre_sweeps: self.sweeps.pre,
            post_sweeps: self.sweeps.post,
            max_outer: self.max_iters,
            rtol: self.rtol,
            max_directions: self.max_directions,
        }
    }

    pub fn hierarchy_options(&self) -> HierarchyOptions {
        HierarchyOptions {
            coarsest_size: self.coarsest_size,
            locality: if self.strict_locality {
                LocalityMode::Strict
            } else if self.lump_dropped {
                LocalityMode::Lump
            } else {
                LocalityMode::Drop
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let sources = [self.gen.is_some(), self.matrix.is_some(), self.mesh.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(AmgError::Argument(
                "give exactly one of --gen, --matrix/--coords, --mesh".into(),
            ));
        }
        if self.matrix.is_some() != self.coords.is_some() {
            return Err(AmgError::Argument("--matrix and --coords go together".into()));
        }
        if self.gen.is_some() && self.n.is_empty() {
            return Err(AmgError::Argument("--n needs at least one size".into()));
        }
        if self.threads == Some(0) {
            return Err(AmgError::Argument("--threads must be positive".into()));
        }
        self.cycle_options().validate()
    }
}

/// One solved problem, mirroring a row of a timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub n: usize,
    pub nnz: usize,
    pub hierarchy: HierarchyStats,
    pub dropped_couplings: usize,
    pub iterations: usize,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// The fixed CSV columns of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub levels: usize,
    pub opcomplexity: f64,
    pub iters: usize,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
    pub converged: bool,
}

impl From<&RunReport> for CsvRow {
    fn from(r: &RunReport) -> Self {
        CsvRow {
            n: r.n,
            levels: r.hierarchy.levels,
            opcomplexity: r.hierarchy.operator_complexity,
            iters: r.iterations,
            setup_s: r.setup_s,
            solve_s: r.solve_s,
            total_s: r.total_s,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub iter: usize,
    pub residual: f64,
}

fn ms(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

/// Builds the linear system for a generator and size.
pub fn generate(gen: Generator, n: usize) -> Result<LinearSystem> {
    match gen {
        Generator::Poisson2d => problems::gen_poisson_uniform2d(n),
        Generator::FemSquare => problems::assemble_fem_triangle(&problems::unit_square_mesh(n)?, 1.0),
        Generator::Graded => problems::assemble_fem_triangle(&problems::graded_square_mesh(n, 0.3, 0.15, 7)?, 1.0),
        Generator::Disk => problems::assemble_fem_triangle(&problems::disk_mesh(n, 1.0)?, 1.0),
    }
}

fn load_problems(config: &RunConfig) -> Result<Vec<(String, LinearSystem)>> {
    if let Some(gen) = config.gen {
        let name = gen.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        return config
            .n
            .iter()
            .map(|&n| Ok((format!("{name}:{n}"), generate(gen, n)?)))
            .collect();
    }
    if let (Some(m), Some(c)) = (&config.matrix, &config.coords) {
        let a = read_matrix_market(m)?;
        let coords = problems::read_coords(c)?;
        if coords.len() != a.n_rows() {
            return Err(AmgError::Size {
                what: "coordinates file lines",
                expected: a.n_rows(),
                got: coords.len(),
            });
        }
        let b = vec![1.0; a.n_rows()];
        return Ok(vec![(
            m.display().to_string(),
            LinearSystem {
                a,
                b,
                coords,
                exact: None,
            },
        )]);
    }
    if let Some(path) = &config.mesh {
        let mesh = problems::read_mesh(path)?;
        return Ok(vec![(path.display().to_string(), problems::assemble_fem_triangle(&mesh, 1.0)?)]);
    }
    Err(AmgError::Argument("no problem source given".into()))
}

/// Sets up and solves one system.
pub fn run_system(name: &str, sys: &LinearSystem, config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let h = setup_hierarchy(&sys.a, &sys.coords, &config.hierarchy_options())?;
    let res = solve(&sys.a, &sys.b, &h, &config.cycle_options())?;
    let total = start.elapsed().as_secs_f64();
    let stats = h.stats();
    info!(
        "{name}: N={} levels={} iters={} converged={}",
        sys.n(),
        stats.levels,
        res.iterations,
        res.converged
    );
    Ok(RunReport {
        problem: name.to_string(),
        n: sys.n(),
        nnz: sys.a.nnz(),
        hierarchy: stats,
        dropped_couplings: h.locality.dropped.len(),
        iterations: res.iterations,
        setup_s: ms(res.timings.setup_s),
        solve_s: ms(res.timings.solve_s),
        total_s: ms(total.max(res.timings.total_s)),
        residual_history: res.residual_history,
        converged: res.converged,
    })
}

/// Runs every problem of the configuration, on a private thread pool when
/// `--threads` is given, and writes the report if requested.
pub fn run(config: &RunConfig) -> Result<Vec<RunReport>> {
    config.validate()?;
    let work = || -> Result<Vec<RunReport>> {
        let systems = load_problems(config)?;
        systems
            .iter()
            .map(|(name, sys)| run_system(name, sys, config))
            .collect()
    };
    let reports = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| AmgError::Argument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    if let Some(path) = &config.report {
        emit_report(&reports, config.format, path)?;
    }
    Ok(reports)
}

/// Path of the residual-history file belonging to a CSV report.
pub fn residual_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    report.with_file_name(format!("{stem}.residuals.csv"))
}

/// Writes reports as CSV (plus `<stem>.residuals.csv`) or JSON lines.
pub fn emit_report(reports: &[RunReport], format: ReportFormat, path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| AmgError::Report(e.to_string());
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
            for r in reports {
                w.serialize(CsvRow::from(r)).map_err(csv_err)?;
            }
            w.flush()?;
            let mut w = csv::Writer::from_path(residual_path(path)).map_err(csv_err)?;
            for r in reports {
                for (iter, &residual) in r.residual_history.iter().enumerate() {
                    w.serialize(ResidualRow { n: r.n, iter, residual }).map_err(csv_err)?;
                }
            }
            w.flush()?;
        }
        ReportFormat::Jsonl => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&serde_json::to_string(r).map_err(|e| AmgError::Report(e.to_string()))?);
                s.push('\n');
            }
            std::fs::write(path, s)?;
        }
    }
    Ok(())
}

pub fn read_report_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AmgError::Report(e.to_string()))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| AmgError::Report(e.to_string()))
}

pub fn read_residuals_csv(path: &Path) -> Result<Vec<ResidualRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AmgError::Report(e.to_string()))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| AmgError::Report(e.to_string()))
}

pub fn read_report_jsonl(path: &Path) -> Result<Vec<RunReport>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| AmgError::parse(i + 1, e.to_string())))
        .collect()
}

/// Plain-text summary table for the terminal.
pub fn format_table(reports: &[RunReport]) -> String {
    let mut s = format!(
        "{:<20} {:>9} {:>6} {:>7} {:>6} {:>9} {:>9} {:>9} {:>5}\n",
        "problem", "N", "levels", "opcx", "iters", "setup_s", "solve_s", "total_s", "conv"
    );
    for r in reports {
        s.push_str(&format!(
            "{:<20} {:>9} {:>6} {:>7.3} {:>6} {:>9.3} {:>9.3} {:>9.3} {:>5}\n",
            r.problem,
            r.n,
            r.hierarchy.levels,
            r.hierarchy.operator_complexity,
            r.iterations,
            r.setup_s,
            r.solve_s,
            r.total_s,
            r.converged
        ));
    }
    s
}

//! Command-line front end over the bounds engine, the verification oracles,
//! and the simulator.
//!
//! Five subcommands: `bounds` (maximum cell size for one protocol/shape
//! combination), `table` (the planar-maxima and lifetime-ratio summary
//! tables), `verify` (closed forms checked against independent estimators),
//! `simulate` (duty-cycle runs and multi-config lifetime comparisons), and
//! `export-partition` (cell lattice records for external plotting).
//!
//! Every subcommand prints a human-readable table by default and switches to
//! machine formats with `--json` or `--csv`; JSON payloads carry a
//! `schema_version` field and parse back into the structs that emitted them.
//! Commands are side-effect-free except for the output files `simulate` and
//! `export-partition` declare. Exit codes: 0 success (or a passing verify
//! verdict), 1 runtime failure or a failing verdict, 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    lemma1_field_size, lifetime_table, max_cell, table1, BindingConstraint, LifetimeTable,
    MaxCellRow, PaperAgreement, Protocol, SubcellRegime,
};
use crate::config::{RunConfig, KEY_DOCS};
use crate::geometry::{
    max_distance_oracle, sphere_chain_union_volume, CellShape, OracleTarget, PlacedShape,
    ShapeKind, ALL_SHAPES, CHAIN_MIN_SAMPLES, ORACLE_MIN_SAMPLES,
};
use crate::partition::{build_partition, hgaf_worst_case_grid_search, Partition};
use crate::point::Point;
use crate::sim::{compare_lifetimes, run, series_csv, SimConfig, SimReport};
use crate::SCHEMA_VERSION;

/// What one invocation printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A serializable payload tagged with the output schema version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Versioned { schema_version: SCHEMA_VERSION, body }
    }
}

/// Planar maxima with the range they were computed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarTable {
    pub comm_range: f64,
    pub rows: Vec<MaxCellRow>,
}

/// One closed-form-vs-estimator check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub label: String,
    pub quantity: String,
    pub expected: f64,
    pub observed: f64,
    /// Relative for sampled estimators, absolute for the grid search.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub target: String,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<VerifyRow>,
    pub pass: bool,
}

/// One cell of a lattice export: index, clipped centroid, clipped vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: [i64; 3],
    pub centroid: [f64; 3],
    pub vertices: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeExport {
    pub dimension: usize,
    pub origin: [f64; 3],
    pub extent: [f64; 3],
    pub protocol: String,
    pub shape: String,
    pub cell_size: f64,
    pub subcell_size: Option<f64>,
    pub phase: u64,
    pub cell_count: usize,
    pub cells: Vec<CellRecord>,
}

/// `report.json` contents: the resolved run configuration and its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub config: SimConfig,
    pub report: SimReport,
}

#[derive(Parser)]
#[command(
    name = "gafcell",
    version,
    about = "Cell-size bounds, verification oracles, and a duty-cycle simulator \
             for geographic adaptive fidelity protocols",
    arg_required_else_help = true,
    propagate_version = true
)]
struct Cli {
    /// Emit JSON (with a schema_version field) instead of a human table.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV ('.' decimals, ',' separators, header row) instead of a
    /// human table.
    #[arg(long, global = true)]
    csv: bool,
    /// Refuse to run randomized commands without an explicit seed.
    #[arg(long, global = true)]
    strict_seed: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum energy-efficient cell size for one protocol and cell shape.
    Bounds {
        /// Protocol: gaf, hgaf, or ehgaf.
        #[arg(long)]
        protocol: String,
        /// Cell shape: square, triangle, hexagon, cube, tetrahedron,
        /// octahedron, dodecahedron, or icosahedron.
        #[arg(long)]
        shape: String,
        /// Communication range R.
        #[arg(long, default_value_t = 1.0)]
        range: f64,
        /// Finite subcell size d; omit for the infinitesimal-subcell limit.
        #[arg(long)]
        subcell: Option<f64>,
    },
    /// Summary tables: 1 = planar maxima, 2 = 3D lifetime ratios.
    Table {
        /// Which table: 1 or 2.
        #[arg(long)]
        which: u32,
        /// Use the published cell measures in table 2 (keeps the
        /// requirement-I-only tetrahedron value).
        #[arg(long)]
        paper_values: bool,
        /// Communication range R.
        #[arg(long, default_value_t = 1.0)]
        range: f64,
    },
    /// Check closed forms against their independent estimators.
    Verify {
        /// What to check: metrics (sampled cell-pair distances), worst-case
        /// (subcell grid search), or lemma1 (chain-volume Monte Carlo).
        #[arg(long)]
        target: String,
        /// Restrict the metrics target to one shape; default is all eight.
        #[arg(long)]
        shape: Option<String>,
        /// Chain length for the lemma1 target.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Sample count; scientific notation accepted (e.g. 1e7).
        #[arg(long, default_value = "1e6")]
        samples: String,
        /// Seed for the sampled estimators.
        #[arg(long)]
        seed: Option<u64>,
        /// Cell size for the worst-case target.
        #[arg(long, default_value_t = 0.6)]
        cell_size: f64,
        /// Subcell size for the worst-case target.
        #[arg(long, default_value_t = 0.2)]
        subcell: f64,
        /// Override the pass tolerance (relative for sampled targets,
        /// absolute for worst-case).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run the duty-cycle simulator, or compare lifetimes across configs.
    #[command(after_help = config_key_help())]
    Simulate {
        /// Run configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated config files to compare instead of a single run.
        #[arg(long, value_delimiter = ',', value_name = "FILE,FILE,...")]
        compare: Option<Vec<PathBuf>>,
        /// How many consecutive seeds to average in a comparison.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Override the configured seed (first seed of a comparison).
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for report.json and timeseries.csv.
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Override one config key, e.g. --set scheme.cell_size=0.5.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write the cell lattice as one record per cell.
    #[command(after_help = config_key_help())]
    ExportPartition {
        /// Run configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override one config key, e.g. --set scheme.shape=triangle.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
}

/// The `[section] key` reference appended to `--help` for the config-driven
/// subcommands: every key with its units and default.
fn config_key_help() -> String {
    let mut out = String::from("Config keys (set in the file, via --set, or as GAFCELL_<SECTION>_<KEY> env vars):\n");
    for doc in KEY_DOCS {
        let _ = writeln!(
            out,
            "  {:<24} units: {:<14} default: {:<18} {}",
            format!("{}.{}", doc.section, doc.key),
            doc.units,
            doc.default,
            doc.description
        );
    }
    out.push_str(
        "\nLengths are multiples of sim.comm_range unless sim.absolute_units is true.\n",
    );
    out
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure::Runtime(message.into())
}

struct CmdOut {
    stdout: String,
    code: i32,
}

impl CmdOut {
    fn ok(stdout: String) -> Self {
        CmdOut { stdout, code: 0 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Human,
    Json,
    Csv,
}

/// Parse `args` (argv[0] included) and execute; never panics on bad input
/// and never writes to the process streams, so callers can test it.
pub fn run_from<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CliOutcome { exit_code: 0, stdout: rendered, stderr: String::new() }
                }
                _ => CliOutcome { exit_code: 2, stdout: String::new(), stderr: rendered },
            };
        }
    };
    let format = if cli.json {
        OutputFormat::Json
    } else if cli.csv {
        OutputFormat::Csv
    } else {
        OutputFormat::Human
    };
    let strict_seed = cli.strict_seed;
    let result = match cli.command {
        Command::Bounds { protocol, shape, range, subcell } => {
            cmd_bounds(format, &protocol, &shape, range, subcell)
        }
        Command::Table { which, paper_values, range } => {
            cmd_table(format, which, paper_values, range)
        }
        Command::Verify { target, shape, n, samples, seed, cell_size, subcell, tolerance } => {
            cmd_verify(
                format,
                strict_seed,
                &target,
                shape.as_deref(),
                n,
                &samples,
                seed,
                cell_size,
                subcell,
                tolerance,
            )
        }
        Command::Simulate { config, compare, seeds, seed, output_dir, set } => {
            cmd_simulate(format, strict_seed, config, compare, seeds, seed, &output_dir, &set)
        }
        Command::ExportPartition { config, output, set } => {
            cmd_export(format, config, output, &set)
        }
    };
    match result {
        Ok(out) => CliOutcome { exit_code: out.code, stdout: out.stdout, stderr: String::new() },
        Err(Failure::Usage(msg)) => CliOutcome {
            exit_code: 2,
            stdout: String::new(),
            stderr: format!("usage error: {msg}\n"),
        },
        Err(Failure::Runtime(msg)) => {
            CliOutcome { exit_code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") }
        }
    }
}

/// Compact float formatting: up to nine fractional digits, trailing zeros
/// trimmed, always a '.' decimal separator.
fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("CLI payloads serialize");
    s.push('\n');
    s
}

fn binding_text(binding: BindingConstraint) -> &'static str {
    match binding {
        BindingConstraint::ReqI => "requirement I",
        BindingConstraint::ReqII => "requirement II",
        BindingConstraint::Identical => "requirements I and II (identical)",
    }
}

fn binding_slug(binding: BindingConstraint) -> &'static str {
    match binding {
        BindingConstraint::ReqI => "req_i",
        BindingConstraint::ReqII => "req_ii",
        BindingConstraint::Identical => "identical",
    }
}

fn cmd_bounds(
    format: OutputFormat,
    protocol: &str,
    shape: &str,
    range: f64,
    subcell: Option<f64>,
) -> Result<CmdOut, Failure> {
    let protocol: Protocol = protocol.parse().map_err(usage)?;
    let shape: ShapeKind = shape.parse().map_err(usage)?;
    let regime = match subcell {
        Some(d) => SubcellRegime::Finite { subcell: d },
        None => SubcellRegime::Infinitesimal,
    };
    let report = max_cell(protocol, shape, range, &regime).map_err(|e| runtime(e.to_string()))?;
    let stdout = match format {
        OutputFormat::Json => to_json(&Versioned::new(report)),
        OutputFormat::Csv => {
            let mut out = String::from(
                "protocol,shape,comm_range,regime,req1_max_size,req2_max_size,binding,max_size,\
                 max_measure,paper_measure,paper_agreement\n",
            );
            let regime = match report.regime {
                SubcellRegime::Finite { subcell } => format!("subcell={}", fmt_num(subcell)),
                SubcellRegime::Infinitesimal => "infinitesimal".to_string(),
            };
            let agreement = match &report.paper_agreement {
                Some(PaperAgreement::Match) => "match",
                Some(PaperAgreement::Mismatch { .. }) => "mismatch",
                None => "",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                report.protocol.label(),
                report.shape.label(),
                fmt_num(report.comm_range),
                regime,
                fmt_num(report.req1_max_size),
                fmt_num(report.req2_max_size),
                binding_slug(report.binding),
                fmt_num(report.max_size),
                fmt_num(report.max_measure),
                report.paper_measure.map(fmt_num).unwrap_or_default(),
                agreement,
            );
            out
        }
        OutputFormat::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "protocol: {}", report.protocol.label());
            let _ = writeln!(
                out,
                "shape: {} (size = {})",
                report.shape.label(),
                report.shape.size_meaning()
            );
            let _ = writeln!(out, "communication range: {}", fmt_num(report.comm_range));
            match report.regime {
                SubcellRegime::Finite { subcell } => {
                    let _ =
                        writeln!(out, "subcell regime: finite, subcell size {}", fmt_num(subcell));
                }
                SubcellRegime::Infinitesimal => {
                    let _ = writeln!(out, "subcell regime: infinitesimal");
                }
            }
            let _ = writeln!(out, "requirement I max size: {}", fmt_num(report.req1_max_size));
            let _ = writeln!(out, "requirement II max size: {}", fmt_num(report.req2_max_size));
            let _ = writeln!(out, "binding constraint: {}", binding_text(report.binding));
            let _ = writeln!(out, "max size: {}", fmt_num(report.max_size));
            let _ = writeln!(out, "max measure: {}", fmt_num(report.max_measure));
            match (&report.paper_measure, &report.paper_agreement) {
                (Some(pm), Some(PaperAgreement::Match)) => {
                    let _ = writeln!(out, "published measure: {} (match)", fmt_num(*pm));
                }
                (Some(pm), Some(PaperAgreement::Mismatch { details })) => {
                    let _ = writeln!(out, "published measure: {} (MISMATCH)", fmt_num(*pm));
                    let _ = writeln!(out, "note: {details}");
                }
                _ => {}
            }
            out
        }
    };
    Ok(CmdOut::ok(stdout))
}

fn cmd_table(
    format: OutputFormat,
    which: u32,
    paper_values: bool,
    range: f64,
) -> Result<CmdOut, Failure> {
    match which {
        1 => {
            if paper_values {
                return Err(usage("--paper-values applies only to --which 2"));
            }
            let rows = table1(range).map_err(|e| runtime(e.to_string()))?;
            let stdout = match format {
                OutputFormat::Json => {
                    to_json(&Versioned::new(PlanarTable { comm_range: range, rows }))
                }
                OutputFormat::Csv => {
                    let mut out =
                        String::from("protocol,shape,max_size,max_measure,measure_coefficient\n");
                    for r in &rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            r.protocol.label(),
                            r.shape.label(),
                            fmt_num(r.max_size),
                            fmt_num(r.max_measure),
                            fmt_num(r.measure_coefficient),
                        );
                    }
                    out
                }
                OutputFormat::Human => {
                    let mut out =
                        format!("largest planar cells at R = {}\n", fmt_num(range));
                    let _ = writeln!(
                        out,
                        "{:<9} {:<9} {:>14} {:>14} {:>14}",
                        "protocol", "shape", "max size", "max measure", "coeff (R^2)"
                    );
                    for r in &rows {
                        let _ = writeln!(
                            out,
                            "{:<9} {:<9} {:>14} {:>14} {:>14}",
                            r.protocol.label(),
                            r.shape.label(),
                            fmt_num(r.max_size),
                            fmt_num(r.max_measure),
                            fmt_num(r.measure_coefficient),
                        );
                    }
                    out
                }
            };
            Ok(CmdOut::ok(stdout))
        }
        2 => {
            let table: LifetimeTable =
                lifetime_table(range, paper_values).map_err(|e| runtime(e.to_string()))?;
            let stdout = match format {
                OutputFormat::Json => to_json(&Versioned::new(table)),
                OutputFormat::Csv => {
                    let mut out =
                        String::from("shape,cell_measure,lifetime_ratio,lifetime_percent\n");
                    for r in &table.rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{:.1}",
                            r.shape.label(),
                            fmt_num(r.cell_measure),
                            fmt_num(r.lifetime_ratio),
                            r.lifetime_ratio * 100.0,
                        );
                    }
                    out
                }
                OutputFormat::Human => {
                    let mut out = format!(
                        "sliding-protocol lifetime ratios at R = {} (ceiling {} per cell{})\n",
                        fmt_num(range),
                        fmt_num(table.upper_bound),
                        if table.paper_values { ", published measures" } else { "" },
                    );
                    let _ = writeln!(
                        out,
                        "{:<13} {:>14} {:>16} {:>9}",
                        "shape", "cell measure", "lifetime ratio", "percent"
                    );
                    for r in &table.rows {
                        let _ = writeln!(
                            out,
                            "{:<13} {:>14} {:>16} {:>9.1}",
                            r.shape.label(),
                            fmt_num(r.cell_measure),
                            fmt_num(r.lifetime_ratio),
                            r.lifetime_ratio * 100.0,
                        );
                    }
                    out
                }
            };
            Ok(CmdOut::ok(stdout))
        }
        other => Err(usage(format!(
            "table --which must be 1 (planar maxima) or 2 (lifetime ratios), got {other}"
        ))),
    }
}

fn parse_samples(text: &str) -> Result<u64, Failure> {
    let value: f64 = text
        .parse()
        .map_err(|_| usage(format!("--samples expects a count, got '{text}'")))?;
    if !value.is_finite() || value < 1.0 || value.fract() != 0.0 || value > 9e15 {
        return Err(usage(format!("--samples must be a positive integer count, got '{text}'")));
    }
    Ok(value as u64)
}

fn check_min_samples(samples: u64, minimum: u64, what: &str) -> Result<(), Failure> {
    if samples < minimum {
        return Err(usage(format!(
            "{samples} samples is below the minimum of {minimum} for {what}; raise --samples"
        )));
    }
    Ok(())
}

fn require_explicit_seed(strict: bool, explicit: bool, what: &str) -> Result<(), Failure> {
    if strict && !explicit {
        Err(usage(format!("--strict-seed is set and {what} is randomized; pass --seed")))
    } else {
        Ok(())
    }
}

fn check_row(
    label: &str,
    quantity: &str,
    expected: f64,
    observed: f64,
    relative: bool,
    tolerance: f64,
) -> VerifyRow {
    let error = if relative {
        (observed - expected).abs() / expected.abs()
    } else {
        (observed - expected).abs()
    };
    VerifyRow {
        label: label.to_string(),
        quantity: quantity.to_string(),
        expected,
        observed,
        error,
        tolerance,
        pass: error <= tolerance,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    format: OutputFormat,
    strict_seed: bool,
    target: &str,
    shape: Option<&str>,
    n: usize,
    samples_text: &str,
    seed: Option<u64>,
    cell_size: f64,
    subcell: f64,
    tolerance: Option<f64>,
) -> Result<CmdOut, Failure> {
    let samples = parse_samples(samples_text)?;
    let mut rows = Vec::new();
    match target {
        "metrics" => {
            check_min_samples(samples, ORACLE_MIN_SAMPLES, "the distance oracle")?;
            require_explicit_seed(strict_seed, seed.is_some(), "the distance oracle")?;
            let tol = tolerance.unwrap_or(0.01);
            let shapes: Vec<ShapeKind> = match shape {
                Some(s) => vec![s.parse().map_err(usage)?],
                None => ALL_SHAPES.to_vec(),
            };
            for (index, kind) in shapes.into_iter().enumerate() {
                let cell = CellShape::new(kind, 1.0).expect("unit size is positive");
                let metrics = cell.metrics();
                let base_seed = seed.unwrap_or(0).wrapping_add(2 * index as u64);
                let own = |mirrored: bool| {
                    let placed = PlacedShape::at(cell, Point::ZERO);
                    OracleTarget::Shape(if mirrored { placed.face_neighbor() } else { placed })
                };
                let diameter = max_distance_oracle(&own(false), &own(false), samples, base_seed)
                    .map_err(|e| runtime(e.to_string()))?;
                rows.push(check_row(kind.label(), "diameter", metrics.diameter, diameter, true, tol));
                let adjacent = max_distance_oracle(
                    &own(false),
                    &own(true),
                    samples,
                    base_seed.wrapping_add(1),
                )
                .map_err(|e| runtime(e.to_string()))?;
                rows.push(check_row(
                    kind.label(),
                    "adjacent diameter",
                    metrics.adjacent_diameter,
                    adjacent,
                    true,
                    tol,
                ));
            }
        }
        "worst-case" => {
            let tol = tolerance.unwrap_or(1e-6);
            let expected = (subcell * subcell + (cell_size + subcell).powi(2)).sqrt();
            let observed = hgaf_worst_case_grid_search(cell_size, subcell)
                .map_err(|e| runtime(e.to_string()))?;
            let label = format!("square r={} d={}", fmt_num(cell_size), fmt_num(subcell));
            rows.push(check_row(&label, "worst requirement-I distance", expected, observed, false, tol));
        }
        "lemma1" => {
            check_min_samples(samples, CHAIN_MIN_SAMPLES, "the chain-volume estimator")?;
            require_explicit_seed(strict_seed, seed.is_some(), "the chain-volume estimator")?;
            let tol = tolerance.unwrap_or(0.01);
            let closed = lemma1_field_size(n, 1.0).map_err(|e| runtime(e.to_string()))?;
            let estimate = sphere_chain_union_volume(n, 1.0, samples, seed.unwrap_or(0))
                .map_err(|e| runtime(e.to_string()))?;
            let label = format!("chain n={n}");
            rows.push(check_row(&label, "union volume", closed, estimate.value, true, tol));
        }
        other => {
            return Err(usage(format!(
                "unknown verify target '{other}' (expected metrics, worst-case, or lemma1)"
            )))
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    let report = VerifyReport {
        target: target.to_string(),
        samples,
        seed: seed.unwrap_or(0),
        rows,
        pass,
    };
    let stdout = match format {
        OutputFormat::Json => to_json(&Versioned::new(report.clone())),
        OutputFormat::Csv => {
            let mut out = String::from("label,quantity,expected,observed,error,tolerance,pass\n");
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.label,
                    r.quantity,
                    fmt_num(r.expected),
                    fmt_num(r.observed),
                    fmt_num(r.error),
                    fmt_num(r.tolerance),
                    r.pass,
                );
            }
            out
        }
        OutputFormat::Human => {
            let mut out = String::new();
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{} {}: expected {}, observed {}, error {} (tolerance {}) {}",
                    r.label,
                    r.quantity,
                    fmt_num(r.expected),
                    fmt_num(r.observed),
                    fmt_num(r.error),
                    fmt_num(r.tolerance),
                    if r.pass { "PASS" } else { "FAIL" },
                );
            }
            let _ = writeln!(
                out,
                "verdict: {} ({} check{})",
                if report.pass { "PASS" } else { "FAIL" },
                report.rows.len(),
                if report.rows.len() == 1 { "" } else { "s" },
            );
            out
        }
    };
    Ok(CmdOut { stdout, code: if pass { 0 } else { 1 } })
}

/// File -> parse -> env overrides -> --set overrides -> --seed override.
fn load_run_config(
    path: Option<&Path>,
    sets: &[String],
    seed: Option<u64>,
) -> Result<RunConfig, Failure> {
    let mut rc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                runtime(format!("cannot read config file '{}': {e}", p.display()))
            })?;
            RunConfig::parse(&text)
                .map_err(|e| runtime(format!("in '{}': {e}", p.display())))?
        }
        None => RunConfig::parse("").expect("the empty config parses"),
    };
    rc.apply_process_env().map_err(|e| runtime(e.to_string()))?;
    for entry in sets {
        let bad = || usage(format!("--set expects section.key=value, got '{entry}'"));
        let (section_key, value) = entry.split_once('=').ok_or_else(bad)?;
        let (section, key) = section_key.split_once('.').ok_or_else(bad)?;
        rc.override_key(section.trim(), key.trim(), value.trim())
            .map_err(|e| usage(e.to_string()))?;
    }
    if let Some(seed) = seed {
        rc.override_key("sim", "seed", &seed.to_string()).map_err(|e| usage(e.to_string()))?;
    }
    Ok(rc)
}

fn field_dims(config: &SimConfig) -> String {
    let e = config.field.extent();
    match config.field.dimension().as_usize() {
        2 => format!("{} x {}", fmt_num(e.x), fmt_num(e.y)),
        _ => format!("{} x {} x {}", fmt_num(e.x), fmt_num(e.y), fmt_num(e.z)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    format: OutputFormat,
    strict_seed: bool,
    config: Option<PathBuf>,
    compare: Option<Vec<PathBuf>>,
    seeds: u64,
    seed: Option<u64>,
    output_dir: &Path,
    sets: &[String],
) -> Result<CmdOut, Failure> {
    if let Some(paths) = compare {
        if config.is_some() {
            return Err(usage("give --config or --compare, not both"));
        }
        return cmd_compare(format, strict_seed, &paths, seeds, seed, sets);
    }

    let rc = load_run_config(config.as_deref(), sets, seed)?;
    require_explicit_seed(strict_seed, rc.seed_is_explicit(), "the simulator")?;
    let sim_config = rc.to_sim_config().map_err(|e| runtime(e.to_string()))?;
    let report = run(&sim_config).map_err(|e| runtime(e.to_string()))?;

    std::fs::create_dir_all(output_dir).map_err(|e| {
        runtime(format!("cannot create output directory '{}': {e}", output_dir.display()))
    })?;
    let artifact = RunArtifact {
        schema_version: SCHEMA_VERSION,
        config: sim_config,
        report: report.clone(),
    };
    let artifact_json = to_json(&artifact);
    let report_path = output_dir.join("report.json");
    std::fs::write(&report_path, &artifact_json)
        .map_err(|e| runtime(format!("cannot write '{}': {e}", report_path.display())))?;
    let series_path = output_dir.join("timeseries.csv");
    std::fs::write(&series_path, series_csv(&report))
        .map_err(|e| runtime(format!("cannot write '{}': {e}", series_path.display())))?;

    let stdout = match format {
        OutputFormat::Json => artifact_json,
        OutputFormat::Csv => {
            let mut out = String::from(
                "lifetime,cell_death_occurred,model_estimate,end_time,node_count,\
                 nonempty_cells,total_energy\n",
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(report.lifetime_first_cell_death),
                report.cell_death_occurred,
                fmt_num(report.lifetime_model_estimate),
                fmt_num(report.end_time),
                report.node_count,
                report.nonempty_cell_count,
                fmt_num(report.total_energy_consumed),
            );
            out
        }
        OutputFormat::Human => {
            let scheme = &sim_config.scheme;
            let mut out = format!(
                "{} {} cells, size {} on a {} field; {} nodes in {} nonempty cells\n",
                scheme.protocol().label(),
                scheme.shape().label(),
                fmt_num(scheme.cell_size()),
                field_dims(&sim_config),
                report.node_count,
                report.nonempty_cell_count,
            );
            if report.cell_death_occurred {
                let _ = writeln!(
                    out,
                    "lifetime: first cell death at t={} (model estimate {})",
                    fmt_num(report.lifetime_first_cell_death),
                    fmt_num(report.lifetime_model_estimate),
                );
            } else {
                let _ = writeln!(
                    out,
                    "lifetime: no cell death by the t={} horizon (model estimate {})",
                    fmt_num(report.end_time),
                    fmt_num(report.lifetime_model_estimate),
                );
            }
            let audits = &report.audits;
            let _ = writeln!(
                out,
                "audits: {} points, req I pass {:.1}%, req II pass {:.1}%, \
                 census equality {:.1}% post-warmup",
                audits.points,
                audits.req1_pass_rate() * 100.0,
                audits.req2_pass_rate() * 100.0,
                audits.post_warmup_equality_rate() * 100.0,
            );
            let _ = writeln!(
                out,
                "energy consumed: {}; wrote {} and {}",
                fmt_num(report.total_energy_consumed),
                report_path.display(),
                series_path.display(),
            );
            out
        }
    };
    Ok(CmdOut::ok(stdout))
}

fn cmd_compare(
    format: OutputFormat,
    strict_seed: bool,
    paths: &[PathBuf],
    seeds: u64,
    seed: Option<u64>,
    sets: &[String],
) -> Result<CmdOut, Failure> {
    if paths.len() < 2 {
        return Err(usage(format!(
            "--compare needs at least two config files, got {}",
            paths.len()
        )));
    }
    if seeds < 3 {
        return Err(usage(format!(
            "--seeds must be at least 3 for a standard error, got {seeds}"
        )));
    }
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        let rc = load_run_config(Some(p), sets, seed)?;
        require_explicit_seed(strict_seed, rc.seed_is_explicit(), "the simulator")?;
        configs.push(rc.to_sim_config().map_err(|e| runtime(format!("in '{}': {e}", p.display())))?);
    }
    let base = seed.unwrap_or(configs[0].seed);
    let seed_list: Vec<u64> = (0..seeds).map(|i| base.wrapping_add(i)).collect();
    let report = compare_lifetimes(&configs, &seed_list).map_err(|e| runtime(e.to_string()))?;

    let stdout = match format {
        OutputFormat::Json => to_json(&Versioned::new(report)),
        OutputFormat::Csv => {
            let mut out = String::from(
                "numerator,denominator,measured,measured_ci95_low,measured_ci95_high,predicted\n",
            );
            for r in &report.ratios {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.numerator,
                    r.denominator,
                    fmt_num(r.measured),
                    fmt_num(r.measured_ci95_low),
                    fmt_num(r.measured_ci95_high),
                    fmt_num(r.predicted),
                );
            }
            out
        }
        OutputFormat::Human => {
            let mut out = format!(
                "seeds: {}\n\n",
                report.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
            );
            let label_width =
                report.entries.iter().map(|e| e.label.len()).max().unwrap_or(6).max(6);
            let _ = writeln!(
                out,
                "{:<label_width$} {:>12} {:>14} {:>22}",
                "config", "measure", "mean lifetime", "95% CI"
            );
            for e in &report.entries {
                let _ = writeln!(
                    out,
                    "{:<label_width$} {:>12} {:>14.2} {:>22}",
                    e.label,
                    fmt_num(e.cell_measure),
                    e.mean_lifetime,
                    format!("{:.2}..{:.2}", e.ci95_low, e.ci95_high),
                );
            }
            let pair_width = report
                .ratios
                .iter()
                .map(|r| r.numerator.len() + r.denominator.len() + 3)
                .max()
                .unwrap_or(10);
            let _ = writeln!(out, "\nlifetime ratios (predicted = cell-measure ratio):");
            let _ = writeln!(
                out,
                "{:<pair_width$} {:>10} {:>18} {:>10}",
                "pair", "measured", "95% CI", "predicted"
            );
            for r in &report.ratios {
                let _ = writeln!(
                    out,
                    "{:<pair_width$} {:>10.4} {:>18} {:>10.4}",
                    format!("{} / {}", r.numerator, r.denominator),
                    r.measured,
                    format!("{:.4}..{:.4}", r.measured_ci95_low, r.measured_ci95_high),
                    r.predicted,
                );
            }
            out
        }
    };
    Ok(CmdOut::ok(stdout))
}

fn lattice_records(partition: &Partition) -> Vec<CellRecord> {
    partition
        .cells()
        .into_iter()
        .map(|c| {
            let region = partition.cell_region(c);
            let centroid = region.centroid().expect("cells in the index set are nonempty");
            CellRecord {
                index: [c.i, c.j, c.k],
                centroid: [centroid.x, centroid.y, centroid.z],
                vertices: region.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
            }
        })
        .collect()
}

fn cmd_export(
    format: OutputFormat,
    config: Option<PathBuf>,
    output: Option<PathBuf>,
    sets: &[String],
) -> Result<CmdOut, Failure> {
    let rc = load_run_config(config.as_deref(), sets, None)?;
    let sim_config = rc.to_sim_config().map_err(|e| runtime(e.to_string()))?;
    let partition = build_partition(sim_config.field, sim_config.scheme)
        .map_err(|e| runtime(e.to_string()))?;
    let record_count = partition.num_cells();
    let content = match format {
        OutputFormat::Human => partition.export_text(),
        OutputFormat::Csv => {
            let mut out = String::from(
                "cell_i,cell_j,cell_k,centroid_x,centroid_y,centroid_z,vertices\n",
            );
            for r in lattice_records(&partition) {
                let verts: Vec<String> = r
                    .vertices
                    .iter()
                    .map(|v| format!("{} {} {}", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2])))
                    .collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.index[0],
                    r.index[1],
                    r.index[2],
                    fmt_num(r.centroid[0]),
                    fmt_num(r.centroid[1]),
                    fmt_num(r.centroid[2]),
                    verts.join("; "),
                );
            }
            out
        }
        OutputFormat::Json => {
            let field = partition.field();
            let scheme = partition.scheme();
            let o = field.origin();
            let e = field.extent();
            to_json(&Versioned::new(LatticeExport {
                dimension: field.dimension().as_usize(),
                origin: [o.x, o.y, o.z],
                extent: [e.x, e.y, e.z],
                protocol: scheme.protocol().label().to_string(),
                shape: scheme.shape().label().to_string(),
                cell_size: scheme.cell_size(),
                subcell_size: scheme.subcell_size(),
                phase: partition.phase(),
                cell_count: record_count,
                cells: lattice_records(&partition),
            }))
        }
    };
    match output {
        Some(path) => {
            std::fs::write(&path, &content)
                .map_err(|e| runtime(format!("cannot write '{}': {e}", path.display())))?;
            Ok(CmdOut::ok(format!(
                "wrote {record_count} cell records to {}\n",
                path.display()
            )))
        }
        None => Ok(CmdOut::ok(content)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ConstraintReport;
    use crate::sim::ComparisonReport;

    fn invoke(args: &[&str]) -> CliOutcome {
        let mut full = vec!["gafcell"];
        full.extend_from_slice(args);
        run_from(full)
    }

    fn scratch_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("gafcell-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn bounds_square_reports_requirement_one_binding() {
        let out = invoke(&["bounds", "--protocol", "gaf", "--shape", "square", "--range", "1"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("max measure: 0.2\n"), "{}", out.stdout);
        assert!(out.stdout.contains("binding constraint: requirement I"), "{}", out.stdout);
        assert!(out.stdout.contains("0.447213595"), "{}", out.stdout);
        assert!(out.stdout.contains("(match)"), "{}", out.stdout);
    }

    #[test]
    fn bounds_tetrahedron_reports_both_maxima_and_mismatch() {
        let out = invoke(&["bounds", "--protocol", "ehgaf", "--shape", "tetrahedron"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("requirement I max size:"), "{}", out.stdout);
        assert!(out.stdout.contains("requirement II max size:"), "{}", out.stdout);
        assert!(out.stdout.contains("binding constraint: requirement II"), "{}", out.stdout);
        assert!(out.stdout.contains("MISMATCH"), "{}", out.stdout);
    }

    #[test]
    fn bounds_unsupported_combination_names_the_gap() {
        let out = invoke(&["bounds", "--protocol", "hgaf", "--shape", "hexagon"]);
        assert_eq!(out.exit_code, 1);
        assert!(out.stderr.contains("HGAF"), "{}", out.stderr);
        assert!(out.stderr.contains("hexagon"), "{}", out.stderr);
    }

    #[test]
    fn bounds_json_round_trips_with_schema_version() {
        let out = invoke(&["--json", "bounds", "--protocol", "hgaf", "--shape", "square"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let parsed: Versioned<ConstraintReport> = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(parsed.schema_version, SCHEMA_VERSION);
        let direct =
            max_cell(Protocol::Hgaf, ShapeKind::Square, 1.0, &SubcellRegime::Infinitesimal)
                .unwrap();
        assert_eq!(parsed.body, direct);
        let re_emitted = to_json(&Versioned::new(parsed.body.clone()));
        assert_eq!(re_emitted, out.stdout);
    }

    #[test]
    fn table_one_ends_with_published_coefficients() {
        let out = invoke(&["--csv", "table", "--which", "1"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let last_fields: Vec<&str> = out
            .stdout
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap())
            .collect();
        assert_eq!(last_fields, ["0.2", "0.5", "1", "1.299038106"], "{}", out.stdout);
    }

    #[test]
    fn table_two_paper_values_end_with_published_percentages() {
        let out = invoke(&["table", "--which", "2", "--paper-values"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let rows: Vec<&str> = out.stdout.lines().skip(2).collect();
        let percents: Vec<&str> =
            rows.iter().map(|l| l.rsplit(' ').next().unwrap()).collect();
        assert_eq!(percents, ["60.1", "34.7", "30.1", "24.1", "21.8"], "{}", out.stdout);
    }

    #[test]
    fn table_three_is_a_usage_error() {
        let out = invoke(&["table", "--which", "3"]);
        assert_eq!(out.exit_code, 2);
        assert!(out.stderr.contains("--which must be 1"), "{}", out.stderr);
    }

    #[test]
    fn verify_lemma1_passes_within_tolerance() {
        let out =
            invoke(&["verify", "--target", "lemma1", "--n", "2", "--samples", "1e6", "--seed", "9"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("chain n=2"), "{}", out.stdout);
        assert!(out.stdout.contains("verdict: PASS"), "{}", out.stdout);
        // Closed form 9 pi / 4 = 7.0686 appears as the expected value.
        assert!(out.stdout.contains("expected 7.068"), "{}", out.stdout);
    }

    #[test]
    fn verify_rejects_below_minimum_samples() {
        let out = invoke(&["verify", "--target", "lemma1", "--samples", "10"]);
        assert_eq!(out.exit_code, 2);
        assert!(out.stderr.contains("minimum of 1000000"), "{}", out.stderr);
        let out = invoke(&["verify", "--target", "metrics", "--samples", "10"]);
        assert_eq!(out.exit_code, 2);
        assert!(out.stderr.contains("minimum of 10000"), "{}", out.stderr);
    }

    #[test]
    fn verify_metrics_and_worst_case_pass() {
        let out = invoke(&[
            "verify",
            "--target",
            "metrics",
            "--shape",
            "icosahedron",
            "--samples",
            "10000",
        ]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("icosahedron diameter"), "{}", out.stdout);
        assert!(out.stdout.contains("icosahedron adjacent diameter"), "{}", out.stdout);
        assert!(out.stdout.contains("verdict: PASS (2 checks)"), "{}", out.stdout);

        let out = invoke(&["--csv", "verify", "--target", "worst-case"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let row = out.stdout.lines().nth(1).unwrap();
        assert!(row.ends_with(",true"), "{}", out.stdout);
    }

    #[test]
    fn strict_seed_requires_an_explicit_seed() {
        let args = ["--strict-seed", "verify", "--target", "metrics", "--shape", "square",
            "--samples", "10000"];
        let out = invoke(&args);
        assert_eq!(out.exit_code, 2);
        assert!(out.stderr.contains("--strict-seed"), "{}", out.stderr);
        let mut with_seed = args.to_vec();
        with_seed.extend_from_slice(&["--seed", "3"]);
        let out = invoke(&with_seed);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
    }

    #[test]
    fn simulate_writes_outputs_and_prints_the_lifetime() {
        let dir = scratch_dir("run");
        let config_path = dir.join("run.cfg");
        std::fs::write(
            &config_path,
            "[field]\nwidth = 2\nheight = 2\n\
             [scheme]\ncell_size = 0.4\n\
             [protocol]\ninitial_battery = 5\ndraw_discovery = 1\n\
             [sim]\nnode_count = 40\nseed = 4\nmax_time = 50\naudit_interval = 5\n",
        )
        .unwrap();
        let out_dir = dir.join("out");
        let out = invoke(&[
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("lifetime: first cell death at t="), "{}", out.stdout);
        let artifact: RunArtifact = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join("report.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(artifact.schema_version, SCHEMA_VERSION);
        assert!(artifact.report.cell_death_occurred);
        let csv = std::fs::read_to_string(out_dir.join("timeseries.csv")).unwrap();
        assert!(csv.starts_with("time,active_count,live_count,req1_worst,req2_worst\n"));

        let missing = invoke(&["simulate", "--config", "/nonexistent/nope.cfg"]);
        assert_eq!(missing.exit_code, 1);
        assert!(missing.stderr.contains("cannot read config file"), "{}", missing.stderr);
    }

    #[test]
    fn simulate_compare_prints_measured_and_predicted_ratios() {
        let dir = scratch_dir("compare");
        let shared = "[field]\nwidth = 2\nheight = 2\n\
                      [protocol]\ninitial_battery = 5\ndraw_discovery = 1\n\
                      [sim]\nnode_count = 30\nseed = 1\nmax_time = 100\n";
        let small = dir.join("small.cfg");
        std::fs::write(&small, format!("{shared}[scheme]\ncell_size = 0.4\n")).unwrap();
        let large = dir.join("large.cfg");
        std::fs::write(&large, format!("{shared}[scheme]\ncell_size = 0.8\n")).unwrap();
        let compare_arg = format!("{},{}", small.display(), large.display());
        let out = invoke(&["--json", "simulate", "--compare", &compare_arg, "--seeds", "3"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let parsed: Versioned<ComparisonReport> = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(parsed.body.seeds, vec![1, 2, 3]);
        assert_eq!(parsed.body.ratios.len(), 1);
        // Measure ratio 0.16 / 0.64.
        assert!((parsed.body.ratios[0].predicted - 0.25).abs() < 1e-12);

        let human = invoke(&["simulate", "--compare", &compare_arg, "--seeds", "3"]);
        assert_eq!(human.exit_code, 0, "{}", human.stderr);
        assert!(human.stdout.contains("predicted"), "{}", human.stdout);

        let too_few = invoke(&["simulate", "--compare", &compare_arg, "--seeds", "2"]);
        assert_eq!(too_few.exit_code, 2);
    }

    #[test]
    fn export_partition_emits_one_record_per_cell() {
        let sets = [
            "--set", "field.width=10", "--set", "field.height=10",
            "--set", "scheme.cell_size=2",
        ];
        let mut args = vec!["export-partition"];
        args.extend_from_slice(&sets);
        let out = invoke(&args);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let records: Vec<&str> =
            out.stdout.lines().filter(|l| l.starts_with("cell ")).collect();
        assert_eq!(records.len(), 25, "{}", out.stdout);
        // Square cells keep four vertices.
        assert!(records.iter().all(|r| r.rsplit('|').next().unwrap().split(';').count() == 4));

        let mut json_args = vec!["--json", "export-partition"];
        json_args.extend_from_slice(&sets);
        json_args.extend_from_slice(&["--set", "scheme.shape=triangle"]);
        let out = invoke(&json_args);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let parsed: Versioned<LatticeExport> = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(parsed.body.cell_count, parsed.body.cells.len());
        assert!(parsed.body.cells.iter().any(|c| c.vertices.len() == 3), "unclipped triangles");

        let cube = invoke(&[
            "--json", "export-partition",
            "--set", "field.dimension=3",
            "--set", "scheme.shape=cube",
            "--set", "scheme.cell_size=2",
        ]);
        assert_eq!(cube.exit_code, 0, "{}", cube.stderr);
        let parsed: Versioned<LatticeExport> = serde_json::from_str(&cube.stdout).unwrap();
        assert_eq!(parsed.body.cells.len(), 8);
        assert!(parsed.body.cells.iter().all(|c| c.vertices.len() == 8));
    }

    #[test]
    fn export_partition_writes_to_a_file_when_asked() {
        let dir = scratch_dir("export");
        let path = dir.join("lattice.txt");
        let out = invoke(&["export-partition", "--output", path.to_str().unwrap()]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("cell records"), "{}", out.stdout);
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.starts_with("# cell lattice export v1\n"));
    }

    #[test]
    fn help_enumerates_every_config_key_with_units_and_default() {
        let out = invoke(&["simulate", "--help"]);
        assert_eq!(out.exit_code, 0);
        for doc in KEY_DOCS {
            let dotted = format!("{}.{}", doc.section, doc.key);
            assert!(out.stdout.contains(&dotted), "missing {dotted}");
            assert!(out.stdout.contains(doc.units), "missing units for {dotted}");
            assert!(out.stdout.contains(doc.default), "missing default for {dotted}");
        }
    }

    #[test]
    fn conflicting_format_flags_are_a_usage_error() {
        let out = invoke(&["--json", "--csv", "table", "--which", "1"]);
        assert_eq!(out.exit_code, 2);
    }

    #[test]
    fn set_overrides_apply_and_unknown_keys_are_rejected() {
        let out = invoke(&["export-partition", "--set", "scheme.cell_size=1"]);
        assert_eq!(out.exit_code, 0, "{}", out.stderr);
        let records = out.stdout.lines().filter(|l| l.starts_with("cell ")).count();
        assert_eq!(records, 16, "{}", out.stdout);

        let bad = invoke(&["export-partition", "--set", "bogus.key=1"]);
        assert_eq!(bad.exit_code, 2);
        let malformed = invoke(&["export-partition", "--set", "cell_size"]);
        assert_eq!(malformed.exit_code, 2);
    }
}

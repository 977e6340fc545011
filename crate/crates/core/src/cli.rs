//! Command-line interface.
//!
//! Exit codes: 0 success, 1 a check reported failure, 2 bad input or usage,
//! 3 refusal because the spanning-tree count exceeds the limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::anneal::{anneal_edge_variance, AnnealConfig, AnnealResult, Direction, MoveSet};
use crate::catalog::{export_catalog, load_catalog, scan_for_obstructions, verify_catalog};
use crate::collapse::{collapse_along_tree, greedy_collapse, removal_log_json_lines, tree_collapse_sequence};
use crate::complex::{parse_facets, Complex3};
use crate::error::Error;
use crate::estimate::{
    edge_free_frequencies, estimate_with_workers, exact_collapsing_probability, exact_edge_free_frequencies,
};
use crate::invariants::edge_variance;
use crate::spanning::{count_spanning_trees, wilson_sample};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "collapsar", version, about = "Collapsing probabilities of triangulated 3-spheres")]
pub struct Cli {
    /// Where to write the run manifest (defaults to `<out>.manifest.json`,
    /// or stderr when output goes to stdout)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate of the collapsing probability
    Estimate(EstimateArgs),
    /// Exact collapsing probability by enumerating spanning trees
    Exact(ExactArgs),
    /// Per-edge frequency of being free after the tree collapse (CSV)
    EdgeStats(EdgeStatsArgs),
    /// Edge-degree variance
    Variance(InputArgs),
    /// Simulated annealing on the edge variance
    Anneal(AnnealArgs),
    /// Collapse along one sampled tree and print the removal sequence
    Collapse(CollapseArgs),
    /// Obstruction catalog tools
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Convert between text and JSON facet formats
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Facet list (text or JSON)
    #[arg(long)]
    input: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads
    #[arg(long, env = "COLLAPSAR_WORKERS")]
    workers: Option<usize>,
    /// Deviation for the Chebyshev bound
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    /// Error probability for the normal-approximation interval
    #[arg(long, default_value_t = 1e-4)]
    error_probability: f64,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, default_value_t = 1_000_000)]
    tree_limit: u64,
}

#[derive(Args, Debug)]
struct EdgeStatsArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "COLLAPSAR_WORKERS")]
    workers: Option<usize>,
    /// Enumerate every spanning tree instead of sampling
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 1_000_000)]
    tree_limit: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Minimize,
    Maximize,
}

#[derive(Args, Debug)]
struct AnnealArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory for best.facets, moves.csv, trace.csv and the manifest
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = DirectionArg::Minimize)]
    direction: DirectionArg,
    #[arg(long, default_value_t = 10_000)]
    max_moves: u64,
    #[arg(long, default_value_t = 1.0)]
    initial_temperature: f64,
    #[arg(long, default_value_t = 0.99)]
    cooling_factor: f64,
    #[arg(long, default_value_t = 500)]
    reheat_period: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs with seeds seed, seed+1, ...; the best is kept
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Restrict proposals to 2-3 and 3-2 moves
    #[arg(long)]
    edge_flips_only: bool,
}

#[derive(Args, Debug)]
struct CollapseArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Facet removed to form the ball (defaults to the tree root)
    #[arg(long)]
    remove_facet: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    /// Check every shipped obstruction
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a sphere's 2-skeleton for shipped obstructions
    Scan(InputArgs),
    /// Write the shipped obstructions as one file per entry
    Export {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long, value_enum)]
    to: Format,
}

/// Provenance record written with every run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub version: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooManyTrees { .. } => EXIT_REFUSED,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

/// What a command produced.
struct Outcome {
    code: i32,
    /// Main output; written to `--out` or stdout.
    body: Option<String>,
    out: Option<PathBuf>,
    extra_outputs: Vec<PathBuf>,
    input_sha256: Option<String>,
    seed: Option<u64>,
    samples: Option<u64>,
}

impl Outcome {
    fn new(body: String, out: Option<PathBuf>) -> Self {
        Outcome { code: EXIT_OK, body: Some(body), out, extra_outputs: Vec::new(), input_sha256: None, seed: None, samples: None }
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let name = command_name(&cli.command);
    match dispatch(cli.command) {
        Ok(outcome) => match finish(outcome, &cli.manifest, name, &args, start) {
            Ok(code) => code,
            Err(f) => report(f),
        },
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> i32 {
    eprintln!("error: {}", f.message);
    f.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Estimate(_) => "estimate",
        Command::Exact(_) => "exact",
        Command::EdgeStats(_) => "edge-stats",
        Command::Variance(_) => "variance",
        Command::Anneal(_) => "anneal",
        Command::Collapse(_) => "collapse",
        Command::Catalog(CatalogCommand::Verify { .. }) => "catalog verify",
        Command::Catalog(CatalogCommand::Scan(_)) => "catalog scan",
        Command::Catalog(CatalogCommand::Export { .. }) => "catalog export",
        Command::Convert(_) => "convert",
    }
}

fn finish(
    outcome: Outcome,
    manifest_path: &Option<PathBuf>,
    name: &str,
    args: &[OsString],
    start: Instant,
) -> Result<i32, Failure> {
    let mut outputs: Vec<String> = Vec::new();
    if let Some(body) = &outcome.body {
        match &outcome.out {
            Some(path) => {
                std::fs::write(path, body)?;
                outputs.push(path.display().to_string());
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes())?;
                stdout.flush()?;
                outputs.push("<stdout>".into());
            }
        }
    }
    outputs.extend(outcome.extra_outputs.iter().map(|p| p.display().to_string()));
    let manifest = RunManifest {
        command: name.to_string(),
        arguments: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        input_sha256: outcome.input_sha256,
        seed: outcome.seed,
        samples: outcome.samples,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    let target = manifest_path.clone().or_else(|| {
        outcome
            .out
            .as_ref()
            .map(|p| sibling(p, ".manifest.json"))
            .or_else(|| outcome.extra_outputs.first().and_then(|p| p.parent()).map(|d| d.join("manifest.json")))
    });
    match target {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => eprintln!("{json}"),
    }
    Ok(outcome.code)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn read_input(path: &Path) -> Result<(Complex3, String), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure {
        code: EXIT_USAGE,
        message: format!("{} is not UTF-8", path.display()),
    })?;
    let c = parse_facets(&text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok((c, hex::encode(Sha256::digest(&bytes))))
}

fn read_manifold(path: &Path) -> Result<(Complex3, String), Failure> {
    let (c, sum) = read_input(path)?;
    c.validate().map_err(|e| Failure { code: EXIT_USAGE, message: format!("{}: {e}", path.display()) })?;
    Ok((c, sum))
}

fn json_line<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Estimate(a) => {
            if a.samples == 0 {
                return Err(Failure { code: EXIT_USAGE, message: "--samples must be positive".into() });
            }
            let (c, sum) = read_manifold(&a.io.input)?;
            let est = estimate_with_workers(&c, a.samples, a.seed, a.workers)?;
            let report = est.report(a.epsilon, a.error_probability)?;
            let mut o = Outcome::new(json_line(&report)?, a.io.out);
            o.input_sha256 = Some(sum);
            o.seed = Some(a.seed);
            o.samples = Some(a.samples);
            Ok(o)
        }
        Command::Exact(a) => {
            let (c, sum) = read_manifold(&a.io.input)?;
            let exact = match exact_collapsing_probability(&c, a.tree_limit) {
                Err(Error::TooManyTrees { count, limit }) => {
                    return Err(Failure {
                        code: EXIT_REFUSED,
                        message: format!("{count} spanning trees (Kirchhoff count) exceed the limit of {limit}"),
                    })
                }
                r => r?,
            };
            let body = json_line(&serde_json::json!({
                "numerator": exact.numerator.to_string(),
                "denominator": exact.denominator.to_string(),
                "fraction": exact.to_string(),
                "decimal": format!("{:.5}", exact.value()),
                "spanning_trees": exact.denominator.to_string(),
            }))?;
            let mut o = Outcome::new(body, a.io.out);
            o.input_sha256 = Some(sum);
            Ok(o)
        }
        Command::EdgeStats(a) => {
            let (c, sum) = read_manifold(&a.io.input)?;
            let stats = if a.exact {
                exact_edge_free_frequencies(&c, a.tree_limit)?
            } else {
                if a.samples == 0 {
                    return Err(Failure { code: EXIT_USAGE, message: "--samples must be positive".into() });
                }
                edge_free_frequencies(&c, a.samples, a.seed, a.workers)?
            };
            let mut o = Outcome::new(stats.to_csv(), a.io.out);
            o.input_sha256 = Some(sum);
            if !a.exact {
                o.seed = Some(a.seed);
                o.samples = Some(a.samples);
            }
            Ok(o)
        }
        Command::Variance(a) => {
            let (c, sum) = read_manifold(&a.input)?;
            let mut o = Outcome::new(json_line(&edge_variance(&c).to_json())?, a.out);
            o.input_sha256 = Some(sum);
            Ok(o)
        }
        Command::Anneal(a) => cmd_anneal(a),
        Command::Collapse(a) => cmd_collapse(a),
        Command::Catalog(CatalogCommand::Verify { out }) => {
            let reports = verify_catalog(&load_catalog());
            let all = reports.iter().all(|(_, r)| r.passed());
            let entries: Vec<serde_json::Value> = reports
                .iter()
                .map(|(name, r)| serde_json::json!({ "entry": name, "passed": r.passed(), "report": r }))
                .collect();
            let body = json_line(&serde_json::json!({
                "entries": entries.len(),
                "passed": reports.iter().filter(|(_, r)| r.passed()).count(),
                "results": entries,
            }))?;
            let mut o = Outcome::new(body, out);
            o.code = if all { EXIT_OK } else { EXIT_CHECK_FAILED };
            Ok(o)
        }
        Command::Catalog(CatalogCommand::Scan(a)) => {
            let (c, sum) = read_manifold(&a.input)?;
            let mut o = Outcome::new(json_line(&scan_for_obstructions(&c))?, a.out);
            o.input_sha256 = Some(sum);
            Ok(o)
        }
        Command::Catalog(CatalogCommand::Export { out_dir }) => {
            let written = export_catalog(&load_catalog(), &out_dir)?;
            Ok(Outcome {
                code: EXIT_OK,
                body: None,
                out: None,
                extra_outputs: written,
                input_sha256: None,
                seed: None,
                samples: None,
            })
        }
        Command::Convert(a) => {
            let (c, sum) = read_input(&a.io.input)?;
            let body = match a.to {
                Format::Text => c.to_text(),
                Format::Json => c.to_json() + "\n",
            };
            let mut o = Outcome::new(body, a.io.out);
            o.input_sha256 = Some(sum);
            Ok(o)
        }
    }
}

fn cmd_anneal(a: AnnealArgs) -> Result<Outcome, Failure> {
    let (c, sum) = read_manifold(&a.input)?;
    if a.runs == 0 {
        return Err(Failure { code: EXIT_USAGE, message: "--runs must be positive".into() });
    }
    let direction = match a.direction {
        DirectionArg::Minimize => Direction::Minimize,
        DirectionArg::Maximize => Direction::Maximize,
    };
    let config = |seed| AnnealConfig {
        direction,
        max_moves: a.max_moves,
        initial_temperature: a.initial_temperature,
        cooling_factor: a.cooling_factor,
        reheat_period: a.reheat_period,
        seed,
        moves: if a.edge_flips_only { MoveSet::EdgeFlips } else { MoveSet::All },
    };
    config(a.seed).validate()?;
    use rayon::prelude::*;
    let results: Vec<AnnealResult> = (0..a.runs)
        .into_par_iter()
        .map(|i| anneal_edge_variance(&c, &config(a.seed.wrapping_add(i))))
        .collect::<crate::Result<_>>()?;
    // earliest seed wins ties
    let best = results
        .iter()
        .reduce(|x, y| {
            let better = match direction {
                Direction::Minimize => y.best_variance < x.best_variance,
                Direction::Maximize => y.best_variance > x.best_variance,
            };
            if better { y } else { x }
        })
        .unwrap();

    std::fs::create_dir_all(&a.out_dir)?;
    let best_path = a.out_dir.join("best.facets");
    let moves_path = a.out_dir.join("moves.csv");
    let trace_path = a.out_dir.join("trace.csv");
    std::fs::write(&best_path, best.best_complex.to_text())?;
    std::fs::write(&moves_path, best.move_log_csv())?;
    std::fs::write(&trace_path, best.trace_csv())?;
    let v = best.best_variance;
    let body = json_line(&serde_json::json!({
        "initial_variance": { "numerator": best.initial_variance.numer().to_string(),
                              "denominator": best.initial_variance.denom().to_string() },
        "best_variance": { "numerator": v.numer().to_string(), "denominator": v.denom().to_string(),
                           "decimal": format!("{:.5}", crate::invariants::to_f64(&v)) },
        "f_vector": best.best_complex.f_vector().as_array(),
        "accepted_moves": best.move_log.len(),
    }))?;
    let mut o = Outcome::new(body, None);
    o.extra_outputs = vec![best_path, moves_path, trace_path];
    o.input_sha256 = Some(sum);
    o.seed = Some(a.seed);
    Ok(o)
}

fn cmd_collapse(a: CollapseArgs) -> Result<Outcome, Failure> {
    let (c, sum) = read_manifold(&a.io.input)?;
    let g = c.dual_graph()?;
    let mut tree = wilson_sample(&g, a.seed)?;
    if let Some(f) = a.remove_facet {
        if f >= c.facet_count() {
            return Err(Failure {
                code: EXIT_USAGE,
                message: format!("--remove-facet {f} out of range (0..{})", c.facet_count()),
            });
        }
        tree = tree.reroot(&g, f)?;
    }
    let three = tree_collapse_sequence(&c, &tree)?;
    let tc = collapse_along_tree(&c, &tree)?;
    let outcome = greedy_collapse(&tc, a.seed);
    let removed = c.facets()[tree.root()];
    let body = json_line(&serde_json::json!({
        "removed_facet": { "index": tree.root(), "vertices": removed },
        "tree_arcs": tree.arcs(),
        "spanning_trees": count_spanning_trees(&g).to_string(),
        "collapsed_to_point": outcome.collapsed_to_point,
        "remaining_f_vector": outcome.remainder.f_vector(),
        "three_dimensional_steps": removal_log_json_lines(&three).lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .collect::<Vec<_>>(),
        "two_dimensional_steps": outcome.log_json_lines().lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .collect::<Vec<_>>(),
    }))?;
    let mut o = Outcome::new(body, a.io.out);
    o.input_sha256 = Some(sum);
    o.seed = Some(a.seed);
    Ok(o)
}

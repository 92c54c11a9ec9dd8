//! `causal-id`: identify causal effects from the command line.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when the effect
//! is not identifiable, 3 when verification exceeds its tolerance.

mod report;
mod verify;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use causal_id::admg::{parse_graph_text, Admg, VarSet, VertexName};
use causal_id::expr::{to_latex, to_text};
use causal_id::identify::{identify_traced, IdentifyError, IdentifyOptions, Query};
use causal_id::SimplifyLevel;
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::IdentifyReport;

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_IDENTIFIABLE: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "causal-id",
    version,
    about = "Causal effect identification on acyclic directed mixed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify P_x(y | z) and print the resulting expression.
    Identify(IdentifyArgs),
    /// Identify an effect in a model file's graph and compare against the model.
    Verify(VerifyArgs),
    /// Print a graph in Graphviz DOT format.
    ExportDot(GraphSource),
}

#[derive(Args)]
struct GraphSource {
    /// Edges such as "X->Z,Z->Y,X<->Y".
    #[arg(long)]
    graph: Option<String>,
    /// File with one edge per line (`#` starts a comment); `-` reads stdin.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Outcome variables.
    #[arg(long, value_delimiter = ',', required = true)]
    effect: Vec<String>,
    /// Intervention variables.
    #[arg(long = "do", value_delimiter = ',')]
    intervene: Vec<String>,
    /// Conditioning variables.
    #[arg(long, value_delimiter = ',')]
    cond: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Latex,
    Text,
    /// The full report as JSON.
    Ast,
}

#[derive(Args)]
struct IdentifyArgs {
    #[command(flatten)]
    source: GraphSource,
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, value_enum, env = "CAUSAL_ID_FORMAT", default_value = "latex")]
    format: Format,
    /// Simplification level: none, basic or full.
    #[arg(long, default_value_t = SimplifyLevel::Full)]
    simplify: SimplifyLevel,
    /// Reduce hedge witnesses to literal C-forests.
    #[arg(long)]
    thin_hedge: bool,
    /// Print the recursion trace to stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// TOML model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    query: QueryArgs,
    /// Number of models checked: the file itself, then random
    /// re-parameterizations of its graph.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Seed for the random re-parameterizations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest accepted absolute deviation.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match cli.command {
        Command::Identify(args) => run_identify(args),
        Command::Verify(args) => verify::run(args),
        Command::ExportDot(source) => load_graph(&source).map(|g| {
            print!("{}", g.to_dot());
            ExitCode::SUCCESS
        }),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_USAGE)
    })
}

fn load_graph(source: &GraphSource) -> anyhow::Result<Admg> {
    let text = match (&source.graph, &source.graph_file) {
        (Some(inline), file) => {
            if file.is_some() {
                eprintln!("warning: both --graph and --graph-file given; using --graph");
            }
            inline.clone()
        }
        (None, Some(path)) if path.as_os_str() == "-" => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("reading graph from stdin")?;
            buf
        }
        (None, Some(path)) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, None) => bail!("no graph given; use --graph or --graph-file"),
    };
    Ok(parse_graph_text(&text)?)
}

fn names(raw: &[String]) -> anyhow::Result<VarSet> {
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| VertexName::new(s).map_err(anyhow::Error::from))
        .collect()
}

impl QueryArgs {
    fn to_query(&self) -> anyhow::Result<Query> {
        Ok(Query::new(
            names(&self.effect)?,
            names(&self.intervene)?,
            names(&self.cond)?,
        ))
    }
}

fn run_identify(args: IdentifyArgs) -> anyhow::Result<ExitCode> {
    let g = load_graph(&args.source)?;
    let q = args.query.to_query()?;
    let options = IdentifyOptions {
        simplify: args.simplify,
        thin_hedge: args.thin_hedge,
    };
    let traced = identify_traced(&q, &g, options);
    if args.verbose {
        for step in &traced.trace {
            eprintln!("{step}");
        }
    }
    let code = match &traced.result {
        Ok(_) => ExitCode::SUCCESS,
        Err(IdentifyError::NotIdentifiable(_)) => ExitCode::from(EXIT_NOT_IDENTIFIABLE),
        Err(e) => bail!("{e}"),
    };
    match (args.format, &traced.result) {
        (Format::Ast, _) => {
            let report = IdentifyReport::new(&q, &traced, args.verbose);
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        (Format::Latex, Ok(e)) => println!("{}", to_latex(e)),
        (Format::Text, Ok(e)) => println!("{}", to_text(e)),
        (_, Err(e)) => println!("{e}"),
    }
    Ok(code)
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schatten_core::PExponent;

#[derive(Debug, Parser)]
#[command(name = "schatten", version, about = "Schatten-class ideal laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for randomized checks; recorded in every report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format; csv is only available for `sweep`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override, `NAME=VALUE`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_override)]
    pub tolerances: Vec<(String, f64)>,
    /// Run batches on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide Schatten membership of a multiplication operator, exactly and numerically.
    Classify {
        #[command(flatten)]
        input: MeasureInput,
        #[arg(long, default_value = "1")]
        p: PExponent,
        #[command(flatten)]
        modes: Modes,
    },
    /// Schatten norm of a truncated operator.
    Norm {
        #[command(flatten)]
        input: OperatorInput,
        #[arg(long, default_value = "2")]
        p: PExponent,
        /// Gabor modes per cell, `-M..=M`.
        #[arg(long, default_value_t = 8)]
        m: u32,
    },
    /// Norms over a grid of exponents.
    Sweep {
        #[command(flatten)]
        input: OperatorInput,
        #[command(flatten)]
        grid: Grid,
    },
    /// Growth of trace partials and the divergence diagnosis.
    Diverge {
        #[command(flatten)]
        input: DivergeInput,
        #[arg(long, default_value = "1")]
        p: PExponent,
        #[command(flatten)]
        modes: Modes,
    },
    /// Representation data: pullback ideal, exact-sequence node, induced norms.
    Group {
        #[arg(long)]
        group: PathBuf,
        #[command(flatten)]
        grid: Grid,
    },
    /// Commuting blocks and coherence of the directed system over a grid.
    Fig2 {
        #[command(flatten)]
        input: ContextInput,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Run the whole acceptance suite.
    VerifyAll,
}

#[derive(Debug, Args)]
pub struct MeasureInput {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub function: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct OperatorInput {
    #[arg(long, requires = "function", conflicts_with = "group")]
    pub space: Option<PathBuf>,
    #[arg(long, requires = "space")]
    pub function: Option<PathBuf>,
    /// Group spec with a `function` field.
    #[arg(long)]
    pub group: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct DivergeInput {
    #[arg(long, requires = "function", conflicts_with = "partials")]
    pub space: Option<PathBuf>,
    #[arg(long, requires = "space")]
    pub function: Option<PathBuf>,
    /// JSON list of `{"size": …, "value": …}` points, diagnosed as given.
    #[arg(long)]
    pub partials: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ContextInput {
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub group: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Modes {
    /// Gabor mode counts `M` for the schedule family.
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 8, 16, 32, 64])]
    pub modes: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Exponents, ascending; `inf` allowed last.
    #[arg(long = "p-grid", value_delimiter = ',', default_value = "1,1.5,2,3,inf")]
    pub p_grid: Vec<PExponent>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("tolerance {name} is not a number"))?;
    Ok((name.trim().to_string(), value))
}

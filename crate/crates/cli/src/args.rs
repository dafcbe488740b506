use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfep::rational::parse_rational;
use dfep::{ImpurityFn, Rational};

#[derive(Debug, Parser)]
#[command(name = "dfep", version, about = "Greedy max-cost decision trees")]
pub struct Cli {
    /// key=value file whose entries act as flags of the subcommand; flags on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one greedy tree and print it with a summary line.
    Build(BuildArgs),
    /// Build one tree per grid point and emit the error/cost curve.
    Sweep(SweepArgs),
    /// Check admissibility, approximation or error bounds.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    /// 1024 objects, 4 classes, 10 binary tests.
    Outlier,
    /// 60-object two-test instance made complete with one-hot tests.
    Fig1,
    /// The same instance with its two tests only (incomplete).
    Fig1Core,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV dataset or instance JSON.
    #[arg(value_name = "INPUT", conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    /// Label column of a CSV, by name or 0-based index; default last.
    #[arg(long)]
    pub label_column: Option<String>,
    /// Quantization levels for continuous CSV columns.
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Comma-separated cell values treated as missing.
    #[arg(long, default_value = ",?")]
    pub missing: String,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

fn rational(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if r < Rational::from_integer(0) {
        return Err(format!("`{s}` is negative"));
    }
    Ok(r)
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// pairs | powers:L | hinged:ALPHA | hinged-offset:ALPHA | poly:EXPR
    #[arg(long, default_value = "pairs")]
    pub impurity: ImpurityFn,
    /// Stop at nodes whose impurity is at most D.
    #[arg(long, value_parser = rational, conflicts_with = "delta_frac")]
    pub delta: Option<Rational>,
    /// Stopping threshold as a fraction of the root impurity.
    #[arg(long, value_parser = rational)]
    pub delta_frac: Option<Rational>,
    /// Maximum cost of any root-to-leaf path.
    #[arg(long, value_parser = rational)]
    pub budget: Option<Rational>,
    /// Write the tree JSON here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the per-node greedy trace as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated impurities, one curve each.
    #[arg(long, default_value = "pairs", value_delimiter = ',')]
    pub impurity: Vec<ImpurityFn>,
    /// Budget grid: `A..B` (inclusive integers) or a comma list.
    #[arg(long, group = "grid")]
    pub budget_grid: Option<String>,
    #[arg(long, group = "grid")]
    pub delta_grid: Option<String>,
    /// Hinge values; every impurity must be hinged.
    #[arg(long, group = "grid")]
    pub alpha_grid: Option<String>,
    /// Report only the per-point minimum-error tree across impurities.
    #[arg(long)]
    pub best_of: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["admissibility", "approximation", "error_bounds", "embedding"]))]
pub struct AuditArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Check the admissibility properties of this impurity exhaustively.
    #[arg(long, value_name = "IMPURITY")]
    pub admissibility: Option<String>,
    /// Compare greedy trees with the exact optimum.
    #[arg(long)]
    pub approximation: bool,
    /// Check the error bounds of zero-impurity hinged trees.
    #[arg(long)]
    pub error_bounds: bool,
    /// Classify every tree of tiny instances by error and hinged impurity.
    #[arg(long)]
    pub embedding: bool,
    /// Ground set size for admissibility checks.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Number of classes of random instances.
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    /// Audit this many random instances instead of INPUT.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Impurities for approximation audits.
    #[arg(long, default_value = "pairs", value_delimiter = ',')]
    pub impurity: Vec<ImpurityFn>,
    #[arg(long, value_parser = rational, default_value = "0")]
    pub delta: Rational,
    /// Hinge value for error-bound audits.
    #[arg(long, value_parser = rational, default_value = "1")]
    pub alpha: Rational,
    /// Use the offset hinged form for error-bound and embedding audits.
    #[arg(long)]
    pub offset: bool,
    #[arg(long, value_parser = rational, value_delimiter = ',', default_value = "0,0.05,0.1,0.2")]
    pub eta: Vec<Rational>,
}

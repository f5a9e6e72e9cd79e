use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use harsanyi::io::Format;

#[derive(Debug, Parser)]
#[command(
    name = "harsanyi",
    version,
    about = "Harsanyi interaction analysis of black-box models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every mask, compute the interaction table, report salient concepts.
    Extract(ExtractArgs),
    /// Check the reconstruction identity and the fast transform against brute force.
    Verify(VerifyArgs),
    /// Emit the interaction-strength curve and real-vs-approximate matching curves.
    Curve(CurveArgs),
    /// Jaccard similarity of salient concepts between two inputs over shared words.
    Transfer(TransferArgs),
    /// Salient concepts with positive effect on a (wrong) target output.
    Attribute(AttributeArgs),
    /// Host an oracle over the wire protocol on stdio or TCP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Where values come from and how they are queried.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// planted:k=<K>[,sigma=..,floor=..,ceiling=..,noise=..,noise_max=..] | table:<file> | tcp:<host:port> | exec:<command>
    #[arg(long)]
    pub oracle: String,

    /// Player count; required for planted sources, checked against others.
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads issuing oracle queries.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,

    /// Per-request timeout for external oracles.
    #[arg(long = "timeout-ms", default_value_t = 30_000)]
    pub timeout_ms: u64,

    /// Requests in flight per worker.
    #[arg(long = "max-in-flight", default_value_t = 64)]
    pub max_in_flight: usize,

    /// Extra attempts for a failed query.
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Run directory; must not exist unless --force.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Replace an existing run directory.
    #[arg(long)]
    #[serde(skip)]
    pub force: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Salient-set sizes.
    #[arg(long = "M", value_delimiter = ',', default_value = "50,100,150,200")]
    pub m: Vec<usize>,

    /// Effects with |I| at or below this are left out of the concept report.
    #[arg(long = "zero-tol", default_value_t = 1e-9)]
    pub zero_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceMode {
    /// Brute force when n <= 16.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Stored interaction table to check against the values.
    #[arg(long)]
    pub interactions: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = ReferenceMode::Auto)]
    pub reference: ReferenceMode,

    /// Largest accepted relative deviation.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    #[arg(long = "M", value_delimiter = ',', default_value = "50,100,150,200")]
    pub m: Vec<usize>,

    /// RMSE half-window.
    #[arg(long = "window-t", default_value_t = 25)]
    pub window_t: usize,

    /// Masks on the matching curve: `all` or a sample size. Default: all when n <= 20.
    #[arg(long)]
    pub sample: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransferArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    /// Second input's oracle (same grammar as --oracle).
    #[arg(long = "oracle-b")]
    pub oracle_b: String,

    /// Player count for a planted second source; defaults to --n.
    #[arg(long = "n-b")]
    pub n_b: Option<usize>,

    #[arg(long = "seed-b")]
    pub seed_b: Option<u64>,

    /// JSON list of {"a": player, "b": player} pairs.
    #[arg(long)]
    pub mapping: PathBuf,

    #[arg(long = "M", value_delimiter = ',', default_value = "5,10,15,20,25,30")]
    pub m: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttributeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,

    #[arg(long = "M", value_delimiter = ',', default_value = "50")]
    pub m: Vec<usize>,

    /// The output being explained, e.g. the wrongly generated word.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Listen on this TCP address for one connection instead of using stdio.
    #[arg(long)]
    pub listen: Option<String>,
}

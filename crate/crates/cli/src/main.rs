mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ph_connect::graph::{Direction, WeightSource, WeightTransform};

/// Persistent homology of multi-channel time series.
///
/// Parameters come from built-in defaults, then `--config <file.toml>`
/// (flat `key = value` pairs), then command-line flags; flags win.
#[derive(Debug, Parser)]
#[command(name = "ph-connect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort (subject CSVs, manifest.csv, atlas.json).
    Synth {
        #[arg(long, default_value = "loop_vs_noise")]
        recipe: String,
        /// Subjects per group.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = commands::SYNTH_TIMEPOINTS)]
        timepoints: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sliding-window embedding of every channel of one subject table.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rips persistence diagrams of a point cloud JSON.
    Rips {
        #[arg(long, visible_alias = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correlation graph and graph-filtration diagrams of one subject table.
    Graphph {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Pairwise Wasserstein distances between diagram JSON files.
    Wdist {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Wilcoxon rank-sum tests on a distance matrix between manifest groups.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate a classifier on a feature table or on inter-ROI matrices.
    Classify {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run both pipelines end to end on a cohort directory.
    Run {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightSourceArg {
    Marginal,
    Partial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    OneMinusW,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Sublevel,
    Superlevel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Knn,
    Logistic,
}

#[derive(Debug, Clone, Default, Args)]
struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    atlas: Option<PathBuf>,
    /// Restrict to one network (repeatable).
    #[arg(long)]
    network: Vec<String>,
    /// Embedding dimension minus one.
    #[arg(long)]
    m: Option<usize>,
    /// Embedding delay in samples.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    maxdim: Option<usize>,
    #[arg(long)]
    max_simplices: Option<usize>,
    /// Matching exponent; `inf` gives the bottleneck distance.
    #[arg(long)]
    p: Option<String>,
    /// Ground norm on the plane; `inf` for the max norm.
    #[arg(long)]
    q: Option<String>,
    /// `drop` or `cap=V`.
    #[arg(long)]
    essential: Option<String>,
    #[arg(long, value_enum)]
    weight_source: Option<WeightSourceArg>,
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Ridge shrinkage toward the identity before inversion.
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// K-fold cross-validation instead of the 80/20 hold-out.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<WeightSourceArg> for WeightSource {
    fn from(a: WeightSourceArg) -> Self {
        match a {
            WeightSourceArg::Marginal => WeightSource::Marginal,
            WeightSourceArg::Partial => WeightSource::Partial,
        }
    }
}

impl From<TransformArg> for WeightTransform {
    fn from(a: TransformArg) -> Self {
        match a {
            TransformArg::OneMinusW => WeightTransform::OneMinusW,
            TransformArg::Raw => WeightTransform::Raw,
        }
    }
}

impl From<DirectionArg> for Direction {
    fn from(a: DirectionArg) -> Self {
        match a {
            DirectionArg::Sublevel => Direction::Sublevel,
            DirectionArg::Superlevel => Direction::Superlevel,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let limit = err
        .chain()
        .filter_map(|e| e.downcast_ref::<ph_connect::Error>())
        .any(ph_connect::Error::is_resource_limit);
    if limit {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

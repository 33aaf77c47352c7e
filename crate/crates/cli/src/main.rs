mod commands;
mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "modvit", version, about = "Modularity vitality and community-aware network attacks")]
pub struct Cli {
    /// Master seed for generators, community detection and benchmarks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "MODVIT_JOBS")]
    pub jobs: Option<usize>,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct GraphInput {
    /// Edge list: `u v [w]` per line, `#` comments, a lone label declares a node.
    #[arg(long)]
    pub graph: PathBuf,
    /// Read a third column as the edge weight.
    #[arg(long)]
    pub weighted: bool,
    /// `node_id,community_id` CSV. Detected with `--seed` when omitted.
    #[arg(long)]
    pub partition: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a benchmark network.
    Generate {
        #[arg(long, default_value = "cellular")]
        family: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        er_p: Option<f64>,
        #[arg(long)]
        sf_m: Option<usize>,
        #[arg(long)]
        sf_gamma: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
        /// Ground-truth cells of a cellular network.
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
    /// Detect communities.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        weighted: bool,
        #[arg(long, default_value_t = 32)]
        max_levels: usize,
        #[arg(long, default_value_t = 1e-9)]
        min_gain: f64,
        #[arg(short, long)]
        out: PathBuf,
        /// Write the `external_id,internal_id` label map.
        #[arg(long)]
        ids_out: Option<PathBuf>,
    },
    /// Score every node with one centrality.
    Score {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value = "mv")]
        method: String,
        /// Count intra-community weight on the group-network diagonal.
        #[arg(long)]
        group_self_loops: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a fragmentation attack and write its trace.
    Attack {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value = "initial")]
        strategy: String,
        #[arg(long, default_value = "mv")]
        method: String,
        /// Fraction of nodes to remove, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        #[arg(long)]
        group_self_loops: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Plan node removals that lower modularity.
    Deceive {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, default_value = "greedy", value_parser = ["initial", "greedy"])]
        strategy: String,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        target_q: Option<f64>,
        /// Stop once no removal lowers modularity.
        #[arg(long)]
        plateau: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Attack costs of trace files.
    Cost {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Kendall tau-b matrix between score files.
    Correlate {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the full attack cross product over generated networks.
    Benchmark {
        /// TOML experiment description; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        families: Option<Vec<String>>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<String>>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Keep every attack trace under `<out-dir>/traces`.
        #[arg(long)]
        traces: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Merge traces into one long-format CSV for plotting.
    Report {
        traces: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Exit status for a failed run.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<modvit::Error>(), Some(modvit::Error::NoConvergence { .. })));
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

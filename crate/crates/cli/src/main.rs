//! `hcmeta`: hard-core metastability experiments from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "hcmeta", version, about = "Hard-core dynamics and metastability on bipartite graphs")]
struct Cli {
    /// Worker threads for parallel sampling and searches.
    #[arg(long, global = true, env = "HCMETA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command that works on a graph.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Graph spec (complete:MxN, cycle:N, path:N, ladder:N, torus:MxN,
    /// hypercube:D, clique:N, random:NUxNV:P:SEED, doubled(SPEC)) or @file.json.
    #[arg(long)]
    pub graph: String,
    /// Exponent alpha in lambda_bar = lambda^(1+alpha), as p/q or a decimal.
    #[arg(long, default_value = "1/2")]
    pub alpha: String,
    /// Fugacity values, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List all configurations (independent sets) of the graph.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Refuse spaces larger than this.
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
    /// Effective resistance and critical resistance between two configurations.
    Resistance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ends: commands::Endpoints,
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
    /// Exact expected hitting time between two configurations.
    Hitting {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ends: commands::Endpoints,
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
    /// Isoperimetric profile Delta(s) as CSV.
    Isoperimetry {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        s_max: Option<usize>,
        /// Exhaustive search.
        #[arg(long, conflicts_with = "closed_form")]
        brute_force: bool,
        /// Closed-form values of a recognised family.
        #[arg(long)]
        closed_form: bool,
        /// Add a column from a second source and require agreement.
        #[arg(long, value_parser = ["closed-form", "brute-force"])]
        compare: Option<String>,
    },
    /// Critical size, resettling size and the hypotheses, as JSON.
    Critical {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: commands::AnalysisArgs,
    },
    /// Critical gate [Q, Q*] and its size, as JSON.
    Gate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: commands::AnalysisArgs,
        /// List every gate transition.
        #[arg(long)]
        transitions: bool,
    },
    /// Monte Carlo crossover times as JSON lines, closed by a statistics report.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ends: commands::Endpoints,
        #[command(flatten)]
        sim: commands::SimArgs,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Base seed of the statistical criteria.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Also write the results as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Enumerate { common, cap } => commands::enumerate(&common, cap),
        Command::Resistance { common, ends, cap } => commands::resistance(&common, &ends, cap),
        Command::Hitting { common, ends, cap } => commands::hitting(&common, &ends, cap),
        Command::Isoperimetry {
            common,
            s_max,
            brute_force,
            closed_form,
            compare,
        } => commands::isoperimetry(&common, s_max, brute_force, closed_form, compare.as_deref()),
        Command::Critical { common, analysis } => commands::critical(&common, &analysis),
        Command::Gate {
            common,
            analysis,
            transitions,
        } => commands::gate(&common, &analysis, transitions),
        Command::Simulate { common, ends, sim } => commands::simulate(&common, &ends, &sim),
        Command::Verify { seed, only, output } => commands::verify(seed, &only, output.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

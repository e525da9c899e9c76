//! Command-line front end: wires JSON configuration to the library and
//! emits CSV/JSON (and optional PNG) data files for external plotting.

pub mod commands;
pub mod config;
pub mod formats;
pub mod plot;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "qpf",
    about = "Invariant graphs, Lyapunov exponents, critical regions and \
             saddle-node bifurcation points for quasi-periodically forced \
             monotone interval maps",
    version
)]
struct Cli {
    /// JSON configuration file (defaults reproduce the Figure-1 setup).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for data files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Suppress the timestamp field for byte-identical reruns.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the assumption suite on a grid and report margins.
    Verify,
    /// Compute attractor/repeller graphs at one parameter value.
    Graphs {
        #[arg(long)]
        beta: Option<f64>,
        /// Also write a quick-look PNG.
        #[arg(long)]
        png: bool,
        /// Also write the compact binary graph format.
        #[arg(long)]
        binary: bool,
    },
    /// Bisect the critical parameter and classify the bifurcation.
    Bisect,
    /// Run the critical-region induction and report bounds/conditions.
    Regions {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Tabulate Lyapunov exponents and gaps over a beta range.
    Sweep {
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 33)]
        count: usize,
    },
    /// One Figure-1 panel: graphs plus pinch statistics.
    Figure {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        png: bool,
        #[arg(long)]
        binary: bool,
    },
}

/// Run the CLI on explicit arguments; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through this path with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };

    if cli.threads > 0 {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }

    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return 2;
            }
        },
        None => RunConfig::default(),
    };
    let resolved = match config.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };

    let timestamp = if cli.no_timestamp {
        None
    } else {
        Some(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    };

    let mut ctx = commands::Ctx {
        resolved,
        out_dir: cli.out.clone(),
        timestamp,
        beta: None,
        png: false,
        binary: false,
    };

    match cli.command {
        Command::Verify => commands::cmd_verify(&ctx),
        Command::Graphs { beta, png, binary } => {
            ctx.beta = beta;
            ctx.png = png;
            ctx.binary = binary;
            commands::cmd_graphs(&ctx)
        }
        Command::Bisect => commands::cmd_bisect(&ctx),
        Command::Regions { beta, n_max } => {
            ctx.beta = beta;
            commands::cmd_regions(&ctx, n_max)
        }
        Command::Sweep { from, to, count } => commands::cmd_sweep(&ctx, from, to, count),
        Command::Figure { beta, png, binary } => {
            ctx.beta = beta;
            ctx.png = png;
            ctx.binary = binary;
            commands::cmd_figure(&ctx)
        }
    }
}

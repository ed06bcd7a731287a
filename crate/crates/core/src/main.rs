use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infotest::cli_io::{init_logging, run, summary_line, Overrides, RunConfig, Workflow};

#[derive(Parser)]
#[command(name = "infotest", version, about = "Test information structures in discrete games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Market CSV (market_id, x_*, y_*).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for result.json and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory persisting vertex sets across runs.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Test H0 against one baseline.
    Test,
    /// Confidence set for theta over the grid.
    CsTheta,
    /// Sequential test along a chain of baselines.
    SeqTest,
    /// Per-market confidence set with Bonferroni and Holm.
    CsMarkets,
    /// Monte-Carlo size and power table.
    McPower,
    /// Outcome probability bounds of the BCE prediction.
    BceBounds,
}

impl From<Command> for Workflow {
    fn from(c: Command) -> Self {
        match c {
            Command::Test => Workflow::Test,
            Command::CsTheta => Workflow::CsTheta,
            Command::SeqTest => Workflow::SeqTest,
            Command::CsMarkets => Workflow::CsMarkets,
            Command::McPower => Workflow::McPower,
            Command::BceBounds => Workflow::BceBounds,
        }
    }
}

fn execute(cli: &Cli) -> infotest::Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| infotest::Error::Config(format!("thread pool: {e}")))?;
    }
    let path = cli.config.as_ref().ok_or_else(|| infotest::Error::Config("--config is required".into()))?;
    let mut config = RunConfig::from_file(path)?;
    let overrides = Overrides { data: cli.data.clone(), seed: cli.seed, out: cli.out.clone(), cache: cli.cache.clone() };
    config.apply(cli.command.into(), &overrides)?;
    let envelope = run(&config)?;
    for w in &envelope.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", summary_line(&envelope));
    if config.out.is_none() {
        println!("{}", serde_json::to_string_pretty(&envelope)?);
    }
    Ok(envelope.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

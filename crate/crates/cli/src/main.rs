use std::path::PathBuf;
use std::process::ExitCode;

use boostfield_cli::config::Suite;
use boostfield_cli::{load_config, run, Overrides, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};
use clap::Parser;

/// Runs the boosted free-field verification suites and writes JSON reports.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite to run (repeatable); overrides the config selection.
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<Suite>,
    /// Output directory for reports and dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for intra-suite parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Some(jobs) = args.jobs {
        if jobs == 0 || rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            eprintln!("config error: --jobs must be a positive thread count");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let ov = Overrides { suites: args.suites, out: args.out, seed: args.seed };
    let result = load_config(args.config.as_deref(), &ov).and_then(|cfg| run(&cfg, std::io::stdout().lock()));
    match result {
        Ok(summary) if summary.pass => ExitCode::from(EXIT_OK as u8),
        Ok(summary) => {
            eprintln!("failing checks:");
            for s in summary.suites.iter().filter(|s| !s.pass) {
                for name in &s.failing {
                    eprintln!("  {}: {name}", s.suite);
                }
            }
            ExitCode::from(EXIT_FAILED as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

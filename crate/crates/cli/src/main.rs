use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kinreg::{run, thread_count, CliError, Command, RawConfig, RunConfig};

/// Verification suites for hypoelliptic smoothing of fractional kinetic equations.
#[derive(Debug, Parser)]
#[command(name = "kinreg", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// flat key = value parameter file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// worker threads (falls back to KINREG_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

fn main_inner(args: Args) -> Result<i32, CliError> {
    let raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let env = std::env::var("KINREG_THREADS").ok();
    let threads = thread_count(args.threads, env.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let config = RunConfig {
        raw,
        seed: args.seed,
        output_dir: args.out,
    };
    let outcome = pool.install(|| run(args.command, &config))?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    println!("status: {}", if outcome.passed { "pass" } else { "fail" });
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match main_inner(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

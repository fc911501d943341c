//! Orchestration of the verification suites: each command resolves its
//! parameters, runs, and writes `<command>.csv` plus `<command>.summary.txt`.

pub mod commands;
pub mod config;
pub mod rates;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub use config::{Params, RawConfig, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] kinreg_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Rates,
    LyapunovAudit,
    CommCheck,
    WeightsCheck,
    A0Audit,
    WickCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Solve,
        Command::Rates,
        Command::LyapunovAudit,
        Command::CommCheck,
        Command::WeightsCheck,
        Command::A0Audit,
        Command::WickCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Rates => "rates",
            Command::LyapunovAudit => "lyapunov-audit",
            Command::CommCheck => "comm-check",
            Command::WeightsCheck => "weights-check",
            Command::A0Audit => "a0-audit",
            Command::WickCheck => "wick-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Invalid(format!("unknown command {s}")))
    }
}

/// Result of one command before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: Vec<(String, String)>,
    pub passed: bool,
    /// additional files as (suffix, bytes), written to `<command><suffix>`
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Report {
    fn new(csv: String) -> Self {
        Self {
            csv,
            summary: Vec::new(),
            passed: true,
            extra: Vec::new(),
        }
    }

    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    fn require(&mut self, key: impl Into<String>, ok: bool) {
        self.passed &= ok;
        self.put(key, if ok { "pass" } else { "fail" });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a command and writes its files; assertion failures still write files.
pub fn run(command: Command, config: &RunConfig) -> Result<Outcome, CliError> {
    let (params, report) = commands::execute(command, &config.raw, config.seed)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let name = command.name();
    let mut files = Vec::new();
    let csv_path = dir.join(format!("{name}.csv"));
    write(&csv_path, report.csv.as_bytes())?;
    files.push(csv_path);
    let mut summary = format!("command = {name}\nseed = {}\n", config.seed);
    for (k, v) in params.iter() {
        summary.push_str(&format!("param.{k} = {v}\n"));
    }
    for (k, v) in &report.summary {
        summary.push_str(&format!("{k} = {v}\n"));
    }
    summary.push_str(&format!("status = {}\n", if report.passed { "pass" } else { "fail" }));
    let summary_path = dir.join(format!("{name}.summary.txt"));
    write(&summary_path, summary.as_bytes())?;
    files.push(summary_path);
    for (suffix, bytes) in &report.extra {
        let p = dir.join(format!("{name}{suffix}"));
        write(&p, bytes)?;
        files.push(p);
    }
    Ok(Outcome {
        passed: report.passed,
        files,
    })
}

/// Thread count from the flag, else `KINREG_THREADS`, else rayon's default (0).
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> Result<usize, CliError> {
    match (flag, env) {
        (Some(n), _) => Ok(n),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("KINREG_THREADS = {v} is not a count"))),
        (None, None) => Ok(0),
    }
}

//! `concop`: runs one experiment per invocation and writes JSON, CSV or SVG
//! into the output directory, appending a line to `manifest.jsonl`.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical shortfall (outputs are
//! still written), 4 I/O error. Failures print a JSON object on stderr.

mod commands;
mod config;
mod plot;

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::Report;
use config::{Flags, Format, RunConfig};

#[derive(Parser)]
#[command(name = "concop", version, about = "Fourier concentration operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Thinness profile theta(R) of a set family.
    Profile,
    /// Top eigenvalues, trace and Hilbert-Schmidt norm of P_E Q_F P_E.
    Spectrum,
    /// Norms of the three non-compact blocks for each R.
    Tailnorm,
    /// Logvinenko-Sereda norm of P_A Q_[-1,1].
    Lsdelta,
    /// Suprema of the Schur-test integrals of S and T.
    Schur,
    /// Residual of the four-block split of Q_F P_E for each R.
    Decomp,
    /// Dilation covariance gap for each R.
    Scalecheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Tailnorm => "tailnorm",
            Command::Lsdelta => "lsdelta",
            Command::Schur => "schur",
            Command::Decomp => "decomp",
            Command::Scalecheck => "scalecheck",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Shortfall(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Shortfall(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Input(_) => "input",
            Failure::Shortfall(_) => "non_convergence",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Shortfall(m) | Failure::Io(m) => m,
        }
    }
}

impl From<concop::Error> for Failure {
    fn from(e: concop::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn set_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("CONCOP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("CONCOP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size thread pool: {e}")))
}

fn write_outputs(cfg: &RunConfig, report: &Report, hash: &str) -> Result<Vec<String>, Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let mut written = Vec::new();
    if cfg.wants(Format::Json) {
        let doc = json!({
            "command": cfg.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": hash,
            "config": cfg,
            "result": report.result,
        });
        let name = format!("{}.json", cfg.command);
        let path = cfg.out.join(&name);
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        written.push(name);
    }
    if cfg.wants(Format::Csv) {
        let name = format!("{}.csv", cfg.command);
        let path = cfg.out.join(&name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let csv_err = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
        w.write_record(&report.csv_header).map_err(csv_err)?;
        for row in &report.csv_rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        written.push(name);
    }
    if cfg.wants(Format::Svg) {
        let plot = report
            .plot
            .as_ref()
            .ok_or_else(|| Failure::Input(format!("`{}` has no SVG output", cfg.command)))?;
        let name = format!("{}.svg", cfg.command);
        let path = cfg.out.join(&name);
        fs::write(&path, plot.render(hash)).map_err(|e| io_err(&path, e))?;
        written.push(name);
    }
    Ok(written)
}

fn append_manifest(cfg: &RunConfig, hash: &str, outputs: &[String], status: &str) -> Result<(), Failure> {
    let path = cfg.out.join("manifest.jsonl");
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let line = json!({
        "command": cfg.command,
        "config_hash": hash,
        "versions": { "concop": concop::VERSION, "concop-cli": env!("CARGO_PKG_VERSION") },
        "outputs": outputs,
        "status": status,
        "timestamp": stamp,
    });
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| io_err(&path, e))?;
    writeln!(f, "{line}").map_err(|e| io_err(&path, e))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    set_threads()?;
    let cfg = RunConfig::resolve(cli.command.name(), cli.flags)?;
    if cfg.wants(Format::Svg) && !matches!(cli.command, Command::Profile | Command::Spectrum | Command::Tailnorm) {
        return Err(Failure::Input(format!("`{}` has no SVG output", cfg.command)));
    }
    let report = commands::run(&cfg)?;
    let hash = cfg.hash();
    let outputs = write_outputs(&cfg, &report, &hash)?;
    let status = if report.shortfall.is_some() { "non_convergence" } else { "ok" };
    append_manifest(&cfg, &hash, &outputs, status)?;
    match &report.shortfall {
        Some(msg) => Err(Failure::Shortfall(msg.clone())),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Input(e.to_string().trim_end().to_string());
            eprintln!("{}", json!({ "error": { "kind": f.kind(), "message": f.message() }, "exit_code": f.code() }));
            return ExitCode::from(f.code());
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind(), "message": f.message() }, "exit_code": f.code() }));
            ExitCode::from(f.code())
        }
    }
}

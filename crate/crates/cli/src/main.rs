mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;

use commands::{Report, Status};
use config::{Format, Options, UsageError};

fn write_report(opts: &Options, report: &Report) -> Result<Option<PathBuf>> {
    let body = match opts.format() {
        Format::Csv => report.csv.clone(),
        Format::Json => serde_json::to_string_pretty(&report.json)? + "\n",
    };
    let Some(dir) = &opts.out else {
        print!("{body}");
        return Ok(None);
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
    let ext = match opts.format() {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let name = format!("{}-{}-{stamp}.{ext}", opts.command()?.name(), report.tag);
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(Some(path))
}

fn run(opts: Options) -> Result<ExitCode> {
    let opts = opts.resolve()?;
    let report = commands::run(&opts)?;
    if let Some(path) = write_report(&opts, &report)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(match &report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Warn(msg) if !opts.strict => {
            eprintln!("WARN: {msg}");
            ExitCode::SUCCESS
        }
        Status::Warn(msg) | Status::Fail(msg) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
    })
}

/// Usage problems exit with 2; numerical failures (nonconvergence, I/O) with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<pdconv::Error>() {
        Some(
            pdconv::Error::QuadratureNonconvergence { .. }
            | pdconv::Error::ModulusNonconvergence { .. }
            | pdconv::Error::Io(_),
        ) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let opts = Options::parse();
    match run(opts) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

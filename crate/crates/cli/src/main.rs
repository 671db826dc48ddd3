//! mcxc: multi-collinear functional reports.
//!
//! Usage: `mcxc <energy|convergence|rotation|torque> --config <path> [--out <path>]`
//!
//! Output goes to stdout unless --out is given. MCXC_THREADS caps the
//! internal parallelism; results are bitwise identical at any thread count.

mod commands;
mod config;

use config::RunConfig;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str =
    "usage: mcxc <energy|convergence|rotation|torque> --config <path> [--out <path>]";

struct Args {
    command: String,
    config: PathBuf,
    out: Option<PathBuf>,
}

fn parse_args() -> Result<Args, String> {
    let mut args = std::env::args().skip(1);
    let command = args.next().ok_or(USAGE)?;
    let mut config = None;
    let mut out = None;
    while let Some(flag) = args.next() {
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(args.next().ok_or("--config needs a path")?)),
            "--out" => out = Some(PathBuf::from(args.next().ok_or("--out needs a path")?)),
            other => return Err(format!("unknown argument '{other}'\n{USAGE}")),
        }
    }
    Ok(Args {
        command,
        config: config.ok_or_else(|| format!("missing --config\n{USAGE}"))?,
        out,
    })
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MCXC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| format!("MCXC_THREADS: expected a positive integer, got '{raw}'"))?;
    if threads == 0 {
        return Err("MCXC_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure thread pool: {e}"))
}

fn run() -> Result<(), String> {
    let args = parse_args()?;
    if !matches!(
        args.command.as_str(),
        "energy" | "convergence" | "rotation" | "torque"
    ) {
        return Err(format!("unknown command '{}'\n{USAGE}", args.command));
    }
    configure_threads()?;
    let cfg = RunConfig::from_file(&args.config).map_err(|e| e.to_string())?;

    let mut buffer = Vec::new();
    let result = match args.command.as_str() {
        "energy" => commands::cmd_energy(&cfg, &mut buffer),
        "convergence" => commands::cmd_convergence(&cfg, &mut buffer),
        "rotation" => commands::cmd_rotation(&cfg, &mut buffer),
        "torque" => commands::cmd_torque(&cfg, &mut buffer),
        _ => unreachable!(),
    };
    result.map_err(|e| e.to_string())?;

    match args.out {
        Some(path) => std::fs::write(&path, &buffer)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => std::io::stdout()
            .write_all(&buffer)
            .map_err(|e| format!("cannot write to stdout: {e}"))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("mcxc: {message}");
            ExitCode::FAILURE
        }
    }
}

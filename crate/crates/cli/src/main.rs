use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qtomo_cli::config::Format;
use qtomo_cli::{parse_config_in, run, ExitStatus};

/// Run a qtomo configuration file and write its result table.
#[derive(Parser, Debug)]
#[command(name = "qtomo", version)]
struct Args {
    /// Path to the configuration file.
    config: PathBuf,
    /// Output file; overrides `output.path`. Without either, results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Tolerance; overrides `numerics.tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return exit(ExitStatus::Config);
        }
    };
    let base = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut cfg = match parse_config_in(&text, base) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("config error: {e}");
            }
            return exit(ExitStatus::Config);
        }
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            eprintln!("config error: --tol must be positive");
            return exit(ExitStatus::Config);
        }
        cfg.numerics.tol = tol;
    }
    if let Some(f) = args.format.as_deref().and_then(Format::parse) {
        cfg.output.format = f;
    }
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("numerical error: {e}");
            return exit(ExitStatus::Numeric);
        }
    };
    let rendered = outcome.table.render(cfg.output.format);
    let target = args
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(|p| base.join(p)));
    match target {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return exit(ExitStatus::Numeric);
            }
        }
        None => print!("{rendered}"),
    }
    if !args.quiet {
        eprintln!(
            "{}: {} rows, worst gated value {:e} (tol {:e})",
            cfg.task.name(),
            outcome.table.rows.len(),
            outcome.worst,
            cfg.numerics.tol
        );
    }
    if let Some(b) = &outcome.breach {
        eprintln!("tolerance exceeded: {b}");
    }
    exit(outcome.status())
}

mod args;
mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use ffstat_core::ScanOptions;

use args::{Cli, Format};
use commands::Context;

const USAGE: u8 = 2;
const DISAGREEMENT: u8 = 1;

fn workers(cli: &Cli) -> Result<usize, String> {
    match std::env::var("FFSTAT_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!(
                "FFSTAT_THREADS must be a positive integer, got `{v}`"
            )),
        },
        // 0 lets rayon size the pool to the machine
        Err(_) => Ok(cli.threads.unwrap_or(0) as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = match workers(&cli) {
        Ok(w) => w,
        Err(msg) => {
            eprintln!("ffstat: {msg}");
            return ExitCode::from(USAGE);
        }
    };
    let ctx = Context {
        options: ScanOptions {
            budget: cli.budget,
            ..ScanOptions::with_workers(workers)
        },
        dry_run: cli.dry_run,
        want_cells: cli.format == Format::Csv,
    };

    let start = Instant::now();
    let outcome = match commands::run(&cli.command, &ctx) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("ffstat: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let elapsed = (!cli.no_timing).then(|| start.elapsed().as_millis() as u64);

    let text = match output::render(&cli, &outcome, elapsed) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("ffstat: {msg}");
            return ExitCode::from(USAGE);
        }
    };
    if let Err(e) = output::write(cli.output.as_deref(), &text) {
        eprintln!("ffstat: cannot write output: {e}");
        return ExitCode::from(USAGE);
    }
    if let Some(msg) = &outcome.disagreement {
        eprintln!("ffstat: disagreement: {msg}");
        return ExitCode::from(DISAGREEMENT);
    }
    ExitCode::SUCCESS
}

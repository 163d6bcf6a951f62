use std::process::ExitCode;

use bvs_core::cli::{execute, exit_code, Cli, EXIT_DATA};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // 0 (or unset) leaves the choice to rayon.
    if let Some(threads) = std::env::var("BVS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, report),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(report.as_bytes())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            ExitCode::from(EXIT_DATA as u8)
        }
    }
}

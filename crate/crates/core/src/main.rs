use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pseudo_core::cli::{dispatch, Cli, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    let format = config.opts.format;
    match dispatch(&config) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.render(format).as_bytes());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("pseudo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

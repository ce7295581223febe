//! `cglmp`: reports, scans, and self-checks for maximal quantum
//! violations of the d-dimensional CGLMP inequality.

mod args;
mod error;
mod grid;
mod record;
mod run;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land on stdout and exit 0; genuine
            // usage errors land on stderr and exit 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Report(a) => run::cmd_report(a),
        Command::Scan(a) => run::cmd_scan(a),
        Command::Verify(a) => run::cmd_verify(a),
        Command::DumpMatrix(a) => run::cmd_dump_matrix(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

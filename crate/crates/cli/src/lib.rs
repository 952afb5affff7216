//! File formats, JSON reports, benchmark suites and the `fpo` command line
//! on top of `fpo-core`.

pub mod bench;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{execute, Cli};
pub use error::{FpoError, Result};

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fpo: {e}");
            e.exit_code()
        }
    }
}

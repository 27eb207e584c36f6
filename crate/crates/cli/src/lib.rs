//! Command-line surface of `bbmflow`: ensemble files, report emission and
//! subcommand dispatch.

pub mod commands;
pub mod ensemble_file;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{Cli, Outcome};
pub use ensemble_file::{read_ensemble, write_ensemble, Header, FORMAT_VERSION};
pub use error::{exit, CliError};

/// Environment variable capping worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "BBMFLOW_THREADS";

fn configure_threads() {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        // Fails only if the global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { 0 };
        }
    };
    configure_threads();
    match commands::run(cli) {
        Ok(Outcome::Verified { pass: false }) => exit::VERIFY_FAIL,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("bbmflow: {e}");
            e.exit_code()
        }
    }
}

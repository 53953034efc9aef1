//! Batch front-end for the `nodalab` engines: every subcommand runs one
//! pipeline, writes CSV/JSON outputs plus `manifest.json` (configuration
//! echo, versions, runtime, seed, per-file SHA-256), and on failure writes
//! `error.json` naming the module that failed.

pub mod battery;
pub mod config;
pub mod error;
pub mod run;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

pub use battery::{competitor_battery, BatteryReport, Competitor};
pub use config::{Cli, Command, ExperimentConfig, Settings};
pub use error::{CliError, ErrorRecord};
pub use run::{emit_plot_data, run, Manifest, ERROR_RECORD, MANIFEST};

/// Parse `args` (program name first), run, and map the outcome to an exit
/// status. Failures print the error record on stderr and, when the output
/// directory is known, also write it there.
pub fn main_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(status);
        }
    };
    let (command, flags) = cli.command.split();
    let fallback_out = flags.out.clone();
    match ExperimentConfig::resolve(command, flags) {
        Ok(config) => match run(&config) {
            Ok(_) => ExitCode::SUCCESS,
            Err(err) => fail(Some(&config.out), command, &err),
        },
        Err(err) => fail(fallback_out.as_deref(), command, &err),
    }
}

fn fail(dir: Option<&std::path::Path>, command: Command, err: &CliError) -> ExitCode {
    let text = run::write_error_record(dir, Some(command.name()), err);
    eprintln!("{text}");
    ExitCode::from(err.exit_code())
}

use std::process::ExitCode;

fn main() -> ExitCode {
    nodalab_cli::main_from_args(std::env::args_os())
}

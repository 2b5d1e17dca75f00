use std::process::ExitCode;

fn main() -> ExitCode {
    thinfilm::cli::run_cli(std::env::args_os())
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ampsyn_cli::run(std::env::args_os()))
}

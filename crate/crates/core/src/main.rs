use std::process::ExitCode;

fn main() -> ExitCode {
    qmean::cli::main_with_args(std::env::args_os())
}

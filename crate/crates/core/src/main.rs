use std::process::ExitCode;

fn main() -> ExitCode {
    britton::cli::run()
}

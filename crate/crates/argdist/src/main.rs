use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(argdist::cli::run() as u8)
}

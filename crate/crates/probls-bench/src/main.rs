use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(probls_bench::run_cli(std::env::args()) as u8)
}

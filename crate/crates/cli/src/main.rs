use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(fermigap_cli::run(std::env::args_os()))
}

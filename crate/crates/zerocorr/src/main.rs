use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(zerocorr::cli::run(std::env::args_os()))
}

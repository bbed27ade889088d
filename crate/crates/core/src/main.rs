use std::process::ExitCode;

fn main() -> ExitCode {
    ngon::cli::main_with_args()
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(lipframe::cli::main_from_env())
}

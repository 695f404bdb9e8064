use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = rigidity::cli::run(std::env::args_os());
    let result = if outcome.code == rigidity::cli::EXIT_USAGE {
        std::io::stderr().write_all(outcome.report.as_bytes())
    } else {
        std::io::stdout().write_all(outcome.report.as_bytes())
    };
    if result.is_err() {
        return ExitCode::from(rigidity::cli::EXIT_USAGE as u8);
    }
    ExitCode::from(outcome.code as u8)
}

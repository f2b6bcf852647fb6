use std::process::ExitCode;

use arbodyn_cli::CliError;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match arbodyn_cli::run(&argv) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

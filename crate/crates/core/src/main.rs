use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use buffon::cli::{execute, exit, exit_code, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::CONFIG,
            };
            return ExitCode::from(code as u8);
        }
    };

    let rendered = match execute(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("buffon {}: {e}", cli.command.name());
            return ExitCode::from(exit_code(&e) as u8);
        }
    };

    let written = match &cli.command.common().output {
        Some(path) => std::fs::write(path, rendered.as_bytes()),
        None => std::io::stdout().lock().write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("buffon: cannot write output: {e}");
        return ExitCode::from(exit::CONFIG as u8);
    }
    ExitCode::SUCCESS
}

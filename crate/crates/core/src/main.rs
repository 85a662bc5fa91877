use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ifelm::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", line.trim_start_matches("error:").trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok((text, failure)) => {
            print!("{text}");
            match failure {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    eprintln!("error: comparison failed: {f}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use gaussmink_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.into_invocation().and_then(|inv| run(&inv)) {
        Ok(r) => {
            print!("{}", r.summary);
            ExitCode::from(r.status.exit_code())
        }
        Err(e) => {
            eprintln!("gaussmink: {e}");
            ExitCode::from(2)
        }
    }
}

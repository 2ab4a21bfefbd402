use std::process::ExitCode;

use clap::Parser;
use hyponorm_cli::{emit, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(&cli, &out).map(|()| out.code)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hyponorm: {e}");
            ExitCode::from(e.code())
        }
    }
}

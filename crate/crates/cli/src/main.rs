mod args;
mod commands;
mod error;
mod rundir;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliResult;

fn dispatch(cli: &Cli) -> CliResult<()> {
    let out = match &cli.command {
        Command::Extract(a) => commands::extract(a)?,
        Command::Verify(a) => commands::verify(a)?,
        Command::Curve(a) => commands::curve(a)?,
        Command::Transfer(a) => commands::transfer(a)?,
        Command::Attribute(a) => commands::attribute(a)?,
        Command::Serve(a) => return commands::serve(a),
    };
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use trop_asym::{run, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are input errors; help and version requests succeed.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let text = match run(&cfg) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("trop-asym: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trop-asym: input error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use netiv::cli::{emit, run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| emit(&o).map(|s| (s, o.exit_code)));
    match result {
        Ok((stdout, code)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(stdout.as_bytes());
            ExitCode::from(code as u8)
        }
        Err(e) => {
            let body = serde_json::to_string_pretty(&e.to_json()).expect("serializable");
            eprintln!("{body}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

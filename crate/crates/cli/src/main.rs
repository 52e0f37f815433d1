use std::process::ExitCode;

use clap::Parser;
use hqc_gmd_cli::{run, Args, RunConfig, EXIT_CONFIG};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = RunConfig::from(args);
    let output = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    print!("{}", output.report);
    match &config.out {
        Some(dir) => match output.write(dir) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => print!("{}", output.csv),
    }
    ExitCode::from(output.exit_code() as u8)
}

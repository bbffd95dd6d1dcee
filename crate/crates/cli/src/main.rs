use std::process::ExitCode;

use lmg_otto_cli::run::EXIT_USAGE;
use lmg_otto_cli::{execute, parse_config, CliError};

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(Err(help)) => {
            let _ = help.print();
            return ExitCode::SUCCESS;
        }
        Err(Ok(e)) => {
            let e = CliError::from(e);
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cfg) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code >= EXIT_USAGE);
            ExitCode::from(code as u8)
        }
    }
}

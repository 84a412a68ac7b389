use std::process::ExitCode;

use wxindex::cli::{run, Outcome};

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(Outcome::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Written(paths)) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

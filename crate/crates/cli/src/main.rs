use std::process::ExitCode;
use strong_taylor_cli::{parse_args, run, Parsed};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os().collect()).and_then(|p| match p {
        Parsed::Run(cli) => run(cli).map(|()| 0),
        Parsed::Display { text, code } => {
            print!("{text}");
            Ok(code)
        }
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

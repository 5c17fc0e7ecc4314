use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match mec_morl::cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match mec_morl::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mec-morl: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

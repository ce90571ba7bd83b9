use std::process::ExitCode;

use ncsym_cli::{emit_report, parse_args, run_suite, CliError, Invocation};

fn run() -> Result<i32, CliError> {
    let cfg = match parse_args(std::env::args())? {
        Invocation::Run(cfg) => cfg,
        Invocation::Info(text) => {
            print!("{text}");
            return Ok(0);
        }
    };
    let report = run_suite(&cfg)?;
    emit_report(&report, cfg.format, cfg.out.as_deref())?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("verify: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

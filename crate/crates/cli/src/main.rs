mod config;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;

use config::{parse_config, UsageError};

/// 1 for usage and config errors, 2 for I/O and serialization, 3 for
/// violated numerical preconditions.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<clap::Error>() {
            return 1;
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<dqnn::Error>() {
            return if e.is_numeric() { 3 } else { 2 };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                let informational = matches!(clap_err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
                return ExitCode::from(if informational { 0 } else { 1 });
            }
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };
    match run::run(&config) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use twistcheck_cli::config::CONFIG_ENV;
use twistcheck_cli::{emit, resolve, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(cli, std::env::var_os(CONFIG_ENV).map(Into::into)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run(&cfg);
    if let Err(e) = emit(&report, cfg.format, cfg.out.as_deref()) {
        eprintln!("verify: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

use std::process::ExitCode;

use clap::Parser;

use hypercone_cli::{run, Cli, Command};

fn out_path(cmd: &Command) -> Option<&std::path::Path> {
    let o = match cmd {
        Command::Family(o) | Command::Hdist(o) | Command::Pack(o) | Command::Bounds(o) => o,
        Command::VerifyLemma { opts, .. } => opts,
    };
    o.out.as_deref()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("HYP_THREADS") {
        match v.parse::<usize>() {
            Ok(k) if k > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(k).build_global().ok();
            }
            _ => {
                eprintln!("usage error: HYP_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli.command) {
        Ok(report) => {
            let text = report.to_json();
            if let Some(path) = out_path(&cli.command) {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            print!("{text}");
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed: {}", report.checks.iter().filter(|c| !c.holds).map(|c| c.tag.as_str()).collect::<Vec<_>>().join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

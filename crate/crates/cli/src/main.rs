use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use erlang_queue_cli::args::Cli;
use erlang_queue_cli::commands::run;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let output = match run(cli) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("erlq: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(output.stdout.as_bytes());
    let written = match &output.out {
        Some(path) => std::fs::write(path, &output.body),
        None => stdout.write_all(output.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("erlq: failed to write output: {e}");
        return ExitCode::from(1);
    }
    if output.failed {
        eprintln!("erlq: one or more cells failed to solve");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

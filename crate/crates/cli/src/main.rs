use std::process::ExitCode;

use clap::Parser;

use sepkit::commands::{run, Cli, Io, EXIT_IO};

fn main() -> ExitCode {
    // Usage errors exit 1; clap's default 2 is reserved for invalid states.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO } else { 0 });
        }
    };
    if let Err(e) = sepkit::init_threads() {
        eprintln!("sepkit: {e}");
        return ExitCode::from(EXIT_IO);
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(&cli, &mut Io { out: &mut out, err: &mut err });
    ExitCode::from(code)
}

use std::io::Write;

fn main() {
    let outcome = cartesian_lens_cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(&outcome.stdout);
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}

use std::io::Write;

fn main() {
    env_logger::init();
    let (code, output) = decisive::cli::run_with_args(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(output.as_bytes());
    std::process::exit(code);
}

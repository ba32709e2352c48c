use std::io::Write;

fn main() {
    let outcome = symdef::execute(std::env::args_os());
    let wrote_file = std::env::args_os().any(|a| a == "--out" || a.to_string_lossy().starts_with("--out="));
    if outcome.code == symdef::EXIT_USAGE {
        eprint!("{}", outcome.output);
    } else if !wrote_file {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(outcome.output.as_bytes());
    }
    std::process::exit(outcome.code);
}

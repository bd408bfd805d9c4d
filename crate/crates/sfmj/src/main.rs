use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match sfmj::cli::parse_args(&args) {
        Ok(cfg) => sfmj::cli::execute(&cfg, &mut std::io::stdout(), &mut std::io::stderr()),
        Err(msg) => {
            let mut err = std::io::stderr();
            let _ = writeln!(err, "error: {msg}");
            let _ = write!(err, "{}", sfmj::cli::USAGE);
            sfmj::cli::exit_code::USAGE
        }
    };
    std::process::exit(code);
}

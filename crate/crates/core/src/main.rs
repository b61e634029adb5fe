use clap::Parser;
use qgtlab::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, message) = run(&cli);
    if let Some(msg) = message {
        eprintln!("qgtlab: {msg}");
    }
    std::process::exit(code);
}

use clap::Parser;

use dsrn_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli, std::env::vars()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

use adaptive_qec::cli::{exit_code, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    match adaptive_qec::commands::run(cli.command) {
        Ok(text) => print!("{text}"),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}

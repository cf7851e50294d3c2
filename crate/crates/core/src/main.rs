use clap::Parser;

use quanta_abm::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

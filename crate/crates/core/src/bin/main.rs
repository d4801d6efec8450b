use clap::Parser;
use horizontal_whitney::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}

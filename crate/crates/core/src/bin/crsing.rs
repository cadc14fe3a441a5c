use clap::Parser;
use crsing::cli::{execute, init_threads, Cli};

fn main() {
    init_threads();
    std::process::exit(execute(Cli::parse()));
}

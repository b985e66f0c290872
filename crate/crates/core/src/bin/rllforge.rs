use clap::Parser;

use rllforge::cli::{main_with, Cli, SEED_ENV};

fn main() {
    let cli = Cli::parse();
    let code = main_with(cli, std::env::var(SEED_ENV).ok());
    std::process::exit(code);
}

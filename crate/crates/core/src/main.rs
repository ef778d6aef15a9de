use clap::Parser;

use crowd_sweep::cli::{run_command, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run_command(&cli));
}

use clap::Parser;

use betavote::cli::{configure_threads, execute, Cli};

fn main() {
    let cli = Cli::parse();
    configure_threads();
    let output = execute(cli);
    print!("{}", output.stdout);
    eprint!("{}", output.stderr);
    std::process::exit(output.code);
}

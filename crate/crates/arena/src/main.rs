use clap::Parser;

use kgame_arena::cli::{run, Cli};

fn main() {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

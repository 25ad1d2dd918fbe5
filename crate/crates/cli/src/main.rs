use clap::Parser;
use revnets_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = run(cli, &mut out, &mut std::io::stderr());
    std::process::exit(code.code());
}

use clap::Parser;

fn main() {
    let cli = wtc_cli::Cli::parse();
    std::process::exit(wtc_cli::run(&cli));
}

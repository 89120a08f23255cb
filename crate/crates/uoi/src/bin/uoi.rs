use clap::Parser;

fn main() {
    let cli = uoi::cli::Cli::parse();
    std::process::exit(uoi::cli::run_cli(cli));
}

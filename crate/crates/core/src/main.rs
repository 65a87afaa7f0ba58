use clap::Parser;

fn main() {
    let cli = energyshed::cli::Cli::parse();
    std::process::exit(energyshed::cli::run(&cli));
}

use clap::Parser;

fn main() {
    let cli = bohr::cli::Cli::parse();
    std::process::exit(bohr::cli::run(&cli));
}

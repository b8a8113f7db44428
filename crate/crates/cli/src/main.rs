use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PMAC_LOG", "warn")).init();
    let cli = pmac_cli::Cli::parse();
    std::process::exit(pmac_cli::run(&cli));
}

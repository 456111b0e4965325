use clap::Parser;
use fairshift_harness::cli::{resolve_config, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = cli.command.parts();
    let result = resolve_config(mode, args).and_then(|cfg| run(mode, &cfg));
    if let Err(e) = result {
        eprintln!("fairshift {}: {e}", mode.name());
        std::process::exit(e.exit_code());
    }
}

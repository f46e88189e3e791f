use clap::Parser;

use stabgreedy_cli::opts::{Cli, Command};
use stabgreedy_cli::{configure_threads, presets, runner};

fn main() {
    let cli = Cli::parse();
    configure_threads();
    let result = match &cli.command {
        Command::Run(args) => runner::execute_run(args),
        Command::PowerDecay(args) => presets::power_decay(args),
        Command::FpAccuracy(args) => presets::fp_accuracy(args),
        Command::PointDist(args) => presets::point_dist(args),
    };
    if let Err(failure) = result {
        eprintln!("error: {failure}");
        std::process::exit(failure.exit_code());
    }
}

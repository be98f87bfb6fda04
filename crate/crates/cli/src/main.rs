//! Command-line surface for exposure games: training, equilibrium sweeps,
//! audits, scenario checks, hardmax mixed-NE solvers, and manifest replay.

use clap::{Parser, Subcommand};

use exposure_games_cli::commands;

#[derive(Parser)]
#[command(
    name = "exposure-games",
    version,
    about = "Exposure games: train embeddings, search equilibria, audit incentives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit PMF/NMF embeddings from a ratings CSV.
    Train(commands::train::TrainArgs),
    /// Sweep ascent runs over a (recommender seed x optimizer seed) grid.
    Solve(commands::solve::SolveArgs),
    /// Compute audit metrics over solve records.
    Audit(commands::audit::AuditArgs),
    /// Run a built-in or file-defined scenario's checks.
    Scenario(commands::scenario::ScenarioArgs),
    /// Mixed-NE solvers for two-player hardmax games.
    Hardmax(commands::hardmax::HardmaxArgs),
    /// Re-execute a recorded run from its manifest.
    Replay(commands::replay::ReplayArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Solve(args) => commands::solve::run(args),
        Command::Audit(args) => commands::audit::run(args),
        Command::Scenario(args) => commands::scenario::run(args),
        Command::Hardmax(args) => commands::hardmax::run(args),
        Command::Replay(args) => commands::replay::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

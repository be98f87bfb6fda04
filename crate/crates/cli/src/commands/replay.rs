//! `replay`: re-execute a recorded run from its manifest. Inputs are
//! re-hashed first; outputs land in a fresh directory and reproduce the
//! original bytes exactly.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::commands;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// manifest.json of the run to reproduce.
    #[arg(long)]
    pub manifest: PathBuf,

    /// Where the replayed outputs go.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    manifest.verify_inputs()?;
    match manifest.command.as_str() {
        "train" => {
            let mut cmd: commands::train::TrainArgs = serde_json::from_value(manifest.args)?;
            cmd.out = args.out.clone();
            commands::train::run(&cmd)
        }
        "solve" => {
            let mut cmd: commands::solve::SolveArgs = serde_json::from_value(manifest.args)?;
            cmd.out = args.out.clone();
            commands::solve::run(&cmd)
        }
        "audit" => {
            let mut cmd: commands::audit::AuditArgs = serde_json::from_value(manifest.args)?;
            cmd.out = args.out.clone();
            commands::audit::run(&cmd)
        }
        "scenario" => {
            let mut cmd: commands::scenario::ScenarioArgs = serde_json::from_value(manifest.args)?;
            cmd.out = args.out.clone();
            commands::scenario::run(&cmd)
        }
        "hardmax" => {
            let mut cmd: commands::hardmax::HardmaxArgs = serde_json::from_value(manifest.args)?;
            cmd.out = args.out.clone();
            commands::hardmax::run(&cmd)
        }
        other => Err(CliError::Invalid(format!(
            "manifest for unknown command {other:?}"
        ))),
    }
}

//! `hardmax`: mixed-equilibrium solvers for two-player hardmax games — the
//! discretized-game LP or the finite-support hitting-set search — with an
//! independent verification margin in the output.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use exposure_games::demand::DemandDistribution;
use exposure_games::game::GameConfig;
use exposure_games::hardmax::{
    discretize_sphere, hitting_set_mixed_ne, lp_mixed_ne, mixed_value_against,
    verify_mixed_strategy, MixedStrategy,
};
use exposure_games::scenarios;

use crate::error::{CliError, Result};
use crate::io::{read_embeddings_csv, write_json};
use crate::manifest::{RunManifest, TOOL_VERSION};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HardmaxArgs {
    #[arg(long, value_parser = ["lp", "hitting-set"])]
    pub method: String,

    /// Built-in scenario as the demand source.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Embeddings CSV as the demand source (uniform weights).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,

    /// LP strategy grid: a spherical-coordinate grid or the consumer
    /// directions themselves.
    #[arg(long, default_value = "sphere", value_parser = ["sphere", "consumers"])]
    pub grid: String,

    /// Points per spherical coordinate for --grid sphere.
    #[arg(long, default_value_t = 360)]
    pub k: usize,

    /// Expected embedding dimension; checked against the demand and used
    /// for the grid-size guard.
    #[arg(long)]
    pub d: Option<usize>,

    /// Support bound for the hitting-set search.
    #[arg(long, default_value_t = 8)]
    pub max_support: usize,

    /// Size of the dense angular verification grid (d = 2).
    #[arg(long, default_value_t = 10_000)]
    pub verify_grid: usize,

    #[arg(long, default_value = "out-hardmax")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MixedStrategyFile {
    pub tool_version: String,
    pub method: String,
    pub grid: String,
    /// Discretized game value (LP method only).
    pub value: Option<f64>,
    pub support: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    /// `min_s E[u_1] - 1/2` over the verification grid.
    pub verification_margin: f64,
    pub verification_grid: usize,
}

pub fn run(args: &HardmaxArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("hardmax", args)?;

    // The grid-size guard fires before any data is loaded when the
    // dimension is known from the flags alone.
    if let (Some(d), "sphere") = (args.d, args.grid.as_str()) {
        discretize_sphere(d, args.k)?;
    }

    let demand = match (&args.scenario, &args.embeddings) {
        (Some(name), None) => scenarios::builtin_scenario(name)?.demand,
        (None, Some(path)) => {
            manifest.record_input(path)?;
            let table = read_embeddings_csv(path)?;
            DemandDistribution::uniform(table.points)?
        }
        _ => {
            return Err(CliError::Invalid(
                "pass exactly one demand source: --scenario or --embeddings".into(),
            ))
        }
    };
    if let Some(d) = args.d {
        if d != demand.dim() {
            return Err(CliError::Invalid(format!(
                "--d {d} but the demand has dimension {}",
                demand.dim()
            )));
        }
    }
    let d = demand.dim();

    let (strategy, value, grid_desc): (MixedStrategy, Option<f64>, String) =
        match args.method.as_str() {
            "lp" => {
                let grid = match args.grid.as_str() {
                    "sphere" => discretize_sphere(d, args.k)?,
                    "consumers" => {
                        let mut points = Vec::new();
                        for (c, _) in demand.iter() {
                            let norm = c.norm();
                            if norm > 0.0 {
                                points.push(c / norm);
                            }
                        }
                        if points.is_empty() {
                            return Err(CliError::Invalid(
                                "no non-zero consumers to build the grid from".into(),
                            ));
                        }
                        points
                    }
                    other => return Err(CliError::Invalid(format!("unknown grid {other:?}"))),
                };
                let config = GameConfig::new(d, 2, 0.0)?;
                let (strategy, value) = lp_mixed_ne(&config, &demand, &grid)?;
                let desc = match args.grid.as_str() {
                    "sphere" => format!("sphere(k={})", args.k),
                    _ => format!("consumers({})", grid.len()),
                };
                (strategy, Some(value), desc)
            }
            "hitting-set" => {
                let found = hitting_set_mixed_ne(&demand, args.max_support)?;
                let strategy = found.ok_or_else(|| {
                    CliError::Invalid(format!(
                        "no mixed NE with support <= {} found within the search budget",
                        args.max_support
                    ))
                })?;
                (strategy, None, "finite-support".into())
            }
            other => return Err(CliError::Invalid(format!("unknown method {other:?}"))),
        };

    let verification_margin = if d == 2 {
        verify_mixed_strategy(&demand, &strategy, args.verify_grid)?
    } else {
        // beyond the plane, verify against the LP's own grid
        let grid = discretize_sphere(d, args.k.min(60))?;
        grid.iter()
            .map(|g| mixed_value_against(&demand, &strategy, g) - 0.5)
            .fold(f64::INFINITY, f64::min)
    };

    let file = MixedStrategyFile {
        tool_version: TOOL_VERSION.to_string(),
        method: args.method.clone(),
        grid: grid_desc,
        value,
        support: strategy
            .support()
            .iter()
            .map(|s| s.as_slice().to_vec())
            .collect(),
        probs: strategy.probs().to_vec(),
        verification_margin,
        verification_grid: args.verify_grid,
    };
    write_json(&args.out.join("mixed.json"), &file)?;
    manifest.finish(&args.out, started)?;
    println!(
        "{}: support {} points, verification margin {:.3e}",
        args.method,
        file.probs.len(),
        verification_margin
    );
    Ok(())
}

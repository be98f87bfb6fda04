//! `scenario`: run a built-in or file-defined scenario's declarative checks
//! and report pass/fail per check. Exits non-zero when a check fails.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use exposure_games::demand::DemandDistribution;
use exposure_games::game::GameConfig;
use exposure_games::scenarios::{self, CheckOutcome, Scenario, ScenarioCheck};

use crate::error::{CliError, Result};
use crate::io::write_json;
use crate::manifest::{RunManifest, TOOL_VERSION};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// Built-in scenario name (triangle, two-basis, eps-pne, n4-protective,
    /// orthant, cluster-emergence). Omit when using --file.
    pub name: Option<String>,

    /// Scenario definition file (TOML).
    #[arg(long)]
    pub file: Option<PathBuf>,

    /// Override the angular resolution of hardmax no-PNE sweeps.
    #[arg(long)]
    pub hardmax_sweep: Option<usize>,

    /// Override the temperature of the protective-positioning check.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Override the temperatures of the eps-PNE table.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    #[serde(default)]
    pub taus: Vec<f64>,

    /// Override the deviation-grid resolution of the eps-PNE table.
    #[arg(long)]
    pub grid: Option<usize>,

    #[arg(long, default_value = "out-scenario")]
    pub out: PathBuf,
}

/// Scenario definition file: a plain key-value format with nested tables.
#[derive(Debug, Deserialize)]
struct ScenarioFile {
    name: String,
    tau: f64,
    n: usize,
    nonneg: Option<bool>,
    demand: DemandSpec,
    #[serde(default)]
    checks: Vec<ScenarioCheck>,
}

#[derive(Debug, Deserialize)]
struct DemandSpec {
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ScenarioReport {
    pub tool_version: String,
    pub scenario: String,
    pub outcomes: Vec<CheckOutcome>,
    pub all_passed: bool,
}

fn load_scenario_file(path: &PathBuf) -> Result<Scenario> {
    let body = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let file: ScenarioFile = toml::from_str(&body)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let points: Vec<DVector<f64>> = file
        .demand
        .points
        .iter()
        .map(|p| DVector::from_row_slice(p))
        .collect();
    let demand = match file.demand.weights {
        Some(w) => DemandDistribution::new(points, w)?,
        None => DemandDistribution::uniform(points)?,
    };
    let d = demand.dim();
    let nonneg = file.nonneg.unwrap_or_else(|| demand.is_nonnegative());
    Ok(Scenario {
        name: file.name,
        config: GameConfig::new(d, file.n, file.tau)?.with_nonneg(nonneg),
        demand,
        checks: file.checks,
    })
}

fn apply_overrides(scenario: &mut Scenario, args: &ScenarioArgs) {
    for check in scenario.checks.iter_mut() {
        match check {
            ScenarioCheck::HardmaxNoPneSweep { resolution, .. } => {
                if let Some(r) = args.hardmax_sweep {
                    *resolution = r;
                }
            }
            ScenarioCheck::EpsPneTable {
                taus,
                grid_resolution,
            } => {
                if !args.taus.is_empty() {
                    *taus = args.taus.clone();
                }
                if let Some(g) = args.grid {
                    *grid_resolution = g;
                }
            }
            ScenarioCheck::ProtectivePositioning { tau, .. } => {
                if let Some(t) = args.tau {
                    *tau = t;
                }
            }
            _ => {}
        }
    }
}

pub fn run(args: &ScenarioArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("scenario", args)?;

    let mut scenario = match (&args.name, &args.file) {
        (Some(name), None) => {
            // the n4 construction is tau-parametric at build time
            if name == "n4-protective" {
                scenarios::n4_protective_scenario(args.tau.unwrap_or(0.25))?
            } else {
                scenarios::builtin_scenario(name)?
            }
        }
        (None, Some(path)) => {
            manifest.record_input(path)?;
            load_scenario_file(path)?
        }
        _ => {
            return Err(CliError::Invalid(
                "pass a built-in scenario name or --file, not both".into(),
            ))
        }
    };
    apply_overrides(&mut scenario, args);

    if scenario.checks.is_empty() {
        return Err(CliError::Invalid(format!(
            "scenario {:?} declares no checks",
            scenario.name
        )));
    }

    let mut outcomes = Vec::with_capacity(scenario.checks.len());
    for check in &scenario.checks {
        let outcome = scenarios::run_check(&scenario, check)?;
        println!(
            "[{}] {}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.name,
            outcome.details
        );
        outcomes.push(outcome);
    }
    let all_passed = outcomes.iter().all(|o| o.passed);
    let report = ScenarioReport {
        tool_version: TOOL_VERSION.to_string(),
        scenario: scenario.name.clone(),
        outcomes,
        all_passed,
    };
    write_json(&args.out.join("scenario.json"), &report)?;
    manifest.finish(&args.out, started)?;
    if !all_passed {
        return Err(CliError::Invalid(format!(
            "scenario {:?} has failing checks",
            scenario.name
        )));
    }
    Ok(())
}

//! `solve`: sweep the (recommender seed x optimizer seed) grid of ascent
//! runs over the requested game configurations and write one RunRecord per
//! run. The default grids mirror the audit protocol: tau in {0.01, 0.1, 1},
//! n in {10, 100}, step size in {0.01, 0.1}, d in {3, 50} when training.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use exposure_games::audit;
use exposure_games::demand::DemandDistribution;
use exposure_games::game::GameConfig;
use exposure_games::mf::{self, MfVariant, RatingsDataset, TrainConfig};
use exposure_games::scenarios;
use exposure_games::solver::{self, Initialization, LneClassification, OptimizerConfig};

use crate::error::{CliError, Result};
use crate::io::{check_nonnegative_ratings, read_embeddings_csv, read_ratings_csv, write_json};
use crate::manifest::{RunManifest, TOOL_VERSION};
use crate::records::RunRecordFile;
use crate::workers;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// User-embedding CSVs; each file acts as one recommender seed.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    #[serde(default)]
    pub embeddings: Vec<PathBuf>,

    /// Ratings CSV; a recommender is trained per recommender seed.
    #[arg(long)]
    pub ratings: Option<PathBuf>,

    /// Built-in scenario name as the demand source.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Recommender seeds (training path only).
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,

    /// Embedding dimensions for the training path.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3, 50])]
    #[serde(default)]
    pub train_d: Vec<usize>,

    #[arg(long, default_value = "pmf", value_parser = ["pmf", "nmf"])]
    pub train_variant: String,

    #[arg(long, default_value_t = 0.02)]
    pub train_reg: f64,

    #[arg(long, default_value_t = 0.005)]
    pub train_lr: f64,

    #[arg(long, default_value_t = 100)]
    pub train_epochs: usize,

    /// Temperatures to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.1, 1.0])]
    #[serde(default)]
    pub tau: Vec<f64>,

    /// Producer counts to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 100])]
    #[serde(default)]
    pub n: Vec<usize>,

    /// Step sizes to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.1])]
    #[serde(default)]
    pub step: Vec<f64>,

    /// Optimizer runs per cell (optimizer seeds 0..runs).
    #[arg(long, default_value_t = 10)]
    pub runs: u64,

    #[arg(long, default_value_t = 50_000)]
    pub max_iters: usize,

    /// Multiply the step size by tau before use (off by default).
    #[arg(long, default_value_t = false)]
    pub scale_step_by_tau: bool,

    /// Keep only runs the second-order test confirmed as local equilibria.
    #[arg(long, default_value_t = false)]
    pub confirmed_only: bool,

    #[arg(long, default_value = "out-solve")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveSummary {
    pub tool_version: String,
    pub confirmed_only: bool,
    pub total_runs: usize,
    pub written_runs: usize,
    pub records: Vec<SummaryRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub run_id: String,
    pub file: Option<String>,
    pub classification: LneClassification,
    pub converged: bool,
    pub iterations: usize,
    pub cluster_count: usize,
}

struct DemandSource {
    recommender_seed: u64,
    demand: DemandDistribution,
}

fn resolve_sources(args: &SolveArgs, manifest: &mut RunManifest) -> Result<Vec<DemandSource>> {
    let mut picked = 0;
    picked += usize::from(!args.embeddings.is_empty());
    picked += usize::from(args.ratings.is_some());
    picked += usize::from(args.scenario.is_some());
    if picked != 1 {
        return Err(CliError::Invalid(
            "pass exactly one demand source: --embeddings, --ratings, or --scenario".into(),
        ));
    }

    if !args.embeddings.is_empty() {
        let mut sources = Vec::new();
        for (idx, path) in args.embeddings.iter().enumerate() {
            manifest.record_input(path)?;
            let table = read_embeddings_csv(path)?;
            let demand = DemandDistribution::uniform(table.points)?;
            sources.push(DemandSource {
                recommender_seed: idx as u64,
                demand,
            });
        }
        return Ok(sources);
    }

    if let Some(name) = &args.scenario {
        let scenario = scenarios::builtin_scenario(name)?;
        return Ok(vec![DemandSource {
            recommender_seed: 0,
            demand: scenario.demand,
        }]);
    }

    let path = args.ratings.as_ref().expect("checked above");
    manifest.record_input(path)?;
    let rows = read_ratings_csv(path)?;
    let variant = match args.train_variant.as_str() {
        "pmf" => MfVariant::Pmf,
        "nmf" => {
            check_nonnegative_ratings(path, &rows)?;
            MfVariant::Nmf
        }
        other => return Err(CliError::Invalid(format!("unknown variant {other:?}"))),
    };
    let dataset = RatingsDataset::from_rows(&rows)?;
    let mut sources = Vec::new();
    for seed in 0..args.seeds {
        for &d in &args.train_d {
            let config = TrainConfig {
                dim: d,
                reg: args.train_reg,
                learning_rate: args.train_lr,
                epochs: args.train_epochs,
                seed,
                biased: false,
                holdout_fraction: None,
            };
            let (model, _) = match variant {
                MfVariant::Pmf => mf::train_pmf(&dataset, &config)?,
                MfVariant::Nmf => mf::train_nmf(&dataset, &config)?,
            };
            sources.push(DemandSource {
                recommender_seed: seed,
                demand: mf::build_demand(&model)?,
            });
        }
    }
    Ok(sources)
}

pub fn run(args: &SolveArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("solve", args)?;
    manifest.record_seeds(0..args.runs);

    for &tau in &args.tau {
        if tau <= 0.0 {
            return Err(CliError::Invalid(format!(
                "the ascent solver needs tau > 0, got {tau}"
            )));
        }
    }
    if args.tau.is_empty() || args.n.is_empty() || args.step.is_empty() || args.runs == 0 {
        return Err(CliError::Invalid("empty sweep grid".into()));
    }

    let sources = resolve_sources(args, &mut manifest)?;

    struct Cell {
        run_id: String,
        recommender_seed: u64,
        optimizer_seed: u64,
        config: GameConfig,
        optimizer: OptimizerConfig,
        source_idx: usize,
    }

    let mut cells = Vec::new();
    for (source_idx, source) in sources.iter().enumerate() {
        let d = source.demand.dim();
        let nonneg = source.demand.is_nonnegative();
        for &tau in &args.tau {
            for &n in &args.n {
                for &step in &args.step {
                    for opt_seed in 0..args.runs {
                        let config = GameConfig::new(d, n, tau)?.with_nonneg(nonneg);
                        let optimizer = OptimizerConfig {
                            step_size: step,
                            max_iters: args.max_iters,
                            convergence_tol: None,
                            seed: opt_seed,
                            scale_step_by_tau: args.scale_step_by_tau,
                        };
                        cells.push(Cell {
                            run_id: format!(
                                "d{d}-n{n}-tau{tau}-a{step}-r{}-o{opt_seed}",
                                source.recommender_seed
                            ),
                            recommender_seed: source.recommender_seed,
                            optimizer_seed: opt_seed,
                            config,
                            optimizer,
                            source_idx,
                        });
                    }
                }
            }
        }
    }

    let out = args.out.clone();
    std::fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    let pool = workers::pool()?;
    let results: Vec<Result<(RunRecordFile, Option<String>)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let demand = &sources[cell.source_idx].demand;
                let record = solver::run_lne(
                    &cell.config,
                    demand,
                    &cell.optimizer,
                    Initialization::Seeded,
                )?;
                let file = RunRecordFile {
                    run_id: cell.run_id.clone(),
                    recommender_seed: cell.recommender_seed,
                    optimizer_seed: cell.optimizer_seed,
                    config: cell.config,
                    optimizer: cell.optimizer.clone(),
                    iterations: record.iterations,
                    converged: record.converged,
                    utilities: record.utilities,
                    cluster_count: audit::cluster_count(&record.final_profile),
                    second_order: record.second_order,
                    final_profile: record.final_profile,
                };
                let keep = !args.confirmed_only
                    || file.second_order.classification == LneClassification::ConfirmedLne;
                let name = if keep {
                    let name = format!("run-{}.json", file.run_id);
                    write_json(&out.join(&name), &file)?;
                    Some(name)
                } else {
                    None
                };
                Ok((file, name))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut written = 0usize;
    for result in results {
        let (file, name) = result?;
        if name.is_some() {
            written += 1;
        }
        rows.push(SummaryRow {
            run_id: file.run_id,
            file: name,
            classification: file.second_order.classification,
            converged: file.converged,
            iterations: file.iterations,
            cluster_count: file.cluster_count,
        });
    }
    let summary = SolveSummary {
        tool_version: TOOL_VERSION.to_string(),
        confirmed_only: args.confirmed_only,
        total_runs: rows.len(),
        written_runs: written,
        records: rows,
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    manifest.finish(&args.out, started)?;
    println!(
        "solved {} runs ({} written) into {}",
        summary.total_runs,
        summary.written_runs,
        args.out.display()
    );
    Ok(())
}

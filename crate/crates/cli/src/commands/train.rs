//! `train`: fit PMF/NMF embeddings from a ratings CSV and export user/item
//! embedding tables plus a metrics report.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use exposure_games::mf::{self, MfVariant, RatingsDataset, TrainConfig};

use crate::error::{CliError, Result};
use crate::io::{check_nonnegative_ratings, read_ratings_csv, write_embeddings_csv, write_json};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Ratings CSV: user_id,item_id,rating[,user_group][,item_group]
    #[arg(long)]
    pub ratings: PathBuf,

    /// Factorization variant.
    #[arg(long, value_parser = ["pmf", "nmf"])]
    pub variant: String,

    /// Embedding dimension.
    #[arg(long, default_value_t = 3)]
    pub d: usize,

    /// L2 regularization strength.
    #[arg(long, default_value_t = 0.02)]
    pub reg: f64,

    /// SGD learning rate (unused by nmf).
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,

    #[arg(long, default_value_t = 100)]
    pub epochs: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Train the PMF-with-biases variant; biases are not exported.
    #[arg(long, default_value_t = false)]
    pub biased: bool,

    /// Hold out this fraction of ratings and report their RMSE.
    #[arg(long)]
    pub holdout: Option<f64>,

    /// Output directory (users.csv, items.csv, metrics.json, manifest.json).
    #[arg(long, default_value = "out-train")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub variant: String,
    pub d: usize,
    pub n_users: usize,
    pub n_items: usize,
    pub n_ratings: usize,
    pub global_mean: f64,
    pub train_rmse: f64,
    pub holdout_rmse: Option<f64>,
    pub objective_trace: Vec<f64>,
    pub nonnegative_embeddings: bool,
}

pub fn run(args: &TrainArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("train", args)?;
    manifest.record_input(&args.ratings)?;
    manifest.record_seeds([args.seed]);

    let rows = read_ratings_csv(&args.ratings)?;
    let variant = match args.variant.as_str() {
        "pmf" => MfVariant::Pmf,
        "nmf" => {
            check_nonnegative_ratings(&args.ratings, &rows)?;
            MfVariant::Nmf
        }
        other => return Err(CliError::Invalid(format!("unknown variant {other:?}"))),
    };
    let dataset = RatingsDataset::from_rows(&rows)?;
    let config = TrainConfig {
        dim: args.d,
        reg: args.reg,
        learning_rate: args.lr,
        epochs: args.epochs,
        seed: args.seed,
        biased: args.biased,
        holdout_fraction: args.holdout,
    };
    let (model, report) = match variant {
        MfVariant::Pmf => mf::train_pmf(&dataset, &config)?,
        MfVariant::Nmf => mf::train_nmf(&dataset, &config)?,
    };

    write_embeddings_csv(
        &args.out.join("users.csv"),
        model.user_ids(),
        model.user_embeddings(),
        model.user_groups(),
    )?;
    write_embeddings_csv(
        &args.out.join("items.csv"),
        model.item_ids(),
        model.item_embeddings(),
        model.item_groups(),
    )?;

    let demand = mf::build_demand(&model)?;
    let metrics = TrainMetrics {
        variant: args.variant.clone(),
        d: args.d,
        n_users: dataset.n_users(),
        n_items: dataset.n_items(),
        n_ratings: dataset.len(),
        global_mean: model.global_mean,
        train_rmse: report.train_rmse,
        holdout_rmse: report.holdout_rmse,
        objective_trace: report.objective_trace,
        nonnegative_embeddings: demand.is_nonnegative(),
    };
    write_json(&args.out.join("metrics.json"), &metrics)?;
    manifest.finish(&args.out, started)?;
    println!(
        "trained {} d={} on {} ratings: train rmse {:.6}{}",
        args.variant,
        args.d,
        dataset.len(),
        report.train_rmse,
        report
            .holdout_rmse
            .map_or(String::new(), |r| format!(", holdout rmse {r:.6}"))
    );
    Ok(())
}

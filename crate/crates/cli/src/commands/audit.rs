//! `audit`: post-equilibrium metrics over a directory of RunRecords, with
//! the pre-adaptation baseline ('b') computed from the original item
//! embeddings, serialized as JSON plus a plot-ready long-format CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use exposure_games::audit::{
    best_rated_proportion_gap_detailed, group_max_rating_gap, max_rating_per_consumer,
    neighborhood_creator_bias, LabeledEmbeddings, NeighborhoodPoint,
};

use crate::error::{CliError, Result};
use crate::io::{read_embeddings_csv, write_atomic, write_json, EmbeddingTable};
use crate::manifest::{RunManifest, TOOL_VERSION};
use crate::records::RunRecordFile;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AuditArgs {
    /// Directory containing run-*.json records from `solve`.
    #[arg(long)]
    pub records: PathBuf,

    /// User embeddings CSV (id,x0,..[,group]); the demand side.
    #[arg(long)]
    pub users: PathBuf,

    /// Baseline item embeddings CSV; enables the 'b' comparison and the
    /// neighborhood metrics.
    #[arg(long)]
    pub items: Option<PathBuf>,

    /// Metric families: all, cluster, gender-gap, neighborhood.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["all".to_string()])]
    #[serde(default)]
    pub metrics: Vec<String>,

    /// Group labels compared as (A - B); positive gaps favor A.
    #[arg(long, default_value = "M")]
    pub group_a: String,

    #[arg(long, default_value = "F")]
    pub group_b: String,

    /// Neighborhood sizes; defaults to 1,2,5,10,... capped at the item count.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    #[serde(default)]
    pub ks: Vec<usize>,

    #[arg(long, default_value = "out-audit")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditReportFile {
    pub tool_version: String,
    pub provenance: Provenance,
    pub cluster: Option<ClusterSection>,
    pub gender_gap: Option<GenderSection>,
    pub neighborhood: Option<NeighborhoodSection>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub records_dir: String,
    pub run_ids: Vec<String>,
    pub users_file: String,
    pub items_file: Option<String>,
    pub group_a: String,
    pub group_b: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterSection {
    pub per_run: Vec<ClusterRow>,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterRow {
    pub run_id: String,
    pub config: String,
    pub cluster_count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenderRow {
    pub run_id: String,
    pub config: String,
    pub median_max_rating_gap: f64,
    pub best_rated_proportion_gap: f64,
    pub argmax_ties: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenderAggregate {
    /// Medians of the per-run gap values.
    pub median_of_runs_rating_gap: f64,
    pub mean_of_runs_rating_gap: f64,
    /// Per-consumer maxima pooled across runs, then the group medians
    /// differenced.
    pub pooled_rating_gap: f64,
    pub median_of_runs_proportion_gap: f64,
    pub mean_of_runs_proportion_gap: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenderSection {
    pub per_run: Vec<GenderRow>,
    /// The same metrics on the pre-adaptation item embeddings.
    pub baseline: Option<GenderRow>,
    pub aggregate: GenderAggregate,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NeighborhoodRun {
    pub run_id: String,
    pub config: String,
    pub curves: Vec<NeighborhoodPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NeighborhoodAggregate {
    pub k: usize,
    pub mean_proportion_gap: f64,
    pub median_proportion_gap: f64,
    pub mean_distance_gap: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NeighborhoodSection {
    pub ks: Vec<usize>,
    pub per_run: Vec<NeighborhoodRun>,
    pub aggregate: Vec<NeighborhoodAggregate>,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn load_records(dir: &Path) -> Result<Vec<RunRecordFile>> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run-") && n.ends_with(".json"))
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: no run-*.json records",
            dir.display()
        )));
    }
    names
        .iter()
        .map(|path| {
            let body = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            Ok(serde_json::from_str(&body)?)
        })
        .collect()
}

fn labeled(table: &EmbeddingTable, what: &str, path: &Path) -> Result<LabeledEmbeddings> {
    if !table.has_groups() {
        return Err(CliError::Invalid(format!(
            "{}: {what} metrics need a `group` column",
            path.display()
        )));
    }
    let labels = table
        .groups
        .iter()
        .map(|g| g.clone().unwrap_or_default())
        .collect();
    Ok(LabeledEmbeddings::new(table.points.clone(), labels)?)
}

pub fn run(args: &AuditArgs) -> Result<()> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("audit", args)?;
    manifest.record_input(&args.users)?;
    if let Some(items) = &args.items {
        manifest.record_input(items)?;
    }

    let all = args.metrics.iter().any(|m| m == "all");
    let want = |name: &str| all || args.metrics.iter().any(|m| m == name);
    for m in &args.metrics {
        if !["all", "cluster", "gender-gap", "neighborhood"].contains(&m.as_str()) {
            return Err(CliError::Invalid(format!("unknown metric family {m:?}")));
        }
    }

    let records = load_records(&args.records)?;
    let users = read_embeddings_csv(&args.users)?;
    let items = args.items.as_ref().map(|p| read_embeddings_csv(p)).transpose()?;

    let mut csv_rows: Vec<(String, String, String, f64, f64)> = Vec::new();

    let cluster = want("cluster").then(|| {
        let per_run: Vec<ClusterRow> = records
            .iter()
            .map(|r| ClusterRow {
                run_id: r.run_id.clone(),
                config: r.config_label(),
                cluster_count: r.cluster_count,
            })
            .collect();
        for row in &per_run {
            csv_rows.push((
                "cluster_count".into(),
                row.config.clone(),
                row.run_id.clone(),
                0.0,
                row.cluster_count as f64,
            ));
        }
        let counts: Vec<f64> = per_run.iter().map(|r| r.cluster_count as f64).collect();
        ClusterSection {
            mean: counts.iter().sum::<f64>() / counts.len() as f64,
            median: median(counts),
            per_run,
        }
    });

    let gender_gap = if want("gender-gap") {
        let consumers = labeled(&users, "gender-gap", &args.users)?;
        let mut per_run = Vec::with_capacity(records.len());
        let mut pooled_a: Vec<f64> = Vec::new();
        let mut pooled_b: Vec<f64> = Vec::new();
        for record in &records {
            let strategies = record.final_profile.strategies();
            let rating_gap =
                group_max_rating_gap(&consumers, strategies, &args.group_a, &args.group_b)?;
            let (proportion_gap, ties) = best_rated_proportion_gap_detailed(
                &consumers,
                strategies,
                &args.group_a,
                &args.group_b,
            )?;
            let maxima = max_rating_per_consumer(consumers.points(), strategies)?;
            for (label, value) in consumers.labels().iter().zip(maxima) {
                if label == &args.group_a {
                    pooled_a.push(value);
                } else if label == &args.group_b {
                    pooled_b.push(value);
                }
            }
            per_run.push(GenderRow {
                run_id: record.run_id.clone(),
                config: record.config_label(),
                median_max_rating_gap: rating_gap,
                best_rated_proportion_gap: proportion_gap,
                argmax_ties: ties,
            });
        }
        for row in &per_run {
            csv_rows.push((
                "median_max_rating_gap".into(),
                row.config.clone(),
                row.run_id.clone(),
                0.0,
                row.median_max_rating_gap,
            ));
            csv_rows.push((
                "best_rated_proportion_gap".into(),
                row.config.clone(),
                row.run_id.clone(),
                0.0,
                row.best_rated_proportion_gap,
            ));
        }

        let baseline = match &items {
            Some(table) => {
                let gap =
                    group_max_rating_gap(&consumers, &table.points, &args.group_a, &args.group_b)?;
                let (proportion, ties) = best_rated_proportion_gap_detailed(
                    &consumers,
                    &table.points,
                    &args.group_a,
                    &args.group_b,
                )?;
                let row = GenderRow {
                    run_id: "b".into(),
                    config: "b".into(),
                    median_max_rating_gap: gap,
                    best_rated_proportion_gap: proportion,
                    argmax_ties: ties,
                };
                csv_rows.push((
                    "median_max_rating_gap".into(),
                    "b".into(),
                    "b".into(),
                    0.0,
                    row.median_max_rating_gap,
                ));
                csv_rows.push((
                    "best_rated_proportion_gap".into(),
                    "b".into(),
                    "b".into(),
                    0.0,
                    row.best_rated_proportion_gap,
                ));
                Some(row)
            }
            None => None,
        };

        let rating_gaps: Vec<f64> = per_run.iter().map(|r| r.median_max_rating_gap).collect();
        let proportion_gaps: Vec<f64> = per_run
            .iter()
            .map(|r| r.best_rated_proportion_gap)
            .collect();
        let aggregate = GenderAggregate {
            median_of_runs_rating_gap: median(rating_gaps.clone()),
            mean_of_runs_rating_gap: rating_gaps.iter().sum::<f64>() / rating_gaps.len() as f64,
            pooled_rating_gap: median(pooled_a) - median(pooled_b),
            median_of_runs_proportion_gap: median(proportion_gaps.clone()),
            mean_of_runs_proportion_gap: proportion_gaps.iter().sum::<f64>()
                / proportion_gaps.len() as f64,
        };
        Some(GenderSection {
            per_run,
            baseline,
            aggregate,
        })
    } else {
        None
    };

    let neighborhood = if want("neighborhood") {
        let table = items.as_ref().ok_or_else(|| {
            CliError::Invalid("neighborhood metrics need --items baseline embeddings".into())
        })?;
        let baseline = labeled(table, "neighborhood", args.items.as_ref().unwrap())?;
        let ks = if args.ks.is_empty() {
            default_ks(baseline.len())
        } else {
            args.ks.clone()
        };
        let mut per_run = Vec::with_capacity(records.len());
        for record in &records {
            let curves = neighborhood_creator_bias(
                &baseline,
                record.final_profile.strategies(),
                &args.group_a,
                &args.group_b,
                &ks,
            )?;
            for point in &curves {
                csv_rows.push((
                    "neighborhood_proportion_gap".into(),
                    record.config_label(),
                    record.run_id.clone(),
                    point.k as f64,
                    point.proportion_gap,
                ));
                if let Some(gap) = point.distance_gap {
                    csv_rows.push((
                        "neighborhood_distance_gap".into(),
                        record.config_label(),
                        record.run_id.clone(),
                        point.k as f64,
                        gap,
                    ));
                }
            }
            per_run.push(NeighborhoodRun {
                run_id: record.run_id.clone(),
                config: record.config_label(),
                curves,
            });
        }
        let aggregate = ks
            .iter()
            .enumerate()
            .map(|(idx, &k)| {
                let proportions: Vec<f64> = per_run
                    .iter()
                    .map(|r| r.curves[idx].proportion_gap)
                    .collect();
                let distances: Vec<f64> = per_run
                    .iter()
                    .filter_map(|r| r.curves[idx].distance_gap)
                    .collect();
                NeighborhoodAggregate {
                    k,
                    mean_proportion_gap: proportions.iter().sum::<f64>()
                        / proportions.len() as f64,
                    median_proportion_gap: median(proportions),
                    mean_distance_gap: (!distances.is_empty())
                        .then(|| distances.iter().sum::<f64>() / distances.len() as f64),
                }
            })
            .collect();
        Some(NeighborhoodSection {
            ks,
            per_run,
            aggregate,
        })
    } else {
        None
    };

    let report = AuditReportFile {
        tool_version: TOOL_VERSION.to_string(),
        provenance: Provenance {
            records_dir: args.records.display().to_string(),
            run_ids: records.iter().map(|r| r.run_id.clone()).collect(),
            users_file: args.users.display().to_string(),
            items_file: args.items.as_ref().map(|p| p.display().to_string()),
            group_a: args.group_a.clone(),
            group_b: args.group_b.clone(),
        },
        cluster,
        gender_gap,
        neighborhood,
    };
    write_json(&args.out.join("audit.json"), &report)?;

    let mut csv = String::from("metric,config,seed,x,y\n");
    for (metric, config, seed, x, y) in &csv_rows {
        csv.push_str(&format!("{metric},{config},{seed},{x},{y}\n"));
    }
    write_atomic(&args.out.join("audit.csv"), csv.as_bytes())?;
    manifest.finish(&args.out, started)?;
    println!(
        "audited {} records into {}",
        records.len(),
        args.out.display()
    );
    Ok(())
}

fn default_ks(available: usize) -> Vec<usize> {
    [1usize, 2, 5, 10, 20, 50, 100]
        .into_iter()
        .filter(|&k| k <= available)
        .chain(std::iter::once(available))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

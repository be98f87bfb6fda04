//! CSV and JSON file handling: the ratings schema
//! `user_id,item_id,rating[,user_group][,item_group]`, the embedding schema
//! `id,x0,...,x{d-1}[,group]`, and atomic JSON writes.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;

use exposure_games::mf::RatingRow;

use crate::error::{CliError, Result};

pub fn read_ratings_csv(path: &Path) -> Result<Vec<RatingRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, &e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, &e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let user_col = col("user_id").ok_or_else(|| missing_column(path, "user_id"))?;
    let item_col = col("item_id").ok_or_else(|| missing_column(path, "item_id"))?;
    let rating_col = col("rating").ok_or_else(|| missing_column(path, "rating"))?;
    let user_group_col = col("user_group");
    let item_group_col = col("item_group");

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(rows.len() as u64 + 2);
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("missing field {idx}"),
            })
        };
        let rating: f64 = field(rating_col)?.trim().parse().map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad rating: {e}"),
        })?;
        let group_at = |idx: Option<usize>| -> Option<String> {
            idx.and_then(|i| record.get(i))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };
        rows.push(RatingRow {
            user: field(user_col)?.trim().to_string(),
            item: field(item_col)?.trim().to_string(),
            rating,
            user_group: group_at(user_group_col),
            item_group: group_at(item_group_col),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: no rating rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Rejects negative ratings with the offending CSV line, for the
/// non-negative trainer.
pub fn check_nonnegative_ratings(path: &Path, rows: &[RatingRow]) -> Result<()> {
    for (idx, row) in rows.iter().enumerate() {
        if row.rating < 0.0 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                // header is line 1
                line: idx as u64 + 2,
                message: format!(
                    "negative rating {} (user {}, item {}) not allowed for the nmf variant",
                    row.rating, row.user, row.item
                ),
            });
        }
    }
    Ok(())
}

pub struct EmbeddingTable {
    pub ids: Vec<String>,
    pub points: Vec<DVector<f64>>,
    pub groups: Vec<Option<String>>,
}

impl EmbeddingTable {
    pub fn has_groups(&self) -> bool {
        self.groups.iter().any(|g| g.is_some())
    }
}

pub fn read_embeddings_csv(path: &Path) -> Result<EmbeddingTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, &e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, &e))?.clone();
    if headers.get(0) != Some("id") {
        return Err(missing_column(path, "id"));
    }
    let mut coord_cols = Vec::new();
    let mut group_col = None;
    for (idx, name) in headers.iter().enumerate().skip(1) {
        if name == "group" {
            group_col = Some(idx);
        } else if name == format!("x{}", coord_cols.len()) {
            coord_cols.push(idx);
        } else {
            return Err(CliError::Invalid(format!(
                "{}: unexpected column {name:?} (expected x{} or group)",
                path.display(),
                coord_cols.len()
            )));
        }
    }
    if coord_cols.is_empty() {
        return Err(missing_column(path, "x0"));
    }

    let mut table = EmbeddingTable {
        ids: Vec::new(),
        points: Vec::new(),
        groups: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(table.ids.len() as u64 + 2);
        let mut coords = Vec::with_capacity(coord_cols.len());
        for &c in &coord_cols {
            let value: f64 = record
                .get(c)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("bad coordinate: {e}"),
                })?;
            coords.push(value);
        }
        table.ids.push(record.get(0).unwrap_or("").trim().to_string());
        table.points.push(DVector::from_vec(coords));
        table.groups.push(
            group_col
                .and_then(|c| record.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string),
        );
    }
    if table.ids.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: no embedding rows",
            path.display()
        )));
    }
    Ok(table)
}

pub fn write_embeddings_csv(
    path: &Path,
    ids: &[String],
    points: &[DVector<f64>],
    groups: &[Option<String>],
) -> Result<()> {
    let dim = points.first().map_or(0, |p| p.len());
    let with_groups = groups.iter().any(|g| g.is_some());
    let mut out = String::new();
    out.push_str("id");
    for j in 0..dim {
        out.push_str(&format!(",x{j}"));
    }
    if with_groups {
        out.push_str(",group");
    }
    out.push('\n');
    for (i, point) in points.iter().enumerate() {
        out.push_str(&ids[i]);
        for x in point.iter() {
            out.push_str(&format!(",{x}"));
        }
        if with_groups {
            out.push(',');
            if let Some(g) = &groups[i] {
                out.push_str(g);
            }
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Serializes as pretty JSON and writes through a temporary file, so
/// parallel writers never expose partial files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))?;
    Ok(())
}

fn csv_error(path: &Path, e: &csv::Error) -> CliError {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn missing_column(path: &Path, name: &str) -> CliError {
    CliError::Invalid(format!("{}: missing column {name:?}", path.display()))
}

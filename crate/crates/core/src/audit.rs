//! Post-equilibrium audit statistics: cluster emergence, group targeting
//! gaps on predicted ratings, and creator-neighborhood bias against baseline
//! embeddings. Everything is cosine-based, so consumer scale drops out.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::StrategyProfile;

/// Strategies closer than `1e-5 * sqrt(d)` in Euclidean distance are
/// considered collapsed onto each other.
pub const CLUSTER_DISTANCE_FACTOR: f64 = 1e-5;

/// Embeddings with a group label per point (consumers or baseline items).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEmbeddings {
    points: Vec<DVector<f64>>,
    labels: Vec<String>,
}

impl LabeledEmbeddings {
    pub fn new(points: Vec<DVector<f64>>, labels: Vec<String>) -> Result<Self> {
        if points.is_empty() || points.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} points with {} labels",
                points.len(),
                labels.len()
            )));
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn group_indices(&self, group: &str) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_str() == group)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Number of connected components of the threshold graph on strategies
/// (edges where pairwise distance < `1e-5 sqrt(d)`), via union-find.
pub fn cluster_count(profile: &StrategyProfile) -> usize {
    let threshold = CLUSTER_DISTANCE_FACTOR * (profile.dim() as f64).sqrt();
    cluster_count_with_threshold(profile, threshold)
}

pub fn cluster_count_with_threshold(profile: &StrategyProfile, threshold: f64) -> usize {
    let n = profile.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (profile.strategy(i) - profile.strategy(j)).norm() < threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    (0..n)
        .map(|i| find(&mut parent, i))
        .collect::<std::collections::BTreeSet<_>>()
        .len()
}

/// Cosine similarity between a consumer and an item embedding.
pub fn normalized_rating(c: &DVector<f64>, s: &DVector<f64>) -> Result<f64> {
    if c.len() != s.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: s.len(),
        });
    }
    let nc = c.norm();
    let ns = s.norm();
    if nc == 0.0 || ns == 0.0 {
        return Err(Error::InvalidConfig(
            "normalized rating needs non-zero embeddings".into(),
        ));
    }
    Ok(c.dot(s) / (nc * ns))
}

/// `median_{c in A} max_i r(c, s_i)  -  median_{c in B} max_i r(c, s_i)`.
/// Positive values mean the content rates higher for group A. `items` may
/// be a strategy profile's rows or baseline item embeddings (any norms).
pub fn group_max_rating_gap(
    consumers: &LabeledEmbeddings,
    items: &[DVector<f64>],
    group_a: &str,
    group_b: &str,
) -> Result<f64> {
    let med_a = group_median_max(consumers, items, group_a)?;
    let med_b = group_median_max(consumers, items, group_b)?;
    Ok(med_a - med_b)
}

/// `max_i r(c, s_i)` for every consumer, in consumer order. The building
/// block for both the per-run medians and pooled aggregations.
pub fn max_rating_per_consumer(
    consumers: &[DVector<f64>],
    items: &[DVector<f64>],
) -> Result<Vec<f64>> {
    consumers
        .iter()
        .map(|c| {
            let mut max_r = f64::NEG_INFINITY;
            for s in items {
                max_r = max_r.max(normalized_rating(c, s)?);
            }
            Ok(max_r)
        })
        .collect()
}

fn group_median_max(
    consumers: &LabeledEmbeddings,
    items: &[DVector<f64>],
    group: &str,
) -> Result<f64> {
    let idx = consumers.group_indices(group);
    if idx.is_empty() {
        return Err(Error::EmptyGroup(group.to_string()));
    }
    let mut best: Vec<f64> = Vec::with_capacity(idx.len());
    for &i in &idx {
        let c = &consumers.points()[i];
        let mut max_r = f64::NEG_INFINITY;
        for s in items {
            max_r = max_r.max(normalized_rating(c, s)?);
        }
        best.push(max_r);
    }
    Ok(median(&mut best))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fraction of strategies whose best-rated consumer is in group A minus the
/// fraction best-rated by group B. Argmax ties go to the lowest consumer
/// index; the tie count is reported alongside.
pub fn best_rated_proportion_gap_detailed(
    consumers: &LabeledEmbeddings,
    items: &[DVector<f64>],
    group_a: &str,
    group_b: &str,
) -> Result<(f64, usize)> {
    if consumers.group_indices(group_a).is_empty() {
        return Err(Error::EmptyGroup(group_a.to_string()));
    }
    if consumers.group_indices(group_b).is_empty() {
        return Err(Error::EmptyGroup(group_b.to_string()));
    }
    let mut ties = 0usize;
    let mut signed = 0.0;
    for s in items {
        let mut best_idx = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        let mut tied = false;
        for (i, c) in consumers.points().iter().enumerate() {
            let r = normalized_rating(c, s)?;
            if r > best_val {
                best_val = r;
                best_idx = i;
                tied = false;
            } else if r == best_val {
                tied = true;
            }
        }
        if tied {
            ties += 1;
        }
        let label = consumers.labels()[best_idx].as_str();
        if label == group_a {
            signed += 1.0;
        } else if label == group_b {
            signed -= 1.0;
        }
    }
    Ok((signed / items.len() as f64, ties))
}

pub fn best_rated_proportion_gap(
    consumers: &LabeledEmbeddings,
    items: &[DVector<f64>],
    group_a: &str,
    group_b: &str,
) -> Result<f64> {
    best_rated_proportion_gap_detailed(consumers, items, group_a, group_b).map(|(g, _)| g)
}

/// Neighborhood statistics at one neighborhood size `k`, averaged over
/// strategic items. `distance_gap` is `None` when some neighborhood at this
/// `k` contains no member of one of the groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodPoint {
    pub k: usize,
    /// fraction of group-A minus fraction of group-B creators among the k
    /// nearest baseline items, mean over strategies.
    pub proportion_gap: f64,
    /// median cosine distance to group-B minus to group-A members of the
    /// neighborhood, mean over strategies (positive = A is closer).
    pub distance_gap: Option<f64>,
    pub per_item_proportion: Vec<f64>,
    pub per_item_distance: Vec<Option<f64>>,
}

/// Creator-group composition of growing neighborhoods around each strategic
/// item, in cosine distance (baseline embeddings need not be unit norm).
pub fn neighborhood_creator_bias(
    baseline: &LabeledEmbeddings,
    items: &[DVector<f64>],
    group_a: &str,
    group_b: &str,
    k_list: &[usize],
) -> Result<Vec<NeighborhoodPoint>> {
    if baseline.is_empty() {
        return Err(Error::EmptyGroup("baseline".to_string()));
    }
    for &k in k_list {
        if k == 0 || k > baseline.len() {
            return Err(Error::NeighborhoodTooLarge {
                k,
                available: baseline.len(),
            });
        }
    }
    // Distances from each strategic item to every baseline item, ascending,
    // with index ties broken by baseline order for determinism.
    let mut sorted: Vec<Vec<(f64, usize)>> = Vec::with_capacity(items.len());
    for s in items {
        let mut row: Vec<(f64, usize)> = baseline
            .points()
            .iter()
            .enumerate()
            .map(|(j, b)| Ok((1.0 - normalized_rating(b, s)?, j)))
            .collect::<Result<_>>()?;
        row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        sorted.push(row);
    }

    let mut curves = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let mut per_item_proportion = Vec::with_capacity(items.len());
        let mut per_item_distance = Vec::with_capacity(items.len());
        for row in &sorted {
            let neighborhood = &row[..k];
            let mut count_a = 0usize;
            let mut count_b = 0usize;
            let mut dist_a: Vec<f64> = Vec::new();
            let mut dist_b: Vec<f64> = Vec::new();
            for &(dist, j) in neighborhood {
                let label = baseline.labels()[j].as_str();
                if label == group_a {
                    count_a += 1;
                    dist_a.push(dist);
                } else if label == group_b {
                    count_b += 1;
                    dist_b.push(dist);
                }
            }
            per_item_proportion.push((count_a as f64 - count_b as f64) / k as f64);
            per_item_distance.push(if dist_a.is_empty() || dist_b.is_empty() {
                None
            } else {
                Some(median(&mut dist_b) - median(&mut dist_a))
            });
        }
        let proportion_gap =
            per_item_proportion.iter().sum::<f64>() / per_item_proportion.len() as f64;
        let defined: Vec<f64> = per_item_distance.iter().flatten().copied().collect();
        let distance_gap = if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        };
        curves.push(NeighborhoodPoint {
            k,
            proportion_gap,
            distance_gap,
            per_item_proportion,
            per_item_distance,
        });
    }
    Ok(curves)
}

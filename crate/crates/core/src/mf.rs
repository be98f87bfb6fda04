//! PMF and NMF trainers producing the consumer/item embeddings the games
//! run on. Deliberately small: plain SGD for the centered squared loss and
//! Lee-Seung multiplicative updates for the non-negative variant.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};

/// One observed rating with optional group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRow {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub user_group: Option<String>,
    pub item_group: Option<String>,
}

/// Rating triples with dense user/item indices. Users and items are indexed
/// in sorted id order, so the dataset is independent of input row order.
#[derive(Debug, Clone)]
pub struct RatingsDataset {
    triples: Vec<(usize, usize, f64)>,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_groups: Vec<Option<String>>,
    item_groups: Vec<Option<String>>,
}

impl RatingsDataset {
    pub fn from_rows(rows: &[RatingRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut user_ids: Vec<String> = rows.iter().map(|r| r.user.clone()).collect();
        user_ids.sort();
        user_ids.dedup();
        let mut item_ids: Vec<String> = rows.iter().map(|r| r.item.clone()).collect();
        item_ids.sort();
        item_ids.dedup();
        let user_index = |id: &str| user_ids.binary_search_by(|u| u.as_str().cmp(id)).unwrap();
        let item_index = |id: &str| item_ids.binary_search_by(|u| u.as_str().cmp(id)).unwrap();

        let mut user_groups: Vec<Option<String>> = vec![None; user_ids.len()];
        let mut item_groups: Vec<Option<String>> = vec![None; item_ids.len()];
        let mut triples = Vec::with_capacity(rows.len());
        for (idx, row) in rows.iter().enumerate() {
            if !row.rating.is_finite() {
                return Err(Error::NonFinite { context: "rating" });
            }
            let u = user_index(&row.user);
            let v = item_index(&row.item);
            triples.push((u, v, row.rating));
            assign_group(&mut user_groups[u], &row.user_group, "user", idx)?;
            assign_group(&mut item_groups[v], &row.item_group, "item", idx)?;
        }
        // Canonical order; SGD shuffles are derived from the seed on top of
        // this, so permuting the input rows cannot change the model.
        triples.sort_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then(a.2.total_cmp(&b.2))
        });
        Ok(Self {
            triples,
            user_ids,
            item_ids,
            user_groups,
            item_groups,
        })
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn triples(&self) -> &[(usize, usize, f64)] {
        &self.triples
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn user_groups(&self) -> &[Option<String>] {
        &self.user_groups
    }

    pub fn item_groups(&self) -> &[Option<String>] {
        &self.item_groups
    }

    pub fn mean_rating(&self) -> f64 {
        self.triples.iter().map(|t| t.2).sum::<f64>() / self.triples.len() as f64
    }

    pub fn min_rating(&self) -> f64 {
        self.triples
            .iter()
            .map(|t| t.2)
            .fold(f64::INFINITY, f64::min)
    }
}

fn assign_group(
    slot: &mut Option<String>,
    value: &Option<String>,
    kind: &str,
    row: usize,
) -> Result<()> {
    if let Some(v) = value {
        match slot {
            None => *slot = Some(v.clone()),
            Some(existing) if existing != v => {
                return Err(Error::InvalidConfig(format!(
                    "conflicting {kind} group {existing:?} vs {v:?} at row {row}"
                )));
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfVariant {
    Pmf,
    Nmf,
}

/// Training hyperparameters. These are direct inputs; no tuning happens here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub reg: f64,
    /// Ignored by the NMF trainer (multiplicative updates have no step size).
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// PMF-with-biases variant; biases are trained but never exported to the
    /// game, which runs on the embeddings alone.
    pub biased: bool,
    /// When set, this fraction of triples is held out and scored after
    /// training.
    pub holdout_fraction: Option<f64>,
}

impl TrainConfig {
    pub fn new(dim: usize, reg: f64, learning_rate: f64, epochs: usize, seed: u64) -> Self {
        Self {
            dim,
            reg,
            learning_rate,
            epochs,
            seed,
            biased: false,
            holdout_fraction: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be >= 1".into()));
        }
        if !(self.reg >= 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(
                "regularization must be >= 0 and learning rate > 0".into(),
            ));
        }
        if let Some(f) = self.holdout_fraction {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "holdout fraction {f} outside [0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// A trained factorization model.
#[derive(Debug, Clone)]
pub struct MfModel {
    pub variant: MfVariant,
    pub global_mean: f64,
    user_embeddings: Vec<DVector<f64>>,
    item_embeddings: Vec<DVector<f64>>,
    user_bias: Option<Vec<f64>>,
    item_bias: Option<Vec<f64>>,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_groups: Vec<Option<String>>,
    item_groups: Vec<Option<String>>,
}

impl MfModel {
    pub fn user_embeddings(&self) -> &[DVector<f64>] {
        &self.user_embeddings
    }

    pub fn item_embeddings(&self) -> &[DVector<f64>] {
        &self.item_embeddings
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn user_groups(&self) -> &[Option<String>] {
        &self.user_groups
    }

    pub fn item_groups(&self) -> &[Option<String>] {
        &self.item_groups
    }

    pub fn dim(&self) -> usize {
        self.user_embeddings.first().map_or(0, |e| e.len())
    }

    fn predict(&self, u: usize, v: usize) -> f64 {
        let mut r = self.global_mean + self.user_embeddings[u].dot(&self.item_embeddings[v]);
        if let (Some(bu), Some(bv)) = (&self.user_bias, &self.item_bias) {
            r += bu[u] + bv[v];
        }
        r
    }

    fn rmse(&self, triples: &[(usize, usize, f64)]) -> f64 {
        if triples.is_empty() {
            return 0.0;
        }
        let sse: f64 = triples
            .iter()
            .map(|&(u, v, r)| (r - self.predict(u, v)).powi(2))
            .sum();
        (sse / triples.len() as f64).sqrt()
    }
}

/// Training metrics: final RMSE on the training triples, the optional
/// holdout RMSE, and the regularized objective after every epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_rmse: f64,
    pub holdout_rmse: Option<f64>,
    pub objective_trace: Vec<f64>,
}

fn split_holdout(
    data: &RatingsDataset,
    config: &TrainConfig,
) -> (Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>) {
    match config.holdout_fraction {
        None => (data.triples.clone(), Vec::new()),
        Some(frac) => {
            let mut order: Vec<usize> = (0..data.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
            order.shuffle(&mut rng);
            let k = ((data.len() as f64) * frac).floor() as usize;
            let held: std::collections::BTreeSet<usize> = order[..k].iter().copied().collect();
            let mut train = Vec::with_capacity(data.len() - k);
            let mut holdout = Vec::with_capacity(k);
            for (i, t) in data.triples.iter().enumerate() {
                if held.contains(&i) {
                    holdout.push(*t);
                } else {
                    train.push(*t);
                }
            }
            (train, holdout)
        }
    }
}

/// Fits the centered squared loss `sum (r - mu - <c_u, s_v>)^2 +
/// reg (||C||^2 + ||S||^2)` by seeded SGD.
pub fn train_pmf(data: &RatingsDataset, config: &TrainConfig) -> Result<(MfModel, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (train, holdout) = split_holdout(data, config);
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mu = train.iter().map(|t| t.2).sum::<f64>() / train.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 0.1).expect("valid std");
    let mut users: Vec<DVector<f64>> = (0..data.n_users())
        .map(|_| DVector::from_fn(config.dim, |_, _| rng.sample(normal)))
        .collect();
    let mut items: Vec<DVector<f64>> = (0..data.n_items())
        .map(|_| DVector::from_fn(config.dim, |_, _| rng.sample(normal)))
        .collect();
    let mut user_bias = vec![0.0; data.n_users()];
    let mut item_bias = vec![0.0; data.n_items()];

    let eta = config.learning_rate;
    let reg = config.reg;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let (u, v, r) = train[idx];
            let mut pred = mu + users[u].dot(&items[v]);
            if config.biased {
                pred += user_bias[u] + item_bias[v];
            }
            let err = r - pred;
            let user_prev = users[u].clone();
            {
                let cu = &mut users[u];
                cu.axpy(eta * err, &items[v], 1.0 - eta * reg);
            }
            {
                let sv = &mut items[v];
                sv.axpy(eta * err, &user_prev, 1.0 - eta * reg);
            }
            if config.biased {
                user_bias[u] += eta * (err - reg * user_bias[u]);
                item_bias[v] += eta * (err - reg * item_bias[v]);
            }
        }
        trace.push(pmf_objective(
            &train, mu, &users, &items, &user_bias, &item_bias, reg, config.biased,
        ));
    }

    let model = MfModel {
        variant: MfVariant::Pmf,
        global_mean: mu,
        user_embeddings: users,
        item_embeddings: items,
        user_bias: config.biased.then_some(user_bias),
        item_bias: config.biased.then_some(item_bias),
        user_ids: data.user_ids.clone(),
        item_ids: data.item_ids.clone(),
        user_groups: data.user_groups.clone(),
        item_groups: data.item_groups.clone(),
    };
    let report = TrainReport {
        train_rmse: model.rmse(&train),
        holdout_rmse: (!holdout.is_empty()).then(|| model.rmse(&holdout)),
        objective_trace: trace,
    };
    Ok((model, report))
}

#[allow(clippy::too_many_arguments)]
fn pmf_objective(
    triples: &[(usize, usize, f64)],
    mu: f64,
    users: &[DVector<f64>],
    items: &[DVector<f64>],
    user_bias: &[f64],
    item_bias: &[f64],
    reg: f64,
    biased: bool,
) -> f64 {
    let mut obj = 0.0;
    for &(u, v, r) in triples {
        let mut pred = mu + users[u].dot(&items[v]);
        if biased {
            pred += user_bias[u] + item_bias[v];
        }
        obj += (r - pred).powi(2);
    }
    let mut reg_term: f64 = users.iter().map(|c| c.norm_squared()).sum();
    reg_term += items.iter().map(|s| s.norm_squared()).sum::<f64>();
    if biased {
        reg_term += user_bias.iter().map(|b| b * b).sum::<f64>();
        reg_term += item_bias.iter().map(|b| b * b).sum::<f64>();
    }
    obj + reg * reg_term
}

/// Fits non-negative embeddings with alternating Lee-Seung multiplicative
/// updates over the observed triples. The regularized objective is
/// non-increasing per epoch; `learning_rate` is accepted for interface
/// uniformity but unused.
pub fn train_nmf(data: &RatingsDataset, config: &TrainConfig) -> Result<(MfModel, TrainReport)> {
    config.validate()?;
    if config.biased {
        return Err(Error::InvalidConfig(
            "the bias variant applies to PMF only".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (idx, &(_, _, r)) in data.triples.iter().enumerate() {
        if r < 0.0 {
            return Err(Error::NegativeRating { index: idx, rating: r });
        }
    }
    let (train, holdout) = split_holdout(data, config);
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform = Uniform::new(0.0, 1.0).expect("valid range");
    let mut users: Vec<DVector<f64>> = (0..data.n_users())
        .map(|_| DVector::from_fn(config.dim, |_, _| rng.sample(uniform)))
        .collect();
    let mut items: Vec<DVector<f64>> = (0..data.n_items())
        .map(|_| DVector::from_fn(config.dim, |_, _| rng.sample(uniform)))
        .collect();

    // Per-user and per-item observation lists.
    let mut by_user: Vec<Vec<(usize, f64)>> = vec![Vec::new(); data.n_users()];
    let mut by_item: Vec<Vec<(usize, f64)>> = vec![Vec::new(); data.n_items()];
    for &(u, v, r) in &train {
        by_user[u].push((v, r));
        by_item[v].push((u, r));
    }

    let reg = config.reg;
    const EPS: f64 = 1e-12;
    let mut trace = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        for (u, obs) in by_user.iter().enumerate() {
            if obs.is_empty() {
                continue;
            }
            let mut num = DVector::zeros(config.dim);
            let mut den = DVector::zeros(config.dim);
            for &(v, r) in obs {
                let pred = users[u].dot(&items[v]);
                num.axpy(r, &items[v], 1.0);
                den.axpy(pred, &items[v], 1.0);
            }
            for f in 0..config.dim {
                let d = den[f] + reg * users[u][f] + EPS;
                users[u][f] *= num[f] / d;
            }
        }
        for (v, obs) in by_item.iter().enumerate() {
            if obs.is_empty() {
                continue;
            }
            let mut num = DVector::zeros(config.dim);
            let mut den = DVector::zeros(config.dim);
            for &(u, r) in obs {
                let pred = users[u].dot(&items[v]);
                num.axpy(r, &users[u], 1.0);
                den.axpy(pred, &users[u], 1.0);
            }
            for f in 0..config.dim {
                let d = den[f] + reg * items[v][f] + EPS;
                items[v][f] *= num[f] / d;
            }
        }
        trace.push(nmf_objective(&train, &users, &items, reg));
    }

    let model = MfModel {
        variant: MfVariant::Nmf,
        global_mean: 0.0,
        user_embeddings: users,
        item_embeddings: items,
        user_bias: None,
        item_bias: None,
        user_ids: data.user_ids.clone(),
        item_ids: data.item_ids.clone(),
        user_groups: data.user_groups.clone(),
        item_groups: data.item_groups.clone(),
    };
    let report = TrainReport {
        train_rmse: model.rmse(&train),
        holdout_rmse: (!holdout.is_empty()).then(|| model.rmse(&holdout)),
        objective_trace: trace,
    };
    Ok((model, report))
}

fn nmf_objective(
    triples: &[(usize, usize, f64)],
    users: &[DVector<f64>],
    items: &[DVector<f64>],
    reg: f64,
) -> f64 {
    let mut obj = 0.0;
    for &(u, v, r) in triples {
        obj += (r - users[u].dot(&items[v])).powi(2);
    }
    let reg_term: f64 = users.iter().map(|c| c.norm_squared()).sum::<f64>()
        + items.iter().map(|s| s.norm_squared()).sum::<f64>();
    obj + reg * reg_term
}

/// The demand distribution `P_c = (1/m) sum_j delta_{c_j}` over the model's
/// user embeddings.
pub fn build_demand(model: &MfModel) -> Result<DemandDistribution> {
    if model.user_embeddings.is_empty() {
        return Err(Error::EmptyDataset);
    }
    DemandDistribution::uniform(model.user_embeddings.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(u: &str, i: &str, r: f64) -> RatingRow {
        RatingRow {
            user: u.into(),
            item: i.into(),
            rating: r,
            user_group: None,
            item_group: None,
        }
    }

    fn rank_one_rows(mu: f64, nonneg: bool) -> Vec<RatingRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let uniform = Uniform::new(0.5, 1.5).expect("range");
        let normal = Normal::new(0.0, 0.5).expect("std");
        let a: Vec<f64> = (0..12)
            .map(|_| {
                if nonneg {
                    rng.sample(uniform)
                } else {
                    rng.sample(normal)
                }
            })
            .collect();
        let b: Vec<f64> = (0..8)
            .map(|_| {
                if nonneg {
                    rng.sample(uniform)
                } else {
                    rng.sample(normal)
                }
            })
            .collect();
        let mut rows = Vec::new();
        for (u, &au) in a.iter().enumerate() {
            for (v, &bv) in b.iter().enumerate() {
                rows.push(row(&format!("u{u:02}"), &format!("i{v:02}"), mu + au * bv));
            }
        }
        rows
    }

    #[test]
    fn pmf_recovers_rank_one_data() {
        let data = RatingsDataset::from_rows(&rank_one_rows(3.0, false)).unwrap();
        let config = TrainConfig::new(1, 1e-6, 0.05, 200, 0);
        let (_, report) = train_pmf(&data, &config).unwrap();
        assert!(report.train_rmse < 1e-2, "rmse = {}", report.train_rmse);
    }

    #[test]
    fn pmf_constant_ratings_center_away() {
        let rows: Vec<RatingRow> = (0..6)
            .flat_map(|u| (0..4).map(move |i| row(&format!("u{u}"), &format!("i{i}"), 3.0)))
            .collect();
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let config = TrainConfig::new(2, 0.05, 0.1, 300, 0);
        let (model, report) = train_pmf(&data, &config).unwrap();
        assert_eq!(model.global_mean, 3.0);
        assert!(report.train_rmse < 1e-3);
        // regularization shrinks the embeddings toward zero
        let max_norm = model
            .user_embeddings()
            .iter()
            .chain(model.item_embeddings())
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        assert!(max_norm < 0.1, "max embedding norm {max_norm}");
    }

    #[test]
    fn pmf_objective_decreases_at_small_step() {
        let data = RatingsDataset::from_rows(&rank_one_rows(3.0, false)).unwrap();
        let config = TrainConfig::new(1, 1e-6, 1e-3, 40, 5);
        let (_, report) = train_pmf(&data, &config).unwrap();
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "objective increased: {pair:?}");
        }
    }

    #[test]
    fn pmf_invariant_to_input_row_order() {
        let mut rows = rank_one_rows(3.0, false);
        let config = TrainConfig::new(2, 1e-4, 0.02, 5, 9);
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let (a, _) = train_pmf(&data, &config).unwrap();
        rows.reverse();
        rows.swap(0, 10);
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let (b, _) = train_pmf(&data, &config).unwrap();
        assert_eq!(a.user_embeddings(), b.user_embeddings());
        assert_eq!(a.item_embeddings(), b.item_embeddings());
    }

    #[test]
    fn nmf_recovers_nonnegative_rank_one_data() {
        let data = RatingsDataset::from_rows(&rank_one_rows(0.0, true)).unwrap();
        let config = TrainConfig::new(1, 0.0, 1.0, 300, 2);
        let (model, report) = train_nmf(&data, &config).unwrap();
        assert!(report.train_rmse < 1e-2, "rmse = {}", report.train_rmse);
        let min_entry = model
            .user_embeddings()
            .iter()
            .chain(model.item_embeddings())
            .flat_map(|e| e.iter().copied())
            .fold(f64::INFINITY, f64::min);
        assert!(min_entry >= 0.0);
    }

    #[test]
    fn nmf_objective_monotone() {
        let data = RatingsDataset::from_rows(&rank_one_rows(0.0, true)).unwrap();
        let config = TrainConfig::new(2, 1e-4, 1.0, 60, 3);
        let (_, report) = train_nmf(&data, &config).unwrap();
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "objective increased: {pair:?}");
        }
    }

    #[test]
    fn nmf_rejects_negative_ratings() {
        let rows = vec![row("a", "x", 1.0), row("b", "x", -0.5)];
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let config = TrainConfig::new(1, 0.0, 1.0, 5, 0);
        assert!(matches!(
            train_nmf(&data, &config),
            Err(Error::NegativeRating { .. })
        ));
    }

    #[test]
    fn nmf_all_zero_ratings() {
        let rows: Vec<RatingRow> = (0..3)
            .flat_map(|u| (0..3).map(move |i| row(&format!("u{u}"), &format!("i{i}"), 0.0)))
            .collect();
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let config = TrainConfig::new(2, 0.0, 1.0, 10, 1);
        let (model, report) = train_nmf(&data, &config).unwrap();
        assert_eq!(report.train_rmse, 0.0);
        assert!(model
            .user_embeddings()
            .iter()
            .all(|e| e.iter().all(|&x| x >= 0.0)));
    }

    #[test]
    fn build_demand_flags() {
        let data = RatingsDataset::from_rows(&rank_one_rows(0.0, true)).unwrap();
        let (nmf, _) = train_nmf(&data, &TrainConfig::new(2, 1e-4, 1.0, 20, 0)).unwrap();
        let demand = build_demand(&nmf).unwrap();
        assert!(demand.is_nonnegative());
        assert_eq!(demand.len(), data.n_users());
        assert!((demand.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let data = RatingsDataset::from_rows(&rank_one_rows(3.0, false)).unwrap();
        let (pmf, _) = train_pmf(&data, &TrainConfig::new(2, 1e-4, 0.05, 20, 0)).unwrap();
        let demand = build_demand(&pmf).unwrap();
        assert!(!demand.is_nonnegative());
    }

    #[test]
    fn single_user_demand() {
        let rows = vec![row("only", "x", 2.0), row("only", "y", 1.0)];
        let data = RatingsDataset::from_rows(&rows).unwrap();
        let (model, _) = train_pmf(&data, &TrainConfig::new(2, 1e-4, 0.05, 5, 0)).unwrap();
        let demand = build_demand(&model).unwrap();
        assert_eq!(demand.len(), 1);
        assert_eq!(demand.weights(), &[1.0]);
    }

    #[test]
    fn holdout_report_present() {
        let data = RatingsDataset::from_rows(&rank_one_rows(3.0, false)).unwrap();
        let mut config = TrainConfig::new(1, 1e-6, 0.05, 50, 0);
        config.holdout_fraction = Some(0.1);
        let (_, report) = train_pmf(&data, &config).unwrap();
        assert!(report.holdout_rmse.is_some());
    }

    #[test]
    fn conflicting_groups_rejected() {
        let rows = vec![
            RatingRow {
                user: "a".into(),
                item: "x".into(),
                rating: 1.0,
                user_group: Some("F".into()),
                item_group: None,
            },
            RatingRow {
                user: "a".into(),
                item: "y".into(),
                rating: 2.0,
                user_group: Some("M".into()),
                item_group: None,
            },
        ];
        assert!(RatingsDataset::from_rows(&rows).is_err());
    }
}

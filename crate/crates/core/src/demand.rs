//! Demand distributions: weighted finite sets of consumer embeddings.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Tolerance on the weight sum of a demand distribution.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported probability measure over consumer embeddings in R^d.
///
/// Expectations over consumers are exact weighted sums; nothing is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDistribution {
    points: Vec<DVector<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl DemandDistribution {
    /// Builds a distribution from consumer embeddings and a probability vector.
    pub fn new(points: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "consumer embedding",
                });
            }
            if weights[i] < 0.0 || !weights[i].is_finite() {
                return Err(Error::InvalidWeights(format!(
                    "weight {} is {}",
                    i, weights[i]
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            points,
            weights,
            dim,
        })
    }

    /// Uniform distribution `1/m` over the given points.
    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        let w = 1.0 / m as f64;
        Self::new(points, vec![w; m])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DVector<f64>, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Mean consumer embedding E[c].
    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for (c, w) in self.iter() {
            m.axpy(w, c, 1.0);
        }
        m
    }

    /// True iff every coordinate of every support point is non-negative,
    /// i.e. the distribution defines a non-negative game.
    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|&x| x >= 0.0))
    }

    /// The scaled mean and its unit normalization for an `n`-producer game.
    ///
    /// Fails when E[c] = 0, in which case the collapse direction does not
    /// exist.
    pub fn consumer_stats(&self, n: usize) -> Result<DerivedConsumerStats> {
        DerivedConsumerStats::from_mean(self.mean(), n)
    }
}

/// The collapse geometry of a demand distribution for an `n`-producer game:
/// `c_hat = (1/n)(1 - 1/n) E[c]` and its unit normalization `c_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConsumerStats {
    c_hat: DVector<f64>,
    c_bar: DVector<f64>,
}

impl DerivedConsumerStats {
    fn from_mean(mean: DVector<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        let norm = mean.norm();
        if norm == 0.0 {
            return Err(Error::UndefinedMeanDirection);
        }
        let n = n as f64;
        let c_hat = &mean * ((1.0 / n) * (1.0 - 1.0 / n));
        let c_bar = &mean / norm;
        Ok(Self { c_hat, c_bar })
    }

    pub fn c_hat(&self) -> &DVector<f64> {
        &self.c_hat
    }

    /// Unit vector in the direction of E[c].
    pub fn c_bar(&self) -> &DVector<f64> {
        &self.c_bar
    }

    pub fn c_hat_norm(&self) -> f64 {
        self.c_hat.norm()
    }
}

//! Exposure game evaluation: probabilities, utilities, and their exact
//! first and second derivatives.

use nalgebra::{DMatrix, DVector};
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};

/// Tolerance on the unit-norm invariant of a strategy.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Two hardmax scores within this absolute distance are treated as tied and
/// the exposure is split equally. Exact float comparison would miss the
/// ties that symmetric constructions produce only up to rounding.
pub const HARDMAX_TIE_TOL: f64 = 1e-12;

/// Static description of an exposure game: embedding dimension, producer
/// count, softmax temperature (`tau = 0` selects hardmax semantics), and
/// whether the game is restricted to the positive orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub d: usize,
    pub n: usize,
    pub tau: f64,
    pub nonneg: bool,
}

impl GameConfig {
    pub fn new(d: usize, n: usize, tau: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("producer count must be >= 1".into()));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "temperature must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self {
            d,
            n,
            tau,
            nonneg: false,
        })
    }

    /// Marks the game as non-negative; `validate_distribution` then insists
    /// on a non-negative demand.
    pub fn with_nonneg(mut self, nonneg: bool) -> Self {
        self.nonneg = nonneg;
        self
    }

    pub fn is_hardmax(&self) -> bool {
        self.tau == 0.0
    }

    /// Checks that a demand distribution is compatible with this game.
    pub fn validate_distribution(&self, dist: &DemandDistribution) -> Result<()> {
        if dist.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: dist.dim(),
            });
        }
        if self.nonneg && !dist.is_nonnegative() {
            return Err(Error::InvalidConfig(
                "non-negative game requires a demand supported on the positive orthant".into(),
            ));
        }
        Ok(())
    }
}

/// One strategy per producer, each a unit vector in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    strategies: Vec<DVector<f64>>,
    dim: usize,
}

impl StrategyProfile {
    /// Validates unit norms (within [`UNIT_NORM_TOL`]) and consistent dimensions.
    pub fn new(strategies: Vec<DVector<f64>>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidConfig("profile needs >= 1 strategy".into()));
        }
        let dim = strategies[0].len();
        for (i, s) in strategies.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "strategy",
                });
            }
            let norm = s.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm { index: i, norm });
            }
        }
        Ok(Self { strategies, dim })
    }

    /// Normalizes each vector onto the sphere first.
    pub fn from_unnormalized(raw: Vec<DVector<f64>>) -> Result<Self> {
        let normalized = raw
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let norm = v.norm();
                if norm == 0.0 || !norm.is_finite() {
                    Err(Error::ParameterUnderflow { index: i })
                } else {
                    Ok(v / norm)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(normalized)
    }

    pub fn n(&self) -> usize {
        self.strategies.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strategies(&self) -> &[DVector<f64>] {
        &self.strategies
    }

    pub fn strategy(&self, i: usize) -> &DVector<f64> {
        &self.strategies[i]
    }

    /// Replaces strategy `i`, keeping the unit-norm invariant.
    pub fn with_strategy(&self, i: usize, s: DVector<f64>) -> Result<Self> {
        let mut strategies = self.strategies.clone();
        strategies[i] = s;
        Self::new(strategies)
    }
}

impl Serialize for StrategyProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.strategies.len()))?;
        for s in &self.strategies {
            seq.serialize_element(&s.as_slice())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for StrategyProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RowsVisitor;
        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = Vec<Vec<f64>>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of strategy rows")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut rows = Vec::new();
                while let Some(row) = seq.next_element::<Vec<f64>>()? {
                    rows.push(row);
                }
                Ok(rows)
            }
        }
        let rows = deserializer.deserialize_seq(RowsVisitor)?;
        let strategies = rows.into_iter().map(DVector::from_vec).collect();
        StrategyProfile::new(strategies).map_err(de::Error::custom)
    }
}

/// Exposure probabilities from raw preference scores `<c, s_i>`.
///
/// For `tau > 0` this is a max-subtracted softmax of `scores / tau`; for
/// `tau = 0` exposure is split equally over the (tie-tolerant) argmax set.
pub fn exposure_from_scores(scores: &[f64], tau: f64) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidConfig("no scores".into()));
    }
    if scores.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { context: "scores" });
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::InvalidConfig(format!("invalid temperature {tau}")));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if tau == 0.0 {
        let winners = scores
            .iter()
            .filter(|&&z| max - z <= HARDMAX_TIE_TOL)
            .count();
        let share = 1.0 / winners as f64;
        return Ok(scores
            .iter()
            .map(|&z| if max - z <= HARDMAX_TIE_TOL { share } else { 0.0 })
            .collect());
    }
    let exps: Vec<f64> = scores.iter().map(|&z| ((z - max) / tau).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Probability that consumer `c` is exposed to each producer.
pub fn exposure_probabilities(
    config: &GameConfig,
    profile: &StrategyProfile,
    c: &DVector<f64>,
) -> Result<Vec<f64>> {
    check_profile(config, profile)?;
    if c.len() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            got: c.len(),
        });
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "consumer embedding",
        });
    }
    let scores: Vec<f64> = profile.strategies().iter().map(|s| c.dot(s)).collect();
    exposure_from_scores(&scores, config.tau)
}

/// Expected exposure share of each producer: `u_i = E_c[p_i(c)]`.
///
/// The utilities always sum to one; the demand's attention is conserved.
pub fn utility(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
) -> Result<Vec<f64>> {
    check_inputs(config, dist, profile)?;
    let mut u = vec![0.0; config.n];
    for (c, w) in dist.iter() {
        let p = exposure_probabilities(config, profile, c)?;
        for (ui, pi) in u.iter_mut().zip(p) {
            *ui += w * pi;
        }
    }
    Ok(u)
}

/// Euclidean gradient of producer `i`'s utility with respect to `s_i`:
/// `tau^{-1} E[p_i(c)(1 - p_i(c)) c]`. Requires `tau > 0`.
pub fn utility_gradient(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
    i: usize,
) -> Result<DVector<f64>> {
    check_inputs(config, dist, profile)?;
    check_player(config, i)?;
    if config.is_hardmax() {
        return Err(Error::HardmaxUnsupported);
    }
    let mut g = DVector::zeros(config.d);
    for (c, w) in dist.iter() {
        let p = exposure_probabilities(config, profile, c)?[i];
        g.axpy(w * p * (1.0 - p), c, 1.0);
    }
    Ok(g / config.tau)
}

/// Euclidean Hessian of producer `i`'s utility:
/// `tau^{-2} E[p_i(1 - p_i)(1 - 2 p_i) c c^T]`. Requires `tau > 0`.
pub fn utility_hessian(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
    i: usize,
) -> Result<DMatrix<f64>> {
    check_inputs(config, dist, profile)?;
    check_player(config, i)?;
    if config.is_hardmax() {
        return Err(Error::HardmaxUnsupported);
    }
    let d = config.d;
    let mut h = DMatrix::zeros(d, d);
    for (c, w) in dist.iter() {
        let p = exposure_probabilities(config, profile, c)?[i];
        let coef = w * p * (1.0 - p) * (1.0 - 2.0 * p);
        // h += coef * c c^T
        h.ger(coef, c, c, 1.0);
    }
    Ok(h / (config.tau * config.tau))
}

/// All exposure probabilities as an m-by-n matrix (consumers by producers).
/// One softmax per consumer; the building block of the ascent loop.
pub fn exposure_matrix(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
) -> Result<DMatrix<f64>> {
    check_inputs(config, dist, profile)?;
    let mut out = DMatrix::zeros(dist.len(), config.n);
    for (j, (c, _)) in dist.iter().enumerate() {
        let p = exposure_probabilities(config, profile, c)?;
        for (i, pi) in p.into_iter().enumerate() {
            out[(j, i)] = pi;
        }
    }
    Ok(out)
}

fn check_profile(config: &GameConfig, profile: &StrategyProfile) -> Result<()> {
    if profile.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            got: profile.dim(),
        });
    }
    if profile.n() != config.n {
        return Err(Error::DimensionMismatch {
            expected: config.n,
            got: profile.n(),
        });
    }
    Ok(())
}

fn check_player(config: &GameConfig, i: usize) -> Result<()> {
    if i >= config.n {
        return Err(Error::InvalidConfig(format!(
            "producer index {i} out of range for n = {}",
            config.n
        )));
    }
    Ok(())
}

fn check_inputs(
    config: &GameConfig,
    dist: &DemandDistribution,
    profile: &StrategyProfile,
) -> Result<()> {
    config.validate_distribution(dist)?;
    check_profile(config, profile)
}

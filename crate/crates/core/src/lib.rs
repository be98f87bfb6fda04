//! Exposure games end-to-end: demand construction from ratings or
//! embeddings, exact utilities and derivatives of the softmax/hardmax
//! exposure model, local-equilibrium search on the unit sphere with
//! second-order verification, mixed-equilibrium solvers for two-player
//! hardmax games, and the pre-deployment audit metrics.
//!
//! Producers place unit-vector content embeddings to maximize their share
//! of a fixed consumer attention pool; the temperature parameter
//! interpolates between winner-takes-all ranking (`tau = 0`) and uniform
//! exposure (`tau -> inf`). Everything here is deterministic given seeds:
//! expectations over consumers are exact sums and all randomness flows
//! through explicit ChaCha streams.

pub mod audit;
pub mod demand;
pub mod error;
pub mod game;
pub mod hardmax;
pub mod manifold;
pub mod mf;
pub mod scenarios;
pub mod solver;

pub use demand::{DemandDistribution, DerivedConsumerStats};
pub use error::{Error, Result};
pub use game::{
    exposure_from_scores, exposure_probabilities, utility, utility_gradient, utility_hessian,
    GameConfig, StrategyProfile,
};
pub use hardmax::{
    discretize_sphere, dominating_pure_strategies, hitting_set_mixed_ne, lp_mixed_ne,
    MixedStrategy, PayoffMatrix,
};
pub use manifold::{riemannian_gradient, riemannian_hessian};
pub use mf::{build_demand, train_nmf, train_pmf, MfModel, MfVariant, RatingsDataset, TrainConfig};
pub use solver::{
    ascent_step, epsilon_improvement, run_lne, second_order_test, Initialization,
    LneClassification, OptimizerConfig, RunRecord, SecondOrderReport,
};

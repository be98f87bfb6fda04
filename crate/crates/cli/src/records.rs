//! On-disk schema of one equilibrium-search run.

use serde::{Deserialize, Serialize};

use exposure_games::game::{GameConfig, StrategyProfile};
use exposure_games::solver::{OptimizerConfig, SecondOrderReport};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecordFile {
    pub run_id: String,
    pub recommender_seed: u64,
    pub optimizer_seed: u64,
    pub config: GameConfig,
    pub optimizer: OptimizerConfig,
    pub iterations: usize,
    pub converged: bool,
    pub utilities: Vec<f64>,
    pub second_order: SecondOrderReport,
    pub cluster_count: usize,
    pub final_profile: StrategyProfile,
}

impl RunRecordFile {
    /// Short label of the game/optimizer cell, used in plot CSVs.
    pub fn config_label(&self) -> String {
        format!(
            "d{}-n{}-tau{}-a{}",
            self.config.d, self.config.n, self.config.tau, self.optimizer.step_size
        )
    }
}

//! Independent oracles for the solver: exhaustive search over deductible/limit grids,
//! randomized search over general admissible retention quantiles, Monte Carlo ruin
//! frequencies, and the value-at-risk dual.
//!
//! Every oracle is parallel over rows, samples or path chunks and reduces in a fixed
//! order, so results do not depend on the number of worker threads.

mod duality;
mod grid;
mod monte_carlo;
mod random;

use serde::Serialize;

pub use duality::{var_duality_check, DualityReport};
pub use grid::{grid_oracle, grid_oracle_on, linspace, GRID_GAP_TOLERANCE};
pub use monte_carlo::{monte_carlo_ruin, McEstimate, MC_CHUNK};
pub use random::{random_admissible_oracle, RandomOracleOptions, DEFAULT_GRID_TOLERANCE};

use crate::loss::LossModel;
use crate::Scalar;

/// Probability level of the largest loss considered by contract grids.
pub const GRID_TAIL_PROBABILITY: f64 = 1e-9;

/// Best contract an oracle found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BestContract<T> {
    Diml { d: T, m: T },
    /// Index of the sampled quantile grid and its discretized premium.
    QuantileGrid { sample: u64, premium: T },
}

/// Outcome of an oracle search compared with the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport<T> {
    pub best_contract: BestContract<T>,
    pub best_ruin_prob: T,
    pub solver_ruin_prob: T,
    /// `best_ruin_prob − solver_ruin_prob`.
    pub gap: T,
    pub tolerance: T,
    pub samples_or_cells: u64,
    pub seed: Option<u64>,
}

impl<T: Scalar> OracleReport<T> {
    /// The oracle never beats the solver by more than the tolerance.
    pub fn passed(&self) -> bool {
        self.gap >= -self.tolerance
    }
}

/// Largest loss level on contract grids: `min(M, S_X⁻¹(1e-9))`.
pub fn grid_upper_level<T: Scalar>(loss: &LossModel<T>) -> T {
    loss.qf(T::c(GRID_TAIL_PROBABILITY).min(loss.s0() * T::half()))
}

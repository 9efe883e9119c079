//! Ruin-minimizing insurance under distortion premiums.
//!
//! A policyholder with wealth `w` faces a loss `X` and buys an indemnity priced by a
//! distortion `g` with proportional loading `θ`. The optimal contract among all
//! admissible indemnities pays a deductible-with-limit layer `min((X − d)₊, m − d)`;
//! [`solver::solve`] returns it in closed form up to one root of the tail premium.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` and `*32`
//! aliases below fix the precision.

pub mod config;
pub mod contract;
pub mod distortion;
pub mod error;
pub mod loss;
pub mod numerics;
pub mod premium;
mod scalar;
pub mod solver;
pub mod verify;

pub use contract::{retention_from_quantile, ruin_probability, DimlContract, GridLayout, QuantileGrid};
pub use distortion::Distortion;
pub use error::{Error, Result};
pub use loss::{LossFamily, LossModel, Support};
pub use premium::{GridPremium, GridPricer, Market, PremiumQuote};
pub use scalar::Scalar;
pub use solver::{solve, Case, Solution, Thresholds};

pub type LossModel64 = LossModel<f64>;
pub type Distortion64 = Distortion<f64>;
pub type Market64 = Market<f64>;
pub type DimlContract64 = DimlContract<f64>;
pub type QuantileGrid64 = QuantileGrid<f64>;
pub type Solution64 = Solution<f64>;

pub type LossModel32 = LossModel<f32>;
pub type Distortion32 = Distortion<f32>;
pub type Market32 = Market<f32>;
pub type DimlContract32 = DimlContract<f32>;
pub type QuantileGrid32 = QuantileGrid<f32>;
pub type Solution32 = Solution<f32>;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contract::{effective_net, DimlContract};
use crate::error::{Error, Result};
use crate::premium::Market;
use crate::Scalar;

/// Paths per random stream. Stream `k` covers paths `k·MC_CHUNK .. (k+1)·MC_CHUNK`.
pub const MC_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error `√(p̂(1 − p̂)/n)`.
    pub std_err: f64,
    pub ruined: u64,
    pub paths: u64,
    pub seed: u64,
}

/// Ruin frequency of `contract` at wealth `w` over `n_paths ≥ 10⁴` inverse-transform draws.
pub fn monte_carlo_ruin<T: Scalar>(
    market: &Market<T>,
    contract: &DimlContract<T>,
    w: T,
    n_paths: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_paths < 10_000 {
        return Err(Error::param("path count", format!("needs at least 10000 paths, got {n_paths}")));
    }
    let premium = market
        .premium_diml(contract.deductible(), contract.limit())?
        .pi_i;
    let net = effective_net(contract.deductible(), w, w - premium);
    let loss = market.loss();
    let chunks = n_paths.div_ceil(MC_CHUNK);
    let ruined: u64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_CHUNK.min(n_paths - k * MC_CHUNK);
            (0..len)
                .filter(|_| {
                    let u: f64 = rng.sample(Open01);
                    contract.r(loss.qf(T::c(u))) > net
                })
                .count() as u64
        })
        .sum();
    let p = ruined as f64 / n_paths as f64;
    Ok(McEstimate {
        estimate: p,
        std_err: (p * (1.0 - p) / n_paths as f64).sqrt(),
        ruined,
        paths: n_paths,
        seed,
    })
}

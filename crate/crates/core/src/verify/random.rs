use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{BestContract, OracleReport};
use crate::contract::{DimlContract, GridLayout, QuantileGrid};
use crate::error::{Error, Result};
use crate::premium::{GridPricer, Market};
use crate::solver::{solve, Case, Solution};
use crate::Scalar;

/// Default slack for the randomized oracle's dominance check.
pub const DEFAULT_GRID_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomOracleOptions {
    pub samples: usize,
    /// Number of probability cells, at least 256.
    pub grid: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for RandomOracleOptions {
    fn default() -> Self {
        RandomOracleOptions {
            samples: 10_000,
            grid: 1_000,
            seed: 42,
            tolerance: DEFAULT_GRID_TOLERANCE,
        }
    }
}

/// Searches randomly generated admissible retention quantiles for one that beats the
/// solver.
///
/// Sample `0` is the solver's contract on the grid, with the limit reduced until the
/// discretized premium fits the budget. Every other sample splits each increment of
/// `S_X⁻¹` between retention and indemnity, with fractions drawn either independently
/// or as a few constant pieces valued in `{0, 1, U}`; sample `k` draws from ChaCha
/// stream `k`, so results do not depend on scheduling.
pub fn random_admissible_oracle<T: Scalar>(market: &Market<T>, w: T, opts: RandomOracleOptions) -> Result<OracleReport<T>> {
    if opts.grid < 256 {
        return Err(Error::param("quantile grid", format!("needs at least 256 cells, got {}", opts.grid)));
    }
    if opts.samples == 0 {
        return Err(Error::param("sample count", "must be positive"));
    }
    let solution = solve(market, w)?;
    let layout = Arc::new(GridLayout::uniform(market.loss(), opts.grid));
    let pricer = GridPricer::new(market, layout.clone())?;
    let increments: Vec<T> = {
        let xs = layout.loss_values();
        (0..xs.len())
            .map(|i| if i == 0 { xs[0] } else { xs[i] - xs[i - 1] })
            .collect()
    };

    let forced = forced_diml_grid(market, &pricer, &solution, w)?;
    let evaluate = |retention: &[T]| -> T {
        let premium = pricer.price_values(
            layout
                .loss_values()
                .iter()
                .zip(retention)
                .map(|(&x, &r)| x - r),
        );
        QuantileGrid::from_parts_unchecked(layout.clone(), retention.to_vec()).ruin_probability(w, premium)
    };

    let forced_ruin = evaluate(forced.retention_values());
    let (best_ruin, best_index) = (1..opts.samples as u64)
        .into_par_iter()
        .map(|k| {
            let retention = sample_retention(&increments, opts.seed, k);
            (evaluate(&retention), k)
        })
        .reduce(
            || (forced_ruin, 0),
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );

    let premium = if best_index == 0 {
        pricer.price(&forced)?.premium
    } else {
        let retention = sample_retention(&increments, opts.seed, best_index);
        pricer.price_values(layout.loss_values().iter().zip(&retention).map(|(&x, &r)| x - r))
    };
    Ok(OracleReport {
        best_contract: BestContract::QuantileGrid {
            sample: best_index,
            premium,
        },
        best_ruin_prob: best_ruin,
        solver_ruin_prob: solution.ruin_prob,
        gap: best_ruin - solution.ruin_prob,
        tolerance: T::c(opts.tolerance),
        samples_or_cells: opts.samples as u64,
        seed: Some(opts.seed),
    })
}

/// The admissible retention of sample `k`, reproducible from `(seed, k)`.
pub(crate) fn sample_retention<T: Scalar>(increments: &[T], seed: u64, k: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let n = increments.len();
    let fractions: Vec<f64> = if rng.random_bool(0.5) {
        (0..n).map(|_| rng.random::<f64>()).collect()
    } else {
        let pieces = rng.random_range(1..=8usize);
        let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.random_range(0..n)).collect();
        cuts.sort_unstable();
        cuts.push(n);
        let mut out = Vec::with_capacity(n);
        for &end in &cuts {
            let level = match rng.random_range(0..3u8) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            };
            out.resize(end.max(out.len()), level);
        }
        out
    };
    let mut r = T::zero();
    increments
        .iter()
        .zip(fractions)
        .map(|(&dx, f)| {
            r = r + T::c(f) * dx;
            r
        })
        .collect()
}

/// The solver's deductible on the grid, with the largest limit whose discretized
/// premium keeps `d* + π̂ ≤ w`.
fn forced_diml_grid<T: Scalar>(
    market: &Market<T>,
    pricer: &GridPricer<T>,
    solution: &Solution<T>,
    w: T,
) -> Result<QuantileGrid<T>> {
    let layout = pricer.layout().clone();
    let loss = market.loss();
    if solution.case == Case::NoInsurance {
        return Ok(QuantileGrid::full_retention(layout));
    }
    let d = solution.d_star;
    let top = layout
        .loss_values()
        .last()
        .copied()
        .unwrap_or_else(T::zero)
        .max(d);
    let grid_at = |m: T| -> Result<QuantileGrid<T>> {
        Ok(QuantileGrid::diml(layout.clone(), loss, &DimlContract::new(loss, d, m)?))
    };
    let fits = |m: T| -> Result<bool> { Ok(d + pricer.price(&grid_at(m)?)?.premium <= w) };
    if fits(top)? {
        return grid_at(top);
    }
    let (mut lo, mut hi) = (d, top);
    for _ in 0..100 {
        let mid = lo + (hi - lo) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    grid_at(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;
    use crate::loss::LossModel;

    fn exp_market(theta: f64) -> Market<f64> {
        Market::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, theta).unwrap()
    }

    #[test]
    fn samples_are_admissible() {
        let m = exp_market(0.25);
        let layout = Arc::new(GridLayout::uniform(m.loss(), 300));
        let xs = layout.loss_values();
        let inc: Vec<f64> = (0..xs.len()).map(|i| if i == 0 { xs[0] } else { xs[i] - xs[i - 1] }).collect();
        for k in 0..2_000 {
            let r = sample_retention(&inc, 9, k);
            QuantileGrid::new(layout.clone(), r).unwrap();
        }
    }

    proptest::proptest! {
        #[test]
        fn samples_are_admissible_for_any_seed(seed in 0u64..u64::MAX, k in 1u64..1_000_000, family in 0usize..3) {
            let loss = match family {
                0 => LossModel::pareto(2.5, 1.0).unwrap(),
                1 => LossModel::uniform(2.0).unwrap(),
                _ => LossModel::atom_scaled(0.4, LossModel::lognormal(0.0, 1.0).unwrap()).unwrap(),
            };
            let layout = Arc::new(GridLayout::uniform(&loss, 257));
            let xs = layout.loss_values();
            let inc: Vec<f64> = (0..xs.len()).map(|i| if i == 0 { xs[0] } else { xs[i] - xs[i - 1] }).collect();
            proptest::prop_assert!(QuantileGrid::new(layout.clone(), sample_retention(&inc, seed, k)).is_ok());
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let inc = vec![0.1f64; 300];
        assert_eq!(sample_retention(&inc, 1, 17), sample_retention(&inc, 1, 17));
        assert_ne!(sample_retention(&inc, 1, 17), sample_retention(&inc, 1, 18));
    }

    #[test]
    fn forced_contract_alone_matches_solver() {
        let m = exp_market(0.25);
        let opts = RandomOracleOptions {
            samples: 1,
            grid: 1_000,
            seed: 0,
            tolerance: DEFAULT_GRID_TOLERANCE,
        };
        let r = random_admissible_oracle(&m, 0.8, opts).unwrap();
        assert!(r.gap.abs() <= 1e-3, "{r:?}");
    }

    #[test]
    fn full_insurance_beyond_budget_is_certain_ruin() {
        let m = exp_market(0.25);
        let layout = Arc::new(GridLayout::uniform(m.loss(), 1_000));
        let full = QuantileGrid::zero_retention(layout);
        let premium = m.premium_from_indemnity_quantile(&full).unwrap().premium;
        assert!(premium > 0.8);
        assert_eq!(full.ruin_probability(0.8, premium), 1.0);
    }

    #[test]
    fn search_never_beats_solver() {
        let m = exp_market(0.25);
        let opts = RandomOracleOptions {
            samples: 2_000,
            ..RandomOracleOptions::default()
        };
        let r = random_admissible_oracle(&m, 0.8, opts).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

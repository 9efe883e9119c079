use rayon::prelude::*;
use serde::Serialize;

use super::grid::linspace;
use super::grid_upper_level;
use crate::contract::DimlContract;
use crate::error::{Error, Result};
use crate::premium::Market;
use crate::solver::{solve, Case};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport<T> {
    /// The solver's ruin probability `α*`.
    pub alpha: T,
    /// Minimum of `VaR_α*(R(X) + π_I)` over the contract grid.
    pub min_var: T,
    pub argmin_d: T,
    pub argmin_m: T,
    /// `min_var − w`.
    pub gap: T,
    /// `(1+θ)·max(h_d, h_m)`: the grid minimum lies in `[w, w + tolerance]`.
    pub tolerance: T,
}

impl<T: Scalar> DualityReport<T> {
    pub fn passed(&self, w: T) -> bool {
        self.gap >= -T::tol(1e-9) * (T::one() + w) && self.gap <= self.tolerance
    }
}

/// Minimizes `S_R⁻¹(α*) + Ψ(d) − Ψ(m)` over an `n × n` grid of contracts, where `α*` is the
/// solver's ruin probability at `w`; the minimum should equal `w`.
///
/// `d` runs over `[0, min(w, L)]` and `m ≥ d` over `[0, L]` with `L = min(M, S_X⁻¹(1e-9))`.
pub fn var_duality_check<T: Scalar>(market: &Market<T>, w: T, n_grid: usize) -> Result<DualityReport<T>> {
    if n_grid < 16 {
        return Err(Error::param("contract grid", format!("needs at least 16 points per axis, got {n_grid}")));
    }
    let solution = solve(market, w)?;
    if solution.case == Case::SafeLevel {
        return Err(Error::domain("wealth w (below the safe level)", w, "(0, w_s)"));
    }
    let alpha = solution.ruin_prob;
    let loss = market.loss();
    let top = grid_upper_level(loss);
    let d_axis = linspace(T::zero(), w.min(top), n_grid);
    let m_axis = linspace(T::zero(), top, n_grid);
    let psi_d: Vec<T> = d_axis.par_iter().map(|&x| market.psi(x)).collect::<Result<_>>()?;
    let psi_m: Vec<T> = m_axis.par_iter().map(|&x| market.psi(x)).collect::<Result<_>>()?;

    let rows: Vec<(T, usize, usize)> = d_axis
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let start = m_axis.partition_point(|&m| m < d);
            let mut best = (T::infinity(), i, usize::MAX);
            for (j, &m) in m_axis.iter().enumerate().skip(start) {
                let c = DimlContract::new(loss, d, m).expect("grid contract is valid");
                let var = c.rq(loss, alpha) + (psi_d[i] - psi_m[j]).max(T::zero());
                if var < best.0 {
                    best = (var, i, j);
                }
            }
            best
        })
        .collect();
    let (min_var, i, j) = rows
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("non-empty grid");
    if j == usize::MAX {
        return Err(Error::Numerical("contract grid has no admissible pair".into()));
    }
    let h_d = d_axis[1] - d_axis[0];
    let h_m = m_axis[1] - m_axis[0];
    Ok(DualityReport {
        alpha,
        min_var,
        argmin_d: d_axis[i],
        argmin_m: m_axis[j],
        gap: min_var - w,
        tolerance: (T::one() + market.loading()) * h_d.max(h_m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;
    use crate::loss::LossModel;

    #[test]
    fn zero_deductible_dual_value_is_wealth() {
        let m = Market::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, 0.0).unwrap();
        let r = var_duality_check(&m, 0.5, 512).unwrap();
        assert!(r.passed(0.5), "{r:?}");
    }

    #[test]
    fn dual_value_at_the_solution_is_wealth() {
        let m = Market::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, 0.25).unwrap();
        let s = solve(&m, 0.8).unwrap();
        let c = s.contract(&m).unwrap();
        let var: f64 = c.rq(m.loss(), s.ruin_prob) + s.premium;
        assert!((var - 0.8).abs() <= 1e-9);
    }

    #[test]
    fn uninsured_loss_quantile_is_pinned_at_s0() {
        let loss = LossModel::atom_scaled(0.5, LossModel::exponential(1.0).unwrap()).unwrap();
        let c = DimlContract::no_insurance(&loss, 0.0).unwrap();
        assert_eq!(c.rq(&loss, 0.5), 0.0);
    }
}

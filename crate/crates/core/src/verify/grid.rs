use rayon::prelude::*;

use super::{grid_upper_level, BestContract, OracleReport};
use crate::contract::ruin_from_net;
use crate::error::{Error, Result};
use crate::premium::Market;
use crate::solver::solve;
use crate::Scalar;

/// Absolute slack for the grid oracle's dominance check; only quadrature and
/// root-finding error separate a grid point from the solver.
pub const GRID_GAP_TOLERANCE: f64 = 1e-9;

/// `n ≥ 2` equally spaced points on `[a, b]`, endpoints exact.
pub fn linspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    let last = T::from_usize(n - 1).expect("count fits");
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * T::from_usize(i).expect("index fits") / last
            }
        })
        .collect()
}

/// Exhaustive search over deductible-with-limit contracts.
///
/// `d` runs over `n_d` points of `[0, min(w, L)]` and `m` over `n_m` points of `[0, L]`
/// with `L = min(M, S_X⁻¹(1e-9))`; only pairs with `m > d` are kept, plus the uncovered
/// position.
pub fn grid_oracle<T: Scalar>(market: &Market<T>, w: T, n_d: usize, n_m: usize) -> Result<OracleReport<T>> {
    if n_d < 16 || n_m < 16 {
        return Err(Error::param("contract grid", format!("needs at least 16×16 points, got {n_d}×{n_m}")));
    }
    let top = grid_upper_level(market.loss());
    let d_axis = linspace(T::zero(), w.min(top), n_d);
    let m_axis = linspace(T::zero(), top, n_m);
    grid_oracle_on(market, w, &d_axis, &m_axis)
}

/// [`grid_oracle`] on caller-supplied axes, e.g. to include the solver's contract.
///
/// Ties in ruin probability go to the contract with the most unspent wealth, then to
/// the lowest index, which makes the selected `d` the grid minimizer of `Φ`.
pub fn grid_oracle_on<T: Scalar>(market: &Market<T>, w: T, d_axis: &[T], m_axis: &[T]) -> Result<OracleReport<T>> {
    if d_axis.is_empty() || m_axis.is_empty() {
        return Err(Error::param("contract grid", "empty axis"));
    }
    let solution = solve(market, w)?;
    let loss = market.loss();
    let psi = |xs: &[T]| -> Result<Vec<T>> { xs.par_iter().map(|&x| market.psi(x)).collect() };
    let psi_d = psi(d_axis)?;
    let psi_m = psi(m_axis)?;

    // (ruin, −slack, d index, m index); usize::MAX indices mark the uncovered position
    type Candidate<T> = (T, T, usize, usize);
    let better = |a: &Candidate<T>, b: &Candidate<T>| -> bool {
        (a.0, a.1, a.2, a.3) < (b.0, b.1, b.2, b.3)
    };
    // Every pair with m = d is the same uncovered position; it is represented once, by
    // d = m = min(w, M), and loses ties.
    let no_cover = w.min(loss.essential_sup().as_float());
    let uninsured: Candidate<T> = (ruin_from_net(loss, no_cover, no_cover, w, w), T::zero(), usize::MAX, usize::MAX);
    let best = d_axis
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut best: Candidate<T> = (T::infinity(), T::zero(), i, usize::MAX);
            let start = m_axis.partition_point(|&m| m <= d);
            for (j, &m) in m_axis.iter().enumerate().skip(start) {
                let premium = (psi_d[i] - psi_m[j]).max(T::zero());
                let net = w - premium;
                let cand = (ruin_from_net(loss, d, m, w, net), -(net - d), i, j);
                if better(&cand, &best) {
                    best = cand;
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(uninsured, |a, b| if better(&b, &a) { b } else { a });

    let (ruin, _, i, j) = best;
    let (d, m) = if j == usize::MAX {
        (no_cover, no_cover)
    } else {
        (d_axis[i], m_axis[j])
    };
    Ok(OracleReport {
        best_contract: BestContract::Diml { d, m },
        best_ruin_prob: ruin,
        solver_ruin_prob: solution.ruin_prob,
        gap: ruin - solution.ruin_prob,
        tolerance: T::tol(GRID_GAP_TOLERANCE),
        samples_or_cells: (d_axis.len() * m_axis.len()) as u64,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;
    use crate::loss::LossModel;
    use crate::solver::solve;

    fn exp_market(theta: f64) -> Market<f64> {
        Market::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, theta).unwrap()
    }

    #[test]
    fn zero_deductible_minimizer_is_near_closed_form() {
        let m = exp_market(0.0);
        let r = grid_oracle(&m, 0.5, 512, 512).unwrap();
        assert!(r.passed(), "{r:?}");
        let BestContract::Diml { d, m: lim } = r.best_contract else { unreachable!() };
        let top = grid_upper_level(m.loss());
        assert!(d <= 0.5 / 511.0);
        assert!((lim - 2f64.ln()).abs() <= top / 511.0);
    }

    #[test]
    fn exact_solution_on_axes_closes_the_gap() {
        let m = exp_market(0.25);
        let s = solve(&m, 0.8).unwrap();
        let mut d_axis = linspace(0.0, 0.8, 16);
        d_axis.push(s.d_star);
        d_axis.sort_by(f64::total_cmp);
        let mut m_axis = linspace(0.0, 20.0, 16);
        m_axis.push(s.m_star);
        m_axis.sort_by(f64::total_cmp);
        let r = grid_oracle_on(&m, 0.8, &d_axis, &m_axis).unwrap();
        assert!(r.gap.abs() <= 1e-12, "{r:?}");
    }

    #[test]
    fn below_deductible_threshold_buys_nothing() {
        let m = exp_market(0.25);
        let r = grid_oracle(&m, 0.2, 64, 64).unwrap();
        let BestContract::Diml { d, m: lim } = r.best_contract else { unreachable!() };
        assert_eq!((d, lim), (0.2, 0.2));
        assert!(r.gap.abs() <= 1e-15);
    }

    #[test]
    fn small_grids_are_rejected() {
        assert!(grid_oracle(&exp_market(0.0), 0.5, 8, 64).is_err());
    }
}

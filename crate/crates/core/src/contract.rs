//! Deductible-with-limit contracts, discretized retention quantiles and ruin probability.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::premium::Market;
use crate::Scalar;

/// Deductible insurance with a maximum limit: the insurer pays `min((x − d)₊, m − d)`.
///
/// `m` equals `+∞` only for unbounded losses covered without a cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimlContract<T> {
    d: T,
    m: T,
    p_d: T,
    p_m: T,
}

impl<T: Scalar> DimlContract<T> {
    /// Requires `0 ≤ d ≤ m ≤ M`.
    pub fn new(loss: &LossModel<T>, d: T, m: T) -> Result<Self> {
        let sup = loss.essential_sup().as_float();
        if d.is_nan() || d < T::zero() || d > sup {
            return Err(Error::domain("deductible d", d, "[0, M]"));
        }
        if m.is_nan() || m < d || m > sup {
            return Err(Error::domain("limit m", m, "[d, M]"));
        }
        Ok(DimlContract {
            d,
            m,
            p_d: loss.sf(d),
            p_m: loss.sf(m),
        })
    }

    /// Deductible `d` with no cap (`m = M`).
    pub fn uncapped(loss: &LossModel<T>, d: T) -> Result<Self> {
        Self::new(loss, d, loss.essential_sup().as_float())
    }

    /// `d = m = min(w, M)`: no coverage at all.
    pub fn no_insurance(loss: &LossModel<T>, w: T) -> Result<Self> {
        let x = w.min(loss.essential_sup().as_float());
        Self::new(loss, x, x)
    }

    pub fn deductible(&self) -> T {
        self.d
    }

    pub fn limit(&self) -> T {
        self.m
    }

    /// `S_X(d)`.
    pub fn p_d(&self) -> T {
        self.p_d
    }

    /// `S_X(m)`.
    pub fn p_m(&self) -> T {
        self.p_m
    }

    /// Retained loss `R(x)`: `x` up to `d`, flat at `d` up to `m`, then `x − (m − d)`.
    pub fn retention(&self, x: T) -> Result<T> {
        check_loss_level(x)?;
        Ok(self.r(x))
    }

    /// Indemnity `I(x) = x − R(x)`, capped at `m − d`.
    pub fn indemnity(&self, x: T) -> Result<T> {
        check_loss_level(x)?;
        Ok(self.i(x))
    }

    pub(crate) fn r(&self, x: T) -> T {
        if x <= self.d {
            x
        } else if x <= self.m {
            self.d
        } else {
            x - (self.m - self.d)
        }
    }

    pub(crate) fn i(&self, x: T) -> T {
        if x <= self.d {
            T::zero()
        } else if x <= self.m {
            x - self.d
        } else {
            self.m - self.d
        }
    }

    /// Quantile of `R(X)`: `S_X⁻¹(p) − (m − d)` below `p_m`, `d` on `[p_m, p_d)`,
    /// `S_X⁻¹(p)` on `[p_d, s0]`, and `0` beyond `s0`.
    pub fn retention_quantile(&self, loss: &LossModel<T>, p: T) -> Result<T> {
        if p.is_nan() || p < T::zero() || p > T::one() {
            return Err(Error::domain("probability p", p, "[0, 1]"));
        }
        Ok(self.rq(loss, p))
    }

    pub(crate) fn rq(&self, loss: &LossModel<T>, p: T) -> T {
        if p >= loss.s0() {
            T::zero()
        } else if p >= self.p_d {
            loss.qf(p)
        } else if p >= self.p_m {
            self.d
        } else {
            loss.qf(p) - (self.m - self.d)
        }
    }

    /// Survival of `R(X)`: `S_X(x)` below `d`, `S_X(x + m − d)` from `d` on.
    pub fn retention_survival(&self, loss: &LossModel<T>, x: T) -> Result<T> {
        check_loss_level(x)?;
        Ok(self.rs(loss, x))
    }

    pub(crate) fn rs(&self, loss: &LossModel<T>, x: T) -> T {
        if x < self.d {
            loss.sf(x)
        } else {
            loss.sf(x + (self.m - self.d))
        }
    }
}

fn check_loss_level<T: Scalar>(x: T) -> Result<()> {
    if x.is_nan() || x < T::zero() {
        Err(Error::domain("loss level x", x, "[0, M]"))
    } else {
        Ok(())
    }
}

/// Ruin probability `P(w − π_I − R(X) < 0)` of a contract at initial wealth `w > 0`.
///
/// With net capital `c = w − π_I` this is `S_X(c + m − d)` when `c ≥ d`, `S_X(c)` when
/// `0 ≤ c < d`, and `1` when the premium exceeds wealth. A binding budget `c = d` is
/// recognized up to [`BUDGET_SLACK`].
pub fn ruin_probability<T: Scalar>(market: &Market<T>, contract: &DimlContract<T>, w: T) -> Result<T> {
    if !(w > T::zero()) {
        return Err(Error::domain("wealth w", w, "(0, ∞)"));
    }
    let premium = market
        .premium_diml(contract.deductible(), contract.limit())?
        .pi_i;
    Ok(ruin_given_premium(market.loss(), contract, w, premium))
}

/// Net capital this close to the deductible, relative to `1 + w`, counts as covering it.
pub const BUDGET_SLACK: f64 = 1e-9;

pub(crate) fn ruin_given_premium<T: Scalar>(
    loss: &LossModel<T>,
    contract: &DimlContract<T>,
    w: T,
    premium: T,
) -> T {
    ruin_from_net(loss, contract.d, contract.m, w, w - premium)
}

/// `S_R(net)` for the contract `(d, m)`, with `net` within [`BUDGET_SLACK`] below `d`
/// rounded up to `d`.
pub(crate) fn ruin_from_net<T: Scalar>(loss: &LossModel<T>, d: T, m: T, w: T, net: T) -> T {
    let net = effective_net(d, w, net);
    if net < T::zero() {
        T::one()
    } else if net < d {
        loss.sf(net)
    } else {
        loss.sf(net + (m - d))
    }
}

/// Net capital with a near-binding budget snapped to the deductible.
pub(crate) fn effective_net<T: Scalar>(d: T, w: T, net: T) -> T {
    let slack = T::tol(BUDGET_SLACK) * (T::one() + w.abs());
    if net < d && net >= d - slack {
        d
    } else {
        net
    }
}

/// Uniform partition of `[0, s0]` in probability, shared by all quantile grids on it.
///
/// Cell `i` covers `[pᵢ₊₁, pᵢ)` with `p₀ = s0 > p₁ > … > p_N = 0`; quantile values are
/// carried at cell midpoints `p̄ᵢ`, which keeps every value finite for unbounded losses.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout<T> {
    probs: Vec<T>,
    mids: Vec<T>,
    loss_values: Vec<T>,
}

impl<T: Scalar> GridLayout<T> {
    /// `cells ≥ 1` equal-probability cells over `[0, s0]`.
    pub fn uniform(loss: &LossModel<T>, cells: usize) -> Self {
        let cells = cells.max(1);
        let s0 = loss.s0();
        let n = T::from_usize(cells).expect("cell count fits");
        let probs: Vec<T> = (0..=cells)
            .map(|i| {
                if i == cells {
                    T::zero()
                } else {
                    s0 * (T::one() - T::from_usize(i).expect("index fits") / n)
                }
            })
            .collect();
        let mids: Vec<T> = (0..cells)
            .map(|i| s0 * (T::one() - (T::from_usize(i).expect("index fits") + T::half()) / n))
            .collect();
        let loss_values = mids.iter().map(|&p| loss.qf(p)).collect();
        GridLayout {
            probs,
            mids,
            loss_values,
        }
    }

    pub fn cells(&self) -> usize {
        self.mids.len()
    }

    /// Cell boundaries, `N + 1` values from `s0` down to `0`.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Cell midpoints `p̄ᵢ`.
    pub fn mid_probs(&self) -> &[T] {
        &self.mids
    }

    /// `S_X⁻¹(p̄ᵢ)`.
    pub fn loss_values(&self) -> &[T] {
        &self.loss_values
    }

    /// Index of the cell containing `p ∈ [0, s0)`.
    fn cell_of(&self, p: T) -> usize {
        let above = self.probs.partition_point(|&q| q > p);
        above.saturating_sub(1).min(self.cells() - 1)
    }
}

/// Discretized admissible retention quantile on a [`GridLayout`].
///
/// `rᵢ` is `S_R⁻¹(p̄ᵢ)`; the indemnity quantile is `S_X⁻¹(p̄ᵢ) − rᵢ`. Admissibility means
/// `rᵢ` non-decreasing in `i` (non-increasing in `p`), `0 ≤ rᵢ ≤ S_X⁻¹(p̄ᵢ)`, and the
/// indemnity values non-decreasing in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid<T> {
    layout: Arc<GridLayout<T>>,
    retention: Vec<T>,
}

impl<T: Scalar> QuantileGrid<T> {
    /// Validates admissibility up to a few ulps.
    pub fn new(layout: Arc<GridLayout<T>>, retention: Vec<T>) -> Result<Self> {
        if retention.len() != layout.cells() {
            return Err(Error::param(
                "quantile grid",
                format!("{} retention values for {} cells", retention.len(), layout.cells()),
            ));
        }
        let grid = QuantileGrid { layout, retention };
        grid.check_admissible()?;
        Ok(grid)
    }

    /// No insurance: `rᵢ = S_X⁻¹(p̄ᵢ)`.
    pub fn full_retention(layout: Arc<GridLayout<T>>) -> Self {
        let retention = layout.loss_values().to_vec();
        QuantileGrid { layout, retention }
    }

    /// Full insurance: `rᵢ = 0`.
    pub fn zero_retention(layout: Arc<GridLayout<T>>) -> Self {
        let retention = vec![T::zero(); layout.cells()];
        QuantileGrid { layout, retention }
    }

    /// The contract's retention quantile sampled at cell midpoints.
    pub fn diml(layout: Arc<GridLayout<T>>, loss: &LossModel<T>, contract: &DimlContract<T>) -> Self {
        let retention = layout
            .mid_probs()
            .iter()
            .zip(layout.loss_values())
            .map(|(&p, &x)| contract.rq(loss, p).max(T::zero()).min(x))
            .collect();
        QuantileGrid { layout, retention }
    }

    pub(crate) fn from_parts_unchecked(layout: Arc<GridLayout<T>>, retention: Vec<T>) -> Self {
        QuantileGrid { layout, retention }
    }

    pub fn layout(&self) -> &Arc<GridLayout<T>> {
        &self.layout
    }

    pub fn retention_values(&self) -> &[T] {
        &self.retention
    }

    /// `S_X⁻¹(p̄ᵢ) − rᵢ`.
    pub fn indemnity_values(&self) -> impl Iterator<Item = T> + '_ {
        self.layout
            .loss_values()
            .iter()
            .zip(&self.retention)
            .map(|(&x, &r)| x - r)
    }

    /// Checks the three admissibility conditions.
    pub fn check_admissible(&self) -> Result<()> {
        let xs = self.layout.loss_values();
        let slack = |x: T| T::c(16.0) * T::epsilon() * (T::one() + x.abs());
        let mut prev_r = T::zero();
        let mut prev_i = T::zero();
        for (i, (&x, &r)) in xs.iter().zip(&self.retention).enumerate() {
            let s = slack(x);
            if !r.is_finite() || r < -s {
                return Err(Error::InadmissibleGrid {
                    index: i,
                    reason: "retention must be finite and nonnegative",
                });
            }
            if r > x + s {
                return Err(Error::InadmissibleGrid {
                    index: i,
                    reason: "retention exceeds the loss quantile",
                });
            }
            if r < prev_r - s {
                return Err(Error::InadmissibleGrid {
                    index: i,
                    reason: "retention quantile increases with p",
                });
            }
            let ind = x - r;
            if ind < prev_i - s {
                return Err(Error::InadmissibleGrid {
                    index: i,
                    reason: "indemnity quantile increases with p",
                });
            }
            prev_r = r;
            prev_i = ind;
        }
        Ok(())
    }

    /// `S_R(c) = inf{p : S_R⁻¹(p) ≤ c}` for the step quantile: the lower boundary of the
    /// last cell whose retention does not exceed `c`; `1` when `c < 0`.
    pub fn retention_survival(&self, c: T) -> T {
        if c < T::zero() {
            return T::one();
        }
        let passing = self.retention.partition_point(|&r| r <= c);
        self.layout.probs()[passing]
    }

    /// Ruin probability when the premium is `premium` and wealth `w`.
    pub fn ruin_probability(&self, w: T, premium: T) -> T {
        self.retention_survival(w - premium)
    }
}

/// The retention `R(x) = S_R⁻¹(S_X(x))` induced by a quantile grid, with step
/// interpolation in probability; the result lies in `[0, x]`.
pub fn retention_from_quantile<T: Scalar>(loss: &LossModel<T>, grid: &QuantileGrid<T>, x: T) -> Result<T> {
    check_loss_level(x)?;
    grid.check_admissible()?;
    let p = loss.sf(x);
    if p >= loss.s0() {
        return Ok(T::zero());
    }
    let cell = grid.layout.cell_of(p);
    Ok(grid.retention[cell].min(x).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;
    use approx::assert_relative_eq;

    fn exp1() -> LossModel<f64> {
        LossModel::exponential(1.0).unwrap()
    }

    #[test]
    fn retention_and_indemnity_branches() {
        let c = DimlContract::new(&exp1(), 1.0, 2.0).unwrap();
        assert_eq!(c.retention(0.5).unwrap(), 0.5);
        assert_eq!(c.retention(1.5).unwrap(), 1.0);
        assert_eq!(c.retention(3.0).unwrap(), 2.0);
        assert_eq!(c.indemnity(0.5).unwrap(), 0.0);
        assert_eq!(c.indemnity(1.5).unwrap(), 0.5);
        assert_eq!(c.indemnity(10.0).unwrap(), 1.0);
        assert!(c.retention(-1.0).is_err());
    }

    #[test]
    fn retention_quantile_examples() {
        let loss = exp1();
        let c = DimlContract::new(&loss, 1.0, 2.0).unwrap();
        assert_relative_eq!(c.retention_quantile(&loss, c.p_d()).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            c.retention_quantile(&loss, (-3.0f64).exp()).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_eq!(c.retention_quantile(&loss, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn retention_quantile_past_atom_is_zero() {
        let loss = LossModel::atom_scaled(0.5, exp1()).unwrap();
        let c = DimlContract::new(&loss, 0.0, 1.0).unwrap();
        assert_eq!(c.p_d(), 0.5);
        assert_eq!(c.retention_quantile(&loss, 0.8).unwrap(), 0.0);
        // Degenerate first branch [p_d, s0] when d = 0.
        assert_eq!(c.retention_quantile(&loss, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn retention_survival_examples() {
        let loss = exp1();
        let c = DimlContract::new(&loss, 1.0, 2.0).unwrap();
        assert_eq!(c.retention_survival(&loss, 0.0).unwrap(), 1.0);
        assert_relative_eq!(c.retention_survival(&loss, 1.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(c.retention_survival(&loss, 0.5).unwrap(), (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn contract_validation() {
        let loss = LossModel::uniform(2.0).unwrap();
        assert!(DimlContract::new(&loss, 1.0, 0.5).is_err());
        assert!(DimlContract::new(&loss, 1.0, 2.5).is_err());
        assert!(DimlContract::new(&loss, -0.1, 1.0).is_err());
        let c = DimlContract::uncapped(&loss, 0.5).unwrap();
        assert_eq!(c.limit(), 2.0);
    }

    fn exp_market() -> Market<f64> {
        Market::new(exp1(), Distortion::Identity, 0.25).unwrap()
    }

    #[test]
    fn ruin_probability_examples() {
        let market = Market::new(exp1(), Distortion::Identity, 0.0).unwrap();
        let none = DimlContract::no_insurance(market.loss(), 0.2).unwrap();
        assert_relative_eq!(
            ruin_probability(&market, &none, 0.2).unwrap(),
            0.818_730_753_077_981_9,
            max_relative = 1e-14
        );

        let m = exp_market();
        let full = DimlContract::uncapped(m.loss(), 0.0).unwrap();
        assert_eq!(ruin_probability(&m, &full, 1.3).unwrap(), 0.0);
        assert_eq!(ruin_probability(&m, &full, 1.0).unwrap(), 1.0);

        // Solver contract of the θ = 0.25, w = 0.8 market.
        let ds = 1.25f64.ln();
        let m_star = -(0.338_514_841_051_367_8f64).ln();
        let c = DimlContract::new(m.loss(), ds, m_star).unwrap();
        assert_relative_eq!(ruin_probability(&m, &c, 0.8).unwrap(), 0.338_514_841_051_367_8, max_relative = 1e-9);
        assert!(ruin_probability(&m, &c, 0.0).is_err());
    }

    #[test]
    fn ruin_when_net_capital_below_deductible() {
        let m = exp_market();
        let c = DimlContract::new(m.loss(), 0.5, 1.0).unwrap();
        let pi = m.premium_diml(0.5, 1.0).unwrap().pi_i;
        let w = 0.3 + pi;
        assert_relative_eq!(ruin_probability(&m, &c, w).unwrap(), (-0.3f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn grid_retention_examples() {
        let loss = exp1();
        let layout = Arc::new(GridLayout::uniform(&loss, 10_000));
        let none = QuantileGrid::full_retention(layout.clone());
        let full = QuantileGrid::zero_retention(layout.clone());
        let c = DimlContract::new(&loss, 1.0, 2.0).unwrap();
        let dg = QuantileGrid::diml(layout.clone(), &loss, &c);
        for &x in &[0.0, 0.3, 1.0, 1.5, 2.5, 6.0] {
            let resolution = loss.qf(loss.sf(x) - 1e-4) - x + 1e-12;
            let r = retention_from_quantile(&loss, &none, x).unwrap();
            assert!((r - x).abs() <= resolution, "x = {x}: {r}");
            assert_eq!(retention_from_quantile(&loss, &full, x).unwrap(), 0.0);
            let r = retention_from_quantile(&loss, &dg, x).unwrap();
            assert!((r - c.retention(x).unwrap()).abs() <= resolution, "x = {x}: {r}");
        }
    }

    #[test]
    fn inadmissible_grids_are_rejected() {
        let loss = exp1();
        let layout = Arc::new(GridLayout::uniform(&loss, 8));
        let xs = layout.loss_values().to_vec();

        let mut over = xs.clone();
        over[3] += 0.1;
        assert!(matches!(
            QuantileGrid::new(layout.clone(), over),
            Err(Error::InadmissibleGrid { index: 3, .. })
        ));

        let mut dip = xs.iter().map(|x| x * 0.5).collect::<Vec<_>>();
        dip[5] = dip[4] - 0.01;
        assert!(QuantileGrid::new(layout.clone(), dip).is_err());

        // Retention flat then jumping to the loss: indemnity decreases.
        let mut jump = vec![xs[0]; 8];
        jump[7] = xs[7];
        for v in jump.iter_mut().take(7).skip(1) {
            *v = xs[0];
        }
        jump[6] = xs[6];
        assert!(QuantileGrid::new(layout.clone(), jump).is_err());

        assert!(QuantileGrid::new(layout, vec![0.0; 7]).is_err());
    }

    #[test]
    fn grid_survival_is_right_continuous_inverse() {
        let loss = LossModel::uniform(1.0).unwrap();
        let layout = Arc::new(GridLayout::uniform(&loss, 4));
        // Midpoints 0.875, 0.625, 0.375, 0.125 -> quantiles 0.125, 0.375, 0.625, 0.875.
        let g = QuantileGrid::full_retention(layout);
        assert_eq!(g.retention_survival(-0.1), 1.0);
        assert_eq!(g.retention_survival(0.0), 1.0);
        assert_eq!(g.retention_survival(0.125), 0.75);
        assert_eq!(g.retention_survival(0.5), 0.5);
        assert_eq!(g.retention_survival(0.9), 0.0);
    }
}

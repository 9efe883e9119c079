//! Distortion premium calculus.
//!
//! For an indemnity `I(X)` the premium is `(1+θ)∫₀^M g(S_I(x)) dx`. Everything the solver
//! needs reduces to the tail premium
//!
//! ```text
//! Ψ(x) = (1+θ) ∫ₓ^M g(S_X(t)) dt,        Φ(x) = x + Ψ(x),
//! ```
//!
//! since a deductible-with-limit contract `(d, m)` costs `Ψ(d) − Ψ(m)`.

use std::sync::Arc;

use crate::contract::{GridLayout, QuantileGrid};
use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::loss::{LossFamily, LossModel, Support};
use crate::numerics::{brent, integrate, integrate_to_infinity, Integral, RootTolerance, Tolerance};
use crate::Scalar;

/// Probability level below which unbounded tails are integrated on a mapped
/// semi-infinite range instead of the main interval.
pub const TAIL_PROBABILITY: f64 = 1e-12;

const QUAD_ABS: f64 = 1e-12;
const QUAD_REL: f64 = 1e-14;
/// A tail integral whose error estimate exceeds this fraction of `1 + |value|`
/// is treated as divergent.
const TAIL_DIVERGENCE: f64 = 1e-6;

/// Loss, distortion and loading: everything needed to price a contract.
#[derive(Debug, Clone, PartialEq)]
pub struct Market<T> {
    loss: LossModel<T>,
    distortion: Distortion<T>,
    theta: T,
    /// `S_X⁻¹(TAIL_PROBABILITY)` for unbounded losses.
    cutoff: Option<T>,
    pi_x: T,
    pi_x_err: T,
}

/// Prices of a deductible-with-limit contract.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PremiumQuote<T> {
    /// Premium of the indemnity.
    pub pi_i: T,
    /// Distorted, loaded value of the retention.
    pub pi_r: T,
    /// Full-coverage premium.
    pub pi_x: T,
    /// Combined quadrature and tail error estimate for the three values.
    pub truncation_error_bound: T,
}

/// Premium of a discretized indemnity quantile together with a bound on the
/// discretization error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPremium<T> {
    pub premium: T,
    pub discretization_bound: T,
}

impl<T: Scalar> Market<T> {
    /// Binds a distortion and loading to a loss. Fails when `π_X` is not finite.
    pub fn new(loss: LossModel<T>, distortion: Distortion<T>, theta: T) -> Result<Self> {
        if !(theta.is_finite() && theta >= T::zero()) {
            return Err(Error::param("loading theta", format!("must be finite and >= 0, got {}", theta)));
        }
        let cutoff = match loss.essential_sup() {
            Support::Unbounded => Some(loss.qf(T::c(TAIL_PROBABILITY))),
            Support::Finite(_) => None,
        };
        let mut market = Market {
            loss,
            distortion,
            theta,
            cutoff,
            pi_x: T::zero(),
            pi_x_err: T::zero(),
        };
        let (pi_x, err) = market.psi_raw(T::zero())?;
        if !pi_x.is_finite() {
            return Err(Error::PremiumNotFinite(format!("full-coverage premium evaluates to {}", pi_x)));
        }
        market.pi_x = pi_x;
        market.pi_x_err = err;
        Ok(market)
    }

    pub fn loss(&self) -> &LossModel<T> {
        &self.loss
    }

    pub fn distortion(&self) -> &Distortion<T> {
        &self.distortion
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// `1 + θ`.
    pub fn loading(&self) -> T {
        T::one() + self.theta
    }

    /// Full-coverage premium `π_X = Ψ(0)`.
    pub fn pi_x(&self) -> T {
        self.pi_x
    }

    /// Upper end of the main integration range: `M`, or the `1e-12` quantile.
    pub fn upper_cutoff(&self) -> T {
        self.cutoff
            .unwrap_or_else(|| self.loss.essential_sup().as_float())
    }

    fn check_level(&self, what: &'static str, x: T) -> Result<()> {
        let sup = self.loss.essential_sup().as_float();
        if x.is_nan() || x < T::zero() || x > sup {
            return Err(Error::domain(what, x, "[0, M]"));
        }
        Ok(())
    }

    /// `Ψ(x) = (1+θ)∫ₓ^M g(S_X(t)) dt` for `0 ≤ x ≤ M`.
    pub fn psi(&self, x: T) -> Result<T> {
        self.psi_with_error(x).map(|(v, _)| v)
    }

    /// `Ψ(x)` together with its absolute error estimate.
    pub fn psi_with_error(&self, x: T) -> Result<(T, T)> {
        self.check_level("level x", x)?;
        if x == T::zero() && self.pi_x > T::zero() {
            return Ok((self.pi_x, self.pi_x_err));
        }
        self.psi_raw(x)
    }

    /// `Φ(x) = x + Ψ(x)`.
    pub fn phi(&self, x: T) -> Result<T> {
        Ok(x + self.psi(x)?)
    }

    /// `Ψ′(x) = −(1+θ) g(S_X(x))`.
    pub fn psi_derivative(&self, x: T) -> Result<T> {
        self.check_level("level x", x)?;
        Ok(-self.loading() * self.distortion.g(self.loss.sf(x)))
    }

    /// Inverse of the strictly decreasing `Ψ` on `[0, Ψ(0)]`.
    ///
    /// `Ψ⁻¹(0)` is the essential supremum, so it fails with [`Error::Unbounded`]
    /// for unbounded losses.
    pub fn psi_inverse(&self, y: T) -> Result<T> {
        let top = self.pi_x;
        let slack = T::tol(1e-12) * (T::one() + top);
        if y.is_nan() || y < -slack || y > top + slack {
            return Err(Error::domain("tail premium y", y, "[0, Ψ(0)]"));
        }
        if y >= top {
            return Ok(T::zero());
        }
        if y <= T::zero() {
            return self.loss.essential_sup().finite().ok_or(Error::Unbounded);
        }

        let mut hi = self.upper_cutoff();
        if self.loss.essential_sup().is_unbounded() {
            let mut doublings = 0;
            while self.psi_raw(hi)?.0 > y {
                hi = hi * T::two();
                doublings += 1;
                if doublings > 200 {
                    return Err(Error::Numerical(format!("cannot bracket Ψ⁻¹({})", y)));
                }
            }
        }

        let f_tol = T::tol(1e-12) * (T::one() + y);
        let root = brent(
            |x| match self.psi_raw(x) {
                Ok((v, _)) => v - y,
                Err(_) => T::nan(),
            },
            T::zero(),
            hi,
            RootTolerance {
                x_tol: T::zero(),
                f_tol,
                max_iter: 300,
            },
        )?;
        let residual = (self.psi_raw(root)?.0 - y).abs();
        if residual > T::tol(1e-10) * (T::one() + y) {
            return Err(Error::Numerical(format!(
                "Ψ⁻¹({}) residual {} exceeds tolerance",
                y, residual
            )));
        }
        Ok(root)
    }

    /// Premium of the deductible-with-limit indemnity: `π_I = Ψ(d) − Ψ(m)`.
    /// `m` may be `+∞` when the loss is unbounded (no cap).
    pub fn premium_diml(&self, d: T, m: T) -> Result<PremiumQuote<T>> {
        self.check_level("deductible d", d)?;
        self.check_level("limit m", m)?;
        if d > m {
            return Err(Error::domain("deductible d (must not exceed limit m)", d, "[0, m]"));
        }
        let (psi_d, err_d) = self.psi_with_error(d)?;
        let (psi_m, err_m) = if m.is_infinite() {
            (T::zero(), T::zero())
        } else {
            self.psi_with_error(m)?
        };
        let pi_i = if d == m { T::zero() } else { (psi_d - psi_m).max(T::zero()) };
        Ok(PremiumQuote {
            pi_i,
            pi_r: self.pi_x - pi_i,
            pi_x: self.pi_x,
            truncation_error_bound: err_d + err_m + self.pi_x_err,
        })
    }

    /// Premium of the indemnity quantile carried by `grid`, via the midpoint
    /// Stieltjes sum `(1+θ) Σ S_I⁻¹(p̄ᵢ)·(g(pᵢ) − g(pᵢ₊₁))`.
    pub fn premium_from_indemnity_quantile(&self, grid: &QuantileGrid<T>) -> Result<GridPremium<T>> {
        GridPricer::new(self, grid.layout().clone())?.price(grid)
    }

    /// Tail integral with closed forms where available; otherwise adaptive quadrature.
    fn psi_raw(&self, x: T) -> Result<(T, T)> {
        let sup = self.loss.essential_sup().as_float();
        if x >= sup {
            return Ok((T::zero(), T::zero()));
        }
        if let Some(v) = self.closed_form_tail(x)? {
            return Ok((self.loading() * v, T::zero()));
        }
        let integral = self.numeric_tail(x)?;
        let k = self.loading();
        Ok((k * integral.value, k * integral.abs_error))
    }

    /// `∫ₓ^M g(S_X(t)) dt` in closed form for power distortions of the
    /// exponential, uniform and Lomax families.
    fn closed_form_tail(&self, x: T) -> Result<Option<T>> {
        let c = match self.distortion {
            Distortion::Identity => T::one(),
            Distortion::ProportionalHazard { c } => c,
            _ => return Ok(None),
        };
        let v = match self.loss.family() {
            LossFamily::Exponential { rate } => {
                let r = *rate * c;
                (-r * x).exp() / r
            }
            LossFamily::Uniform { upper } => {
                let b = *upper;
                b * (T::one() - x / b).powf(c + T::one()) / (c + T::one())
            }
            LossFamily::Pareto { shape, scale } => {
                let a = *shape * c;
                if a <= T::one() {
                    return Err(Error::PremiumNotFinite(format!(
                        "distorted Pareto tail index {} does not exceed 1",
                        a
                    )));
                }
                *scale / (a - T::one()) * (-(a - T::one()) * (x / *scale).ln_1p()).exp()
            }
            _ => return Ok(None),
        };
        Ok(Some(v))
    }

    fn numeric_tail(&self, x: T) -> Result<Integral<T>> {
        let tol = Tolerance::new(QUAD_ABS, QUAD_REL);
        let f = |t: T| self.distortion.g(self.loss.sf(t));
        let body_end = self.upper_cutoff();

        let mut total = Integral::zero();
        if x < body_end {
            let mut cuts = vec![x];
            cuts.extend(self.loss.breakpoints().into_iter().filter(|&b| b > x && b < body_end));
            cuts.push(body_end);
            for w in cuts.windows(2) {
                total = total.join(integrate(f, w[0], w[1], tol));
            }
        }
        if self.cutoff.is_some() {
            let tail = integrate_to_infinity(f, x.max(body_end), tol);
            let limit = T::c(TAIL_DIVERGENCE) * (T::one() + tail.value.abs());
            if !tail.value.is_finite() || !tail.abs_error.is_finite() || tail.abs_error > limit {
                return Err(Error::PremiumNotFinite(format!(
                    "tail integral beyond {} failed to converge (estimate {}, error {})",
                    x.max(body_end),
                    tail.value,
                    tail.abs_error
                )));
            }
            total = total.join(tail);
        }
        if !total.value.is_finite() {
            return Err(Error::PremiumNotFinite(format!("tail premium at {} is {}", x, total.value)));
        }
        Ok(total)
    }
}

/// Precomputed distortion increments and discretization bound for one grid layout.
///
/// For any admissible indemnity quantile, increments of `S_I⁻¹` are dominated by those
/// of `S_X⁻¹`, so on each cell `|S_I⁻¹(p) − S_I⁻¹(p̄)| ≤ |S_X⁻¹(p) − S_X⁻¹(p̄)|`. Summing the
/// right side against `dg` bounds the midpoint error for every contract on the layout;
/// the cell touching `p = 0` uses the exact tail premium above its midpoint quantile.
#[derive(Debug, Clone)]
pub struct GridPricer<T> {
    layout: Arc<GridLayout<T>>,
    dg: Vec<T>,
    loading: T,
    bound: T,
}

impl<T: Scalar> GridPricer<T> {
    pub fn new(market: &Market<T>, layout: Arc<GridLayout<T>>) -> Result<Self> {
        let g = |p: T| market.distortion.g(p);
        let probs = layout.probs();
        let mids = layout.mid_probs();
        let xs = layout.loss_values();
        let n = xs.len();
        let dg: Vec<T> = probs.windows(2).map(|w| g(w[0]) - g(w[1])).collect();

        let mut bound = T::zero();
        for i in 0..n {
            let (p_hi, p_lo, p_mid) = (probs[i], probs[i + 1], mids[i]);
            let x_mid = xs[i];
            let x_at_hi = market.loss.qf(p_hi);
            let upper_half = (x_mid - x_at_hi) * (g(p_hi) - g(p_mid));
            let lower_half = if i + 1 < n {
                (market.loss.qf(p_lo) - x_mid) * (g(p_mid) - g(p_lo))
            } else {
                // ∫₀^{p̄} (S_X⁻¹(p) − S_X⁻¹(p̄)) dg(p) = Ψ(S_X⁻¹(p̄)) / (1+θ)
                market.psi_raw(x_mid)?.0 / market.loading()
            };
            bound = bound + upper_half + lower_half;
        }
        Ok(GridPricer {
            layout,
            dg,
            loading: market.loading(),
            bound: market.loading() * bound,
        })
    }

    pub fn layout(&self) -> &Arc<GridLayout<T>> {
        &self.layout
    }

    pub fn discretization_bound(&self) -> T {
        self.bound
    }

    /// Premium of the indemnity quantile carried by `grid`.
    pub fn price(&self, grid: &QuantileGrid<T>) -> Result<GridPremium<T>> {
        if !Arc::ptr_eq(grid.layout(), &self.layout) && **grid.layout() != *self.layout {
            return Err(Error::param("quantile grid", "layout differs from the pricer's layout"));
        }
        Ok(GridPremium {
            premium: self.price_values(grid.indemnity_values()),
            discretization_bound: self.bound,
        })
    }

    /// Stieltjes sum over raw indemnity quantile values (one per cell).
    pub fn price_values(&self, indemnity: impl IntoIterator<Item = T>) -> T {
        let sum = indemnity
            .into_iter()
            .zip(&self.dg)
            .fold(T::zero(), |acc, (v, &dg)| acc + v * dg);
        self.loading * sum
    }
}

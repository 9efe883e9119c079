//! Ruin-minimizing deductible-with-limit contract.
//!
//! With `θ_s = 1/g(s0) − 1`, `d_s = S_X⁻¹(g⁻¹(1/(1+θ)))` (zero when `θ ≤ θ_s`) and the safe
//! level `w_s = Φ(d_s)`, the optimum at wealth `w < w_s` is:
//!
//! * `θ ≤ θ_s`: `d* = 0`, `m* = Ψ⁻¹(Ψ(0) − w)`;
//! * `θ > θ_s`, `w ≤ d_s`: no insurance;
//! * `θ > θ_s`, `w > d_s`: `d* = d_s`, `m* = Ψ⁻¹(Φ(d_s) − w)`.
//!
//! Whenever insurance is bought the budget binds: `d* + π_I = w`, and the ruin
//! probability is `S_X(m*)`.

use serde::{Serialize, Serializer};

use crate::contract::DimlContract;
use crate::error::{Error, Result};
use crate::premium::Market;
use crate::Scalar;

/// Absolute tolerance on `θ − θ_s` and relative tolerance on wealth comparisons.
pub const THRESHOLD_TOLERANCE: f64 = 1e-12;
/// Relative tolerance of the binding budget `d* + π_I = w`.
pub const BINDING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `θ ≤ θ_s`: full coverage from zero up to the limit.
    ZeroDeductible,
    /// `θ > θ_s`, `w ≤ d_s`: buying any cover raises the ruin probability.
    NoInsurance,
    /// `θ > θ_s`, `d_s < w < w_s`.
    PositiveDeductible,
    /// `w ≥ w_s`: the uncapped contract with deductible `d_s` avoids ruin.
    SafeLevel,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::ZeroDeductible => "zero_deductible",
            Case::NoInsurance => "no_insurance",
            Case::PositiveDeductible => "positive_deductible",
            Case::SafeLevel => "safe_level",
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `θ_s`, `d_s` and `w_s` of a market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub theta_s: T,
    pub d_s: T,
    pub w_s: T,
}

/// Optimal contract at one wealth level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct Solution<T> {
    pub case: Case,
    #[serde(rename = "d")]
    pub d_star: T,
    /// `+∞` only for the uncapped safe-level contract on an unbounded loss.
    #[serde(rename = "m", serialize_with = "serialize_limit")]
    pub m_star: T,
    pub premium: T,
    pub ruin_prob: T,
    #[serde(flatten)]
    pub thresholds: Thresholds<T>,
}

impl<T: Scalar> Solution<T> {
    pub fn contract(&self, market: &Market<T>) -> Result<DimlContract<T>> {
        DimlContract::new(market.loss(), self.d_star, self.m_star)
    }

    /// Whether cover is bought (cases other than no insurance).
    pub fn insures(&self) -> bool {
        self.case != Case::NoInsurance
    }
}

/// Writes an infinite limit as `"max"`.
pub fn serialize_limit<T: Scalar + Serialize, S: Serializer>(m: &T, s: S) -> Result<S::Ok, S::Error> {
    if m.is_infinite() {
        s.serialize_str("max")
    } else {
        m.serialize(s)
    }
}

/// `θ_s = 1/g(s0) − 1`.
pub fn theta_s<T: Scalar>(market: &Market<T>) -> T {
    (T::one() / market.distortion().g(market.loss().s0()) - T::one()).max(T::zero())
}

fn below_theta_s<T: Scalar>(market: &Market<T>, theta_s: T) -> bool {
    market.theta() <= theta_s + T::tol(THRESHOLD_TOLERANCE)
}

/// `d_s`: zero when `θ ≤ θ_s`, else `S_X⁻¹(g⁻¹(1/(1+θ)))`. Minimizes `Φ` on `[0, M]`.
pub fn d_s<T: Scalar>(market: &Market<T>) -> T {
    if below_theta_s(market, theta_s(market)) {
        return T::zero();
    }
    let p = market.distortion().g_inv(market.loading().recip());
    market.loss().qf(p)
}

/// Safe level `w_s = Φ(d_s)`.
pub fn w_s<T: Scalar>(market: &Market<T>) -> Result<T> {
    market.phi(d_s(market))
}

pub fn thresholds<T: Scalar>(market: &Market<T>) -> Result<Thresholds<T>> {
    let d_s = d_s(market);
    Ok(Thresholds {
        theta_s: theta_s(market),
        d_s,
        w_s: market.phi(d_s)?,
    })
}

/// Optimal contract at wealth `w > 0`.
pub fn solve<T: Scalar>(market: &Market<T>, w: T) -> Result<Solution<T>> {
    solve_with(market, &thresholds(market)?, w)
}

/// [`solve`] with precomputed thresholds, for sweeps over wealth.
pub fn solve_with<T: Scalar>(market: &Market<T>, th: &Thresholds<T>, w: T) -> Result<Solution<T>> {
    if !(w > T::zero()) || !w.is_finite() {
        return Err(Error::domain("wealth w", w, "(0, ∞)"));
    }
    let rel = T::tol(THRESHOLD_TOLERANCE);
    let loss = market.loss();

    if w >= th.w_s * (T::one() - rel) {
        return Ok(Solution {
            case: Case::SafeLevel,
            d_star: th.d_s,
            m_star: loss.essential_sup().as_float(),
            premium: market.psi(th.d_s)?,
            ruin_prob: T::zero(),
            thresholds: *th,
        });
    }

    let (case, d, budget) = if below_theta_s(market, th.theta_s) {
        (Case::ZeroDeductible, T::zero(), market.pi_x() - w)
    } else if w <= th.d_s * (T::one() + rel) {
        return Ok(Solution {
            case: Case::NoInsurance,
            d_star: w,
            m_star: w,
            premium: T::zero(),
            ruin_prob: loss.sf(w),
            thresholds: *th,
        });
    } else {
        (Case::PositiveDeductible, th.d_s, th.w_s - w)
    };

    // Ψ(m*) = Φ(d*) − w, which is positive because w < w_s.
    let m = market.psi_inverse(budget.max(T::zero()))?.max(d);
    let premium = market.premium_diml(d, m)?.pi_i;
    let slack = (d + premium - w).abs();
    if slack > T::tol(BINDING_TOLERANCE) * (T::one() + w) {
        return Err(Error::Numerical(format!(
            "budget does not bind: d* + π_I − w = {}",
            d + premium - w
        )));
    }
    Ok(Solution {
        case,
        d_star: d,
        m_star: m,
        premium,
        ruin_prob: loss.sf(m),
        thresholds: *th,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;
    use crate::loss::LossModel;
    use approx::assert_relative_eq;

    fn exp_market(theta: f64) -> Market<f64> {
        Market::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, theta).unwrap()
    }

    fn atom_market(g: Distortion<f64>, theta: f64) -> Market<f64> {
        let loss = LossModel::atom_scaled(0.5, LossModel::exponential(1.0).unwrap()).unwrap();
        Market::new(loss, g, theta).unwrap()
    }

    #[test]
    fn theta_s_examples() {
        assert_eq!(theta_s(&exp_market(0.3)), 0.0);
        assert_relative_eq!(theta_s(&atom_market(Distortion::Identity, 0.0)), 1.0, max_relative = 1e-15);
        let ph = Distortion::proportional_hazard(0.5).unwrap();
        assert_relative_eq!(theta_s(&atom_market(ph, 0.0)), 0.414_213_562_373_095_1, max_relative = 1e-14);
    }

    #[test]
    fn d_s_examples() {
        assert_eq!(d_s(&exp_market(0.0)), 0.0);
        assert_relative_eq!(d_s(&exp_market(0.25)), 1.25f64.ln(), max_relative = 1e-14);
        let ph = Market::new(
            LossModel::exponential(1.0).unwrap(),
            Distortion::proportional_hazard(0.5).unwrap(),
            0.25,
        )
        .unwrap();
        assert_relative_eq!(d_s(&ph), 2.0 * 1.25f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn w_s_examples() {
        assert_relative_eq!(w_s(&exp_market(0.0)).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(w_s(&exp_market(0.25)).unwrap(), 1.0 + 1.25f64.ln(), max_relative = 1e-14);
        let u = Market::new(LossModel::uniform(1.0).unwrap(), Distortion::Identity, 0.0).unwrap();
        assert_relative_eq!(w_s(&u).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn zero_deductible_case() {
        let s = solve(&exp_market(0.0), 0.5).unwrap();
        assert_eq!(s.case, Case::ZeroDeductible);
        assert_eq!(s.d_star, 0.0);
        assert_relative_eq!(s.m_star, 2f64.ln(), max_relative = 1e-9);
        assert_relative_eq!(s.ruin_prob, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn no_insurance_case() {
        let s = solve(&exp_market(0.25), 0.2).unwrap();
        assert_eq!(s.case, Case::NoInsurance);
        assert_eq!((s.d_star, s.m_star, s.premium), (0.2, 0.2, 0.0));
        assert_relative_eq!(s.ruin_prob, (-0.2f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn positive_deductible_case() {
        let s = solve(&exp_market(0.25), 0.8).unwrap();
        assert_eq!(s.case, Case::PositiveDeductible);
        assert_relative_eq!(s.d_star, 1.25f64.ln(), max_relative = 1e-12);
        // 0.8 − ln 1.25 = 1.25(0.8 − e^{−m})
        let e_m = 0.8 - (0.8 - 1.25f64.ln()) / 1.25;
        assert_relative_eq!(s.m_star, -e_m.ln(), max_relative = 1e-8);
        assert_relative_eq!(s.ruin_prob, e_m, max_relative = 1e-8);
        assert!((s.d_star + s.premium - 0.8).abs() <= 1e-9 * 1.8);
    }

    #[test]
    fn atom_case() {
        let s = solve(&atom_market(Distortion::Identity, 0.5), 0.3).unwrap();
        assert_eq!(s.case, Case::ZeroDeductible);
        assert_relative_eq!(s.m_star, -(0.6f64.ln()), max_relative = 1e-8);
        assert_relative_eq!(s.ruin_prob, 0.3, max_relative = 1e-8);
    }

    #[test]
    fn safe_level_case() {
        let s = solve(&exp_market(0.25), 1.3).unwrap();
        assert_eq!(s.case, Case::SafeLevel);
        assert_eq!(s.ruin_prob, 0.0);
        assert!(s.m_star.is_infinite());
        let json = serde_json::to_value(s).unwrap();
        assert_eq!(json["m"], "max");
        assert_eq!(json["case"], "safe_level");
    }

    #[test]
    fn ties_follow_the_weak_inequalities() {
        let m = exp_market(0.25);
        let th = thresholds(&m).unwrap();
        assert_eq!(solve_with(&m, &th, th.d_s).unwrap().case, Case::NoInsurance);
        let a = atom_market(Distortion::Identity, 1.0);
        assert_eq!(solve(&a, 0.3).unwrap().case, Case::ZeroDeductible);
    }

    #[test]
    fn nonpositive_wealth_is_rejected() {
        assert!(solve(&exp_market(0.0), 0.0).is_err());
        assert!(solve(&exp_market(0.0), -1.0).is_err());
    }

    #[test]
    fn deductible_is_independent_of_wealth() {
        let m = exp_market(0.25);
        let th = thresholds(&m).unwrap();
        let ds: Vec<f64> = (1..=10)
            .map(|k| th.d_s + (th.w_s - th.d_s) * k as f64 / 11.0)
            .map(|w| solve_with(&m, &th, w).unwrap().d_star)
            .collect();
        assert!(ds.iter().all(|&d| d == ds[0]));
    }

    #[test]
    fn solution_json_keys() {
        let s = solve(&exp_market(0.25), 0.8).unwrap();
        let v = serde_json::to_value(s).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["case", "d", "d_s", "m", "premium", "ruin_prob", "theta_s", "w_s"]);
    }

    #[test]
    fn single_precision_solve() {
        let m = Market::<f32>::new(LossModel::exponential(1.0).unwrap(), Distortion::Identity, 0.0).unwrap();
        let s = solve(&m, 0.5).unwrap();
        assert!((s.m_star - 2f32.ln()).abs() < 1e-5);
    }
}

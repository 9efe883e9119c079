//! Strictly increasing distortion functions `g: [0, 1] → [0, 1]` with `g(0) = 0`,
//! `g(1) = 1`, each with a closed-form inverse. Concavity is not required.

use crate::error::{Error, Result};
use crate::numerics::normal;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distortion<T> {
    Identity,
    /// `g(p) = p^c`, `c ∈ (0, 1]`.
    ProportionalHazard { c: T },
    /// `g(p) = 1 − (1 − p)^k`, `k ≥ 1`.
    DualPower { k: T },
    /// `g(p) = Φ(Φ⁻¹(p) + λ)`.
    Wang { lambda: T },
}

impl<T: Scalar> Distortion<T> {
    pub fn proportional_hazard(c: T) -> Result<Self> {
        if c > T::zero() && c <= T::one() {
            Ok(Distortion::ProportionalHazard { c })
        } else {
            Err(Error::param("proportional hazard c", format!("must lie in (0, 1], got {}", c)))
        }
    }

    pub fn dual_power(k: T) -> Result<Self> {
        if k.is_finite() && k >= T::one() {
            Ok(Distortion::DualPower { k })
        } else {
            Err(Error::param("dual power k", format!("must be finite and >= 1, got {}", k)))
        }
    }

    pub fn wang(lambda: T) -> Result<Self> {
        if lambda.is_finite() {
            Ok(Distortion::Wang { lambda })
        } else {
            Err(Error::param("wang lambda", format!("must be finite, got {}", lambda)))
        }
    }

    /// `g(p)` for `p ∈ [0, 1]`.
    pub fn apply(&self, p: T) -> Result<T> {
        check_unit("probability p", p)?;
        Ok(self.g(p))
    }

    /// `g⁻¹(y)` for `y ∈ [0, 1]`.
    pub fn inverse(&self, y: T) -> Result<T> {
        check_unit("distorted probability y", y)?;
        Ok(self.g_inv(y))
    }

    pub(crate) fn g(&self, p: T) -> T {
        if p <= T::zero() {
            return T::zero();
        }
        if p >= T::one() {
            return T::one();
        }
        match *self {
            Distortion::Identity => p,
            Distortion::ProportionalHazard { c } => p.powf(c),
            Distortion::DualPower { k } => -(k * (-p).ln_1p()).exp_m1(),
            // Φ(Φ⁻¹(p) + λ) written on the upper tail: sf(isf(p) − λ).
            Distortion::Wang { lambda } => {
                T::c(normal::sf(normal::isf(p.f64()) - lambda.f64()))
            }
        }
    }

    pub(crate) fn g_inv(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        if y >= T::one() {
            return T::one();
        }
        match *self {
            Distortion::Identity => y,
            Distortion::ProportionalHazard { c } => y.powf(c.recip()),
            Distortion::DualPower { k } => -((-y).ln_1p() / k).exp_m1(),
            Distortion::Wang { lambda } => {
                T::c(normal::sf(normal::isf(y.f64()) + lambda.f64()))
            }
        }
    }
}

fn check_unit<T: Scalar>(what: &'static str, p: T) -> Result<()> {
    if p.is_nan() || p < T::zero() || p > T::one() {
        Err(Error::domain(what, p, "[0, 1]"))
    } else {
        Ok(())
    }
}

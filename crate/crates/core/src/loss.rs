//! Loss random variables described by their survival and quantile functions.
//!
//! Every family satisfies `S(x) = P(X > x)` strictly decreasing and continuous on
//! `[0, M)` with `S(M) = 0`, where `M` is the essential supremum. The quantile is the
//! right-continuous inverse `S⁻¹(p) = inf{x ≥ 0 : S(x) ≤ p}`; it is pinned at zero for
//! `p ≥ S(0)`, which is below one when the loss has an atom at zero.

use crate::error::{Error, Result};
use crate::numerics::{normal, MonotoneCubic};
use crate::Scalar;

/// Essential supremum of a loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> Support<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Support::Finite(m) => Some(m),
            Support::Unbounded => None,
        }
    }

    /// The supremum as a float, `+∞` when unbounded. For internal arithmetic only.
    pub(crate) fn as_float(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Support::Unbounded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossFamily<T> {
    /// `S(x) = e^{-λx}`.
    Exponential { rate: T },
    /// Lomax form: `S(x) = (1 + x/x_m)^{-α}`, `α > 1`.
    Pareto { shape: T, scale: T },
    /// Uniform on `[0, b]`.
    Uniform { upper: T },
    /// `ln X ~ N(μ, σ²)`.
    LogNormal { mu: T, sigma: T },
    /// `X = B·Y` with `P(B = 1) = q` independent of `Y`.
    AtomScaled { q: T, inner: Box<LossModel<T>> },
    /// Monotone cubic interpolation of a quantile table.
    Empirical(EmpiricalQuantile<T>),
}

/// Interpolated quantile table. Knots are probabilities in `[0, s0]` (ascending),
/// values the corresponding quantiles (descending from `M` to `0`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalQuantile<T> {
    curve: MonotoneCubic<T>,
}

impl<T: Scalar> EmpiricalQuantile<T> {
    /// Interpolation nodes as `(probability, quantile)` pairs, probability descending.
    pub fn nodes(&self) -> Vec<(T, T)> {
        self.curve
            .knots()
            .iter()
            .zip(self.curve.values())
            .rev()
            .map(|(&p, &x)| (p, x))
            .collect()
    }
}

/// A nonnegative loss `X`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LossModel<T> {
    family: LossFamily<T>,
    sup: Support<T>,
    s0: T,
}

fn positive<T: Scalar>(what: &'static str, v: T) -> Result<T> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(Error::param(what, format!("must be finite and > 0, got {}", v)))
    }
}

impl<T: Scalar> LossModel<T> {
    pub fn exponential(rate: T) -> Result<Self> {
        let rate = positive("exponential rate", rate)?;
        Ok(LossModel {
            family: LossFamily::Exponential { rate },
            sup: Support::Unbounded,
            s0: T::one(),
        })
    }

    pub fn pareto(shape: T, scale: T) -> Result<Self> {
        let shape = positive("pareto shape", shape)?;
        if shape <= T::one() {
            return Err(Error::param(
                "pareto shape",
                format!("must exceed 1 for a finite mean, got {}", shape),
            ));
        }
        let scale = positive("pareto scale", scale)?;
        Ok(LossModel {
            family: LossFamily::Pareto { shape, scale },
            sup: Support::Unbounded,
            s0: T::one(),
        })
    }

    pub fn uniform(upper: T) -> Result<Self> {
        let upper = positive("uniform upper bound", upper)?;
        Ok(LossModel {
            family: LossFamily::Uniform { upper },
            sup: Support::Finite(upper),
            s0: T::one(),
        })
    }

    pub fn lognormal(mu: T, sigma: T) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::param("lognormal mu", format!("must be finite, got {}", mu)));
        }
        let sigma = positive("lognormal sigma", sigma)?;
        Ok(LossModel {
            family: LossFamily::LogNormal { mu, sigma },
            sup: Support::Unbounded,
            s0: T::one(),
        })
    }

    pub fn atom_scaled(q: T, inner: LossModel<T>) -> Result<Self> {
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::param("atom_scaled q", format!("must lie in (0, 1], got {}", q)));
        }
        Ok(LossModel {
            sup: inner.sup,
            s0: q * inner.s0,
            family: LossFamily::AtomScaled {
                q,
                inner: Box::new(inner),
            },
        })
    }

    /// Builds an interpolated loss from `(probability, quantile)` pairs with probabilities
    /// strictly decreasing in `(0, 1]` and quantiles strictly increasing, at least four points.
    ///
    /// A leading quantile of exactly zero marks an atom at zero of mass `1 − p₀`;
    /// otherwise the node `(1, 0)` is prepended. The last secant is extended down to
    /// `p = 0`, which fixes a finite essential supremum.
    pub fn empirical(points: &[(T, T)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidTable {
                reason: format!("at least 4 points required, got {}", points.len()),
                indices: (0..points.len()).collect(),
            });
        }
        let bad: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, &(p, x))| {
                !(p > T::zero() && p <= T::one() && x >= T::zero() && x.is_finite())
            })
            .map(|(i, _)| i)
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidTable {
                reason: "probabilities must lie in (0, 1] and values be finite and >= 0".into(),
                indices: bad,
            });
        }
        let bad: Vec<usize> = (1..points.len())
            .filter(|&i| points[i].0 >= points[i - 1].0)
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidTable {
                reason: "probabilities must be strictly decreasing".into(),
                indices: bad,
            });
        }
        let bad: Vec<usize> = (1..points.len())
            .filter(|&i| points[i].1 <= points[i - 1].1)
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidTable {
                reason: "values must be strictly increasing".into(),
                indices: bad,
            });
        }

        let (p0, x0) = points[0];
        let mut nodes: Vec<(T, T)> = Vec::with_capacity(points.len() + 2);
        if x0 > T::zero() {
            if p0 == T::one() {
                return Err(Error::InvalidTable {
                    reason: "probability 1 must map to value 0".into(),
                    indices: vec![0],
                });
            }
            nodes.push((T::one(), T::zero()));
        }
        nodes.extend_from_slice(points);
        let n = nodes.len();
        let (p_prev, x_prev) = nodes[n - 2];
        let (p_last, x_last) = nodes[n - 1];
        let slope = (x_last - x_prev) / (p_prev - p_last);
        let sup = x_last + p_last * slope;
        nodes.push((T::zero(), sup));

        let s0 = nodes[0].0;
        let (knots, values): (Vec<T>, Vec<T>) = nodes.into_iter().rev().unzip();
        Ok(LossModel {
            family: LossFamily::Empirical(EmpiricalQuantile {
                curve: MonotoneCubic::new(knots, values),
            }),
            sup: Support::Finite(sup),
            s0,
        })
    }

    pub fn family(&self) -> &LossFamily<T> {
        &self.family
    }

    /// Essential supremum `M = inf{x ≥ 0 : S(x) = 0}`.
    pub fn essential_sup(&self) -> Support<T> {
        self.sup
    }

    /// `S(0⁺)`, the probability of a strictly positive loss.
    pub fn s0(&self) -> T {
        self.s0
    }

    /// `P(X > x)` for `x ≥ 0`.
    pub fn survival(&self, x: T) -> Result<T> {
        if x.is_nan() || x < T::zero() {
            return Err(Error::domain("loss level x", x, "[0, ∞)"));
        }
        Ok(self.sf(x))
    }

    /// Right-continuous quantile `S⁻¹(p)` for `p ∈ [0, 1]`.
    ///
    /// At `p = 0` this is the essential supremum; when that is infinite the call
    /// returns [`Error::Unbounded`] rather than a number.
    pub fn quantile(&self, p: T) -> Result<T> {
        if p.is_nan() || p < T::zero() || p > T::one() {
            return Err(Error::domain("probability p", p, "[0, 1]"));
        }
        if p == T::zero() {
            return self.sup.finite().ok_or(Error::Unbounded);
        }
        Ok(self.qf(p))
    }

    /// Unchecked survival; `x` is assumed nonnegative.
    pub(crate) fn sf(&self, x: T) -> T {
        if x >= self.sup.as_float() {
            return T::zero();
        }
        match &self.family {
            LossFamily::Exponential { rate } => (-*rate * x).exp(),
            LossFamily::Pareto { shape, scale } => (-*shape * (x / *scale).ln_1p()).exp(),
            LossFamily::Uniform { upper } => (T::one() - x / *upper).max(T::zero()),
            LossFamily::LogNormal { mu, sigma } => {
                if x <= T::zero() {
                    T::one()
                } else {
                    T::c(normal::sf((x.f64().ln() - mu.f64()) / sigma.f64()))
                }
            }
            LossFamily::AtomScaled { q, inner } => *q * inner.sf(x),
            LossFamily::Empirical(e) => {
                if x <= T::zero() {
                    self.s0
                } else {
                    e.curve.inverse(x)
                }
            }
        }
    }

    /// Unchecked quantile; returns `+∞` at `p = 0` for unbounded losses.
    pub(crate) fn qf(&self, p: T) -> T {
        if p >= self.s0 {
            return T::zero();
        }
        if p <= T::zero() {
            return self.sup.as_float();
        }
        match &self.family {
            LossFamily::Exponential { rate } => -p.ln() / *rate,
            LossFamily::Pareto { shape, scale } => *scale * (-p.ln() / *shape).exp_m1(),
            LossFamily::Uniform { upper } => *upper * (T::one() - p),
            LossFamily::LogNormal { mu, sigma } => {
                T::c((mu.f64() + sigma.f64() * normal::isf(p.f64())).exp())
            }
            LossFamily::AtomScaled { q, inner } => inner.qf(p / *q),
            LossFamily::Empirical(e) => e.curve.eval(p),
        }
    }

    /// Points in `(0, M)` where the survival function is only once differentiable.
    pub(crate) fn breakpoints(&self) -> Vec<T> {
        match &self.family {
            LossFamily::Empirical(e) => {
                let mut xs: Vec<T> = e
                    .curve
                    .values()
                    .iter()
                    .copied()
                    .filter(|&x| x > T::zero() && x < self.sup.as_float())
                    .collect();
                xs.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
                xs
            }
            LossFamily::AtomScaled { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }
}

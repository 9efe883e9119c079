//! JSON descriptions of markets and contracts.
//!
//! ```json
//! {"loss": {"family": "exponential", "rate": 1.0},
//!  "distortion": {"family": "identity"},
//!  "theta": 0.25,
//!  "wealth": 0.8}
//! ```

use serde::{Deserialize, Serialize};

use crate::contract::DimlContract;
use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::premium::Market;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    Exponential { rate: f64 },
    /// Lomax form: `S(x) = (1 + x/scale)^(−shape)`.
    Pareto { shape: f64, scale: f64 },
    Uniform { upper: f64 },
    Lognormal { mu: f64, sigma: f64 },
    /// `inner` with probability `q`, zero otherwise.
    AtomScaled { q: f64, inner: Box<LossSpec> },
    /// Quantile table of `[p, x]` pairs, `p` decreasing and `x` increasing.
    Empirical { points: Vec<[f64; 2]> },
}

impl LossSpec {
    pub fn build<T: Scalar>(&self) -> Result<LossModel<T>> {
        match self {
            LossSpec::Exponential { rate } => LossModel::exponential(T::c(*rate)),
            LossSpec::Pareto { shape, scale } => LossModel::pareto(T::c(*shape), T::c(*scale)),
            LossSpec::Uniform { upper } => LossModel::uniform(T::c(*upper)),
            LossSpec::Lognormal { mu, sigma } => LossModel::lognormal(T::c(*mu), T::c(*sigma)),
            LossSpec::AtomScaled { q, inner } => LossModel::atom_scaled(T::c(*q), inner.build()?),
            LossSpec::Empirical { points } => {
                let pts: Vec<(T, T)> = points.iter().map(|&[p, x]| (T::c(p), T::c(x))).collect();
                LossModel::empirical(&pts)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistortionSpec {
    Identity,
    ProportionalHazard { c: f64 },
    DualPower { k: f64 },
    Wang { lambda: f64 },
}

impl DistortionSpec {
    pub fn build<T: Scalar>(&self) -> Result<Distortion<T>> {
        match *self {
            DistortionSpec::Identity => Ok(Distortion::Identity),
            DistortionSpec::ProportionalHazard { c } => Distortion::proportional_hazard(T::c(c)),
            DistortionSpec::DualPower { k } => Distortion::dual_power(T::c(k)),
            DistortionSpec::Wang { lambda } => Distortion::wang(T::c(lambda)),
        }
    }
}

/// Market plus initial wealth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub loss: LossSpec,
    pub distortion: DistortionSpec,
    pub theta: f64,
    pub wealth: f64,
}

impl MarketConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn market<T: Scalar>(&self) -> Result<Market<T>> {
        Market::new(self.loss.build()?, self.distortion.build()?, T::c(self.theta))
    }

    /// Initial wealth, checked positive and finite.
    pub fn wealth<T: Scalar>(&self) -> Result<T> {
        if self.wealth.is_finite() && self.wealth > 0.0 {
            Ok(T::c(self.wealth))
        } else {
            Err(Error::domain("wealth w", self.wealth, "(0, ∞)"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxLimit {
    Max,
}

/// A limit given either as a number or as `"max"` for the essential supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LimitSpec {
    Value(f64),
    Max(MaxLimit),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSpec {
    pub d: f64,
    pub m: LimitSpec,
}

impl ContractSpec {
    pub fn build<T: Scalar>(&self, loss: &LossModel<T>) -> Result<DimlContract<T>> {
        let m = match self.m {
            LimitSpec::Value(m) => T::c(m),
            LimitSpec::Max(_) => loss.essential_sup().as_float(),
        };
        DimlContract::new(loss, T::c(self.d), m)
    }

    /// Writes infinite limits as `"max"`.
    pub fn from_contract<T: Scalar>(c: &DimlContract<T>) -> Self {
        let m = c.limit();
        ContractSpec {
            d: c.deductible().f64(),
            m: if m.is_infinite() {
                LimitSpec::Max(MaxLimit::Max)
            } else {
                LimitSpec::Value(m.f64())
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_market_config() {
        let c = MarketConfig::from_json(
            r#"{"loss":{"family":"atom_scaled","q":0.5,"inner":{"family":"exponential","rate":1}},
                "distortion":{"family":"proportional_hazard","c":0.5},"theta":0.5,"wealth":0.3}"#,
        )
        .unwrap();
        let m = c.market::<f64>().unwrap();
        assert_eq!(m.loss().s0(), 0.5);
        assert_eq!(c.wealth::<f64>().unwrap(), 0.3);
    }

    #[test]
    fn rejects_unknown_fields_and_families() {
        assert!(MarketConfig::from_json(
            r#"{"loss":{"family":"exponential","rate":1,"extra":2},"distortion":{"family":"identity"},"theta":0,"wealth":1}"#
        )
        .is_err());
        assert!(MarketConfig::from_json(
            r#"{"loss":{"family":"gamma","shape":1},"distortion":{"family":"identity"},"theta":0,"wealth":1}"#
        )
        .is_err());
        assert!(MarketConfig::from_json(
            r#"{"loss":{"family":"exponential","rate":1},"distortion":{"family":"identity"},"theta":0}"#
        )
        .is_err());
    }

    #[test]
    fn invalid_values_fail_at_build() {
        let c = MarketConfig::from_json(
            r#"{"loss":{"family":"exponential","rate":-1},"distortion":{"family":"identity"},"theta":0,"wealth":1}"#,
        )
        .unwrap();
        assert!(c.market::<f64>().is_err());
        let c = MarketConfig::from_json(
            r#"{"loss":{"family":"exponential","rate":1},"distortion":{"family":"identity"},"theta":0,"wealth":0}"#,
        )
        .unwrap();
        assert!(c.wealth::<f64>().is_err());
    }

    #[test]
    fn contract_limit_max() {
        let loss = LossModel::<f64>::uniform(2.0).unwrap();
        let c: ContractSpec = serde_json::from_str(r#"{"d":0.5,"m":"max"}"#).unwrap();
        assert_eq!(c.build(&loss).unwrap().limit(), 2.0);
        let c: ContractSpec = serde_json::from_str(r#"{"d":0.5,"m":1.5}"#).unwrap();
        assert_eq!(c.build(&loss).unwrap().limit(), 1.5);
        assert!(serde_json::from_str::<ContractSpec>(r#"{"d":0.5,"m":"all"}"#).is_err());

        let exp = LossModel::<f64>::exponential(1.0).unwrap();
        let uncapped = DimlContract::uncapped(&exp, 0.1).unwrap();
        assert_eq!(
            serde_json::to_string(&ContractSpec::from_contract(&uncapped)).unwrap(),
            r#"{"d":0.1,"m":"max"}"#
        );
    }
}

//! Congestion price as a function of aggregate demand.
//!
//! `price(x) = a·(x/C)^k + s(x - C)·u(x - C)` where `u` is a strict unit step
//! (`u(0) = 0`) and `s` is one of two sigmoid shapes scaled by `tau`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmoidKind {
    /// Logistic `1 / (1 + e^(-z/tau))`; jumps to 0.5 just above capacity.
    Standard,
    /// `tanh(z / (2·tau))`; continuous at capacity.
    #[default]
    ZeroCentered,
}

impl SigmoidKind {
    pub fn name(self) -> &'static str {
        match self {
            SigmoidKind::Standard => "standard",
            SigmoidKind::ZeroCentered => "zero_centered",
        }
    }
}

impl fmt::Display for SigmoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SigmoidKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(SigmoidKind::Standard),
            "zero_centered" => Ok(SigmoidKind::ZeroCentered),
            other => Err(Error::Argument(format!("unknown sigmoid kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingParams<S> {
    /// Basic price of power.
    pub a: S,
    pub k: S,
    /// Grid capacity.
    pub capacity: S,
    pub sigmoid: SigmoidKind,
    /// Sigmoid scale in power units.
    pub tau: S,
}

impl<S: Scalar> PricingParams<S> {
    pub fn new(capacity: S) -> Self {
        Self {
            a: S::one(),
            k: S::lit(4.0),
            capacity,
            sigmoid: SigmoidKind::ZeroCentered,
            tau: S::lit(10.0),
        }
    }

    /// Checks `a > 0, k >= 1, capacity > 0, tau > 0`, naming the offending field.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |v: S| v > S::zero() && v.is_finite();
        if !positive(self.a) {
            return Err(("a", format!("must be positive, got {}", self.a)));
        }
        if !(self.k >= S::one() && self.k.is_finite()) {
            return Err(("k", format!("must be at least 1, got {}", self.k)));
        }
        if !positive(self.capacity) {
            return Err((
                "capacity",
                format!("must be positive, got {}", self.capacity),
            ));
        }
        if !positive(self.tau) {
            return Err(("tau", format!("must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// `a·(total/capacity)^k`.
pub fn base_price<S: Scalar>(params: &PricingParams<S>, total_demand: S) -> Result<S> {
    if !(total_demand >= S::zero()) {
        return Err(Error::Argument(format!(
            "total demand must be nonnegative, got {total_demand}"
        )));
    }
    Ok(params.a * (total_demand / params.capacity).powf(params.k))
}

/// Sigmoid surcharge gated by a strict unit step; always in `[0, 1)`.
pub fn overload_penalty<S: Scalar>(params: &PricingParams<S>, excess: S) -> S {
    if !(excess > S::zero()) {
        return S::zero();
    }
    let z = excess / params.tau;
    let s = match params.sigmoid {
        SigmoidKind::Standard => S::one() / (S::one() + (-z).exp()),
        SigmoidKind::ZeroCentered => (z / S::lit(2.0)).tanh(),
    };
    // Both shapes round to exactly 1 for large excess in floating point.
    s.min(S::one() - S::epsilon())
}

pub fn price<S: Scalar>(params: &PricingParams<S>, total_demand: S) -> Result<S> {
    Ok(
        base_price(params, total_demand)?
            + overload_penalty(params, total_demand - params.capacity),
    )
}

//! A single building: logarithmic utility, price-driven demand update and
//! the closed-form optimal demand.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingState<S> {
    pub id: usize,
    pub demand: S,
    /// Willingness to pay; fixed for a run.
    pub wtp: S,
    /// Local estimate of the network-wide average demand.
    pub estimate: S,
}

impl<S: Scalar> BuildingState<S> {
    /// Fresh state whose estimate starts at the building's own demand.
    pub fn new(id: usize, demand: S, wtp: S) -> Self {
        Self {
            id,
            demand,
            wtp,
            estimate: demand,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams<S> {
    /// Step size of the demand update, in `(0, 1)`.
    pub alpha: S,
    /// Demand never drops below this.
    pub demand_floor: S,
}

impl<S: Scalar> Default for AgentParams<S> {
    fn default() -> Self {
        Self {
            alpha: S::lit(0.05),
            demand_floor: S::lit(1e-6),
        }
    }
}

impl<S: Scalar> AgentParams<S> {
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.alpha > S::zero() && self.alpha < S::one()) {
            return Err(("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.demand_floor > S::zero() && self.demand_floor.is_finite()) {
            return Err((
                "demand_floor",
                format!("must be positive, got {}", self.demand_floor),
            ));
        }
        Ok(())
    }
}

/// `wtp·ln(demand)`.
pub fn utility<S: Scalar>(wtp: S, demand: S) -> Result<S> {
    if !(demand > S::zero()) {
        return Err(Error::Domain(format!(
            "utility needs positive demand, got {demand}"
        )));
    }
    Ok(wtp * demand.ln())
}

/// Utility minus expenditure.
pub fn net_payoff<S: Scalar>(wtp: S, demand: S, price: S) -> Result<S> {
    Ok(utility(wtp, demand)? - demand * price)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandUpdate<S> {
    pub new_demand: S,
    /// `new_demand - demand`, measured after clamping.
    pub delta: S,
    pub clamped: bool,
}

/// Gradient step `x + α(w - x·p)`, clamped from below at the demand floor.
pub fn demand_update<S: Scalar>(
    state: &BuildingState<S>,
    price: S,
    params: &AgentParams<S>,
) -> DemandUpdate<S> {
    let raw = state.demand + params.alpha * (state.wtp - state.demand * price);
    let clamped = raw < params.demand_floor;
    let new_demand = if clamped { params.demand_floor } else { raw };
    DemandUpdate {
        new_demand,
        delta: new_demand - state.demand,
        clamped,
    }
}

/// Maximizer of [`net_payoff`] at a fixed price: `wtp / price`.
pub fn optimal_demand<S: Scalar>(wtp: S, price: S) -> Result<S> {
    if !(price > S::zero()) {
        return Err(Error::Domain(format!(
            "optimal demand needs positive price, got {price}"
        )));
    }
    Ok(wtp / price)
}

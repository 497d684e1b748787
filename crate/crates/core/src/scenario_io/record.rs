use crate::protocol::{Mode, SlotOutcome};
use crate::scalar::{mean, ordered_sum, Scalar};

use super::config::Scenario;
use super::tables::format_sig;

/// Full trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord<S> {
    pub scenario: Scenario<S>,
    pub slots: Vec<SlotOutcome<S>>,
    /// First slot of the quiet streak that ended the run, if any.
    pub equilibrium_slot: Option<usize>,
    pub final_demands: Vec<S>,
    /// Per-agent prices evaluated at the final state.
    pub final_prices: Vec<S>,
    /// `wtp / final price` for each building.
    pub optimal_demands: Vec<S>,
    /// `initial_demand - final_demand` for each building.
    pub cut_down: Vec<S>,
    pub clamp_total: usize,
}

impl<S: Scalar> SimulationRecord<S> {
    pub fn new(
        scenario: Scenario<S>,
        slots: Vec<SlotOutcome<S>>,
        equilibrium_slot: Option<usize>,
        final_demands: Vec<S>,
        final_prices: Vec<S>,
        optimal_demands: Vec<S>,
    ) -> Self {
        let cut_down = scenario
            .initial_demand
            .iter()
            .zip(&final_demands)
            .map(|(&a, &b)| a - b)
            .collect();
        let clamp_total = slots.iter().map(|s| s.clamp_events).sum();
        Self {
            scenario,
            slots,
            equilibrium_slot,
            final_demands,
            final_prices,
            optimal_demands,
            cut_down,
            clamp_total,
        }
    }

    pub fn mode(&self) -> Mode {
        self.scenario.protocol.mode
    }

    pub fn n(&self) -> usize {
        self.scenario.n()
    }

    pub fn initial_total(&self) -> S {
        ordered_sum(&self.scenario.initial_demand)
    }

    pub fn final_total(&self) -> S {
        ordered_sum(&self.final_demands)
    }

    pub fn final_price_mean(&self) -> S {
        mean(&self.final_prices)
    }

    pub fn reached_equilibrium(&self) -> bool {
        self.equilibrium_slot.is_some()
    }

    /// Strict `final_total < capacity`.
    pub fn constraint_ok(&self) -> bool {
        self.final_total() < self.scenario.pricing.capacity
    }

    /// One-line machine-readable run summary.
    pub fn summary_line(&self) -> String {
        format!(
            "mode={} slots={} equilibrium={} final_total={} final_price_mean={} constraint_ok={}",
            self.mode(),
            self.slots.len(),
            self.equilibrium_slot
                .map_or_else(|| "none".to_string(), |s| s.to_string()),
            format_sig(self.final_total().widen(), 10),
            format_sig(self.final_price_mean().widen(), 10),
            self.constraint_ok(),
        )
    }
}

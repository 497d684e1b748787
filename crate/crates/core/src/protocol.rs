//! Slot-by-slot orchestration of the static and dynamic demand-adjustment
//! protocols.
//!
//! Static: each slot first runs distributed averaging on the current demands
//! until every building knows the average, then each building prices the
//! implied total and takes one demand step.
//!
//! Dynamic: each building prices its own running estimate of the average, takes
//! one demand step, and folds its demand change into one tracking round. The
//! sum of estimates stays equal to the sum of demands throughout.

use std::fmt;
use std::str::FromStr;

use crate::agent::{demand_update, optimal_demand, AgentParams, BuildingState};
use crate::consensus::{
    best_constant_weights, default_max_rounds, run_averaging, tracking_round, WeightMatrix,
};
use crate::error::{Error, Result};
use crate::pricing::{price, PricingParams};
use crate::scalar::{max_abs, ordered_sum, Scalar};
use crate::scenario_io::{Scenario, SimulationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Static,
    Dynamic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            other => Err(Error::Argument(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig<S> {
    pub mode: Mode,
    pub max_slots: usize,
    /// Equilibrium threshold on `max_i |Δ_i|`, in demand units.
    pub eq_tolerance: S,
    /// Number of consecutive quiet slots that count as equilibrium.
    pub eq_consecutive: usize,
    /// Relative tolerance of the static-mode averaging loop.
    pub avg_tolerance: S,
    /// Round budget of the averaging loop; `None` means [`default_max_rounds`].
    pub avg_max_rounds: Option<usize>,
    /// Number of buildings, known to every agent.
    pub n_known: usize,
}

impl<S: Scalar> ProtocolConfig<S> {
    pub fn new(mode: Mode, n_known: usize) -> Self {
        Self {
            mode,
            max_slots: 500,
            eq_tolerance: S::lit(1e-4),
            eq_consecutive: 5,
            avg_tolerance: S::tolerance_floor(1e-9),
            avg_max_rounds: None,
            n_known,
        }
    }

    pub fn averaging_rounds(&self) -> usize {
        self.avg_max_rounds
            .unwrap_or_else(|| default_max_rounds(self.n_known))
    }

    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.max_slots < 1 {
            return Err(("max_slots", "must be at least 1".into()));
        }
        if self.eq_consecutive < 1 {
            return Err(("eq_consecutive", "must be at least 1".into()));
        }
        if !(self.eq_tolerance > S::zero()) {
            return Err((
                "eq_tolerance",
                format!("must be positive, got {}", self.eq_tolerance),
            ));
        }
        if !(self.avg_tolerance > S::zero()) {
            return Err((
                "avg_tolerance",
                format!("must be positive, got {}", self.avg_tolerance),
            ));
        }
        if self.avg_max_rounds == Some(0) {
            return Err(("avg_max_rounds", "must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything observed during one slot. Vectors describe the state at the
/// start of the slot, i.e. the values the prices were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome<S> {
    /// 1-based slot index.
    pub slot: usize,
    pub demands: Vec<S>,
    pub estimates: Vec<S>,
    pub prices: Vec<S>,
    /// Demand change applied at the end of the slot.
    pub deltas: Vec<S>,
    pub total_true: S,
    pub totals_estimated: Vec<S>,
    /// Strict `total_true < capacity`.
    pub constraint_ok: bool,
    /// Averaging rounds used; always 0 in dynamic mode.
    pub consensus_rounds: usize,
    pub clamp_events: usize,
}

impl<S: Scalar> SlotOutcome<S> {
    pub fn max_abs_delta(&self) -> S {
        max_abs(&self.deltas)
    }

    pub fn mean_price(&self) -> S {
        crate::scalar::mean(&self.prices)
    }
}

fn check_dims<S: Scalar>(states: &[BuildingState<S>], wm: &WeightMatrix<S>) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Argument("no buildings".into()));
    }
    if states.len() != wm.n() {
        return Err(Error::Argument(format!(
            "{} buildings but weight matrix is {}x{}",
            states.len(),
            wm.n(),
            wm.n()
        )));
    }
    Ok(())
}

/// Price an agent derives from its estimate of the average demand. A negative
/// estimated total is read as zero load.
fn price_from_estimate<S: Scalar>(
    pricing: &PricingParams<S>,
    n_known: usize,
    estimate: S,
) -> Result<S> {
    price(pricing, (S::of_count(n_known) * estimate).max(S::zero()))
}

fn step_agents<S: Scalar>(
    states: &[BuildingState<S>],
    prices: &[S],
    agent: &AgentParams<S>,
) -> (Vec<BuildingState<S>>, Vec<S>, usize) {
    let mut next = Vec::with_capacity(states.len());
    let mut deltas = Vec::with_capacity(states.len());
    let mut clamps = 0;
    for (s, &p) in states.iter().zip(prices) {
        let u = demand_update(s, p, agent);
        clamps += usize::from(u.clamped);
        deltas.push(u.delta);
        next.push(BuildingState {
            demand: u.new_demand,
            ..*s
        });
    }
    (next, deltas, clamps)
}

fn outcome<S: Scalar>(
    slot: usize,
    states: &[BuildingState<S>],
    estimates: Vec<S>,
    prices: Vec<S>,
    deltas: Vec<S>,
    pricing: &PricingParams<S>,
    cfg: &ProtocolConfig<S>,
) -> SlotOutcome<S> {
    let demands: Vec<S> = states.iter().map(|s| s.demand).collect();
    let total_true = ordered_sum(&demands);
    let n = S::of_count(cfg.n_known);
    SlotOutcome {
        slot,
        totals_estimated: estimates.iter().map(|&e| n * e).collect(),
        constraint_ok: total_true < pricing.capacity,
        demands,
        estimates,
        prices,
        deltas,
        total_true,
        consensus_rounds: 0,
        clamp_events: 0,
    }
}

/// One slot of the static protocol.
pub fn static_slot<S: Scalar>(
    states: &[BuildingState<S>],
    wm: &WeightMatrix<S>,
    pricing: &PricingParams<S>,
    agent: &AgentParams<S>,
    cfg: &ProtocolConfig<S>,
    slot: usize,
) -> Result<(Vec<BuildingState<S>>, SlotOutcome<S>)> {
    check_dims(states, wm)?;
    let demands: Vec<S> = states.iter().map(|s| s.demand).collect();
    let averaging = run_averaging(wm, &demands, cfg.avg_tolerance, cfg.averaging_rounds())?;
    let prices = averaging
        .estimates
        .iter()
        .map(|&e| price_from_estimate(pricing, cfg.n_known, e))
        .collect::<Result<Vec<_>>>()?;

    let (mut next, deltas, clamps) = step_agents(states, &prices, agent);
    for (s, &e) in next.iter_mut().zip(&averaging.estimates) {
        s.estimate = e;
    }
    let mut out = outcome(
        slot,
        states,
        averaging.estimates,
        prices,
        deltas,
        pricing,
        cfg,
    );
    out.consensus_rounds = averaging.rounds;
    out.clamp_events = clamps;
    Ok((next, out))
}

/// One slot of the dynamic protocol.
pub fn dynamic_slot<S: Scalar>(
    states: &[BuildingState<S>],
    wm: &WeightMatrix<S>,
    pricing: &PricingParams<S>,
    agent: &AgentParams<S>,
    cfg: &ProtocolConfig<S>,
    slot: usize,
) -> Result<(Vec<BuildingState<S>>, SlotOutcome<S>)> {
    check_dims(states, wm)?;
    let estimates: Vec<S> = states.iter().map(|s| s.estimate).collect();
    let prices = estimates
        .iter()
        .map(|&e| price_from_estimate(pricing, cfg.n_known, e))
        .collect::<Result<Vec<_>>>()?;

    let (mut next, deltas, clamps) = step_agents(states, &prices, agent);
    let advanced = tracking_round(wm, &estimates, &deltas)?;
    for (s, e) in next.iter_mut().zip(advanced) {
        s.estimate = e;
    }
    let mut out = outcome(slot, states, estimates, prices, deltas, pricing, cfg);
    out.clamp_events = clamps;
    Ok((next, out))
}

/// A run that stopped on an error. `partial` holds every slot completed
/// before the failure, when the run got that far.
#[derive(Debug)]
pub struct RunFailure<S> {
    pub partial: Option<Box<SimulationRecord<S>>>,
    pub error: Error,
}

impl<S> From<Error> for RunFailure<S> {
    fn from(error: Error) -> Self {
        Self {
            partial: None,
            error,
        }
    }
}

impl<S> fmt::Display for RunFailure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<S: fmt::Debug> std::error::Error for RunFailure<S> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Prices each agent would quote for the given state under `mode`.
fn prices_for_state<S: Scalar>(
    mode: Mode,
    states: &[BuildingState<S>],
    pricing: &PricingParams<S>,
    n_known: usize,
) -> Result<Vec<S>> {
    match mode {
        Mode::Static => {
            let demands: Vec<S> = states.iter().map(|s| s.demand).collect();
            let p = price(pricing, ordered_sum(&demands))?;
            Ok(vec![p; states.len()])
        }
        Mode::Dynamic => states
            .iter()
            .map(|s| price_from_estimate(pricing, n_known, s.estimate))
            .collect(),
    }
}

fn finish<S: Scalar>(
    scenario: &Scenario<S>,
    slots: Vec<SlotOutcome<S>>,
    equilibrium_slot: Option<usize>,
    states: &[BuildingState<S>],
) -> Result<SimulationRecord<S>> {
    let final_prices = prices_for_state(
        scenario.protocol.mode,
        states,
        &scenario.pricing,
        scenario.protocol.n_known,
    )?;
    let final_demands: Vec<S> = states.iter().map(|s| s.demand).collect();
    let optimal_demands = states
        .iter()
        .zip(&final_prices)
        .map(|(s, &p)| optimal_demand(s.wtp, p).unwrap_or_else(|_| S::infinity()))
        .collect();
    Ok(SimulationRecord::new(
        scenario.clone(),
        slots,
        equilibrium_slot,
        final_demands,
        final_prices,
        optimal_demands,
    ))
}

/// Runs the configured protocol until equilibrium or the slot budget runs out.
///
/// Equilibrium is `max_i |Δ_i| < eq_tolerance` for `eq_consecutive`
/// consecutive slots; the recorded equilibrium slot is the first slot of that
/// streak. Hitting `max_slots` is a normal, non-converged outcome.
pub fn run<S: Scalar>(scenario: &Scenario<S>) -> Result<SimulationRecord<S>, RunFailure<S>> {
    scenario.validate()?;
    let graph = scenario.graph()?;
    let wm = best_constant_weights::<S>(&graph)?;
    let cfg = &scenario.protocol;
    let slot_fn = match cfg.mode {
        Mode::Static => static_slot::<S>,
        Mode::Dynamic => dynamic_slot::<S>,
    };

    let mut states: Vec<BuildingState<S>> = scenario
        .initial_demand
        .iter()
        .zip(&scenario.wtp)
        .enumerate()
        .map(|(i, (&x, &w))| BuildingState::new(i, x, w))
        .collect();
    let mut slots = Vec::new();
    let mut streak = 0;
    let mut equilibrium = None;

    for slot in 1..=cfg.max_slots {
        let (next, out) = match slot_fn(&states, &wm, &scenario.pricing, &scenario.agent, cfg, slot)
        {
            Ok(step) => step,
            Err(error) => {
                let partial = finish(scenario, slots, None, &states).ok().map(Box::new);
                return Err(RunFailure { partial, error });
            }
        };
        streak = if out.max_abs_delta() < cfg.eq_tolerance {
            streak + 1
        } else {
            0
        };
        states = next;
        slots.push(out);
        if streak >= cfg.eq_consecutive {
            equilibrium = Some(slot + 1 - cfg.eq_consecutive);
            break;
        }
    }

    Ok(finish(scenario, slots, equilibrium, &states)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_io::GraphSpec;
    use crate::topology::{generate, TopologyKind};

    #[allow(clippy::type_complexity)]
    fn k2_setup() -> (
        Vec<BuildingState<f64>>,
        WeightMatrix<f64>,
        PricingParams<f64>,
        AgentParams<f64>,
        ProtocolConfig<f64>,
    ) {
        let wm = best_constant_weights(&generate(TopologyKind::Complete, 2, 0).unwrap()).unwrap();
        let states = vec![
            BuildingState::new(0, 80.0, 72.0),
            BuildingState::new(1, 80.0, 72.0),
        ];
        (
            states,
            wm,
            PricingParams::new(150.0),
            AgentParams::default(),
            ProtocolConfig::new(Mode::Static, 2),
        )
    }

    #[test]
    fn static_slot_two_buildings() {
        let (states, wm, pricing, agent, cfg) = k2_setup();
        let (next, out) = static_slot(&states, &wm, &pricing, &agent, &cfg, 1).unwrap();
        assert_eq!(out.estimates, vec![80.0, 80.0]);
        assert_eq!(out.total_true, 160.0);
        let expected_price = (160.0f64 / 150.0).powi(4) + 0.5f64.tanh();
        assert!((expected_price - 1.756655).abs() < 1e-6);
        for (s, &p) in next.iter().zip(&out.prices) {
            assert!((p - expected_price).abs() < 1e-12);
            assert!((s.demand - (80.0 + 0.05 * (72.0 - 80.0 * expected_price))).abs() < 1e-12);
            assert!((s.demand - 76.5734).abs() < 1e-4);
        }
        assert!(!out.constraint_ok);
        assert_eq!(out.totals_estimated, vec![160.0, 160.0]);
    }

    #[test]
    fn dynamic_slot_two_buildings_matches_static() {
        let (states, wm, pricing, agent, cfg) = k2_setup();
        let (s_next, _) = static_slot(&states, &wm, &pricing, &agent, &cfg, 1).unwrap();
        let (d_next, out) = dynamic_slot(&states, &wm, &pricing, &agent, &cfg, 1).unwrap();
        for (a, b) in s_next.iter().zip(&d_next) {
            assert!((a.demand - b.demand).abs() < 1e-12);
            assert!((b.estimate - b.demand).abs() < 1e-12);
        }
        assert!(out.deltas.iter().all(|d| (d + 3.4266).abs() < 1e-4));
        let sum_e: f64 = d_next.iter().map(|s| s.estimate).sum();
        let sum_x: f64 = d_next.iter().map(|s| s.demand).sum();
        assert!((sum_e - sum_x).abs() < 1e-12);
        assert!((sum_x - 153.1468).abs() < 1e-3);
        assert_eq!(out.consensus_rounds, 0);
    }

    #[test]
    fn fixed_point_has_zero_deltas() {
        // Demands at wtp/p with total below capacity.
        let wm = best_constant_weights(&generate(TopologyKind::Ring, 4, 0).unwrap()).unwrap();
        let pricing = PricingParams::new(400.0);
        let demands = [60.0, 70.0, 80.0, 90.0];
        let p = price(&pricing, 300.0).unwrap();
        let states: Vec<_> = demands
            .iter()
            .enumerate()
            .map(|(i, &x)| BuildingState::new(i, x, x * p))
            .collect();
        let cfg = ProtocolConfig::new(Mode::Static, 4);
        let (_, out) =
            static_slot(&states, &wm, &pricing, &AgentParams::default(), &cfg, 1).unwrap();
        assert!(out.max_abs_delta() < 1e-6);
        assert!(out.constraint_ok);
    }

    #[test]
    fn dynamic_with_exact_estimates_reduces_to_static() {
        let wm = best_constant_weights(&generate(TopologyKind::Ring, 5, 0).unwrap()).unwrap();
        let pricing = PricingParams::new(300.0);
        let demands = [60.0, 75.0, 55.0, 90.0, 70.0];
        let avg = demands.iter().sum::<f64>() / 5.0;
        let states: Vec<_> = demands
            .iter()
            .enumerate()
            .map(|(i, &x)| BuildingState {
                id: i,
                demand: x,
                wtp: 50.0 + i as f64,
                estimate: avg,
            })
            .collect();
        let agent = AgentParams::default();
        let cfg = ProtocolConfig::new(Mode::Dynamic, 5);
        let (s_next, s_out) = static_slot(&states, &wm, &pricing, &agent, &cfg, 1).unwrap();
        let (d_next, d_out) = dynamic_slot(&states, &wm, &pricing, &agent, &cfg, 1).unwrap();
        for i in 0..5 {
            assert!((s_out.prices[i] - d_out.prices[i]).abs() < 1e-7);
            assert!((s_next[i].demand - d_next[i].demand).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_deltas_only_mix_estimates() {
        // wtp chosen so every agent sits at its own fixed point for its own price.
        for kind in [TopologyKind::Complete, TopologyKind::Ring] {
            let g = generate(kind, 6, 0).unwrap();
            let wm = best_constant_weights(&g).unwrap();
            let pricing = PricingParams::new(500.0);
            let cfg = ProtocolConfig::new(Mode::Dynamic, 6);
            let estimates = [60.0, 80.0, 70.0, 90.0, 65.0, 75.0];
            let states: Vec<_> = estimates
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    let p = price(&pricing, 6.0 * e).unwrap();
                    BuildingState {
                        id: i,
                        demand: 70.0,
                        wtp: 70.0 * p,
                        estimate: e,
                    }
                })
                .collect();
            let (next, out) =
                dynamic_slot(&states, &wm, &pricing, &AgentParams::default(), &cfg, 1).unwrap();
            assert!(out.max_abs_delta() < 1e-12);
            let spread = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - m).powi(2)).sum::<f64>().sqrt()
            };
            let after: Vec<f64> = next.iter().map(|s| s.estimate).collect();
            assert!(
                spread(&after) <= wm.rho() * spread(&estimates) + 1e-9,
                "{kind}"
            );
            assert!(next.iter().all(|s| s.demand == 70.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (states, wm, pricing, agent, cfg) = k2_setup();
        assert!(static_slot(&states[..1], &wm, &pricing, &agent, &cfg, 1).is_err());
        assert!(dynamic_slot(&[], &wm, &pricing, &agent, &cfg, 1).is_err());
    }

    fn single_agent() -> Scenario<f64> {
        Scenario::new(
            GraphSpec::Edges {
                n: 1,
                edges: vec![],
            },
            vec![50.0],
            vec![80.0],
            100.0,
        )
        .unwrap()
    }

    #[test]
    fn single_agent_reaches_closed_form() {
        // x·(x/100)^4 = 50  =>  x = 50^(1/5)·100^(4/5)
        let expected = 50f64.powf(0.2) * 100f64.powf(0.8);
        let rec = run(&single_agent()).unwrap();
        assert!(rec.equilibrium_slot.is_some());
        assert!((rec.final_demands[0] - expected).abs() < 1e-2);
        assert!((rec.final_prices[0] - 0.57435).abs() < 1e-3);
    }

    #[test]
    fn static_run_estimates_track_mean() {
        let mut sc = single_agent();
        sc.graph_spec = GraphSpec::Generated {
            kind: TopologyKind::Ring,
            n: 4,
        };
        sc.wtp = vec![40.0, 50.0, 60.0, 70.0];
        sc.initial_demand = vec![90.0, 20.0, 55.0, 60.0];
        sc.pricing.capacity = 250.0;
        sc.protocol.n_known = 4;
        let rec = run(&sc).unwrap();
        for out in &rec.slots {
            let mean = out.total_true / 4.0;
            for &e in &out.estimates {
                assert!((e - mean).abs() <= 1e-9 * (1.0 + mean));
            }
        }
    }

    #[test]
    fn averaging_failure_returns_partial_record() {
        let mut sc = single_agent();
        sc.graph_spec = GraphSpec::Generated {
            kind: TopologyKind::Path,
            n: 6,
        };
        sc.wtp = vec![50.0; 6];
        sc.initial_demand = vec![10.0, 90.0, 20.0, 80.0, 30.0, 70.0];
        sc.pricing.capacity = 400.0;
        sc.protocol.n_known = 6;
        sc.protocol.avg_max_rounds = Some(2);
        let failure = run(&sc).unwrap_err();
        assert!(matches!(failure.error, Error::Averaging { .. }));
        let partial = failure.partial.unwrap();
        assert!(partial.slots.is_empty());
        assert_eq!(partial.final_demands, sc.initial_demand);
    }

    #[test]
    fn disconnected_graph_is_reported() {
        let mut sc = single_agent();
        sc.graph_spec = GraphSpec::Edges {
            n: 3,
            edges: vec![(0, 1)],
        };
        sc.wtp = vec![50.0; 3];
        sc.initial_demand = vec![50.0; 3];
        sc.protocol.n_known = 3;
        let failure = run(&sc).unwrap_err();
        assert!(failure.error.is_validation());
    }

    #[test]
    fn runs_in_f32() {
        let sc = single_agent().cast::<f32>();
        let rec = run(&sc).unwrap();
        let expected = 50f32.powf(0.2) * 100f32.powf(0.8);
        assert!((rec.final_demands[0] - expected).abs() < 1e-1);
    }
}

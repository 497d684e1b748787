//! Line-based `key = value` scenario files.
//!
//! ```text
//! # comment
//! graph.kind = ring          # ring | path | complete | erdos_renyi | grid2d
//! graph.n = 10
//! graph.p = 0.5              # erdos_renyi only
//! edge = 0,1                 # repeated; used when graph.kind is absent
//! agents.wtp = 45, 98, ...
//! agents.initial_demand = 57.3, 98.1, ...
//! agents.alpha = 0.05
//! agents.demand_floor = 1e-6
//! price.a = 1
//! price.k = 4
//! price.capacity = 700
//! price.sigmoid = zero_centered
//! price.tau = 10
//! protocol.mode = static
//! protocol.max_slots = 500
//! protocol.eq_tolerance = 1e-4
//! protocol.eq_consecutive = 5
//! protocol.avg_tolerance = 1e-9
//! protocol.avg_max_rounds = 1000   # optional
//! seed = 0
//! output.dir = out
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::AgentParams;
use crate::error::{Error, Result};
use crate::pricing::{PricingParams, SigmoidKind};
use crate::protocol::{Mode, ProtocolConfig};
use crate::scalar::Scalar;
use crate::topology::{generate, is_connected, Graph, TopologyKind};

const KEYS: &[&str] = &[
    "graph.kind",
    "graph.n",
    "graph.p",
    "edge",
    "agents.wtp",
    "agents.initial_demand",
    "agents.alpha",
    "agents.demand_floor",
    "price.a",
    "price.k",
    "price.capacity",
    "price.sigmoid",
    "price.tau",
    "protocol.mode",
    "protocol.max_slots",
    "protocol.eq_tolerance",
    "protocol.eq_consecutive",
    "protocol.avg_tolerance",
    "protocol.avg_max_rounds",
    "seed",
    "output.dir",
];

/// Range of the uniform draw used by [`Scenario::with_sampled_initial_demand`].
pub const SAMPLED_DEMAND_RANGE: (f64, f64) = (50.0, 100.0);

/// How the communication graph is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Generated from a family; randomized families use the scenario seed.
    Generated { kind: TopologyKind, n: usize },
    /// Explicit edge list.
    Edges {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match self {
            GraphSpec::Generated { n, .. } | GraphSpec::Edges { n, .. } => *n,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Graph> {
        match self {
            GraphSpec::Generated { kind, n } => generate(*kind, *n, seed),
            GraphSpec::Edges { n, edges } => Graph::new(*n, edges.iter().copied()),
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub graph_spec: GraphSpec,
    pub wtp: Vec<S>,
    pub initial_demand: Vec<S>,
    pub agent: AgentParams<S>,
    pub pricing: PricingParams<S>,
    pub protocol: ProtocolConfig<S>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl<S: Scalar> Scenario<S> {
    /// Scenario with every optional setting at its default.
    pub fn new(
        graph_spec: GraphSpec,
        wtp: Vec<S>,
        initial_demand: Vec<S>,
        capacity: S,
    ) -> Result<Self> {
        let n = graph_spec.n();
        let scenario = Self {
            graph_spec,
            wtp,
            initial_demand,
            agent: AgentParams::default(),
            pricing: PricingParams::new(capacity),
            protocol: ProtocolConfig::new(Mode::Static, n),
            seed: 0,
            output_dir: PathBuf::from("out"),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn n(&self) -> usize {
        self.graph_spec.n()
    }

    /// Builds the communication graph, checking connectivity.
    pub fn graph(&self) -> Result<Graph> {
        let g = self.graph_spec.build(self.seed).map_err(|e| match e {
            Error::Argument(reason) => invalid("graph", reason),
            other => other,
        })?;
        if !is_connected(&g) {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (key, v) in [
            ("agents.wtp", &self.wtp),
            ("agents.initial_demand", &self.initial_demand),
        ] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    key: key.into(),
                    expected: n,
                    found: v.len(),
                });
            }
            if let Some(bad) = v.iter().find(|&&x| !(x > S::zero() && x.is_finite())) {
                return Err(invalid(
                    key,
                    format!("entries must be positive, found {bad}"),
                ));
            }
        }
        self.agent
            .validate()
            .map_err(|(field, reason)| invalid(&format!("agents.{field}"), reason))?;
        self.pricing
            .validate()
            .map_err(|(field, reason)| invalid(&format!("price.{field}"), reason))?;
        self.protocol
            .validate()
            .map_err(|(field, reason)| invalid(&format!("protocol.{field}"), reason))?;
        if self.protocol.n_known != n {
            return Err(invalid(
                "graph.n",
                format!(
                    "agents assume {} buildings, graph has {n}",
                    self.protocol.n_known
                ),
            ));
        }
        self.graph()?;
        Ok(())
    }

    /// Replaces the initial demands with uniform draws on [50, 100].
    pub fn with_sampled_initial_demand(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = SAMPLED_DEMAND_RANGE;
        self.initial_demand = (0..self.n())
            .map(|_| S::lit(rng.gen_range(lo..=hi)))
            .collect();
        self
    }

    /// Converts every numeric field to another scalar type.
    pub fn cast<T: Scalar>(&self) -> Scenario<T> {
        let c = |v: S| T::lit(v.widen());
        let cv = |v: &[S]| v.iter().map(|&x| c(x)).collect();
        Scenario {
            graph_spec: self.graph_spec.clone(),
            wtp: cv(&self.wtp),
            initial_demand: cv(&self.initial_demand),
            agent: AgentParams {
                alpha: c(self.agent.alpha),
                demand_floor: c(self.agent.demand_floor),
            },
            pricing: PricingParams {
                a: c(self.pricing.a),
                k: c(self.pricing.k),
                capacity: c(self.pricing.capacity),
                sigmoid: self.pricing.sigmoid,
                tau: c(self.pricing.tau),
            },
            protocol: ProtocolConfig {
                mode: self.protocol.mode,
                max_slots: self.protocol.max_slots,
                eq_tolerance: c(self.protocol.eq_tolerance),
                eq_consecutive: self.protocol.eq_consecutive,
                avg_tolerance: T::tolerance_floor(self.protocol.avg_tolerance.widen()),
                avg_max_rounds: self.protocol.avg_max_rounds,
                n_known: self.protocol.n_known,
            },
            seed: self.seed,
            output_dir: self.output_dir.clone(),
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_number<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value.parse::<T>().map_err(|_| Error::Syntax {
        line: e.line,
        message: format!("`{key}`: cannot parse `{}` as a number", e.value),
    })
}

fn parse_list<S: Scalar>(key: &str, e: &Entry) -> Result<Vec<S>> {
    e.value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>().map(S::lit).map_err(|_| Error::Syntax {
                line: e.line,
                message: format!("`{key}`: cannot parse `{item}` as a number"),
            })
        })
        .collect()
}

fn parse_edge(e: &Entry) -> Result<(usize, usize)> {
    let bad = || Error::Syntax {
        line: e.line,
        message: format!("`edge` expects `i,j`, got `{}`", e.value),
    };
    let (a, b) = e.value.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Parses and validates a scenario file.
pub fn parse_scenario<S: Scalar>(text: &str) -> Result<Scenario<S>> {
    let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim().to_string();
        let known = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| invalid(key, "unknown key"))?;
        let entry = Entry { line, value };
        if known == "edge" {
            edges.push(parse_edge(&entry)?);
        } else if entries.insert(known, entry).is_some() {
            return Err(Error::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let required = |key: &str| {
        entries
            .get(key)
            .ok_or_else(|| invalid(key, "missing required key"))
    };

    let n: usize = parse_number("graph.n", required("graph.n")?)?;
    let graph_spec = match entries.get("graph.kind") {
        Some(kind_entry) => {
            if !edges.is_empty() {
                return Err(invalid(
                    "edge",
                    "edge lines cannot be combined with graph.kind",
                ));
            }
            let p = entries
                .get("graph.p")
                .map(|e| parse_number::<f64>("graph.p", e))
                .transpose()?;
            let kind = TopologyKind::from_name(&kind_entry.value, p)
                .map_err(|e| invalid("graph.kind", e.to_string()))?;
            if p.is_some() && !matches!(kind, TopologyKind::ErdosRenyi { .. }) {
                return Err(invalid("graph.p", "only meaningful for erdos_renyi"));
            }
            GraphSpec::Generated { kind, n }
        }
        None => {
            if entries.contains_key("graph.p") {
                return Err(invalid("graph.p", "only meaningful for erdos_renyi"));
            }
            GraphSpec::Edges { n, edges }
        }
    };

    let wtp = parse_list::<S>("agents.wtp", required("agents.wtp")?)?;
    let initial_demand =
        parse_list::<S>("agents.initial_demand", required("agents.initial_demand")?)?;
    let capacity = S::lit(parse_number::<f64>(
        "price.capacity",
        required("price.capacity")?,
    )?);

    let real = |key: &str| -> Result<Option<S>> {
        entries
            .get(key)
            .map(|e| parse_number::<f64>(key, e).map(S::lit))
            .transpose()
    };
    let count = |key: &str| -> Result<Option<usize>> {
        entries
            .get(key)
            .map(|e| parse_number::<usize>(key, e))
            .transpose()
    };

    let mut agent = AgentParams::default();
    if let Some(v) = real("agents.alpha")? {
        agent.alpha = v;
    }
    if let Some(v) = real("agents.demand_floor")? {
        agent.demand_floor = v;
    }

    let mut pricing = PricingParams::new(capacity);
    if let Some(v) = real("price.a")? {
        pricing.a = v;
    }
    if let Some(v) = real("price.k")? {
        pricing.k = v;
    }
    if let Some(v) = real("price.tau")? {
        pricing.tau = v;
    }
    if let Some(e) = entries.get("price.sigmoid") {
        pricing.sigmoid = e
            .value
            .parse::<SigmoidKind>()
            .map_err(|err| invalid("price.sigmoid", err.to_string()))?;
    }

    let mut protocol = ProtocolConfig::new(Mode::Static, n);
    if let Some(e) = entries.get("protocol.mode") {
        protocol.mode = e
            .value
            .parse::<Mode>()
            .map_err(|err| invalid("protocol.mode", err.to_string()))?;
    }
    if let Some(v) = count("protocol.max_slots")? {
        protocol.max_slots = v;
    }
    if let Some(v) = real("protocol.eq_tolerance")? {
        protocol.eq_tolerance = v;
    }
    if let Some(v) = count("protocol.eq_consecutive")? {
        protocol.eq_consecutive = v;
    }
    if let Some(v) = real("protocol.avg_tolerance")? {
        protocol.avg_tolerance = v;
    }
    protocol.avg_max_rounds = count("protocol.avg_max_rounds")?;

    let scenario = Scenario {
        graph_spec,
        wtp,
        initial_demand,
        agent,
        pricing,
        protocol,
        seed: entries
            .get("seed")
            .map(|e| parse_number::<u64>("seed", e))
            .transpose()?
            .unwrap_or(0),
        output_dir: entries
            .get("output.dir")
            .map(|e| PathBuf::from(&e.value))
            .unwrap_or_else(|| PathBuf::from("out")),
    };
    scenario.validate()?;
    Ok(scenario)
}

fn join<S: Scalar>(v: &[S]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes a scenario in the format accepted by [`parse_scenario`].
pub fn serialize_scenario<S: Scalar>(sc: &Scenario<S>) -> String {
    let mut out = String::new();
    match &sc.graph_spec {
        GraphSpec::Generated { kind, n } => {
            let _ = writeln!(out, "graph.kind = {}", kind.name());
            let _ = writeln!(out, "graph.n = {n}");
            if let TopologyKind::ErdosRenyi { p } = kind {
                let _ = writeln!(out, "graph.p = {p}");
            }
        }
        GraphSpec::Edges { n, edges } => {
            let _ = writeln!(out, "graph.n = {n}");
            for (a, b) in edges {
                let _ = writeln!(out, "edge = {a},{b}");
            }
        }
    }
    let _ = writeln!(out, "agents.wtp = {}", join(&sc.wtp));
    let _ = writeln!(out, "agents.initial_demand = {}", join(&sc.initial_demand));
    let _ = writeln!(out, "agents.alpha = {}", sc.agent.alpha);
    let _ = writeln!(out, "agents.demand_floor = {}", sc.agent.demand_floor);
    let _ = writeln!(out, "price.a = {}", sc.pricing.a);
    let _ = writeln!(out, "price.k = {}", sc.pricing.k);
    let _ = writeln!(out, "price.capacity = {}", sc.pricing.capacity);
    let _ = writeln!(out, "price.sigmoid = {}", sc.pricing.sigmoid);
    let _ = writeln!(out, "price.tau = {}", sc.pricing.tau);
    let p = &sc.protocol;
    let _ = writeln!(out, "protocol.mode = {}", p.mode);
    let _ = writeln!(out, "protocol.max_slots = {}", p.max_slots);
    let _ = writeln!(out, "protocol.eq_tolerance = {}", p.eq_tolerance);
    let _ = writeln!(out, "protocol.eq_consecutive = {}", p.eq_consecutive);
    let _ = writeln!(out, "protocol.avg_tolerance = {}", p.avg_tolerance);
    if let Some(r) = p.avg_max_rounds {
        let _ = writeln!(out, "protocol.avg_max_rounds = {r}");
    }
    let _ = writeln!(out, "seed = {}", sc.seed);
    let _ = writeln!(out, "output.dir = {}", sc.output_dir.display());
    out
}

/// Edge-list fragment for a graph, as emitted by `gen-topology`.
pub fn edge_list_fragment(g: &Graph) -> String {
    let mut out = format!("graph.n = {}\n", g.n());
    for (a, b) in g.edges() {
        let _ = writeln!(out, "edge = {a},{b}");
    }
    out
}

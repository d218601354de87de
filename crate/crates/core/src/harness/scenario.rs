//! Scenario files: a TOML document with `[run]`, `[topology]`, `[[flows]]`,
//! `[[contracts]]` and `[injections]` sections. See `scenarios/README.md`
//! for the grammar.

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contracts::{ContractError, ContractId, ContractKind, ContractStore, PairId};
use crate::llde::{run_estimation_cycle, DelayMode, EstimatorConfig};
use crate::model::{
    build_topology, parse_bits, Bandwidth, ControlChannel, ControlLatency, Flow, FlowError, FlowId, HostSpec, LinkId,
    LinkSpec, SwitchId, Time, Topology, TopologyError, TopologySpec, UnitError,
};
use crate::resilience::MechanismVariant;
use crate::routing::find_path;
use crate::sim::{Injection, Kernel, SimConfig, SimError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {source}")]
    Unit { field: String, source: UnitError },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("flows: {0}")]
    Flow(#[from] FlowError),
    #[error("contracts: {0}")]
    Contract(#[from] ContractError),
    #[error("{field}: unknown host or switch `{name}`")]
    UnknownNode { field: String, name: String },
    #[error("injections: {0}")]
    Sim(#[from] SimError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

// ---- raw TOML shape ----

/// A quantity written as a string with a unit, e.g. `"10s"` or `"1Gbps"`.
#[derive(Clone, Debug, PartialEq)]
struct Q(String);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(Q)
    }
}

impl Q {
    fn time(&self, field: &str) -> Result<Time, ScenarioError> {
        Time::from_str(&self.0).map_err(|source| ScenarioError::Unit {
            field: field.into(),
            source,
        })
    }

    fn bandwidth(&self, field: &str) -> Result<Bandwidth, ScenarioError> {
        Bandwidth::from_str(&self.0).map_err(|source| ScenarioError::Unit {
            field: field.into(),
            source,
        })
    }

    fn bits(&self, field: &str) -> Result<u64, ScenarioError> {
        parse_bits(&self.0).map_err(|source| ScenarioError::Unit {
            field: field.into(),
            source,
        })
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    name: Option<String>,
    emulation_time: Option<Q>,
    estimation_interval: Option<Q>,
    control_latency: Option<Q>,
    control_jitter: Option<Q>,
    recalculation: Option<Q>,
    detection_latency: Option<Q>,
    probe_size: Option<Q>,
    queue_limit: Option<Q>,
    access_delay: Option<Q>,
    seeds: Option<u32>,
    base_seed: Option<u64>,
    event_phase: Option<Q>,
    variants: Option<Vec<String>>,
    #[serde(default)]
    control_overrides: Vec<RawControlOverride>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControlOverride {
    switch: String,
    down: Q,
    up: Q,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLinkDefaults {
    capacity: Option<Q>,
    delay: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    a: String,
    b: String,
    capacity: Option<Q>,
    delay: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    switches: Vec<String>,
    #[serde(default)]
    hosts: Vec<HostSpec>,
    #[serde(default)]
    link_defaults: RawLinkDefaults,
    #[serde(default)]
    links: Vec<RawLink>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    src: String,
    dst: String,
    rate: Q,
    packet_size: Option<Q>,
    volume: Option<Q>,
    start: Option<Q>,
    jitter: Option<Q>,
    count: Option<u32>,
    spacing: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContract {
    src: String,
    dst: String,
    strong: Q,
    weak: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinkEvent {
    at: Q,
    a: String,
    b: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContractChange {
    at: Q,
    src: String,
    dst: String,
    kind: Option<String>,
    ped: Q,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandomE1 {
    count: u32,
    outage: Q,
    targets: Option<String>,
    window: Option<[Q; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandomE2 {
    count: u32,
    factor: [f64; 2],
    duration: Option<Q>,
    window: Option<[Q; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawInjections {
    #[serde(default)]
    link_down: Vec<RawLinkEvent>,
    #[serde(default)]
    link_up: Vec<RawLinkEvent>,
    #[serde(default)]
    contract_change: Vec<RawContractChange>,
    random_e1: Option<RawRandomE1>,
    random_e2: Option<RawRandomE2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    run: RawRun,
    topology: RawTopology,
    #[serde(default)]
    flows: Vec<RawFlow>,
    #[serde(default)]
    contracts: Vec<RawContract>,
    #[serde(default)]
    injections: RawInjections,
}

// ---- validated scenario ----

pub const DEFAULT_PACKET_BITS: u64 = 12_000;
pub const DEFAULT_SEEDS: u32 = 10;

/// Where within an estimation interval randomly placed events fall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventPhase {
    /// Uniform over the interval.
    Random,
    /// Fixed offset after the cycle boundary.
    Offset(Time),
}

impl fmt::Display for EventPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventPhase::Random => f.write_str("random"),
            EventPhase::Offset(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunParams {
    pub name: String,
    pub emulation_time: Time,
    pub estimation_interval: Time,
    pub control: ControlChannel,
    pub recalculation: Time,
    pub detection_latency: Option<Time>,
    pub probe_length: u64,
    pub queue_limit: Option<u64>,
    pub access_delay: Time,
    pub seeds: u32,
    pub base_seed: u64,
    pub event_phase: EventPhase,
    pub variants: Vec<MechanismVariant>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractSpec {
    pub src: SwitchId,
    pub dst: SwitchId,
    pub strong: Time,
    pub weak: Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum E1Targets {
    /// Links on the initial routes first, then the rest.
    Path,
    Any,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomE1 {
    pub count: u32,
    pub outage: Time,
    pub targets: E1Targets,
    pub window: (Time, Time),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomE2 {
    pub count: u32,
    /// Each change multiplies the strong requirement in force by a factor
    /// drawn uniformly from this range.
    pub factor: (f64, f64),
    /// How long a change stays in effect; forever if `None`.
    pub duration: Option<Time>,
    pub window: (Time, Time),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub run: RunParams,
    pub topology_spec: TopologySpec,
    pub topology: Topology,
    pub flows: Vec<Flow>,
    pub contracts: Vec<ContractSpec>,
    pub explicit_events: Vec<(Time, Injection)>,
    pub random_e1: Option<RandomE1>,
    pub random_e2: Option<RandomE2>,
    /// SHA-256 of the source text, hex.
    pub source_hash: String,
}

pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut s = Scenario::from_toml_str(&text)?;
    if s.run.name.is_empty() {
        s.run.name = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(s)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text)?;
        let source_hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        build(raw, source_hash)
    }

    /// Seeds `base_seed .. base_seed + seeds`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.run.seeds as u64).map(|i| self.run.base_seed + i).collect()
    }

    /// The same scenario restricted to its first `k` flows.
    pub fn with_flow_count(&self, k: usize) -> Result<Scenario, ScenarioError> {
        if k == 0 || k > self.flows.len() {
            return Err(invalid(
                "sweep",
                format!("flow count {k} outside 1..={}", self.flows.len()),
            ));
        }
        let mut s = self.clone();
        s.flows.truncate(k);
        Ok(s)
    }

    /// The same scenario with every random event generator set to `k` events.
    pub fn with_event_count(&self, k: u32) -> Result<Scenario, ScenarioError> {
        if self.random_e1.is_none() && self.random_e2.is_none() {
            return Err(invalid(
                "sweep",
                "events sweep needs injections.random_e1 or injections.random_e2",
            ));
        }
        let mut s = self.clone();
        if let Some(e) = s.random_e1.as_mut() {
            e.count = k;
        }
        if let Some(e) = s.random_e2.as_mut() {
            e.count = k;
        }
        s.check_slots()?;
        Ok(s)
    }

    pub fn contract_store(&self) -> Result<ContractStore, ScenarioError> {
        let mut store = ContractStore::new();
        for c in &self.contracts {
            store.add_pair(c.src, c.dst, c.strong, c.weak)?;
        }
        Ok(store)
    }

    pub fn sim_config(&self, variant: MechanismVariant, seed: u64, mode: DelayMode) -> SimConfig {
        let r = &self.run;
        SimConfig {
            variant,
            seed,
            emulation_time: r.emulation_time,
            estimation_interval: r.estimation_interval,
            control: r.control.clone(),
            estimator: EstimatorConfig {
                probe_length: r.probe_length,
                mode,
            },
            recalculation: r.recalculation,
            detection_latency: r.detection_latency,
            queue_limit: r.queue_limit,
            access_delay: r.access_delay,
            record_packets: true,
        }
    }

    /// A ready-to-run kernel with the realized injection schedule for `seed`.
    pub fn kernel(&self, cfg: SimConfig) -> Result<Kernel, ScenarioError> {
        let schedule = self.schedule(cfg.seed);
        let mut k = Kernel::new(self.topology.clone(), self.flows.clone(), self.contract_store()?, cfg)?;
        k.inject_schedule(&schedule)?;
        Ok(k)
    }

    fn slots(&self) -> Vec<u64> {
        let interval = self.run.estimation_interval.as_nanos();
        let window = match (&self.random_e1, &self.random_e2) {
            (Some(a), Some(b)) => (a.window.0.max(b.window.0), a.window.1.min(b.window.1)),
            (Some(a), None) => a.window,
            (None, Some(b)) => b.window,
            (None, None) => return Vec::new(),
        };
        let first = window.0.as_nanos().div_ceil(interval);
        let end = window.1.as_nanos() / interval;
        (first..end).collect()
    }

    fn check_slots(&self) -> Result<(), ScenarioError> {
        let need = self.random_e1.as_ref().map_or(0, |e| e.count) + self.random_e2.as_ref().map_or(0, |e| e.count);
        let have = self.slots().len();
        if need as usize > have {
            return Err(invalid(
                "injections",
                format!("{need} random events need distinct estimation intervals but the window holds {have}"),
            ));
        }
        Ok(())
    }

    /// Links the initial routes of all flows use, in flow order.
    fn initial_route_links(&self) -> Vec<LinkId> {
        let control = ControlChannel {
            jitter: Time::ZERO,
            ..self.run.control.clone()
        };
        let est = EstimatorConfig {
            probe_length: self.run.probe_length,
            mode: DelayMode::OneWay,
        };
        let costs = run_estimation_cycle(
            &self.topology,
            &control,
            &est,
            Time::ZERO,
            0,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .costs;
        let mut links = Vec::new();
        for f in &self.flows {
            let src = self.topology.host(f.src_host).attachment;
            let dst = self.topology.host(f.dst_host).attachment;
            if let Ok(r) = find_path(&self.topology, &costs, src, dst) {
                for (a, b) in r.path.directed_links() {
                    let l = self.topology.link_between(a, b).expect("route follows links");
                    if !links.contains(&l) {
                        links.push(l);
                    }
                }
            }
        }
        links
    }

    /// Realizes explicit and random injections for `seed`, sorted by time.
    ///
    /// Random events occupy distinct estimation intervals chosen by one
    /// seeded shuffle; with both generators present E1 takes the even and
    /// E2 the odd positions of the shuffled order. Raising a count only adds
    /// outages and tightening spans: links are never more available and
    /// requirements never looser at any instant.
    pub fn schedule(&self, seed: u64) -> Vec<(Time, Injection)> {
        let mut events = self.explicit_events.clone();
        if self.random_e1.is_some() || self.random_e2.is_some() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1 << 32);
            let interval = self.run.estimation_interval.as_nanos();
            let mut slots: Vec<(u64, Time)> = self
                .slots()
                .into_iter()
                .map(|k| {
                    let phase = match self.run.event_phase {
                        EventPhase::Random => Time::from_nanos(rng.gen_range(0..interval)),
                        EventPhase::Offset(t) => t,
                    };
                    (k, Time::from_nanos(k * interval) + phase)
                })
                .collect();
            slots.shuffle(&mut rng);
            let both = self.random_e1.is_some() && self.random_e2.is_some();
            let position = |i: usize, second: bool| if both { 2 * i + usize::from(second) } else { i };

            if let Some(e1) = &self.random_e1 {
                let mut targets = Vec::new();
                let mut rest: Vec<LinkId> = self.topology.link_ids().collect();
                if e1.targets == E1Targets::Path {
                    let mut on_path = self.initial_route_links();
                    on_path.shuffle(&mut rng);
                    rest.retain(|l| !on_path.contains(l));
                    targets = on_path;
                }
                rest.shuffle(&mut rng);
                targets.extend(rest);
                for i in 0..e1.count as usize {
                    let at = slots[position(i, false)].1;
                    let l = self.topology.link(targets[i % targets.len()]);
                    events.push((at, Injection::LinkDown { a: l.a, b: l.b }));
                    let up = at + e1.outage;
                    if up <= self.run.emulation_time {
                        events.push((up, Injection::LinkUp { a: l.a, b: l.b }));
                    }
                }
            }
            if let Some(e2) = &self.random_e2 {
                let mut frng = ChaCha8Rng::seed_from_u64(seed);
                frng.set_stream(2 << 32);
                let n = self.contracts.len();
                let factors: Vec<f64> = (0..e2.count as usize * n)
                    .map(|_| {
                        if e2.factor.0 == e2.factor.1 {
                            e2.factor.0
                        } else {
                            frng.gen_range(e2.factor.0..e2.factor.1)
                        }
                    })
                    .collect();
                // requirement in force = base times the factors of all changes
                // still in effect; a change without duration stays in effect
                let spans: Vec<(Time, Option<Time>, usize)> = (0..e2.count as usize)
                    .map(|i| {
                        let at = slots[position(i, true)].1;
                        (at, e2.duration.map(|d| at + d), i)
                    })
                    .collect();
                let mut points: Vec<Time> = spans
                    .iter()
                    .flat_map(|&(a, b, _)| std::iter::once(a).chain(b.filter(|&b| b <= self.run.emulation_time)))
                    .collect();
                points.sort();
                points.dedup();
                let mut last: Vec<Option<Time>> = vec![None; n];
                for t in points {
                    for (p, c) in self.contracts.iter().enumerate() {
                        let scale: f64 = spans
                            .iter()
                            .filter(|&&(a, b, _)| a <= t && b.is_none_or(|b| t < b))
                            .map(|&(_, _, i)| factors[i * n + p])
                            .product();
                        let ped = Time::from_nanos(((c.strong.as_nanos() as f64) * scale).round().max(1.0) as u64);
                        if last[p] == Some(ped) || (last[p].is_none() && ped == c.strong) {
                            continue;
                        }
                        last[p] = Some(ped);
                        events.push((
                            t,
                            Injection::ContractChange {
                                contract: ContractId::of(PairId(p as u32), ContractKind::Strong),
                                ped,
                            },
                        ));
                    }
                }
            }
        }
        events.sort_by_key(|(t, _)| *t);
        events
    }
}

fn node(topology: &Topology, field: &str, name: &str) -> Result<SwitchId, ScenarioError> {
    topology
        .host_id(name)
        .map(|h| topology.host(h).attachment)
        .or_else(|| topology.switch_id(name))
        .ok_or_else(|| ScenarioError::UnknownNode {
            field: field.into(),
            name: name.into(),
        })
}

fn switch(topology: &Topology, field: &str, name: &str) -> Result<SwitchId, ScenarioError> {
    topology.switch_id(name).ok_or_else(|| ScenarioError::UnknownNode {
        field: field.into(),
        name: name.into(),
    })
}

fn window(raw: &Option<[Q; 2]>, field: &str, run: &RunParams) -> Result<(Time, Time), ScenarioError> {
    let w = match raw {
        Some([a, b]) => (a.time(field)?, b.time(field)?),
        None => (run.estimation_interval, run.emulation_time),
    };
    if w.0 >= w.1 || w.1 > run.emulation_time {
        return Err(invalid(field, "window must satisfy start < end <= emulation_time"));
    }
    Ok(w)
}

fn build(raw: RawScenario, source_hash: String) -> Result<Scenario, ScenarioError> {
    let r = raw.run;
    let opt_time = |q: &Option<Q>, field: &str, default: Time| q.as_ref().map_or(Ok(default), |q| q.time(field));
    let one_way = opt_time(&r.control_latency, "run.control_latency", Time::from_micros(250))?;
    let mut control = ControlChannel::uniform(ControlLatency::symmetric(one_way));
    control.jitter = opt_time(&r.control_jitter, "run.control_jitter", Time::ZERO)?;
    let variants = match &r.variants {
        Some(v) => v
            .iter()
            .map(|s| s.parse().map_err(|e| invalid("run.variants", format!("{e}"))))
            .collect::<Result<Vec<_>, _>>()?,
        None => MechanismVariant::ALL.to_vec(),
    };
    let event_phase = match &r.event_phase {
        None => EventPhase::Random,
        Some(q) if q.0.eq_ignore_ascii_case("random") => EventPhase::Random,
        Some(q) => EventPhase::Offset(q.time("run.event_phase")?),
    };
    let mut run = RunParams {
        name: r.name.clone().unwrap_or_default(),
        emulation_time: opt_time(&r.emulation_time, "run.emulation_time", Time::from_secs(150))?,
        estimation_interval: opt_time(&r.estimation_interval, "run.estimation_interval", Time::from_secs(10))?,
        control,
        recalculation: opt_time(&r.recalculation, "run.recalculation", Time::from_micros(100))?,
        detection_latency: r
            .detection_latency
            .as_ref()
            .map(|q| q.time("run.detection_latency"))
            .transpose()?,
        probe_length: r
            .probe_size
            .as_ref()
            .map_or(Ok(DEFAULT_PACKET_BITS), |q| q.bits("run.probe_size"))?,
        queue_limit: r.queue_limit.as_ref().map(|q| q.bits("run.queue_limit")).transpose()?,
        access_delay: opt_time(&r.access_delay, "run.access_delay", Time::ZERO)?,
        seeds: r.seeds.unwrap_or(DEFAULT_SEEDS),
        base_seed: r.base_seed.unwrap_or(1),
        event_phase,
        variants,
    };
    if run.estimation_interval == Time::ZERO {
        return Err(invalid("run.estimation_interval", "must be positive"));
    }
    if run.emulation_time < run.estimation_interval {
        return Err(invalid(
            "run.emulation_time",
            "must be at least one estimation interval",
        ));
    }
    if run.seeds == 0 {
        return Err(invalid("run.seeds", "must be positive"));
    }
    if let EventPhase::Offset(t) = run.event_phase {
        if t >= run.estimation_interval {
            return Err(invalid(
                "run.event_phase",
                "offset must be shorter than the estimation interval",
            ));
        }
    }

    // topology
    let t = raw.topology;
    let default_cap = t
        .link_defaults
        .capacity
        .as_ref()
        .map(|q| q.bandwidth("topology.link_defaults.capacity"))
        .transpose()?;
    let default_delay = t
        .link_defaults
        .delay
        .as_ref()
        .map(|q| q.time("topology.link_defaults.delay"))
        .transpose()?;
    let links = t
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let field = format!("topology.links[{i}]");
            let capacity = match &l.capacity {
                Some(q) => q.bandwidth(&field)?,
                None => default_cap.ok_or_else(|| invalid(&field, "no capacity and no link_defaults.capacity"))?,
            };
            let propagation_delay = match &l.delay {
                Some(q) => q.time(&field)?,
                None => default_delay.unwrap_or(Time::ZERO),
            };
            Ok(LinkSpec {
                a: l.a.clone(),
                b: l.b.clone(),
                capacity,
                propagation_delay,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let topology_spec = TopologySpec {
        switches: t.switches,
        hosts: t.hosts,
        links,
    };
    let topology = build_topology(&topology_spec)?;

    for (i, o) in r.control_overrides.iter().enumerate() {
        let field = format!("run.control_overrides[{i}]");
        let s = switch(&topology, &field, &o.switch)?;
        run.control.per_switch.insert(
            s,
            ControlLatency {
                down: o.down.time(&field)?,
                up: o.up.time(&field)?,
            },
        );
    }

    // flows
    let mut flows = Vec::new();
    for (i, f) in raw.flows.iter().enumerate() {
        let field = format!("flows[{i}]");
        let host = |name: &str| {
            topology.host_id(name).ok_or_else(|| ScenarioError::UnknownNode {
                field: field.clone(),
                name: name.into(),
            })
        };
        let (src_host, dst_host) = (host(&f.src)?, host(&f.dst)?);
        let rate = f.rate.bandwidth(&field)?;
        let packet_length = f
            .packet_size
            .as_ref()
            .map_or(Ok(DEFAULT_PACKET_BITS), |q| q.bits(&field))?;
        if rate.as_bps() == 0 || packet_length == 0 {
            return Err(invalid(&field, "rate and packet_size must be positive"));
        }
        let gap = Time::from_nanos(
            ((packet_length as u128 * 1_000_000_000 + rate.as_bps() as u128 / 2) / rate.as_bps() as u128) as u64,
        );
        let start = opt_time(&f.start, &field, Time::ZERO)?;
        let spacing = opt_time(&f.spacing, &field, Time::ZERO)?;
        let send_jitter = opt_time(&f.jitter, &field, Time::ZERO)?;
        for j in 0..f.count.unwrap_or(1) {
            let start_time = start + Time::from_nanos(spacing.as_nanos() * j as u64);
            // without an explicit volume the flow streams until the end of the run
            let total_volume = match &f.volume {
                Some(q) => q.bits(&field)?,
                None => {
                    let span = run.emulation_time.saturating_sub(start_time).as_nanos();
                    (span / gap.as_nanos().max(1) + 1) * packet_length
                }
            };
            let flow = Flow {
                id: FlowId(flows.len() as u32),
                src_host,
                dst_host,
                packet_length,
                total_volume,
                start_time,
                inter_packet_gap: gap,
                send_jitter,
            };
            flow.validate()?;
            flows.push(flow);
        }
    }

    // contracts
    let mut contracts = Vec::new();
    for (i, c) in raw.contracts.iter().enumerate() {
        let field = format!("contracts[{i}]");
        let strong = c.strong.time(&field)?;
        let weak = match &c.weak {
            Some(q) => q.time(&field)?,
            None => Time::from_nanos(strong.as_nanos().saturating_mul(2)),
        };
        contracts.push(ContractSpec {
            src: node(&topology, &field, &c.src)?,
            dst: node(&topology, &field, &c.dst)?,
            strong,
            weak,
        });
    }
    let mut store = ContractStore::new();
    for c in &contracts {
        store.add_pair(c.src, c.dst, c.strong, c.weak)?;
    }

    // injections
    let inj = raw.injections;
    let mut explicit_events = Vec::new();
    for (list, up, name) in [(&inj.link_down, false, "link_down"), (&inj.link_up, true, "link_up")] {
        for (i, e) in list.iter().enumerate() {
            let field = format!("injections.{name}[{i}]");
            let (a, b) = (switch(&topology, &field, &e.a)?, switch(&topology, &field, &e.b)?);
            let ev = if up {
                Injection::LinkUp { a, b }
            } else {
                Injection::LinkDown { a, b }
            };
            explicit_events.push((e.at.time(&field)?, ev));
        }
    }
    for (i, c) in inj.contract_change.iter().enumerate() {
        let field = format!("injections.contract_change[{i}]");
        let (src, dst) = (node(&topology, &field, &c.src)?, node(&topology, &field, &c.dst)?);
        let pair = store
            .pair_for(src, dst)
            .ok_or_else(|| invalid(&field, format!("no contract between {} and {}", c.src, c.dst)))?;
        let kind = match c.kind.as_deref().unwrap_or("strong") {
            "strong" => ContractKind::Strong,
            "weak" => ContractKind::Weak,
            other => return Err(invalid(&field, format!("kind must be strong or weak, not {other:?}"))),
        };
        explicit_events.push((
            c.at.time(&field)?,
            Injection::ContractChange {
                contract: ContractId::of(pair, kind),
                ped: c.ped.time(&field)?,
            },
        ));
    }
    let random_e1 = inj
        .random_e1
        .as_ref()
        .map(|e| -> Result<RandomE1, ScenarioError> {
            let targets = match e.targets.as_deref().unwrap_or("path") {
                "path" => E1Targets::Path,
                "any" => E1Targets::Any,
                other => {
                    return Err(invalid(
                        "injections.random_e1.targets",
                        format!("expected path or any, not {other:?}"),
                    ))
                }
            };
            Ok(RandomE1 {
                count: e.count,
                outage: e.outage.time("injections.random_e1.outage")?,
                targets,
                window: window(&e.window, "injections.random_e1.window", &run)?,
            })
        })
        .transpose()?;
    if random_e1.is_some() && topology.links().is_empty() {
        return Err(invalid("injections.random_e1", "topology has no links"));
    }
    let random_e2 = inj
        .random_e2
        .as_ref()
        .map(|e| -> Result<RandomE2, ScenarioError> {
            let (lo, hi) = (e.factor[0], e.factor[1]);
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(invalid("injections.random_e2.factor", "need 0 < low <= high"));
            }
            Ok(RandomE2 {
                count: e.count,
                factor: (lo, hi),
                duration: e
                    .duration
                    .as_ref()
                    .map(|q| q.time("injections.random_e2.duration"))
                    .transpose()?,
                window: window(&e.window, "injections.random_e2.window", &run)?,
            })
        })
        .transpose()?;
    if random_e2.is_some() && contracts.is_empty() {
        return Err(invalid("injections.random_e2", "no contracts to change"));
    }

    let s = Scenario {
        run,
        topology_spec,
        topology,
        flows,
        contracts,
        explicit_events,
        random_e1,
        random_e2,
        source_hash,
    };
    s.check_slots()?;
    // reject bad explicit injections up front
    let cfg = s.sim_config(MechanismVariant::RM, 0, DelayMode::OneWay);
    s.kernel(cfg)?;
    Ok(s)
}

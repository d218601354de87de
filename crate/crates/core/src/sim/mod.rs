//! Deterministic discrete-event kernel: packet transport with ground-truth
//! delays, periodic delay estimation, event injection and the embedded
//! controller.

mod log;
mod queue;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::log::{
    CheckCounts, ContractHistoryEntry, DropReason, Handling, LogEntry, OnlineCounts, PacketRecord, PathId, RoutedPath,
    RunLog,
};
pub use self::queue::EventQueue;

use crate::contracts::{AssumptionTag, ContractError, ContractId, ContractKind, ContractStore, FaultCause, PairId};
use crate::llde::{run_estimation_cycle, CostMatrix, CycleRecord, EstimatorConfig};
use crate::model::{
    transmission_delay, ControlChannel, Flow, FlowError, FlowId, LinkId, LinkState, Path, PathError, SwitchId, Time,
    Topology,
};
use crate::resilience::{
    current_ed, evaluate, execute_rs1, execute_rs2, execute_rs3, monitor_contract_change, monitor_link_failure,
    proactive_cycle, CycleAction, Decision, EventKind, EventNotification, InstalledRoute, MechanismVariant, Outcome,
    Strategy, DEFAULT_RECALCULATION,
};
use crate::routing::{find_path, RouteResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub variant: MechanismVariant,
    pub seed: u64,
    pub emulation_time: Time,
    pub estimation_interval: Time,
    pub control: ControlChannel,
    pub estimator: EstimatorConfig,
    /// Path-finder compute cost charged to every restoration.
    pub recalculation: Time,
    /// Overrides the E1 port-status latency.
    pub detection_latency: Option<Time>,
    /// Drop-tail limit of each egress buffer in bits; unbounded if `None`.
    pub queue_limit: Option<u64>,
    /// Fixed host-to-switch delay, paid once at each end of a flow.
    pub access_delay: Time,
    /// Keep one [`PacketRecord`] per packet in the log.
    pub record_packets: bool,
}

impl SimConfig {
    pub fn new(variant: MechanismVariant, seed: u64, emulation_time: Time) -> Self {
        SimConfig {
            variant,
            seed,
            emulation_time,
            estimation_interval: Time::from_secs(10),
            control: ControlChannel::default(),
            estimator: EstimatorConfig::default(),
            recalculation: DEFAULT_RECALCULATION,
            detection_latency: None,
            queue_limit: None,
            access_delay: Time::ZERO,
            record_packets: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Injection {
    LinkDown { a: SwitchId, b: SwitchId },
    LinkUp { a: SwitchId, b: SwitchId },
    ContractChange { contract: ContractId, ped: Time },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("cannot schedule at {at}, simulation time is already {now}")]
    SchedulePast { at: Time, now: Time },
    #[error("injection at {at} is outside the emulation window (0..={end})")]
    OutsideWindow { at: Time, end: Time },
    #[error("no link between {a} and {b}")]
    UnknownLink { a: SwitchId, b: SwitchId },
    #[error("unknown contract {0}")]
    UnknownContract(ContractId),
    #[error("unknown flow {0:?}")]
    UnknownFlow(FlowId),
    #[error("flow {flow:?} is stored at position {index}")]
    FlowOrder { flow: FlowId, index: usize },
    #[error("flow {0:?} references an unknown host")]
    UnknownHost(FlowId),
    #[error("estimation interval must be positive")]
    ZeroInterval,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Contract(#[from] ContractError),
}

#[derive(Clone, Copy, Debug)]
enum Payload {
    Cycle(u64),
    FlowStart(FlowId),
    Send(FlowId),
    Arrival { pkt: u32, hop: u16 },
    Inject(Injection),
    Monitor(EventNotification),
    Install { route: u32, path: PathId, generation: u64 },
}

struct InFlight {
    flow: FlowId,
    index: u64,
    bits: u64,
    sent_at: Time,
    path: PathId,
    epoch: u32,
    wait: Time,
}

struct Route {
    src: SwitchId,
    dst: SwitchId,
    pair: Option<PairId>,
    /// What the controller last decided.
    intended: Option<PathId>,
    /// What the switches currently forward on.
    dataplane: Option<PathId>,
    generation: u64,
    /// Occurrence time of the oldest event not yet answered.
    trigger: Option<Time>,
}

struct FlowState {
    flow: Flow,
    route: usize,
    next_index: u64,
    rng: ChaCha8Rng,
}

/// Directed hop of an interned path: link and whether it is crossed a->b.
#[derive(Clone, Copy)]
struct Hop {
    link: LinkId,
    forward: bool,
}

pub struct Kernel {
    cfg: SimConfig,
    truth: Topology,
    view: Topology,
    costs: CostMatrix,
    store: ContractStore,
    flows: Vec<FlowState>,
    routes: Vec<Route>,
    queue: EventQueue<Payload>,
    now: Time,
    step: u64,
    busy_until: Vec<Time>,
    epoch: Vec<u32>,
    inflight: Vec<Option<InFlight>>,
    free: Vec<u32>,
    paths: Vec<Path>,
    path_hops: Vec<Vec<Hop>>,
    path_ids: HashMap<Path, PathId>,
    ctrl_rng: ChaCha8Rng,
    packets: Vec<PacketRecord>,
    history: Vec<ContractHistoryEntry>,
    entries: Vec<LogEntry>,
    cycles: Vec<CycleRecord>,
    routed: Vec<RoutedPath>,
    checks: CheckCounts,
    online: OnlineCounts,
}

impl Kernel {
    pub fn new(topology: Topology, flows: Vec<Flow>, store: ContractStore, cfg: SimConfig) -> Result<Self, SimError> {
        if cfg.estimation_interval == Time::ZERO {
            return Err(SimError::ZeroInterval);
        }
        let mut routes: Vec<Route> = Vec::new();
        let mut states = Vec::with_capacity(flows.len());
        for (index, flow) in flows.into_iter().enumerate() {
            if flow.id.index() != index {
                return Err(SimError::FlowOrder { flow: flow.id, index });
            }
            flow.validate()?;
            let n_hosts = topology.hosts().len();
            if flow.src_host.index() >= n_hosts || flow.dst_host.index() >= n_hosts {
                return Err(SimError::UnknownHost(flow.id));
            }
            let src = topology.host(flow.src_host).attachment;
            let dst = topology.host(flow.dst_host).attachment;
            let route = match routes.iter().position(|r| r.src == src && r.dst == dst) {
                Some(i) => i,
                None => {
                    routes.push(Route {
                        src,
                        dst,
                        pair: store.pair_for(src, dst),
                        intended: None,
                        dataplane: None,
                        generation: 0,
                        trigger: None,
                    });
                    routes.len() - 1
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64 + 1);
            states.push(FlowState {
                flow,
                route,
                next_index: 0,
                rng,
            });
        }
        let n_links = topology.links().len();
        let mut k = Kernel {
            view: topology.clone(),
            truth: topology,
            costs: CostMatrix::new(),
            store,
            flows: states,
            routes,
            queue: EventQueue::default(),
            now: Time::ZERO,
            step: 0,
            busy_until: vec![Time::ZERO; n_links * 2],
            epoch: vec![0; n_links],
            inflight: Vec::new(),
            free: Vec::new(),
            paths: Vec::new(),
            path_hops: Vec::new(),
            path_ids: HashMap::new(),
            ctrl_rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            packets: Vec::new(),
            history: Vec::new(),
            entries: Vec::new(),
            cycles: Vec::new(),
            routed: Vec::new(),
            checks: CheckCounts::default(),
            online: OnlineCounts::default(),
            cfg,
        };
        for p in 0..k.store.pairs().len() {
            k.push_history(PairId(p as u32));
        }
        k.queue.push(Time::ZERO, Payload::Cycle(0));
        for i in 0..k.flows.len() {
            let start = k.flows[i].flow.start_time;
            if start <= k.cfg.emulation_time {
                k.queue.push(start, Payload::FlowStart(FlowId(i as u32)));
            }
        }
        Ok(k)
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.truth
    }

    pub fn contracts(&self) -> &ContractStore {
        &self.store
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    /// Data-plane path currently used by flows from `src` to `dst`.
    pub fn installed_path(&self, src: SwitchId, dst: SwitchId) -> Option<&Path> {
        self.routes
            .iter()
            .find(|r| r.src == src && r.dst == dst)
            .and_then(|r| r.dataplane)
            .map(|p| &self.paths[p.0 as usize])
    }

    /// Schedules a single injection.
    pub fn schedule(&mut self, at: Time, injection: Injection) -> Result<(), SimError> {
        if at < self.now {
            return Err(SimError::SchedulePast { at, now: self.now });
        }
        self.check_injection(at, &injection)?;
        self.queue.push(at, Payload::Inject(injection));
        Ok(())
    }

    /// Validates every injection, then schedules them all (or none).
    pub fn inject_schedule(&mut self, events: &[(Time, Injection)]) -> Result<(), SimError> {
        for (at, inj) in events {
            if *at < self.now {
                return Err(SimError::SchedulePast { at: *at, now: self.now });
            }
            self.check_injection(*at, inj)?;
        }
        for &(at, inj) in events {
            self.queue.push(at, Payload::Inject(inj));
        }
        Ok(())
    }

    fn check_injection(&self, at: Time, injection: &Injection) -> Result<(), SimError> {
        if at > self.cfg.emulation_time {
            return Err(SimError::OutsideWindow {
                at,
                end: self.cfg.emulation_time,
            });
        }
        match *injection {
            Injection::LinkDown { a, b } | Injection::LinkUp { a, b } => {
                self.truth.link_between(a, b).ok_or(SimError::UnknownLink { a, b })?;
            }
            Injection::ContractChange { contract, ped } => {
                self.store
                    .contract(contract)
                    .ok_or(SimError::UnknownContract(contract))?;
                if ped == Time::ZERO {
                    return Err(ContractError::NonPositivePed.into());
                }
            }
        }
        Ok(())
    }

    /// Sends one packet of `flow` along an explicit `path` at the current time.
    pub fn transmit_packet(&mut self, flow: FlowId, path: &Path) -> Result<(), SimError> {
        let bits = self
            .flows
            .get(flow.index())
            .ok_or(SimError::UnknownFlow(flow))?
            .flow
            .packet_length;
        path.validate_up(&self.truth)?;
        let pid = self.intern(path);
        let index = self.online.sent;
        self.inject_packet(flow, index, bits, pid);
        Ok(())
    }

    /// Processes every event due at or before `t_end`.
    pub fn run_until(&mut self, t_end: Time) {
        while let Some(at) = self.queue.peek_time() {
            if at > t_end {
                break;
            }
            let (at, payload) = self.queue.pop().expect("peeked");
            self.now = at;
            self.step += 1;
            self.handle(payload);
        }
        if t_end > self.now && !t_end.is_infinite() {
            self.now = t_end;
        }
    }

    /// Runs to the end of the emulation window, lets packets already in the
    /// network drain, and returns the log.
    pub fn finish(mut self) -> RunLog {
        self.run_until(self.cfg.emulation_time);
        while let Some((at, payload)) = self.queue.pop() {
            if let Payload::Arrival { pkt, hop } = payload {
                self.now = at;
                self.step += 1;
                self.on_arrival(pkt, hop);
            }
        }
        RunLog {
            variant: self.cfg.variant,
            seed: self.cfg.seed,
            emulation_time: self.cfg.emulation_time,
            paths: self.paths,
            flow_pairs: self.flows.iter().map(|f| self.routes[f.route].pair).collect(),
            packets: self.packets,
            contract_history: self.history,
            entries: self.entries,
            cycles: self.cycles,
            routed: self.routed,
            checks: self.checks,
            online: self.online,
        }
    }

    fn handle(&mut self, payload: Payload) {
        match payload {
            Payload::Cycle(k) => self.on_cycle(k),
            Payload::FlowStart(f) => self.on_flow_start(f),
            Payload::Send(f) => self.on_send(f),
            Payload::Arrival { pkt, hop } => self.on_arrival(pkt, hop),
            Payload::Inject(inj) => self.on_inject(inj),
            Payload::Monitor(n) => self.on_monitor(n),
            Payload::Install {
                route,
                path,
                generation,
            } => {
                let r = &mut self.routes[route as usize];
                if r.generation == generation {
                    r.dataplane = Some(path);
                }
            }
        }
    }

    // ---- data plane ----

    fn intern(&mut self, path: &Path) -> PathId {
        if let Some(&id) = self.path_ids.get(path) {
            return id;
        }
        let hops = path
            .directed_links()
            .map(|(a, b)| {
                let link = self.truth.link_between(a, b).expect("paths follow links");
                Hop {
                    link,
                    forward: self.truth.link(link).a == a,
                }
            })
            .collect();
        let id = PathId(self.paths.len() as u32);
        self.paths.push(path.clone());
        self.path_hops.push(hops);
        self.path_ids.insert(path.clone(), id);
        id
    }

    fn on_flow_start(&mut self, f: FlowId) {
        let ri = self.flows[f.index()].route;
        let (src, dst) = (self.routes[ri].src, self.routes[ri].dst);
        if let Ok(best) = find_path(&self.view, &self.costs, src, dst) {
            self.log_routed(&best);
            match self.routes[ri].intended {
                None => {
                    let pid = self.intern(&best.path);
                    let r = &mut self.routes[ri];
                    r.intended = Some(pid);
                    r.dataplane = Some(pid);
                    self.entries.push(LogEntry::RouteInstalled {
                        at: self.now,
                        effective_at: self.now,
                        src,
                        dst,
                        path: pid,
                    });
                }
                Some(cur) => {
                    let cur_ed = current_ed(&self.paths[cur.0 as usize], &self.view, &self.costs);
                    if best.ed < cur_ed {
                        self.install(ri, &best.path);
                    }
                }
            }
        }
        let fs = &mut self.flows[f.index()];
        let jitter = draw(&mut fs.rng, fs.flow.send_jitter);
        let at = fs.flow.start_time + jitter;
        self.queue.push(at, Payload::Send(f));
    }

    fn on_send(&mut self, f: FlowId) {
        let fs = &mut self.flows[f.index()];
        let index = fs.next_index;
        fs.next_index += 1;
        let bits = fs.flow.packet_length;
        let (start, gap, jitter_max, count) = (
            fs.flow.start_time,
            fs.flow.inter_packet_gap,
            fs.flow.send_jitter,
            fs.flow.packet_count(),
        );
        if index + 1 < count {
            let j = draw(&mut fs.rng, jitter_max);
            let next = Time::from_nanos(start.as_nanos() + (index + 1) * gap.as_nanos()) + j;
            if next <= self.cfg.emulation_time {
                self.queue.push(next, Payload::Send(f));
            }
        }
        match self.routes[fs.route].dataplane {
            Some(pid) => self.inject_packet(f, index, bits, pid),
            None => {
                self.online.sent += 1;
                self.finish_packet(
                    f,
                    index,
                    bits,
                    self.now,
                    None,
                    None,
                    Some(DropReason::NoRoute),
                    Time::ZERO,
                );
            }
        }
    }

    fn inject_packet(&mut self, flow: FlowId, index: u64, bits: u64, path: PathId) {
        self.online.sent += 1;
        let p = InFlight {
            flow,
            index,
            bits,
            sent_at: self.now,
            path,
            epoch: 0,
            wait: Time::ZERO,
        };
        let slot = match self.free.pop() {
            Some(s) => {
                self.inflight[s as usize] = Some(p);
                s
            }
            None => {
                self.inflight.push(Some(p));
                (self.inflight.len() - 1) as u32
            }
        };
        if self.cfg.access_delay == Time::ZERO {
            self.on_arrival(slot, 0);
        } else {
            self.queue
                .push(self.now + self.cfg.access_delay, Payload::Arrival { pkt: slot, hop: 0 });
        }
    }

    fn on_arrival(&mut self, slot: u32, hop: u16) {
        let hop = hop as usize;
        let (path, epoch) = {
            let p = self.inflight[slot as usize].as_ref().expect("live packet");
            (p.path, p.epoch)
        };
        let hops_len = self.path_hops[path.0 as usize].len();
        if hop > 0 {
            let prev = self.path_hops[path.0 as usize][hop - 1];
            if self.epoch[prev.link.index()] != epoch {
                return self.drop_packet(slot, DropReason::LinkDown);
            }
        }
        if hop == hops_len {
            let p = self.inflight[slot as usize].take().expect("live packet");
            self.free.push(slot);
            let delivered = self.now + self.cfg.access_delay;
            return self.finish_packet(
                p.flow,
                p.index,
                p.bits,
                p.sent_at,
                Some(delivered),
                Some(p.path),
                None,
                p.wait,
            );
        }
        let h = self.path_hops[path.0 as usize][hop];
        let link = self.truth.link(h.link);
        if !link.is_up() {
            return self.drop_packet(slot, DropReason::NoRoute);
        }
        let (capacity, prop) = (link.capacity, link.propagation_delay);
        let dir = h.link.index() * 2 + usize::from(!h.forward);
        let p = self.inflight[slot as usize].as_mut().expect("live packet");
        let start = self.busy_until[dir].max(self.now);
        if let Some(limit) = self.cfg.queue_limit {
            let backlog = (start - self.now).as_nanos() as u128 * capacity.as_bps() as u128 / 1_000_000_000;
            if backlog + p.bits as u128 > limit as u128 {
                return self.drop_packet(slot, DropReason::QueueOverflow);
            }
        }
        let td = transmission_delay(p.bits, capacity).expect("validated capacity");
        self.busy_until[dir] = start + td;
        p.wait += start - self.now;
        p.epoch = self.epoch[h.link.index()];
        self.queue.push(
            start + td + prop,
            Payload::Arrival {
                pkt: slot,
                hop: hop as u16 + 1,
            },
        );
    }

    fn drop_packet(&mut self, slot: u32, reason: DropReason) {
        let p = self.inflight[slot as usize].take().expect("live packet");
        self.free.push(slot);
        self.finish_packet(
            p.flow,
            p.index,
            p.bits,
            p.sent_at,
            None,
            Some(p.path),
            Some(reason),
            p.wait,
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_packet(
        &mut self,
        flow: FlowId,
        index: u64,
        bits: u64,
        sent_at: Time,
        delivered_at: Option<Time>,
        path: Option<PathId>,
        drop: Option<DropReason>,
        queue_wait: Time,
    ) {
        let o = &mut self.online;
        match delivered_at {
            Some(_) => {
                o.delivered += 1;
                o.delivered_bits += bits;
            }
            None => o.dropped += 1,
        }
        if let Some(pair) = self.routes[self.flows[flow.index()].route].pair {
            o.covered += 1;
            if let Some(d) = delivered_at {
                let delay = d - sent_at;
                let p = self.store.pair(pair);
                if delay <= p.active().ped {
                    o.satisfied += 1;
                }
                if delay <= p.strong.ped {
                    o.strong_satisfied += 1;
                }
            }
        }
        if self.cfg.record_packets {
            self.packets.push(PacketRecord {
                flow,
                index,
                bits,
                sent_at,
                delivered_at,
                drop,
                path,
                queue_wait,
                step: self.step,
            });
        }
    }

    // ---- injections ----

    fn on_inject(&mut self, inj: Injection) {
        self.entries.push(LogEntry::AssumptionViolated {
            at: self.now,
            tag: AssumptionTag::NoEventsBetweenCycles,
        });
        match inj {
            Injection::LinkDown { a, b } | Injection::LinkUp { a, b } => {
                let link = self.truth.link_between(a, b).expect("validated on schedule");
                let up = matches!(inj, Injection::LinkUp { .. });
                let state = if up { LinkState::Up } else { LinkState::Down };
                if !self.truth.set_link_state_by_id(link, state) {
                    return;
                }
                let i = link.index();
                self.busy_until[2 * i] = self.now;
                self.busy_until[2 * i + 1] = self.now;
                self.entries.push(LogEntry::LinkState { at: self.now, link, up });
                if !up {
                    self.epoch[i] = self.epoch[i].wrapping_add(1);
                    let n = monitor_link_failure(
                        &self.truth,
                        &self.cfg.control,
                        link,
                        self.now,
                        self.cfg.detection_latency,
                    );
                    self.notify(n);
                }
            }
            Injection::ContractChange { contract, ped } => {
                let change = self
                    .store
                    .modify_contract(contract, ped, self.now)
                    .expect("validated on schedule");
                if let Some(change) = change {
                    self.push_history(contract.pair());
                    let n = monitor_contract_change(&change);
                    self.entries.push(LogEntry::ContractChanged(change));
                    self.notify(n);
                }
            }
        }
    }

    fn notify(&mut self, n: EventNotification) {
        if self.cfg.variant.monitors() {
            self.queue.push(n.delivered_at, Payload::Monitor(n));
        } else {
            self.entries.push(LogEntry::Notification {
                notification: n,
                handling: Handling::Ignored,
            });
        }
    }

    fn on_monitor(&mut self, n: EventNotification) {
        let v = self.cfg.variant;
        let affected: Vec<usize> = match n.kind {
            EventKind::E1 { link } => {
                if self.truth.link(link).is_up() {
                    self.entries.push(LogEntry::Notification {
                        notification: n,
                        handling: Handling::Stale,
                    });
                    return;
                }
                if v.reactive {
                    self.view.set_link_state_by_id(link, LinkState::Down);
                    let l = self.truth.link(link);
                    self.costs.remove_link(l.a, l.b);
                }
                (0..self.routes.len())
                    .filter(|&i| {
                        self.routes[i]
                            .intended
                            .is_some_and(|p| self.path_hops[p.0 as usize].iter().any(|h| h.link == link))
                    })
                    .collect()
            }
            EventKind::E2 { contract } => (0..self.routes.len())
                .filter(|&i| self.routes[i].pair == Some(contract.pair()) && self.routes[i].intended.is_some())
                .collect(),
        };
        self.entries.push(LogEntry::Notification {
            notification: n,
            handling: if v.reactive {
                Handling::Immediate
            } else {
                Handling::Deferred
            },
        });
        for ri in affected {
            let r = &mut self.routes[ri];
            r.trigger = Some(r.trigger.map_or(n.occurred_at, |t| t.min(n.occurred_at)));
            if !v.reactive {
                continue;
            }
            let Some(pair) = r.pair else {
                // no contract: just get the traffic off a broken path
                let path = &self.paths[r.intended.expect("filtered").0 as usize];
                if current_ed(path, &self.view, &self.costs).is_infinite() {
                    if let Ok(best) = find_path(&self.view, &self.costs, r.src, r.dst) {
                        self.routes[ri].trigger = None;
                        self.install(ri, &best.path);
                    }
                }
                continue;
            };
            let cause = match n.kind {
                EventKind::E1 { .. } => FaultCause::LinkFailureEvent,
                EventKind::E2 { .. } => FaultCause::ContractChangeEvent,
            };
            let path = self.paths[r.intended.expect("filtered").0 as usize].clone();
            match evaluate(
                &v,
                self.store.pair(pair),
                &path,
                &self.view,
                &self.costs,
                self.now,
                cause,
            ) {
                Some(d) => self.apply_decision(ri, d),
                None => self.routes[ri].trigger = None,
            }
        }
    }

    // ---- controller ----

    fn on_cycle(&mut self, k: u64) {
        self.view = self.truth.clone();
        let out = run_estimation_cycle(
            &self.truth,
            &self.cfg.control,
            &self.cfg.estimator,
            self.now,
            k,
            &mut self.ctrl_rng,
        );
        self.costs = out.costs;
        self.cycles.extend(out.records);

        for r in &self.routes {
            if let (Some(pair), Some(p)) = (r.pair, r.intended) {
                let ed = current_ed(&self.paths[p.0 as usize], &self.view, &self.costs);
                self.checks.total += 1;
                if ed <= self.store.pair(pair).active().ped {
                    self.checks.satisfied += 1;
                }
            }
        }

        let v = self.cfg.variant;
        if v.proactive {
            // routes that never got a path try again
            for ri in 0..self.routes.len() {
                if self.routes[ri].intended.is_none() {
                    let (s, d) = (self.routes[ri].src, self.routes[ri].dst);
                    if let Ok(best) = find_path(&self.view, &self.costs, s, d) {
                        self.log_routed(&best);
                        self.install(ri, &best.path);
                    }
                }
            }
            let indices: Vec<usize> = (0..self.routes.len())
                .filter(|&i| self.routes[i].intended.is_some())
                .collect();
            let actions = {
                let installed: Vec<InstalledRoute<'_>> = indices
                    .iter()
                    .map(|&i| {
                        let r = &self.routes[i];
                        InstalledRoute {
                            src: r.src,
                            dst: r.dst,
                            pair: r.pair,
                            path: &self.paths[r.intended.expect("filtered").0 as usize],
                        }
                    })
                    .collect();
                proactive_cycle(&v, &self.store, &installed, &self.view, &self.costs, self.now)
            };
            let mut faulted = vec![false; self.routes.len()];
            for action in actions {
                match action {
                    CycleAction::Fault(d) => {
                        let ri = self.route_of_pair(d.pair);
                        faulted[ri] = true;
                        self.apply_decision(ri, d);
                    }
                    CycleAction::Reinstate { pair, route } => {
                        if let Some(ch) = self.store.switch_active(pair, ContractKind::Strong, self.now) {
                            self.entries.push(LogEntry::Activation(ch));
                            self.push_history(pair);
                        }
                        let ri = self.route_of_pair(pair);
                        self.log_routed(&route);
                        self.install(ri, &route.path);
                    }
                    CycleAction::Reoptimize { index, route } => {
                        self.log_routed(&route);
                        self.install(indices[index], &route.path);
                    }
                }
            }
            for (ri, f) in faulted.into_iter().enumerate() {
                if !f {
                    self.routes[ri].trigger = None;
                }
            }
        }

        let next = Time::from_nanos(self.cfg.estimation_interval.as_nanos().saturating_mul(k + 1));
        if next <= self.cfg.emulation_time {
            self.queue.push(next, Payload::Cycle(k + 1));
        }
    }

    fn route_of_pair(&self, pair: PairId) -> usize {
        self.routes
            .iter()
            .position(|r| r.pair == Some(pair))
            .expect("decisions only concern routed pairs")
    }

    fn apply_decision(&mut self, ri: usize, d: Decision) {
        let now = self.now;
        self.entries.push(LogEntry::Fault(d.fault.clone()));
        self.entries.push(LogEntry::Decision {
            at: now,
            pair: d.pair,
            strategy: d.strategy,
            path: d.route.as_ref().map(|r| r.path.switches().to_vec()),
            ed: d.route.as_ref().map(|r| r.ed),
        });
        if d.strategy == Strategy::Rs1Rs2 {
            if let Some(ch) = execute_rs2(&mut self.store, &self.cfg.variant, d.pair, now) {
                self.entries.push(LogEntry::Activation(ch));
                self.push_history(d.pair);
            }
        }
        if d.strategy == Strategy::Rs3 {
            let w = execute_rs3(&d.fault, d.route.as_ref(), now);
            self.entries.push(LogEntry::Warning(w));
        }
        let Some(route) = d.route else {
            self.entries.push(LogEntry::AssumptionViolated {
                at: now,
                tag: AssumptionTag::StablePath,
            });
            return;
        };
        self.log_routed(&route);
        let new_id = self.intern(&route.path);
        let intended = self.routes[ri].intended;
        let changed = intended != Some(new_id);
        if let Some(trigger) = self.routes[ri]
            .trigger
            .take()
            .or(changed.then_some(d.fault.detected_at))
        {
            let installed = intended.map(|p| &self.paths[p.0 as usize]);
            let rec = execute_rs1(
                &d.fault,
                trigger,
                &route.path,
                installed,
                &self.cfg.control,
                self.cfg.recalculation,
                Outcome::from(d.strategy),
            );
            self.entries.push(LogEntry::Restoration(rec));
        }
        if changed {
            self.install(ri, &route.path);
        }
    }

    /// Pushes `path` to the switches; it carries traffic once the slowest
    /// switch has its rule, after the path-finder compute time.
    fn install(&mut self, ri: usize, path: &Path) {
        let pid = self.intern(path);
        if self.routes[ri].intended == Some(pid) {
            return;
        }
        let effective_at =
            self.now + self.cfg.recalculation + crate::resilience::reassignment_delay(path, &self.cfg.control);
        let r = &mut self.routes[ri];
        r.intended = Some(pid);
        r.generation += 1;
        let (src, dst, generation) = (r.src, r.dst, r.generation);
        self.queue.push(
            effective_at,
            Payload::Install {
                route: ri as u32,
                path: pid,
                generation,
            },
        );
        self.entries.push(LogEntry::RouteInstalled {
            at: self.now,
            effective_at,
            src,
            dst,
            path: pid,
        });
    }

    fn log_routed(&mut self, r: &RouteResult) {
        let hops = r
            .path
            .directed_links()
            .map(|(a, b)| *self.costs.get(a, b).expect("routed paths have costs"))
            .collect();
        self.routed.push(RoutedPath {
            at: self.now,
            path: r.path.switches().to_vec(),
            ed: r.ed,
            hops,
        });
    }

    fn push_history(&mut self, pair: PairId) {
        let p = self.store.pair(pair);
        self.history.push(ContractHistoryEntry {
            pair,
            at: self.now,
            step: self.step,
            active_ped: p.active().ped,
            strong_ped: p.strong.ped,
        });
    }
}

fn draw(rng: &mut ChaCha8Rng, max: Time) -> Time {
    if max == Time::ZERO {
        Time::ZERO
    } else {
        Time::from_nanos(rng.gen_range(0..max.as_nanos()))
    }
}

//! The resilience manager: E1/E2 monitors, the control logic that maps
//! faults to response strategies, strategy execution with per-phase timing,
//! and the periodic (proactive) evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::{
    observe, ActivationChange, ContractChangeEvent, ContractId, ContractKind, ContractPair, ContractStore, FaultCause,
    FaultReport, PairId, Verdict,
};
use crate::llde::{estimate_path_delay, CostMatrix};
use crate::model::{ControlChannel, LinkId, Path, SwitchId, Time, Topology};
use crate::routing::{find_path, RouteResult};

/// Default path-finder compute cost charged per invocation.
pub const DEFAULT_RECALCULATION: Time = Time::from_micros(100);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantName {
    #[serde(rename = "woRM")]
    WoRm,
    #[serde(rename = "sRM")]
    SRm,
    #[serde(rename = "pRM")]
    PRm,
    #[serde(rename = "RM")]
    Rm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MechanismVariant {
    pub name: VariantName,
    pub proactive: bool,
    pub reactive: bool,
    pub strong_contracts: bool,
    pub weak_contracts: bool,
}

impl MechanismVariant {
    pub const WO_RM: Self = Self::new(VariantName::WoRm, false, false, false, false);
    pub const S_RM: Self = Self::new(VariantName::SRm, true, true, true, false);
    pub const P_RM: Self = Self::new(VariantName::PRm, true, false, true, true);
    pub const RM: Self = Self::new(VariantName::Rm, true, true, true, true);
    pub const ALL: [Self; 4] = [Self::WO_RM, Self::S_RM, Self::P_RM, Self::RM];

    const fn new(name: VariantName, proactive: bool, reactive: bool, strong: bool, weak: bool) -> Self {
        MechanismVariant {
            name,
            proactive,
            reactive,
            strong_contracts: strong,
            weak_contracts: weak,
        }
    }

    /// Whether observers run at all.
    pub fn monitors(&self) -> bool {
        self.strong_contracts
    }

    pub fn short_name(&self) -> &'static str {
        match self.name {
            VariantName::WoRm => "woRM",
            VariantName::SRm => "sRM",
            VariantName::PRm => "pRM",
            VariantName::Rm => "RM",
        }
    }
}

impl fmt::Display for MechanismVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SDN-{}", self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mechanism variant {0:?} (expected woRM, sRM, pRM or RM)")]
pub struct UnknownVariant(pub String);

impl FromStr for MechanismVariant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let short = t.strip_prefix("SDN-").unwrap_or(t);
        MechanismVariant::ALL
            .into_iter()
            .find(|v| v.short_name().eq_ignore_ascii_case(short))
            .ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    E1 { link: LinkId },
    E2 { contract: ContractId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventNotification {
    pub kind: EventKind,
    pub occurred_at: Time,
    pub delivered_at: Time,
}

/// E1: a link went down. The first port-status message from either endpoint
/// reaches the controller after that switch's uplink latency, unless
/// `detection_latency` overrides it.
pub fn monitor_link_failure(
    topology: &Topology,
    control: &ControlChannel,
    link: LinkId,
    occurred_at: Time,
    detection_latency: Option<Time>,
) -> EventNotification {
    let l = topology.link(link);
    let latency = detection_latency.unwrap_or_else(|| control.latency(l.a).up.min(control.latency(l.b).up));
    EventNotification {
        kind: EventKind::E1 { link },
        occurred_at,
        delivered_at: occurred_at + latency,
    }
}

/// E2: contract modifications are seen inside the controller without delay.
pub fn monitor_contract_change(change: &ContractChangeEvent) -> EventNotification {
    EventNotification {
        kind: EventKind::E2 {
            contract: change.contract,
        },
        occurred_at: change.at,
        delivered_at: change.at,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Recalculate and reassign the path.
    Rs1,
    /// Reassign the path and fall back to the weak contract.
    Rs1Rs2,
    /// Warn; traffic still moves to the best path found, if any.
    Rs3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub pair: PairId,
    pub fault: FaultReport,
    pub strategy: Strategy,
    /// `None` only for RS3 when no path exists.
    pub route: Option<RouteResult>,
}

/// Maps a fault to a response strategy.
pub fn control_logic(
    fault: FaultReport,
    variant: &MechanismVariant,
    pair: &ContractPair,
    topology: &Topology,
    costs: &CostMatrix,
) -> Decision {
    let (src, dst) = pair.endpoints();
    let route = find_path(topology, costs, src, dst).ok();
    let strategy = match &route {
        Some(r) if r.ed <= pair.strong.ped => Strategy::Rs1,
        Some(r) if variant.weak_contracts && r.ed <= pair.weak.ped => Strategy::Rs1Rs2,
        _ => Strategy::Rs3,
    };
    Decision {
        pair: pair.id(),
        fault,
        strategy,
        route,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Rs1Applied,
    Rs2Applied,
    Rs3Warned,
}

impl From<Strategy> for Outcome {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Rs1 => Outcome::Rs1Applied,
            Strategy::Rs1Rs2 => Outcome::Rs2Applied,
            Strategy::Rs3 => Outcome::Rs3Warned,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestorationRecord {
    pub fault: FaultReport,
    pub detection_delay: Time,
    pub recalculation_delay: Time,
    pub reassignment_delay: Time,
    pub total: Time,
    pub outcome: Outcome,
}

/// Time to push rules to every switch of `path` in parallel.
pub fn reassignment_delay(path: &Path, control: &ControlChannel) -> Time {
    path.switches()
        .iter()
        .map(|&s| control.latency(s).down)
        .max()
        .unwrap_or(Time::ZERO)
}

/// RS1: path recalculation and reassignment, timed phase by phase.
///
/// `trigger_at` is when the triggering event occurred. Rerouting onto the
/// path already installed costs no reassignment.
pub fn execute_rs1(
    fault: &FaultReport,
    trigger_at: Time,
    new_path: &Path,
    installed: Option<&Path>,
    control: &ControlChannel,
    recalculation: Time,
    outcome: Outcome,
) -> RestorationRecord {
    let detection_delay = fault.detected_at.saturating_sub(trigger_at);
    let reassignment = if installed == Some(new_path) {
        Time::ZERO
    } else {
        reassignment_delay(new_path, control)
    };
    RestorationRecord {
        fault: fault.clone(),
        detection_delay,
        recalculation_delay: recalculation,
        reassignment_delay: reassignment,
        total: detection_delay + recalculation + reassignment,
        outcome,
    }
}

/// RS2: fall back to the weak contract. Never applies to variants without
/// weak contracts.
pub fn execute_rs2(
    store: &mut ContractStore,
    variant: &MechanismVariant,
    pair: PairId,
    now: Time,
) -> Option<ActivationChange> {
    if !variant.weak_contracts {
        return None;
    }
    store.switch_active(pair, ContractKind::Weak, now)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub contract: ContractId,
    /// Best achievable delay, or `None` when no path exists.
    pub best_ed: Option<Time>,
    pub at: Time,
}

/// RS3: issue a warning.
pub fn execute_rs3(fault: &FaultReport, best: Option<&RouteResult>, now: Time) -> Warning {
    Warning {
        contract: fault.contract,
        best_ed: best.map(|r| r.ed),
        at: now,
    }
}

/// Estimated delay of an installed path in the controller's view;
/// `Time::INFINITE` when any hop is missing.
pub fn current_ed(path: &Path, topology: &Topology, costs: &CostMatrix) -> Time {
    let up = path.directed_links().all(|(a, b)| topology.is_up_between(a, b));
    if !up {
        return Time::INFINITE;
    }
    estimate_path_delay(path, costs).unwrap_or(Time::INFINITE)
}

/// Observes the active contract of `pair` on its installed path and, on a
/// fault, runs the control logic.
pub fn evaluate(
    variant: &MechanismVariant,
    pair: &ContractPair,
    installed: &Path,
    topology: &Topology,
    costs: &CostMatrix,
    now: Time,
    cause: FaultCause,
) -> Option<Decision> {
    let ed = current_ed(installed, topology, costs);
    match observe(pair.active(), ed, now, cause) {
        Verdict::Ok => None,
        Verdict::Fault(report) => Some(control_logic(report, variant, pair, topology, costs)),
    }
}

/// An installed route as seen by the periodic evaluation.
#[derive(Clone, Copy, Debug)]
pub struct InstalledRoute<'a> {
    pub src: SwitchId,
    pub dst: SwitchId,
    pub pair: Option<PairId>,
    pub path: &'a Path,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleAction {
    /// A contract fault and the control logic's answer.
    Fault(Decision),
    /// The weak contract is active but the strong one is satisfiable again.
    Reinstate { pair: PairId, route: RouteResult },
    /// No fault, but a strictly better path exists.
    Reoptimize { index: usize, route: RouteResult },
}

/// Periodic evaluation at an estimation-cycle boundary. Returns one action
/// per route that needs one, in route order.
pub fn proactive_cycle(
    variant: &MechanismVariant,
    store: &ContractStore,
    routes: &[InstalledRoute<'_>],
    topology: &Topology,
    costs: &CostMatrix,
    now: Time,
) -> Vec<CycleAction> {
    let mut actions = Vec::new();
    if !variant.proactive {
        return actions;
    }
    for (index, r) in routes.iter().enumerate() {
        let pair = r.pair.map(|p| store.pair(p));
        if let Some(pair) = pair.filter(|_| variant.monitors()) {
            if let Some(d) = evaluate(variant, pair, r.path, topology, costs, now, FaultCause::EstimationCycle) {
                actions.push(CycleAction::Fault(d));
                continue;
            }
        }
        let Ok(best) = find_path(topology, costs, r.src, r.dst) else {
            continue;
        };
        if let Some(pair) = pair {
            if pair.active_kind() == ContractKind::Weak && best.ed <= pair.strong.ped {
                actions.push(CycleAction::Reinstate {
                    pair: pair.id(),
                    route: best,
                });
                continue;
            }
        }
        if best.ed < current_ed(r.path, topology, costs) {
            actions.push(CycleAction::Reoptimize { index, route: best });
        }
    }
    actions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::ContractStore;
    use crate::model::{build_topology, Bandwidth, ControlLatency, LinkSpec, LinkState, TopologySpec};

    fn ms(v: u64) -> Time {
        Time::from_millis(v)
    }

    /// A-B-C plus a direct A-C link. Costs: AB=BC=2 ms, AC=`direct` ms.
    fn net(direct: u64) -> (Topology, CostMatrix) {
        let spec = TopologySpec {
            switches: vec!["A".into(), "B".into(), "C".into()],
            hosts: vec![],
            links: [("A", "B"), ("B", "C"), ("A", "C")]
                .into_iter()
                .map(|(a, b)| LinkSpec {
                    a: a.into(),
                    b: b.into(),
                    capacity: Bandwidth::gbps(1),
                    propagation_delay: Time::ZERO,
                })
                .collect(),
        };
        let topo = build_topology(&spec).unwrap();
        let mut costs = CostMatrix::new();
        for (x, y, c) in [(0, 1, 2), (1, 2, 2), (0, 2, direct)] {
            costs.insert(SwitchId(x), SwitchId(y), ms(c), Time::ZERO, Time::ZERO);
            costs.insert(SwitchId(y), SwitchId(x), ms(c), Time::ZERO, Time::ZERO);
        }
        (topo, costs)
    }

    fn store(strong: u64, weak: u64) -> ContractStore {
        let mut s = ContractStore::new();
        s.add_pair(SwitchId(0), SwitchId(2), ms(strong), ms(weak)).unwrap();
        s
    }

    fn fault(at: Time) -> FaultReport {
        FaultReport {
            contract: ContractId(0),
            observed_ed: Time::INFINITE,
            ped: ms(5),
            detected_at: at,
            cause: FaultCause::LinkFailureEvent,
        }
    }

    #[test]
    fn variant_flags_match_table() {
        let rows: Vec<_> = MechanismVariant::ALL
            .iter()
            .map(|v| {
                (
                    v.short_name(),
                    v.proactive,
                    v.reactive,
                    v.strong_contracts,
                    v.weak_contracts,
                )
            })
            .collect();
        assert_eq!(
            rows,
            vec![
                ("woRM", false, false, false, false),
                ("sRM", true, true, true, false),
                ("pRM", true, false, true, true),
                ("RM", true, true, true, true),
            ]
        );
        assert_eq!("SDN-pRM".parse::<MechanismVariant>().unwrap(), MechanismVariant::P_RM);
        assert_eq!("rm".parse::<MechanismVariant>().unwrap(), MechanismVariant::RM);
        assert!("xRM".parse::<MechanismVariant>().is_err());
        assert_eq!(MechanismVariant::WO_RM.to_string(), "SDN-woRM");
    }

    #[test]
    fn e1_delivery_uses_adjacent_uplink() {
        let (topo, _) = net(9);
        let control = ControlChannel::uniform(ControlLatency::symmetric(Time::from_micros(500)));
        let link = topo.link_between(SwitchId(0), SwitchId(1)).unwrap();
        let n = monitor_link_failure(&topo, &control, link, Time::from_secs(40), None);
        assert_eq!(n.delivered_at, Time::from_nanos(40_000_500_000));
        let n = monitor_link_failure(&topo, &control, link, Time::from_secs(40), Some(ms(2)));
        assert_eq!(n.delivered_at, Time::from_secs(40) + ms(2));
    }

    #[test]
    fn e2_delivery_is_immediate() {
        let mut s = store(5, 10);
        let ch = s
            .modify_contract(ContractId(0), ms(2), Time::from_secs(60))
            .unwrap()
            .unwrap();
        let n = monitor_contract_change(&ch);
        assert_eq!(
            (n.occurred_at, n.delivered_at),
            (Time::from_secs(60), Time::from_secs(60))
        );
        assert_eq!(
            n.kind,
            EventKind::E2 {
                contract: ContractId(0)
            }
        );
    }

    #[test]
    fn decision_table() {
        // best path A-B-C = 4 ms
        let (topo, costs) = net(9);
        let s = store(5, 10);
        let d = control_logic(
            fault(Time::ZERO),
            &MechanismVariant::RM,
            s.pair(PairId(0)),
            &topo,
            &costs,
        );
        assert_eq!(d.strategy, Strategy::Rs1);
        assert_eq!(d.route.unwrap().ed, ms(4));

        // best 4 ms > strong 3 ms, <= weak 6 ms
        let s = store(3, 6);
        let d = control_logic(
            fault(Time::ZERO),
            &MechanismVariant::RM,
            s.pair(PairId(0)),
            &topo,
            &costs,
        );
        assert_eq!(d.strategy, Strategy::Rs1Rs2);
        let d = control_logic(
            fault(Time::ZERO),
            &MechanismVariant::S_RM,
            s.pair(PairId(0)),
            &topo,
            &costs,
        );
        assert_eq!(d.strategy, Strategy::Rs3);
        assert!(d.route.is_some(), "RS3 still reports the best path");

        // best 4 ms > weak 3 ms
        let s = store(2, 3);
        let d = control_logic(
            fault(Time::ZERO),
            &MechanismVariant::RM,
            s.pair(PairId(0)),
            &topo,
            &costs,
        );
        assert_eq!(d.strategy, Strategy::Rs3);
        assert_eq!(execute_rs3(&d.fault, d.route.as_ref(), ms(1)).best_ed, Some(ms(4)));
    }

    #[test]
    fn partition_gives_rs3_without_path() {
        let (mut topo, costs) = net(9);
        topo.set_link_state(SwitchId(0), SwitchId(2), LinkState::Down).unwrap();
        topo.set_link_state(SwitchId(1), SwitchId(2), LinkState::Down).unwrap();
        let s = store(5, 10);
        let d = control_logic(
            fault(Time::ZERO),
            &MechanismVariant::RM,
            s.pair(PairId(0)),
            &topo,
            &costs,
        );
        assert_eq!((d.strategy, d.route.clone()), (Strategy::Rs3, None));
        assert_eq!(execute_rs3(&d.fault, None, Time::ZERO).best_ed, None);
    }

    #[test]
    fn rs1_phase_sum() {
        let control = ControlChannel::uniform(ControlLatency::symmetric(Time::from_micros(500)));
        let path = Path::new(vec![SwitchId(0), SwitchId(1), SwitchId(2)]).unwrap();
        let occurred = Time::from_secs(40);
        let f = fault(occurred + Time::from_micros(500));
        let r = execute_rs1(
            &f,
            occurred,
            &path,
            None,
            &control,
            DEFAULT_RECALCULATION,
            Outcome::Rs1Applied,
        );
        assert_eq!(r.detection_delay, Time::from_micros(500));
        assert_eq!(r.recalculation_delay, Time::from_micros(100));
        assert_eq!(r.reassignment_delay, Time::from_micros(500));
        assert_eq!(r.total, Time::from_micros(1100));

        let same = execute_rs1(
            &f,
            occurred,
            &path,
            Some(&path),
            &control,
            DEFAULT_RECALCULATION,
            Outcome::Rs1Applied,
        );
        assert_eq!(same.reassignment_delay, Time::ZERO);
        assert_eq!(same.total, Time::from_micros(600));
    }

    #[test]
    fn reassignment_is_parallel_max() {
        let mut control = ControlChannel::uniform(ControlLatency::symmetric(Time::from_micros(250)));
        control
            .per_switch
            .insert(SwitchId(1), ControlLatency { down: ms(3), up: ms(1) });
        let path = Path::new(vec![SwitchId(0), SwitchId(1), SwitchId(2)]).unwrap();
        assert_eq!(reassignment_delay(&path, &control), ms(3));
    }

    #[test]
    fn rs2_respects_variant() {
        let mut s = store(5, 10);
        assert!(execute_rs2(&mut s, &MechanismVariant::S_RM, PairId(0), Time::ZERO).is_none());
        assert!(execute_rs2(&mut s, &MechanismVariant::RM, PairId(0), Time::ZERO).is_some());
        assert_eq!(s.pair(PairId(0)).active().ped, ms(10));
        assert!(execute_rs2(&mut s, &MechanismVariant::RM, PairId(0), Time::ZERO).is_none());
    }

    #[test]
    fn cycle_detects_broken_path() {
        let (mut topo, mut costs) = net(9);
        let s = store(5, 10);
        let path = Path::new(vec![SwitchId(0), SwitchId(1), SwitchId(2)]).unwrap();
        topo.set_link_state(SwitchId(0), SwitchId(1), LinkState::Down).unwrap();
        costs.remove_link(SwitchId(0), SwitchId(1));
        let routes = [InstalledRoute {
            src: SwitchId(0),
            dst: SwitchId(2),
            pair: Some(PairId(0)),
            path: &path,
        }];
        let acts = proactive_cycle(&MechanismVariant::P_RM, &s, &routes, &topo, &costs, Time::from_secs(50));
        match &acts[..] {
            [CycleAction::Fault(d)] => {
                assert_eq!(d.fault.cause, FaultCause::EstimationCycle);
                assert_eq!(d.fault.observed_ed, Time::INFINITE);
                assert_eq!(d.strategy, Strategy::Rs1Rs2);
                assert_eq!(d.route.as_ref().unwrap().ed, ms(9));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(proactive_cycle(&MechanismVariant::WO_RM, &s, &routes, &topo, &costs, Time::ZERO).is_empty());
    }

    #[test]
    fn cycle_without_violation_is_quiet() {
        let (topo, costs) = net(9);
        let s = store(5, 10);
        let path = Path::new(vec![SwitchId(0), SwitchId(1), SwitchId(2)]).unwrap();
        let routes = [InstalledRoute {
            src: SwitchId(0),
            dst: SwitchId(2),
            pair: Some(PairId(0)),
            path: &path,
        }];
        assert!(proactive_cycle(&MechanismVariant::RM, &s, &routes, &topo, &costs, Time::ZERO).is_empty());
    }

    #[test]
    fn cycle_reinstates_strong_and_reoptimizes() {
        let (topo, costs) = net(9);
        let mut s = store(5, 10);
        s.switch_active(PairId(0), ContractKind::Weak, Time::ZERO);
        let direct = Path::new(vec![SwitchId(0), SwitchId(2)]).unwrap();
        let routes = [InstalledRoute {
            src: SwitchId(0),
            dst: SwitchId(2),
            pair: Some(PairId(0)),
            path: &direct,
        }];
        let acts = proactive_cycle(&MechanismVariant::RM, &s, &routes, &topo, &costs, Time::ZERO);
        assert!(matches!(&acts[..], [CycleAction::Reinstate { route, .. }] if route.ed == ms(4)));

        s.switch_active(PairId(0), ContractKind::Strong, Time::ZERO);
        let s2 = store(20, 40);
        let acts = proactive_cycle(&MechanismVariant::RM, &s2, &routes, &topo, &costs, Time::ZERO);
        assert!(matches!(&acts[..], [CycleAction::Reoptimize { index: 0, route }] if route.ed == ms(4)));
    }
}

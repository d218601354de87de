//! Switch/host/link graph.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::time::{Bandwidth, Time};

/// Index of a switch in its [`Topology`]. Ids order by declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HostId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl SwitchId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl HostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SwitchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Up,
    Down,
}

/// A bidirectional point-to-point link. Capacity and propagation delay are
/// the same in both directions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Link {
    pub a: SwitchId,
    pub b: SwitchId,
    pub capacity: Bandwidth,
    pub propagation_delay: Time,
    state: LinkState,
}

impl Link {
    pub fn state(&self) -> LinkState {
        self.state
    }

    pub fn is_up(&self) -> bool {
        self.state == LinkState::Up
    }

    /// The far end of the link as seen from `from`, if `from` is an endpoint.
    pub fn other(&self, from: SwitchId) -> Option<SwitchId> {
        if from == self.a {
            Some(self.b)
        } else if from == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Host {
    pub name: String,
    pub attachment: SwitchId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostSpec {
    pub name: String,
    pub switch: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub capacity: Bandwidth,
    pub propagation_delay: Time,
}

/// Unvalidated description of a topology, as read from a scenario file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub switches: Vec<String>,
    pub hosts: Vec<HostSpec>,
    pub links: Vec<LinkSpec>,
}

impl TopologySpec {
    /// `n` switches `S1..Sn` in a chain with identical links, and one host
    /// `H<i>` on each of the first `hosts` switches.
    pub fn linear(n: usize, hosts: usize, capacity: Bandwidth, propagation_delay: Time) -> Self {
        let switches: Vec<String> = (1..=n).map(|i| format!("S{i}")).collect();
        let links = switches
            .windows(2)
            .map(|w| LinkSpec {
                a: w[0].clone(),
                b: w[1].clone(),
                capacity,
                propagation_delay,
            })
            .collect();
        let hosts = (1..=hosts.min(n))
            .map(|i| HostSpec {
                name: format!("H{i}"),
                switch: format!("S{i}"),
            })
            .collect();
        TopologySpec { switches, hosts, links }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("{context} refers to unknown switch `{name}`")]
    UnknownSwitch { name: String, context: String },
    #[error("link {a}-{b} must have positive capacity")]
    NonPositiveCapacity { a: String, b: String },
    #[error("link {0}-{0} connects a switch to itself")]
    SelfLoop(String),
    #[error("parallel link between {a} and {b}")]
    ParallelLink { a: String, b: String },
    #[error("no link between {a} and {b}")]
    UnknownLink { a: String, b: String },
}

/// Validated network graph. Every link starts Up; link state changes only
/// through [`Topology::set_link_state`].
#[derive(Clone, Debug)]
pub struct Topology {
    switch_names: Vec<String>,
    switch_index: HashMap<String, SwitchId>,
    hosts: Vec<Host>,
    host_index: HashMap<String, HostId>,
    links: Vec<Link>,
    link_index: HashMap<(SwitchId, SwitchId), LinkId>,
    // sorted by neighbour id so that iteration order is deterministic
    adjacency: Vec<Vec<(SwitchId, LinkId)>>,
}

/// Validates `spec`. Either every invariant holds or nothing is built.
pub fn build_topology(spec: &TopologySpec) -> Result<Topology, TopologyError> {
    let mut names = HashSet::new();
    let mut switch_index = HashMap::new();
    for (i, name) in spec.switches.iter().enumerate() {
        if !names.insert(name.as_str()) {
            return Err(TopologyError::DuplicateId(name.clone()));
        }
        switch_index.insert(name.clone(), SwitchId(i as u32));
    }

    let resolve = |name: &str, context: String| {
        switch_index
            .get(name)
            .copied()
            .ok_or_else(|| TopologyError::UnknownSwitch {
                name: name.to_string(),
                context,
            })
    };

    let mut hosts = Vec::with_capacity(spec.hosts.len());
    let mut host_index = HashMap::new();
    for h in &spec.hosts {
        if !names.insert(h.name.as_str()) {
            return Err(TopologyError::DuplicateId(h.name.clone()));
        }
        let attachment = resolve(&h.switch, format!("host {}", h.name))?;
        host_index.insert(h.name.clone(), HostId(hosts.len() as u32));
        hosts.push(Host {
            name: h.name.clone(),
            attachment,
        });
    }

    let mut links = Vec::with_capacity(spec.links.len());
    let mut link_index = HashMap::new();
    let mut adjacency = vec![Vec::new(); spec.switches.len()];
    for l in &spec.links {
        let context = format!("link {}-{}", l.a, l.b);
        let a = resolve(&l.a, context.clone())?;
        let b = resolve(&l.b, context)?;
        if a == b {
            return Err(TopologyError::SelfLoop(l.a.clone()));
        }
        if l.capacity.as_bps() == 0 {
            return Err(TopologyError::NonPositiveCapacity {
                a: l.a.clone(),
                b: l.b.clone(),
            });
        }
        let key = (a.min(b), a.max(b));
        if link_index.contains_key(&key) {
            return Err(TopologyError::ParallelLink {
                a: l.a.clone(),
                b: l.b.clone(),
            });
        }
        let id = LinkId(links.len() as u32);
        link_index.insert(key, id);
        adjacency[a.index()].push((b, id));
        adjacency[b.index()].push((a, id));
        links.push(Link {
            a,
            b,
            capacity: l.capacity,
            propagation_delay: l.propagation_delay,
            state: LinkState::Up,
        });
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }

    Ok(Topology {
        switch_names: spec.switches.clone(),
        switch_index,
        hosts,
        host_index,
        links,
        link_index,
        adjacency,
    })
}

impl Topology {
    pub fn switch_count(&self) -> usize {
        self.switch_names.len()
    }

    pub fn switches(&self) -> impl Iterator<Item = SwitchId> + '_ {
        (0..self.switch_names.len() as u32).map(SwitchId)
    }

    pub fn contains_switch(&self, id: SwitchId) -> bool {
        id.index() < self.switch_names.len()
    }

    pub fn switch_name(&self, id: SwitchId) -> &str {
        &self.switch_names[id.index()]
    }

    pub fn switch_id(&self, name: &str) -> Option<SwitchId> {
        self.switch_index.get(name).copied()
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn host(&self, id: HostId) -> &Host {
        &self.hosts[id.index()]
    }

    pub fn host_id(&self, name: &str) -> Option<HostId> {
        self.host_index.get(name).copied()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.links.len() as u32).map(LinkId)
    }

    pub fn link_between(&self, a: SwitchId, b: SwitchId) -> Option<LinkId> {
        self.link_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Neighbours of `s` (over links in any state), ordered by switch id.
    pub fn neighbors(&self, s: SwitchId) -> &[(SwitchId, LinkId)] {
        &self.adjacency[s.index()]
    }

    /// `true` when `a` and `b` are joined by a link that is currently Up.
    pub fn is_up_between(&self, a: SwitchId, b: SwitchId) -> bool {
        self.link_between(a, b).is_some_and(|l| self.links[l.index()].is_up())
    }

    /// Sets the state of the link between `a` and `b`. Returns whether the
    /// state actually changed.
    pub fn set_link_state(&mut self, a: SwitchId, b: SwitchId, state: LinkState) -> Result<bool, TopologyError> {
        let id = self.link_between(a, b).ok_or_else(|| TopologyError::UnknownLink {
            a: self.name_or_index(a),
            b: self.name_or_index(b),
        })?;
        Ok(self.set_link_state_by_id(id, state))
    }

    pub fn set_link_state_by_id(&mut self, id: LinkId, state: LinkState) -> bool {
        let link = &mut self.links[id.index()];
        let changed = link.state != state;
        link.state = state;
        changed
    }

    pub fn link_label(&self, id: LinkId) -> String {
        let l = self.link(id);
        format!("{}-{}", self.switch_name(l.a), self.switch_name(l.b))
    }

    fn name_or_index(&self, s: SwitchId) -> String {
        self.switch_names
            .get(s.index())
            .cloned()
            .unwrap_or_else(|| s.to_string())
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::topology::{LinkId, SwitchId, Topology};

/// Ordered switches from the ingress switch to the egress switch.
///
/// Ordering is lexicographic on the switch-id sequence, which routing uses as
/// its final tie-breaker.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<SwitchId>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("a path needs at least one switch")]
    Empty,
    #[error("switch {0} appears more than once")]
    RepeatedSwitch(SwitchId),
    #[error("no Up link between {0} and {1}")]
    NotConnected(SwitchId, SwitchId),
}

impl Path {
    pub fn new(switches: Vec<SwitchId>) -> Result<Self, PathError> {
        if switches.is_empty() {
            return Err(PathError::Empty);
        }
        for (i, s) in switches.iter().enumerate() {
            if switches[..i].contains(s) {
                return Err(PathError::RepeatedSwitch(*s));
            }
        }
        Ok(Path(switches))
    }

    pub fn single(s: SwitchId) -> Self {
        Path(vec![s])
    }

    pub fn switches(&self) -> &[SwitchId] {
        &self.0
    }

    pub fn src(&self) -> SwitchId {
        self.0[0]
    }

    pub fn dst(&self) -> SwitchId {
        self.0[self.0.len() - 1]
    }

    pub fn hops(&self) -> usize {
        self.0.len() - 1
    }

    /// Directed switch pairs along the path.
    pub fn directed_links(&self) -> impl Iterator<Item = (SwitchId, SwitchId)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    /// Whether the path traverses `link` in either direction.
    pub fn uses_link(&self, topology: &Topology, link: LinkId) -> bool {
        self.directed_links()
            .any(|(a, b)| topology.link_between(a, b) == Some(link))
    }

    /// Checks that every consecutive pair is joined by an Up link.
    pub fn validate_up(&self, topology: &Topology) -> Result<(), PathError> {
        for (a, b) in self.directed_links() {
            if !topology.is_up_between(a, b) {
                return Err(PathError::NotConnected(a, b));
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, topology: &'a Topology) -> impl fmt::Display + 'a {
        PathDisplay { path: self, topology }
    }
}

struct PathDisplay<'a> {
    path: &'a Path,
    topology: &'a Topology,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.path.switches().iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            f.write_str(self.topology.switch_name(*s))?;
        }
        Ok(())
    }
}

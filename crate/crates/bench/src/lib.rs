//! Fixtures shared by the benches.

use std::path::PathBuf;

use netguard_core::harness::{load_scenario, Scenario};
use netguard_core::{build_topology, Bandwidth, CostMatrix, LinkSpec, SwitchId, Time, Topology, TopologySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A `k` x `k` grid with random per-direction costs.
pub fn grid(k: usize, seed: u64) -> (Topology, CostMatrix) {
    let name = |r: usize, c: usize| format!("S{r}_{c}");
    let mut links = Vec::new();
    for r in 0..k {
        for c in 0..k {
            for (rr, cc) in [(r + 1, c), (r, c + 1)] {
                if rr < k && cc < k {
                    links.push(LinkSpec {
                        a: name(r, c),
                        b: name(rr, cc),
                        capacity: Bandwidth::gbps(1),
                        propagation_delay: Time::from_millis(1),
                    });
                }
            }
        }
    }
    let spec = TopologySpec {
        switches: (0..k * k).map(|i| name(i / k, i % k)).collect(),
        hosts: vec![],
        links,
    };
    let topo = build_topology(&spec).expect("grid is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut costs = CostMatrix::new();
    for l in topo.links() {
        for (a, b) in [(l.a, l.b), (l.b, l.a)] {
            let ld = Time::from_micros(rng.gen_range(100..5_000));
            costs.insert(a, b, ld, Time::from_micros(12), Time::ZERO);
        }
    }
    (topo, costs)
}

/// Opposite corners of a `k` x `k` grid.
pub fn corners(k: usize) -> (SwitchId, SwitchId) {
    (SwitchId(0), SwitchId((k * k - 1) as u32))
}

/// One of the shipped scenario files.
pub fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

//! Hand-built fixtures shared by unit tests.

use crate::constellation::{ConstellationSnapshot, GroundPoint, UserVisibility};
use crate::num::Vec3;
use crate::scenario::{RiskParams, Scenario, Slice, User, VnfKind, VnfType};

/// One slice per chain, `users[n]` users each, all at (0, 0) with a 150 ms
/// budget; unit criticality and isolation.
pub fn toy_scenario(
    chains: &[&[VnfKind]],
    users: &[usize],
    sats: usize,
    cap: f64,
    instances: usize,
) -> Scenario<f64> {
    let slices: Vec<Slice<f64>> = chains
        .iter()
        .zip(users)
        .enumerate()
        .map(|(n, (chain, &cnt))| Slice {
            id: n,
            name: format!("s{n}"),
            anchor: GroundPoint::new(0.0, 0.0),
            criticality: 1.0,
            users: (0..cnt)
                .map(|u| User {
                    id: u,
                    location: GroundPoint::new(0.0, 0.0),
                    delay_budget_ms: 150.0,
                })
                .collect(),
            chain: chain.to_vec(),
        })
        .collect();
    let n = slices.len();
    let vnf_types = VnfType::defaults();
    let risk = RiskParams {
        sensitivity: vnf_types.iter().map(|v| v.sensitivity).collect(),
        criticality: vec![1.0; n],
        isolation: vec![vec![1.0; n]; n],
    };
    Scenario::new(sats, slices, vnf_types, risk, cap, instances, 50).unwrap()
}

/// Satellites on a line `0 - 1 - ... - (n-1)`, every link `delay` ms.
/// `visible[u]` lists the satellites user `u` sees, each at `access` ms.
pub fn line_snapshot(
    n: usize,
    delay: f64,
    visible: Vec<Vec<usize>>,
    access: f64,
) -> ConstellationSnapshot<f64> {
    let links: Vec<_> = (1..n).map(|s| (s - 1, s, delay)).collect();
    let visibility = visible
        .into_iter()
        .map(|mut v| {
            v.sort_unstable();
            UserVisibility {
                elevation_deg: (0..n)
                    .map(|s| if v.contains(&s) { 45.0 } else { -10.0 })
                    .collect(),
                access_delay_ms: vec![access; n],
                visible: v,
            }
        })
        .collect();
    ConstellationSnapshot::from_links(0, vec![Vec3::default(); n], &links, visibility, 10.0)
}

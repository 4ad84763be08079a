//! Walker-Star constellation generation, circular-orbit propagation and the
//! per-epoch network snapshot (ISL graph, visibility, delays).
//!
//! The Earth is a sphere of radius 6371 km rotating at the sidereal rate;
//! orbits are circular Keplerian with no perturbations. At `t = 0` the
//! Earth-fixed and inertial frames coincide.

mod geometry;
mod paths;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use geometry::{access_delay_ms, elevation_deg, link_delay_ms, GroundPoint};
pub use paths::ShortestPaths;

use crate::error::{Error, Result};
use crate::num::{Real, Vec3};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;
pub const SIDEREAL_RATE_RAD_S: f64 = 7.292_115_9e-5;
pub const LIGHT_SPEED_KM_S: f64 = 299_792.458;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct WalkerConfig<T> {
    pub num_planes: usize,
    pub sats_per_plane: usize,
    pub altitude_km: T,
    pub inclination_deg: T,
    /// Planes are spread evenly over this RAAN arc (180° for a Star pattern).
    pub raan_spread_deg: T,
    /// RAAN of plane 0 at `t = 0`, which is also its Earth-fixed node longitude.
    pub raan_offset_deg: T,
    /// In-plane anomaly offset added per plane index.
    pub phasing_offset_deg: T,
    pub epoch_duration_s: T,
    pub num_epochs: usize,
    pub min_elevation_deg: T,
}

impl<T: Real> Default for WalkerConfig<T> {
    fn default() -> Self {
        Self {
            num_planes: 4,
            sats_per_plane: 15,
            altitude_km: T::lit(550.0),
            inclination_deg: T::lit(53.0),
            raan_spread_deg: T::lit(180.0),
            raan_offset_deg: T::lit(100.0),
            phasing_offset_deg: T::zero(),
            epoch_duration_s: T::lit(60.0),
            num_epochs: 15,
            min_elevation_deg: T::lit(10.0),
        }
    }
}

impl<T: Real> WalkerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("constellation: {m}")));
        if self.num_planes < 1 {
            return bad("num_planes must be >= 1");
        }
        if self.sats_per_plane < 1 {
            return bad("sats_per_plane must be >= 1");
        }
        if !(self.altitude_km > T::zero()) {
            return bad("altitude_km must be > 0");
        }
        if !(self.inclination_deg >= T::zero() && self.inclination_deg <= T::lit(180.0)) {
            return bad("inclination_deg must be within [0, 180]");
        }
        if !(self.epoch_duration_s > T::zero()) {
            return bad("epoch_duration_s must be > 0");
        }
        Ok(())
    }

    pub fn num_satellites(&self) -> usize {
        self.num_planes * self.sats_per_plane
    }

    pub fn orbit_radius_km(&self) -> T {
        T::lit(EARTH_RADIUS_KM) + self.altitude_km
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self) -> T {
        let a = self.orbit_radius_km();
        (T::lit(EARTH_MU_KM3_S2) / (a * a * a)).sqrt()
    }

    pub fn orbital_period_s(&self) -> T {
        T::TAU() / self.mean_motion()
    }
}

/// Orbital elements of one satellite at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteElements<T> {
    pub id: usize,
    pub plane: usize,
    pub slot: usize,
    pub raan_deg: T,
    /// Argument of latitude at `t = 0` (true anomaly for a circular orbit).
    pub anomaly_deg: T,
}

/// A validated Walker configuration together with its element table.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    pub config: WalkerConfig<T>,
    pub elements: Vec<SatelliteElements<T>>,
}

/// Builds the element table; satellite id = `plane * sats_per_plane + slot`.
pub fn build_walker_star<T: Real>(config: &WalkerConfig<T>) -> Result<Constellation<T>> {
    config.validate()?;
    let planes = T::from_count(config.num_planes);
    let per_plane = T::from_count(config.sats_per_plane);
    let mut elements = Vec::with_capacity(config.num_satellites());
    for plane in 0..config.num_planes {
        let p = T::from_count(plane);
        let raan = config.raan_offset_deg + config.raan_spread_deg / planes * p;
        for slot in 0..config.sats_per_plane {
            let anomaly =
                T::lit(360.0) / per_plane * T::from_count(slot) + config.phasing_offset_deg * p;
            elements.push(SatelliteElements {
                id: plane * config.sats_per_plane + slot,
                plane,
                slot,
                raan_deg: raan,
                anomaly_deg: anomaly,
            });
        }
    }
    Ok(Constellation {
        config: config.clone(),
        elements,
    })
}

impl<T: Real> Constellation<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Inertial position at elapsed time `t_s`.
    pub fn inertial_position(&self, sat: usize, t_s: T) -> Vec3<T> {
        let el = &self.elements[sat];
        let r = self.config.orbit_radius_km();
        let u = el.anomaly_deg.to_radians() + self.config.mean_motion() * t_s;
        let inc = self.config.inclination_deg.to_radians();
        let (su, cu) = u.sin_cos();
        let (si, ci) = inc.sin_cos();
        Vec3::new(r * cu, r * su * ci, r * su * si).rotate_z(el.raan_deg.to_radians())
    }

    /// Earth-fixed positions of every satellite at the start of `epoch`.
    pub fn propagate(&self, epoch: usize) -> Result<Vec<Vec3<T>>> {
        if epoch >= self.config.num_epochs {
            return Err(Error::EpochOutOfRange {
                epoch,
                num_epochs: self.config.num_epochs,
            });
        }
        let t = self.config.epoch_duration_s * T::from_count(epoch);
        let earth_angle = -T::lit(SIDEREAL_RATE_RAD_S) * t;
        Ok((0..self.len())
            .map(|s| self.inertial_position(s, t).rotate_z(earth_angle))
            .collect())
    }

    /// Undirected ISL set as `(min, max)` pairs: fore/aft links inside each
    /// plane plus a one-to-one cross-link matching between adjacent planes.
    ///
    /// Adjacent planes are matched greedily by current distance, so the
    /// matching moves as satellites slide past each other. With exactly two
    /// planes each plane faces the other on both sides; there the two cyclic
    /// slot offsets with the smallest total length are used, which keeps
    /// every node at degree 4.
    pub fn isl_pairs(&self, positions: &[Vec3<T>]) -> BTreeSet<(usize, usize)> {
        let p_count = self.config.num_planes;
        let per = self.config.sats_per_plane;
        let id = |p: usize, s: usize| p * per + s;
        let mut pairs = BTreeSet::new();
        let mut add = |a: usize, b: usize| {
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        };
        for p in 0..p_count {
            for s in 0..per {
                add(id(p, s), id(p, (s + 1) % per));
            }
        }
        let ranked_offsets = |p: usize, q: usize| -> Vec<usize> {
            let mut scored: Vec<(T, usize)> = (0..per)
                .map(|k| {
                    let total = (0..per)
                        .map(|s| positions[id(p, s)].distance(&positions[id(q, (s + k) % per)]))
                        .sum::<T>();
                    (total, k)
                })
                .collect();
            scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            scored.into_iter().map(|(_, k)| k).collect()
        };
        match p_count {
            0 | 1 => {}
            2 => {
                let offsets = ranked_offsets(0, 1);
                for &k in offsets.iter().take(2) {
                    for s in 0..per {
                        add(id(0, s), id(1, (s + k) % per));
                    }
                }
            }
            _ => {
                // greedy nearest-pair matching: shortest remaining pair first,
                // ties to the lower (s, ŝ)
                for p in 0..p_count {
                    let q = (p + 1) % p_count;
                    let mut cand: Vec<(T, usize, usize)> = (0..per)
                        .flat_map(|s| (0..per).map(move |t| (s, t)))
                        .map(|(s, t)| (positions[id(p, s)].distance(&positions[id(q, t)]), s, t))
                        .collect();
                    cand.sort_by(|a, b| {
                        a.0.partial_cmp(&b.0)
                            .unwrap()
                            .then((a.1, a.2).cmp(&(b.1, b.2)))
                    });
                    let mut used_p = vec![false; per];
                    let mut used_q = vec![false; per];
                    for (_, s, t) in cand {
                        if !used_p[s] && !used_q[t] {
                            used_p[s] = true;
                            used_q[t] = true;
                            add(id(p, s), id(q, t));
                        }
                    }
                }
            }
        }
        pairs
    }

    /// Full snapshot for `epoch`, with visibility computed for `users`
    /// (indexed by flat user id).
    pub fn snapshot(
        &self,
        epoch: usize,
        users: &[GroundPoint<T>],
    ) -> Result<ConstellationSnapshot<T>> {
        let positions = self.propagate(epoch)?;
        let links: Vec<_> = self
            .isl_pairs(&positions)
            .into_iter()
            .map(|(a, b)| (a, b, link_delay_ms(&positions[a], &positions[b])))
            .collect();
        let min_el = self.config.min_elevation_deg;
        let visibility = users
            .iter()
            .map(|g| UserVisibility::compute(&positions, g, min_el))
            .collect();
        Ok(ConstellationSnapshot::from_links(
            epoch, positions, &links, visibility, min_el,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslEdge<T> {
    pub from: usize,
    pub to: usize,
    pub delay_ms: T,
}

/// Per-user view of the constellation at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct UserVisibility<T> {
    /// Elevation of every satellite, degrees.
    pub elevation_deg: Vec<T>,
    /// Slant-range delay to every satellite, ms.
    pub access_delay_ms: Vec<T>,
    /// Satellites with elevation >= the minimum, ascending id.
    pub visible: Vec<usize>,
}

impl<T: Real> UserVisibility<T> {
    pub fn compute(positions: &[Vec3<T>], ground: &GroundPoint<T>, min_elevation_deg: T) -> Self {
        let elevation_deg: Vec<T> = positions.iter().map(|p| elevation_deg(p, ground)).collect();
        let access_delay_ms = positions
            .iter()
            .map(|p| access_delay_ms(p, ground))
            .collect();
        let visible = elevation_deg
            .iter()
            .enumerate()
            .filter(|(_, &e)| e >= min_elevation_deg)
            .map(|(s, _)| s)
            .collect();
        Self {
            elevation_deg,
            access_delay_ms,
            visible,
        }
    }

    pub fn is_visible(&self, sat: usize) -> bool {
        self.visible.binary_search(&sat).is_ok()
    }
}

/// Network state at one epoch. Read-only once built.
#[derive(Debug, Clone)]
pub struct ConstellationSnapshot<T> {
    pub epoch_index: usize,
    pub sat_positions: Vec<Vec3<T>>,
    /// Directed ISL list; every link appears in both directions.
    pub isl_edges: Vec<IslEdge<T>>,
    /// ISL neighbours of each satellite (excluding itself).
    pub neighborhoods: Vec<Vec<usize>>,
    /// Indexed by flat user id.
    pub visibility: Vec<UserVisibility<T>>,
    pub paths: ShortestPaths<T>,
    pub min_elevation_deg: T,
}

impl<T: Real> ConstellationSnapshot<T> {
    /// Builds a snapshot from an explicit undirected link list `(a, b, delay_ms)`.
    pub fn from_links(
        epoch_index: usize,
        sat_positions: Vec<Vec3<T>>,
        links: &[(usize, usize, T)],
        visibility: Vec<UserVisibility<T>>,
        min_elevation_deg: T,
    ) -> Self {
        let n = sat_positions.len();
        let mut isl_edges = Vec::with_capacity(links.len() * 2);
        let mut neighborhoods = vec![Vec::new(); n];
        for &(a, b, d) in links {
            isl_edges.push(IslEdge {
                from: a,
                to: b,
                delay_ms: d,
            });
            isl_edges.push(IslEdge {
                from: b,
                to: a,
                delay_ms: d,
            });
            neighborhoods[a].push(b);
            neighborhoods[b].push(a);
        }
        isl_edges.sort_by_key(|e| (e.from, e.to));
        for nb in &mut neighborhoods {
            nb.sort_unstable();
            nb.dedup();
        }
        let triples: Vec<_> = isl_edges
            .iter()
            .map(|e| (e.from, e.to, e.delay_ms))
            .collect();
        let paths = ShortestPaths::compute(n, &triples);
        Self {
            epoch_index,
            sat_positions,
            isl_edges,
            neighborhoods,
            visibility,
            paths,
            min_elevation_deg,
        }
    }

    pub fn num_satellites(&self) -> usize {
        self.sat_positions.len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighborhoods[a].binary_search(&b).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(planes: usize, per: usize) -> WalkerConfig<f64> {
        WalkerConfig {
            num_planes: planes,
            sats_per_plane: per,
            raan_offset_deg: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_constellation_has_sixty_satellites() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        assert_eq!(c.len(), 60);
    }

    #[test]
    fn single_satellite_degenerate() {
        let c = build_walker_star(&cfg(1, 1)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.elements[0].anomaly_deg, 0.0);
        assert_eq!(c.elements[0].raan_deg, 0.0);
        let snap = c.snapshot(0, &[]).unwrap();
        assert!(snap.isl_edges.is_empty());
    }

    #[test]
    fn two_planes_half_circle_spread() {
        let c = build_walker_star(&WalkerConfig {
            raan_spread_deg: 180.0,
            ..cfg(2, 3)
        })
        .unwrap();
        let raans: BTreeSet<i64> = c
            .elements
            .iter()
            .map(|e| e.raan_deg.round() as i64)
            .collect();
        assert_eq!(raans, BTreeSet::from([0, 90]));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(build_walker_star(&cfg(0, 3)).is_err());
        assert!(build_walker_star(&cfg(3, 0)).is_err());
        assert!(build_walker_star(&WalkerConfig {
            altitude_km: 0.0,
            ..cfg(1, 1)
        })
        .is_err());
        assert!(build_walker_star(&WalkerConfig {
            inclination_deg: 181.0,
            ..cfg(1, 1)
        })
        .is_err());
        assert!(build_walker_star(&WalkerConfig {
            epoch_duration_s: 0.0,
            ..cfg(1, 1)
        })
        .is_err());
    }

    #[test]
    fn epoch_zero_equals_initial_geometry() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        let pos = c.propagate(0).unwrap();
        for (s, p) in pos.iter().enumerate() {
            assert_eq!(*p, c.inertial_position(s, 0.0));
        }
    }

    #[test]
    fn radius_conserved_every_epoch() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        for e in 0..15 {
            for p in c.propagate(e).unwrap() {
                assert!((p.norm() - 6921.0).abs() < 1e-3);
            }
        }
        assert!(matches!(
            c.propagate(15),
            Err(Error::EpochOutOfRange { epoch: 15, .. })
        ));
    }

    #[test]
    fn full_period_returns_to_start() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        let period = c.config.orbital_period_s();
        // 2π·sqrt(a³/μ) for a = 6921 km
        assert!((period - 5_730.127_089).abs() < 1e-3, "{period}");
        for s in [0, 17, 59] {
            let a = c.inertial_position(s, 0.0);
            let b = c.inertial_position(s, period);
            assert!(a.distance(&b) < 1e-3);
        }
    }

    #[test]
    fn propagation_is_bit_identical() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        assert_eq!(c.propagate(7).unwrap(), c.propagate(7).unwrap());
    }

    #[test]
    fn degree_four_regular_and_symmetric() {
        for (p, s) in [(4, 15), (2, 3), (3, 5), (2, 8)] {
            let c = build_walker_star(&cfg(p, s)).unwrap();
            for e in 0..3 {
                let snap = c.snapshot(e, &[]).unwrap();
                for nb in &snap.neighborhoods {
                    assert_eq!(nb.len(), 4, "{p}x{s} epoch {e}");
                }
                for edge in &snap.isl_edges {
                    assert!(snap.isl_edges.iter().any(|r| r.from == edge.to
                        && r.to == edge.from
                        && r.delay_ms == edge.delay_ms));
                }
            }
        }
    }

    #[test]
    fn single_plane_is_a_ring() {
        let c = build_walker_star(&cfg(1, 6)).unwrap();
        let snap = c.snapshot(0, &[]).unwrap();
        assert!(snap.neighborhoods.iter().all(|n| n.len() == 2));
    }

    #[test]
    fn intra_plane_delay_is_chord() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        let snap = c.snapshot(3, &[]).unwrap();
        // chord = 2·6921·sin(π/15) = 2877.9136 km
        let expected = 2_877.913_624 / LIGHT_SPEED_KM_S * 1000.0;
        assert!((expected - 9.599_687).abs() < 1e-5);
        let e = snap
            .isl_edges
            .iter()
            .find(|e| e.from == 0 && e.to == 1)
            .unwrap();
        assert!((e.delay_ms - expected).abs() < 1e-6, "{}", e.delay_ms);
    }

    #[test]
    fn cross_links_change_over_time() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        let first = c.isl_pairs(&c.propagate(0).unwrap());
        let changed = (1..15).any(|e| c.isl_pairs(&c.propagate(e).unwrap()) != first);
        assert!(changed);
    }

    #[test]
    fn visibility_threshold_limits() {
        let c = build_walker_star(&cfg(4, 15)).unwrap();
        let pos = c.propagate(0).unwrap();
        // ground point directly below satellite 5
        let p = pos[5];
        let g = GroundPoint::new(
            (p.z / p.norm()).asin().to_degrees(),
            p.y.atan2(p.x).to_degrees(),
        );
        let all = UserVisibility::compute(&pos, &g, -90.0);
        assert_eq!(all.visible.len(), 60);
        let zen = UserVisibility::compute(&pos, &g, 90.0 - 1e-6);
        assert_eq!(zen.visible, vec![5]);
        let v = UserVisibility::compute(&pos, &g, 10.0);
        for s in 0..60 {
            assert_eq!(v.is_visible(s), v.elevation_deg[s] >= 10.0);
        }
    }

    #[test]
    fn snapshot_paths_satisfy_triangle_inequality() {
        let c = build_walker_star(&WalkerConfig::<f64>::default()).unwrap();
        let snap = c.snapshot(2, &[]).unwrap();
        let n = snap.num_satellites();
        for a in 0..n {
            for b in 0..n {
                let ab = snap.paths.delay(a, b).unwrap();
                for w in (0..n).step_by(7) {
                    let aw = snap.paths.delay(a, w).unwrap();
                    let wb = snap.paths.delay(w, b).unwrap();
                    assert!(ab <= aw + wb + 1e-9);
                }
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let c = build_walker_star(&WalkerConfig::<f32>::default()).unwrap();
        for p in c.propagate(4).unwrap() {
            assert!((p.norm() - 6921.0).abs() < 0.05);
        }
    }
}

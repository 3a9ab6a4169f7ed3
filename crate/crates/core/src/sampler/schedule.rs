//! Choice of the next edge to peel.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::law::{sample_event, PeelEvent, PeelLaw};
use crate::map::{Distances, HalfPlaneMap, PeelSite};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Exposed edge closest to the root, leftmost among ties.
    LeftmostNearRoot,
    /// The root edge while it is exposed, then as `LeftmostNearRoot`.
    RootAdjacent,
    /// Uniform among eligible exposed edges, from a dedicated random stream.
    UniformRandomExposed,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::LeftmostNearRoot => "leftmost_near_root",
            ScheduleKind::RootAdjacent => "root_adjacent",
            ScheduleKind::UniformRandomExposed => "uniform_random_exposed",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "leftmost_near_root" | "leftmost" => Ok(ScheduleKind::LeftmostNearRoot),
            "root_adjacent" => Ok(ScheduleKind::RootAdjacent),
            "uniform_random_exposed" | "uniform" => Ok(ScheduleKind::UniformRandomExposed),
            _ => Err(format!("unknown schedule {s:?}")),
        }
    }
}

/// A schedule together with the seed of its own random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    #[serde(default)]
    pub seed: u64,
}

/// Stream index used by random schedules.
pub const SELECT_STREAM: u64 = 1 << 40;

impl Schedule {
    pub fn new(kind: ScheduleKind, seed: u64) -> Self {
        Schedule { kind, seed }
    }
    pub fn leftmost() -> Self {
        Schedule::new(ScheduleKind::LeftmostNearRoot, 0)
    }
    pub fn selector(&self) -> Box<dyn EdgeSelector> {
        match self.kind {
            ScheduleKind::LeftmostNearRoot => Box::new(Leftmost),
            ScheduleKind::RootAdjacent => Box::new(RootFirst),
            ScheduleKind::UniformRandomExposed => Box::new(UniformExposed { rng: stream_rng(self.seed, SELECT_STREAM) }),
        }
    }

    /// Selector whose random choices, if any, come from `rng` instead of the
    /// schedule's own seed.
    pub fn selector_from(&self, rng: ChaCha8Rng) -> Box<dyn EdgeSelector> {
        match self.kind {
            ScheduleKind::UniformRandomExposed => Box::new(UniformExposed { rng }),
            _ => self.selector(),
        }
    }
}

/// What a selector may look at.
pub struct SelectView<'a> {
    pub map: &'a HalfPlaneMap,
    pub dist: &'a Distances,
    /// Eligible edges have an endpoint at distance below this; without it,
    /// at most one above the current minimum.
    pub radius: Option<u64>,
    /// State of the event stream. Honest selectors ignore it.
    pub event_rng: &'a ChaCha8Rng,
    pub law: Option<&'a PeelLaw>,
}

pub trait EdgeSelector {
    /// `None` when no exposed edge is eligible.
    fn select(&mut self, view: &SelectView) -> Option<PeelSite>;
}

/// A stretch of exposed unit edges sharing one frontier slot.
#[derive(Debug, Clone, Copy)]
struct Slot {
    site: SlotSite,
    /// distance of the left and right endpoints of the whole slot, and its length
    da: u64,
    db: u64,
    len: u64,
}

#[derive(Debug, Clone, Copy)]
enum SlotSite {
    Left,
    Edge(usize),
    Right,
}

impl Slot {
    /// Distance key of unit `t`: the smaller endpoint distance.
    fn key(&self, t: u64) -> u64 {
        let d = |s: u64| match self.site {
            SlotSite::Left => self.db.saturating_add(self.len - s),
            SlotSite::Right => self.da.saturating_add(s),
            SlotSite::Edge(_) => self.da.saturating_add(s).min(self.db.saturating_add(self.len - s)),
        };
        d(t).min(d(t + 1))
    }

    /// Smallest key and the leftmost unit attaining it.
    fn best(&self) -> (u64, u64) {
        match self.site {
            SlotSite::Left => (self.db, self.len - 1),
            SlotSite::Right => (self.da, 0),
            SlotSite::Edge(_) => {
                if self.da <= self.db {
                    (self.da, 0)
                } else {
                    (self.db, self.len - 1)
                }
            }
        }
    }

    fn site(&self, map: &HalfPlaneMap, t: u64) -> PeelSite {
        match self.site {
            SlotSite::Left => PeelSite::BeyondLeft(self.len - 1 - t),
            SlotSite::Right => PeelSite::BeyondRight(t),
            SlotSite::Edge(j) => {
                if map.store().run(map.frontier()[j]) == 1 {
                    PeelSite::Edge(j)
                } else {
                    PeelSite::RunUnit { index: j, unit: t }
                }
            }
        }
    }

    /// Units with key at most `lim`, as index ranges from both ends.
    fn eligible(&self, lim: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = 0;
        while t < self.len && self.key(t) <= lim {
            out.push(t);
            t += 1;
        }
        let mut s = self.len;
        while s > t && self.key(s - 1) <= lim {
            s -= 1;
            out.push(s);
        }
        out
    }
}

/// Exposed slots left to right: the unrevealed floor on each side (as long
/// as it can matter), then the frontier edges.
fn slots(map: &HalfPlaneMap, dist: &Distances, horizon: u64) -> Vec<Slot> {
    let s = map.store();
    let fr = map.frontier();
    let dl = dist.get(s.origin(fr[0]));
    let dr = dist.get(s.dest(*fr.last().unwrap()));
    let virt = |d: u64| horizon.saturating_sub(d).saturating_add(1).max(1);
    let mut out = Vec::with_capacity(fr.len() + 2);
    out.push(Slot { site: SlotSite::Left, da: u64::MAX, db: dl, len: virt(dl) });
    for (j, &h) in fr.iter().enumerate() {
        out.push(Slot { site: SlotSite::Edge(j), da: dist.get(s.origin(h)), db: dist.get(s.dest(h)), len: s.run(h) });
    }
    out.push(Slot { site: SlotSite::Right, da: dr, db: u64::MAX, len: virt(dr) });
    out
}

fn leftmost_site(view: &SelectView) -> Option<PeelSite> {
    let sl = slots(view.map, view.dist, 0);
    let mut best: Option<(u64, PeelSite)> = None;
    for slot in &sl {
        let (k, t) = slot.best();
        if best.map_or(true, |(bk, _)| k < bk) {
            best = Some((k, slot.site(view.map, t)));
        }
    }
    let (k, site) = best?;
    match view.radius {
        Some(r) if k >= r => None,
        _ => Some(site),
    }
}

pub struct Leftmost;

impl EdgeSelector for Leftmost {
    fn select(&mut self, view: &SelectView) -> Option<PeelSite> {
        leftmost_site(view)
    }
}

pub struct RootFirst;

impl EdgeSelector for RootFirst {
    fn select(&mut self, view: &SelectView) -> Option<PeelSite> {
        if let Ok(j) = view.map.frontier_index(view.map.root()) {
            let d = view.dist.get(view.map.root_vertex());
            if view.radius.map_or(true, |r| d < r) {
                return Some(PeelSite::Edge(j));
            }
        }
        leftmost_site(view)
    }
}

/// All eligible unit edges, left to right.
fn eligible_sites(view: &SelectView) -> Vec<PeelSite> {
    let lim = match view.radius {
        Some(0) => return Vec::new(),
        Some(r) => r - 1,
        None => {
            let dmin = slots(view.map, view.dist, 0).iter().map(|s| s.best().0).min().unwrap_or(0);
            dmin + 1
        }
    };
    let mut out = Vec::new();
    for slot in slots(view.map, view.dist, lim) {
        let mut ts = slot.eligible(lim);
        ts.sort_unstable();
        out.extend(ts.into_iter().map(|t| slot.site(view.map, t)));
    }
    out
}

pub struct UniformExposed {
    rng: ChaCha8Rng,
}

impl EdgeSelector for UniformExposed {
    fn select(&mut self, view: &SelectView) -> Option<PeelSite> {
        let sites = eligible_sites(view);
        if sites.is_empty() {
            return None;
        }
        Some(sites[self.rng.gen_range(0..sites.len())])
    }
}

/// Deliberately invalid schedule for testing: it looks at the next event
/// and keeps the root edge away from internal-vertex triangles.
pub struct PeekingSelector;

impl EdgeSelector for PeekingSelector {
    fn select(&mut self, view: &SelectView) -> Option<PeelSite> {
        let sites = eligible_sites(view);
        if sites.is_empty() {
            return None;
        }
        let law = view.law?;
        let next = sample_event(law, &mut view.event_rng.clone()).ok()?;
        let root = view.map.frontier_index(view.map.root()).ok().map(PeelSite::Edge);
        let others: Vec<PeelSite> = sites.iter().copied().filter(|s| Some(*s) != root).collect();
        match (next, root) {
            (PeelEvent::Alpha, _) if !others.is_empty() => others.last().copied(),
            (PeelEvent::Boundary { .. }, Some(r)) if sites.contains(&r) => Some(r),
            _ => Some(sites[0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn view_sites(map: &HalfPlaneMap, radius: Option<u64>) -> (Option<PeelSite>, Vec<PeelSite>) {
        let dist = map.bfs_distance(map.root_vertex());
        let rng = stream_rng(0, 0);
        let v = SelectView { map, dist: &dist, radius, event_rng: &rng, law: None };
        (leftmost_site(&v), eligible_sites(&v))
    }

    #[test]
    fn bare_floor_choices() {
        let m = HalfPlaneMap::new_floor(1).unwrap();
        let (best, all) = view_sites(&m, Some(1));
        // the unrevealed edge left of the root ties with the root edge and is further left
        assert_eq!(best, Some(PeelSite::BeyondLeft(0)));
        assert_eq!(all, vec![PeelSite::BeyondLeft(0), PeelSite::Edge(0)]);
        let (_, all2) = view_sites(&m, Some(2));
        assert_eq!(all2.len(), 4);
        assert_eq!(all2[0], PeelSite::BeyondLeft(1));
    }

    #[test]
    fn radius_exhausted() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        let hole = m.attach_jump(m.root(), crate::law::Side::Left, 1).unwrap();
        m.close_empty(hole).unwrap();
        // root vertex now covered; radius 1 leaves nothing to do
        let (best, all) = view_sites(&m, Some(1));
        assert_eq!(best, None);
        assert!(all.is_empty());
    }

    #[test]
    fn schedule_names() {
        for k in [ScheduleKind::LeftmostNearRoot, ScheduleKind::RootAdjacent, ScheduleKind::UniformRandomExposed] {
            assert_eq!(k.to_string().parse::<ScheduleKind>().unwrap(), k);
        }
    }
}

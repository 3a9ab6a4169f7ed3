//! Peeling event logs: a map as the sequence of steps that builds it.
//!
//! A log stores the events together with the patch glued into each hole, so
//! replaying it under its schedule rebuilds the map with the same ids.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::finite::read_code;
use super::halfplane::HalfPlaneMap;
use super::patch::{PatchCode, PatchToken};
use super::store::*;
use super::MapError;
use crate::law::{PeelEvent, Side};
use crate::rng::stream_rng;
use crate::sampler::schedule::{Schedule, SelectView};

type Result<T> = std::result::Result<T, MapError>;

pub const EVENT_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogStep {
    pub event: PeelEvent,
    /// Patch of the hole; may be left out for holes of perimeter at most 3
    /// without inner vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchCode>,
}

impl LogStep {
    pub fn new(event: PeelEvent, patch: Option<PatchCode>) -> Self {
        LogStep { event, patch }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    pub version: u32,
    pub initial_width: u64,
    /// Floor window of the final map.
    pub window: (i64, i64),
    pub schedule: Schedule,
    #[serde(default)]
    pub radius: Option<u64>,
    pub steps: Vec<LogStep>,
}

impl EventLog {
    pub fn new(initial_width: u64, schedule: Schedule, radius: Option<u64>) -> Self {
        EventLog {
            version: EVENT_LOG_VERSION,
            initial_width,
            window: (0, initial_width as i64),
            schedule,
            radius,
            steps: Vec::new(),
        }
    }

    pub fn events(&self) -> impl Iterator<Item = PeelEvent> + '_ {
        self.steps.iter().map(|s| s.event)
    }
}

fn extend_to(map: &mut HalfPlaneMap, window: (i64, i64)) -> Result<()> {
    let (lo, hi) = map.window();
    if window.0 > lo || window.1 < hi {
        return Err(MapError::Malformed(format!("window {window:?} is narrower than the replayed {:?}", (lo, hi))));
    }
    if window.0 < lo {
        map.extend(Side::Left, (lo - window.0) as u64, None)?;
    }
    if window.1 > hi {
        map.extend(Side::Right, (window.1 - hi) as u64, None)?;
    }
    Ok(())
}

/// Rebuilds the map described by `log`.
pub fn from_event_log(log: &EventLog) -> Result<HalfPlaneMap> {
    if log.version != EVENT_LOG_VERSION {
        return Err(MapError::Malformed(format!("unknown log version {}", log.version)));
    }
    let mut map = HalfPlaneMap::new_floor(log.initial_width)?;
    let mut sel = log.schedule.selector();
    let idle = stream_rng(0, 0);
    for (t, step) in log.steps.iter().enumerate() {
        let dist = map.bfs_distance(map.root_vertex());
        let view = SelectView { map: &map, dist: &dist, radius: log.radius, event_rng: &idle, law: None };
        let site = sel.select(&view).ok_or_else(|| MapError::Malformed(format!("no edge to peel at step {t}")))?;
        let h = map.prepare(site)?;
        map.peel_with_code(h, step.event, step.patch.as_ref())?;
    }
    extend_to(&mut map, log.window)?;
    Ok(map)
}

/// Replays `target` step by step under `schedule`, reading each event off
/// the geometry. Fails with `Unsupported` when the map is not a prefix of a
/// peeling under that schedule, or still has unexpanded parts.
pub fn to_event_log(target: &HalfPlaneMap, schedule: Schedule) -> Result<EventLog> {
    let t = target.store();
    if t.has_runs() {
        return Err(MapError::Unsupported("map has unrevealed floor runs".into()));
    }
    if t.face_records().iter().any(|f| !matches!(f.kind, FaceKind::Outer | FaceKind::Peeled | FaceKind::Patch)) {
        return Err(MapError::Unsupported("map has faces that are not revealed triangles".into()));
    }
    // Parallel edges are allowed, so the replay tracks half-edges, not vertex pairs.
    let floor_v: HashMap<i64, VertexId> = (0..t.vertex_count() as VertexId)
        .filter_map(|v| target.offset(v).map(|o| (o, v)))
        .collect();
    let floor_up: HashMap<i64, HalfEdgeId> = target
        .floor_lower()
        .into_iter()
        .map(|l| (target.offset(t.dest(l)).unwrap(), t.twin(l)))
        .collect();
    let mut log = EventLog::new(target.initial_width(), schedule, None);
    log.window = target.window();
    let mut r = HalfPlaneMap::new_floor(target.initial_width())?;
    let mut he: HashMap<HalfEdgeId, HalfEdgeId> = HashMap::new();
    let mut t2r: HashMap<VertexId, VertexId> = HashMap::new();
    let mut synced_v = 0usize;
    // new floor vertices and frontier edges of the replay, matched by offset
    let mut sync = |r: &HalfPlaneMap, he: &mut HashMap<HalfEdgeId, HalfEdgeId>, t2r: &mut HashMap<VertexId, VertexId>| -> Result<()> {
        let missing = |o: i64| MapError::Unsupported(format!("floor offset {o} is outside the map"));
        for v in synced_v..r.store().vertex_count() {
            if let Some(o) = r.offset(v as VertexId) {
                t2r.insert(*floor_v.get(&o).ok_or_else(|| missing(o))?, v as VertexId);
            }
        }
        synced_v = r.store().vertex_count();
        for &g in r.frontier() {
            if !he.contains_key(&g) {
                let o = r.offset(r.store().origin(g)).ok_or_else(|| MapError::Structure("unmatched frontier edge".into()))?;
                he.insert(g, *floor_up.get(&o).ok_or_else(|| missing(o))?);
            }
        }
        Ok(())
    };
    let mut sel = schedule.selector();
    let idle = stream_rng(0, 0);
    while r.store().face_count() < t.face_count() {
        sync(&r, &mut he, &mut t2r)?;
        let dist = r.bfs_distance(r.root_vertex());
        let view = SelectView { map: &r, dist: &dist, radius: None, event_rng: &idle, law: None };
        let site = sel.select(&view).ok_or_else(|| MapError::Unsupported("schedule has no edge to peel".into()))?;
        let h = r.prepare(site)?;
        sync(&r, &mut he, &mut t2r)?;
        let ht = he[&h];
        if t.face(ht) == OUTER {
            return Err(MapError::Unsupported("map is not a prefix of a peeling under this schedule".into()));
        }
        let e1 = t.next(ht);
        let e2 = t.next(e1);
        let w = t.dest(e1);
        let j = r.frontier_index(h)?;
        let rs = r.store();
        let side_i = match t2r.get(&w) {
            Some(&x) => {
                let fr = r.frontier();
                let p = if rs.origin(fr[0]) == x {
                    0
                } else {
                    fr.iter()
                        .position(|&g| rs.dest(g) == x)
                        .map(|q| q + 1)
                        .ok_or_else(|| MapError::Structure("apex is not on the frontier".into()))?
                };
                if p > j + 1 {
                    Some((Side::Right, (p - j - 1) as u64))
                } else if p < j {
                    Some((Side::Left, (j - p) as u64))
                } else {
                    return Err(MapError::Structure("apex is an endpoint of the peeled edge".into()));
                }
            }
            None => match t.kind(w) {
                VertexKind::Inner => None,
                VertexKind::Boundary { offset: o } => {
                    let (lo, hi) = r.window();
                    let last = r.frontier().len();
                    if o > hi {
                        Some((Side::Right, (last - j - 1) as u64 + (o - hi) as u64))
                    } else if o < lo {
                        Some((Side::Left, j as u64 + (lo - o) as u64))
                    } else {
                        return Err(MapError::Structure(format!("floor vertex at {o} was not matched")));
                    }
                }
            },
        };
        let Some((side, i)) = side_i else {
            let x = r.attach_alpha(h)?;
            t2r.insert(w, x);
            he.insert(r.frontier()[j], t.twin(e2));
            he.insert(r.frontier()[j + 1], t.twin(e1));
            log.steps.push(LogStep::new(PeelEvent::Alpha, None));
            continue;
        };
        let hole = r.attach_jump(h, side, i)?;
        // the new frontier edge is the triangle side facing out
        let out_t = match side {
            Side::Right => t.twin(e2),
            Side::Left => t.twin(e1),
        };
        he.insert(r.store().twin(hole.side_edge), out_t);
        sync(&r, &mut he, &mut t2r)?;
        // path edges revealed by the jump itself are floor edges
        let rs = r.store();
        let path: Vec<HalfEdgeId> = hole
            .path
            .iter()
            .map(|g| match he.get(g) {
                Some(&x) => Ok(x),
                None => r
                    .offset(rs.origin(*g))
                    .and_then(|o| floor_up.get(&o).copied())
                    .ok_or_else(|| MapError::Unsupported("jump reaches past the floor of the map".into())),
            })
            .collect::<Result<_>>()?;
        let (closing, glued) = match side {
            Side::Right => (e1, e1 == path[0]),
            Side::Left => (e2, e2 == path[0]),
        };
        let code = if i == 1 && glued {
            PatchCode(vec![PatchToken::Empty])
        } else {
            let mut b = vec![t.twin(closing)];
            b.extend(path);
            read_code(t, b)?
        };
        let k = code.inner_count();
        r.fill_hole_code(hole, &code)?;
        log.steps.push(LogStep::new(PeelEvent::Boundary { side, i, k }, Some(code)));
    }
    Ok(log)
}

/// Event log under the leftmost schedule, the canonical form of a map.
pub fn canonical_log(map: &HalfPlaneMap) -> Result<EventLog> {
    to_event_log(map, Schedule::leftmost())
}

/// Two maps are the same when their canonical logs agree.
pub fn canonically_equal(a: &HalfPlaneMap, b: &HalfPlaneMap) -> Result<bool> {
    Ok(canonical_log(a)? == canonical_log(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::PeelLaw;
    use crate::sampler::schedule::ScheduleKind;
    use crate::sampler::peel_steps;

    #[test]
    fn empty_log_gives_bare_floor() {
        let log = EventLog::new(3, Schedule::leftmost(), None);
        assert_eq!(from_event_log(&log).unwrap(), HalfPlaneMap::new_floor(3).unwrap());
        let back = to_event_log(&HalfPlaneMap::new_floor(3).unwrap(), Schedule::leftmost()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn peeled_maps_round_trip() {
        let law: PeelLaw = "2/3".parse().unwrap();
        for kind in [ScheduleKind::LeftmostNearRoot, ScheduleKind::RootAdjacent, ScheduleKind::UniformRandomExposed] {
            for seed in 0..5 {
                let sch = Schedule::new(kind, seed);
                let (map, log) = peel_steps(&law, 100, seed, sch).unwrap();
                assert_eq!(from_event_log(&log).unwrap(), map, "{kind} {seed}");
                assert_eq!(to_event_log(&map, sch).unwrap(), log, "{kind} {seed}");
            }
        }
    }

    #[test]
    fn logs_serialise() {
        let law: PeelLaw = "4/5".parse().unwrap();
        let (_, log) = peel_steps(&law, 30, 9, Schedule::leftmost()).unwrap();
        let text = serde_json::to_string(&log).unwrap();
        let back: EventLog = serde_json::from_str(&text).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn canonical_equality_separates_maps() {
        let law: PeelLaw = "4/5".parse().unwrap();
        let (a, _) = peel_steps(&law, 40, 1, Schedule::leftmost()).unwrap();
        let (b, _) = peel_steps(&law, 40, 2, Schedule::leftmost()).unwrap();
        assert!(canonically_equal(&a, &a.clone()).unwrap());
        assert_eq!(canonically_equal(&a, &b).unwrap(), a == b);
    }
}

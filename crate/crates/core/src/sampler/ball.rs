//! Peeling explorations of the half-planar law.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{EdgeSelector, Schedule, SelectView};
use super::{phi_table, Result, SamplerError};
use crate::law::{sample_event_with, LawError, PeelEvent, PeelLaw, SampleLimits};
use crate::map::eventlog::{EventLog, LogStep};
use crate::map::patch::UniformDecider;
use crate::map::{Distances, FaceKind, HalfEdgeId, HalfPlaneMap, MapError, PatchCode, VertexId};
use crate::rng::{stream_rng, trial_streams};

#[derive(Debug, Clone)]
pub struct BallConfig {
    pub schedule: Schedule,
    /// Hole patches with perimeter plus inner count above this stay sealed
    /// until a vertex near the root needs them.
    pub seal_above: u64,
    pub max_steps: u64,
    pub max_half_edges: usize,
    pub limits: SampleLimits,
}

impl Default for BallConfig {
    fn default() -> Self {
        BallConfig {
            schedule: Schedule::leftmost(),
            seal_above: 3000,
            max_steps: 1_000_000,
            max_half_edges: 1 << 24,
            limits: SampleLimits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    StepCap,
    Resource,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub kind: AnomalyKind,
    pub message: String,
    pub steps: u64,
}

#[derive(Debug, Clone)]
pub struct Ball {
    pub map: HalfPlaneMap,
    pub radius: u64,
    pub steps: u64,
    pub events: Vec<PeelEvent>,
    /// Event drawn when the root edge itself was peeled, if it was.
    pub root_event: Option<PeelEvent>,
    pub anomaly: Option<Anomaly>,
}

pub(crate) struct StepEnv<'a> {
    pub law: &'a PeelLaw,
    pub limits: SampleLimits,
    pub seal_above: Option<u64>,
    pub margin: Option<u64>,
    pub record: bool,
}

/// Draws one event and applies it at `h`; returns the event and, when
/// recording, the patch code of the hole.
pub(crate) fn peel_once(
    map: &mut HalfPlaneMap,
    h: HalfEdgeId,
    rng: &mut ChaCha8Rng,
    env: &StepEnv,
) -> Result<(PeelEvent, Option<PatchCode>)> {
    let ev = sample_event_with(env.law, rng, &env.limits)?;
    let code = apply_sampled(map, h, ev, rng, env)?;
    Ok((ev, code))
}

pub(crate) fn apply_sampled(
    map: &mut HalfPlaneMap,
    h: HalfEdgeId,
    ev: PeelEvent,
    rng: &mut ChaCha8Rng,
    env: &StepEnv,
) -> Result<Option<PatchCode>> {
    match ev {
        PeelEvent::Alpha => {
            map.attach_alpha(h)?;
            Ok(None)
        }
        PeelEvent::Boundary { side, i, k } => {
            let hole = map.attach_jump_with(h, side, i, env.margin)?;
            let mut dec = UniformDecider { rng, table: Some(phi_table()), seal_above: env.seal_above };
            let out = map.fill_with(hole, i == 1 && k == 0, k, &mut dec, env.record)?;
            Ok(out.code)
        }
    }
}

fn sealed_faces(map: &HalfPlaneMap) -> Vec<u32> {
    map.store()
        .face_records()
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f.kind, FaceKind::Sealed { .. }))
        .map(|(i, _)| i as u32)
        .collect()
}

fn expand_one(map: &mut HalfPlaneMap, face: u32, v: VertexId, rng: &mut ChaCha8Rng, seal_above: u64) -> Result<()> {
    let mut dec = UniformDecider { rng, table: Some(phi_table()), seal_above: Some(seal_above) };
    map.expand_sealed_at(face, v, &mut dec)?;
    Ok(())
}

/// Expands sealed faces until every vertex within `r − 2` of the root has
/// all its faces revealed, which makes every distance below `r` exact.
fn settle(map: &mut HalfPlaneMap, r: u64, rng: &mut ChaCha8Rng, seal_above: u64) -> Result<Distances> {
    loop {
        let dist = map.bfs_distance(map.root_vertex());
        if r < 2 {
            return Ok(dist);
        }
        let mut todo = Vec::new();
        for f in sealed_faces(map) {
            let s = map.store();
            let e = s.face_records()[f as usize].edge;
            if let Some(h) = s.cycle(e).into_iter().find(|&h| dist.get(s.origin(h)) <= r - 2) {
                todo.push((f, s.origin(h)));
            }
        }
        if todo.is_empty() {
            return Ok(dist);
        }
        for (f, v) in todo {
            if matches!(map.store().face_kind(f), FaceKind::Sealed { .. }) {
                expand_one(map, f, v, rng, seal_above)?;
            }
        }
    }
}

/// Expands sealed faces around `v` until all faces at `v` are triangles.
pub fn reveal_around(map: &mut HalfPlaneMap, v: VertexId, rng: &mut ChaCha8Rng, seal_above: u64) -> Result<()> {
    loop {
        let s = map.store();
        let hit = sealed_faces(map).into_iter().find(|&f| {
            let e = s.face_records()[f as usize].edge;
            s.cycle(e).iter().any(|&h| s.origin(h) == v)
        });
        match hit {
            Some(f) => expand_one(map, f, v, rng, seal_above)?,
            None => return Ok(()),
        }
    }
}

fn anomaly_of(e: &SamplerError, steps: u64) -> Option<Anomaly> {
    let kind = match e {
        SamplerError::Map(MapError::Resource { .. }) => AnomalyKind::Resource,
        SamplerError::Map(MapError::NumericLeak { .. }) | SamplerError::Law(LawError::NumericLeak { .. }) => AnomalyKind::Numeric,
        SamplerError::Law(LawError::JumpCap(_)) => AnomalyKind::Resource,
        _ => return None,
    };
    Some(Anomaly { kind, message: e.to_string(), steps })
}

/// Hull of the ball of radius `r` around the root, trial 0 of `seed`.
pub fn build_ball(law: &PeelLaw, r: u64, seed: u64, cfg: &BallConfig) -> Result<Ball> {
    let (mut ev_rng, _) = trial_streams(seed, 0);
    let mut sel = cfg.schedule.selector();
    build_ball_with(law, r, &mut ev_rng, sel.as_mut(), cfg)
}

pub fn build_ball_with(
    law: &PeelLaw,
    r: u64,
    rng: &mut ChaCha8Rng,
    selector: &mut dyn EdgeSelector,
    cfg: &BallConfig,
) -> Result<Ball> {
    if r == 0 {
        return Err(SamplerError::Domain("radius must be at least 1".into()));
    }
    let mut map = HalfPlaneMap::new_floor(1)?;
    map.set_half_edge_limit(cfg.max_half_edges);
    let env = StepEnv { law, limits: cfg.limits, seal_above: Some(cfg.seal_above), margin: Some(r + 1), record: false };
    let mut ball = Ball { map, radius: r, steps: 0, events: Vec::new(), root_event: None, anomaly: None };
    let res: Result<()> = (|| loop {
        let dist = settle(&mut ball.map, r, rng, cfg.seal_above)?;
        let view = SelectView { map: &ball.map, dist: &dist, radius: Some(r), event_rng: rng, law: Some(law) };
        let Some(site) = selector.select(&view) else { return Ok(()) };
        if ball.steps >= cfg.max_steps {
            return Err(SamplerError::Domain(format!("step cap {} reached", cfg.max_steps)));
        }
        let h = ball.map.prepare(site)?;
        let (ev, _) = peel_once(&mut ball.map, h, rng, &env)?;
        if h == ball.map.root() {
            ball.root_event = Some(ev);
        }
        ball.events.push(ev);
        ball.steps += 1;
    })();
    if let Err(e) = res {
        ball.anomaly = match anomaly_of(&e, ball.steps) {
            Some(a) => Some(a),
            None if ball.steps >= cfg.max_steps => {
                Some(Anomaly { kind: AnomalyKind::StepCap, message: e.to_string(), steps: ball.steps })
            }
            None => return Err(e),
        };
    }
    Ok(ball)
}

/// Hull property of a ball of radius `r`: no frontier vertex is closer than
/// `r` to the root, and every peeled face has a corner closer than `r`.
/// Faces of filled holes are exempt.
pub fn check_hull(map: &HalfPlaneMap, r: u64) -> std::result::Result<(), String> {
    let s = map.store();
    let dist = map.bfs_distance(map.root_vertex());
    for &g in map.frontier() {
        for v in [s.origin(g), s.dest(g)] {
            if dist.get(v) < r {
                return Err(format!("exposed vertex {v} at distance {}", dist.get(v)));
            }
        }
    }
    for (f, rec) in s.face_records().iter().enumerate() {
        if rec.kind == FaceKind::Peeled && s.cycle(rec.edge).iter().all(|&h| dist.get(s.origin(h)) >= r) {
            return Err(format!("peeled face {f} has no corner below distance {r}"));
        }
    }
    Ok(())
}

/// Inner vertices of the map, counting those inside sealed faces.
pub fn inner_vertex_total(map: &HalfPlaneMap) -> u64 {
    let s = map.store();
    let sealed: u64 = s
        .face_records()
        .iter()
        .map(|f| if let FaceKind::Sealed { inner, .. } = f.kind { inner } else { 0 })
        .sum();
    sealed + s.vertex_kinds().iter().filter(|k| **k == crate::map::VertexKind::Inner).count() as u64
}

/// Half-edge budget of `peel_steps`.
pub const PEEL_STEPS_HALF_EDGES: usize = 1 << 23;

/// Exactly `steps` peeling steps under `schedule`, with the event log.
pub fn peel_steps(law: &PeelLaw, steps: u64, seed: u64, schedule: Schedule) -> Result<(HalfPlaneMap, EventLog)> {
    let mut map = HalfPlaneMap::new_floor(1)?;
    map.set_half_edge_limit(PEEL_STEPS_HALF_EDGES);
    let mut rng = stream_rng(seed, 0);
    let mut sel = schedule.selector();
    let env = StepEnv { law, limits: SampleLimits::default(), seal_above: None, margin: None, record: true };
    let mut log = EventLog::new(1, schedule, None);
    for _ in 0..steps {
        let dist = map.bfs_distance(map.root_vertex());
        let view = SelectView { map: &map, dist: &dist, radius: None, event_rng: &rng, law: Some(law) };
        let site = sel.select(&view).ok_or_else(|| SamplerError::Domain("no exposed edge".into()))?;
        let h = map.prepare(site)?;
        let (event, code) = peel_once(&mut map, h, &mut rng, &env)?;
        log.steps.push(LogStep::new(event, code));
    }
    log.window = map.window();
    Ok((map, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::validate_halfplane;

    #[test]
    fn zero_alpha_ball_has_no_inner_vertex() {
        let law = PeelLaw::from_alpha(0.0).unwrap();
        for seed in 0..20 {
            let b = build_ball(&law, 2, seed, &BallConfig::default()).unwrap();
            assert!(b.anomaly.is_none());
            let inner = b.map.store().vertex_kinds().iter().filter(|k| **k == crate::map::VertexKind::Inner).count();
            assert_eq!(inner, 0);
            assert!(validate_halfplane(&b.map).is_ok());
        }
    }

    #[test]
    fn critical_ball_is_reproducible() {
        let law: PeelLaw = "2/3".parse().unwrap();
        let a = build_ball(&law, 1, 42, &BallConfig::default()).unwrap();
        let b = build_ball(&law, 1, 42, &BallConfig::default()).unwrap();
        assert_eq!(a.map, b.map);
        let r = validate_halfplane(&a.map);
        assert!(r.is_ok(), "{:?}", r.violations);
    }

    #[test]
    fn peel_steps_counts() {
        let law: PeelLaw = "4/5".parse().unwrap();
        let (m0, log0) = peel_steps(&law, 0, 1, Schedule::leftmost()).unwrap();
        assert_eq!(m0, HalfPlaneMap::new_floor(1).unwrap());
        assert!(log0.steps.is_empty());
        let (m, log) = peel_steps(&law, 50, 1, Schedule::leftmost()).unwrap();
        assert_eq!(log.steps.len(), 50);
        assert!(validate_halfplane(&m).is_ok());
    }
}

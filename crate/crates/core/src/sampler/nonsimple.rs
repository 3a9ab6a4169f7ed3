//! Non-simple triangulations: parallel edges with loops, and back.
//!
//! Expansion replaces an inner edge `{u, v}` by `G` parallel copies. The
//! `G − 1` faces between consecutive copies each get a loop at one end, which
//! turns them into triangles; the inside of each loop is the smallest
//! triangulation of a 1-gon, a single pendant edge to a new vertex. The core
//! undoes all of it: drop whatever lies inside loops, drop the loops, and
//! merge the parallel copies.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::{Result, SamplerError};
use crate::map::{FaceKind, FiniteMap, HalfEdgeId, HalfPlaneMap, MapError, Store, VertexKind, NONE, OUTER};
use crate::rng::stream_rng;

/// Triangulation used inside a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneGonFill {
    /// One new vertex joined to the loop's base.
    #[default]
    Pendant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonSimpleParams {
    /// P(G = g) = (1 − q_geo) q_geo^(g−1) copies per edge.
    pub q_geo: f64,
    /// Probability that a loop sits at the origin of the edge's even half-edge.
    pub gamma: f64,
    /// `α` of the law the map was drawn from; with `α > 0` loops must be
    /// placed symmetrically.
    pub source_alpha: Option<f64>,
    pub nu_left: OneGonFill,
    pub nu_right: OneGonFill,
}

impl NonSimpleParams {
    pub fn new(q_geo: f64, source_alpha: Option<f64>) -> Self {
        NonSimpleParams { q_geo, gamma: 0.5, source_alpha, nu_left: OneGonFill::Pendant, nu_right: OneGonFill::Pendant }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.q_geo) {
            return Err(SamplerError::Domain(format!("q_geo = {} outside [0, 1)", self.q_geo)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(SamplerError::Domain(format!("gamma = {} outside [0, 1]", self.gamma)));
        }
        if let Some(a) = self.source_alpha {
            if a > 0.0 && self.gamma != 0.5 {
                return Err(SamplerError::Domain(format!("gamma must be 1/2 when alpha = {a} > 0")));
            }
            if a > 0.0 && self.nu_left != self.nu_right {
                return Err(SamplerError::Domain("loop fillings must agree when alpha > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandStats {
    /// `multiplicity[g − 1]` edges got `g` copies.
    pub multiplicity: Vec<u64>,
    pub loops: u64,
    pub loops_at_origin: u64,
}

impl ExpandStats {
    pub fn edges(&self) -> u64 {
        self.multiplicity.iter().sum()
    }
}

fn expand_store<R: Rng + ?Sized>(s: &mut Store, p: &NonSimpleParams, rng: &mut R) -> Result<ExpandStats> {
    p.check()?;
    let mut stats = ExpandStats::default();
    let edges = s.half_edge_count();
    for h in (0..edges as HalfEdgeId).step_by(2) {
        let hb = s.twin(h);
        if s.face(h) == OUTER || s.face(hb) == OUTER {
            continue;
        }
        let mut g = 1usize;
        while rng.gen::<f64>() < p.q_geo {
            g += 1;
        }
        if stats.multiplicity.len() < g {
            stats.multiplicity.resize(g, 0);
        }
        stats.multiplicity[g - 1] += 1;
        if g == 1 {
            continue;
        }
        s.ensure_room(8 * (g - 1))?;
        let (u, v) = (s.origin(h), s.dest(h));
        // copies x_t: u→v and y_t: v→u, outermost ones are the original halves
        let mut x = Vec::with_capacity(g);
        let mut y = vec![hb];
        for _ in 0..g - 1 {
            let (a, b) = s.add_edge(u, v);
            x.push(a);
            y.push(b);
        }
        x.push(h);
        for t in 0..g {
            s.he[x[t] as usize].twin = y[t];
            s.he[y[t] as usize].twin = x[t];
        }
        for t in 1..g {
            let at_u = rng.gen::<f64>() < p.gamma;
            let c = if at_u { u } else { v };
            let (l, lb) = s.add_edge(c, c);
            let w = s.add_vertex(VertexKind::Inner);
            let (cw, wc) = s.add_edge(c, w);
            let d = s.add_face(FaceKind::NonSimple, x[t - 1]);
            if at_u {
                s.set_cycle(&[x[t - 1], y[t], l], d);
            } else {
                s.set_cycle(&[x[t - 1], l, y[t]], d);
            }
            let pf = s.add_face(FaceKind::NonSimple, lb);
            s.set_cycle(&[lb, cw, wc], pf);
            stats.loops += 1;
            stats.loops_at_origin += at_u as u64;
        }
    }
    Ok(stats)
}

/// Maps from old to new ids after dropping; `NONE` for dropped items.
fn renumber(keep: &[bool]) -> Vec<u32> {
    let mut next = 0u32;
    keep.iter()
        .map(|&k| {
            if k {
                next += 1;
                next - 1
            } else {
                NONE
            }
        })
        .collect()
}

fn core_store(s: &Store) -> std::result::Result<(Store, Vec<u32>), MapError> {
    let n = s.half_edge_count();
    let is_loop = |h: HalfEdgeId| s.origin(h) == s.dest(h);
    // faces reachable from the outer face without crossing a loop
    let mut reached = vec![false; s.face_count()];
    reached[OUTER as usize] = true;
    let mut stack = vec![OUTER];
    let mut by_face: Vec<Vec<HalfEdgeId>> = vec![Vec::new(); s.face_count()];
    for h in 0..n as HalfEdgeId {
        by_face[s.face(h) as usize].push(h);
    }
    while let Some(f) = stack.pop() {
        for &h in &by_face[f as usize] {
            if is_loop(h) {
                continue;
            }
            let g = s.face(s.twin(h));
            if !reached[g as usize] {
                reached[g as usize] = true;
                stack.push(g);
            }
        }
    }
    for (f, r) in reached.iter().enumerate() {
        if !r && s.face_kind(f as u32) != FaceKind::NonSimple {
            return Err(MapError::Structure(format!("face {f} is enclosed by a loop but not part of the expansion")));
        }
    }
    let mut twin: Vec<HalfEdgeId> = s.records().iter().map(|r| r.twin).collect();
    let mut keep_he = vec![true; n];
    let mut keep_face = reached.clone();
    for h in 0..n {
        if !reached[s.face(h as HalfEdgeId) as usize] || is_loop(h as HalfEdgeId) {
            keep_he[h] = false;
        }
    }
    for f in 0..s.face_count() {
        if !reached[f] || s.face_kind(f as u32) != FaceKind::NonSimple {
            continue;
        }
        let sides: Vec<HalfEdgeId> = by_face[f].iter().copied().filter(|&h| !is_loop(h)).collect();
        let [p, q] = sides[..] else {
            return Err(MapError::Structure(format!("face {f} is not a 2-gon once its loops are removed")));
        };
        let (a, b) = (twin[p as usize], twin[q as usize]);
        twin[a as usize] = b;
        twin[b as usize] = a;
        keep_he[p as usize] = false;
        keep_he[q as usize] = false;
        keep_face[f] = false;
    }
    let mut keep_v = vec![false; s.vertex_count()];
    for h in 0..n {
        if keep_he[h] {
            keep_v[s.origin(h as HalfEdgeId) as usize] = true;
        }
    }
    let he_id = renumber(&keep_he);
    let v_id = renumber(&keep_v);
    let f_id = renumber(&keep_face);
    let mut out = Store::new();
    out.limit = s.limit;
    out.faces.clear();
    for f in 0..s.face_count() {
        if keep_face[f] {
            let mut rec = s.face_records()[f];
            rec.edge = if rec.edge == NONE { NONE } else { he_id[rec.edge as usize] };
            if rec.edge == NONE && f as u32 != OUTER {
                return Err(MapError::Structure(format!("face {f} lost its half-edge")));
            }
            out.faces.push(rec);
        }
    }
    for v in 0..s.vertex_count() {
        if keep_v[v] {
            out.vert_kind.push(s.kind(v as u32));
            let o = s.vertex_out(v as u32);
            let o = if o != NONE && keep_he[o as usize] {
                o
            } else {
                (0..n as HalfEdgeId).find(|&h| keep_he[h as usize] && s.origin(h) == v as u32).unwrap_or(NONE)
            };
            out.vert_out.push(he_id[o as usize]);
        }
    }
    for h in 0..n {
        if !keep_he[h] {
            continue;
        }
        let r = s.he(h as HalfEdgeId);
        let mut nx = r.next;
        let mut guard = 0;
        while !keep_he[nx as usize] {
            // only dropped loops can sit inside a kept face cycle
            nx = s.next(nx);
            guard += 1;
            if guard > n {
                return Err(MapError::Structure("face cycle without kept half-edges".into()));
            }
        }
        out.he.push(crate::map::HalfEdgeRecord {
            twin: he_id[twin[h] as usize],
            next: he_id[nx as usize],
            origin: v_id[r.origin as usize],
            face: f_id[r.face as usize],
        });
    }
    out.prev = vec![NONE; out.he.len()];
    for h in 0..out.he.len() {
        let nx = out.he[h].next;
        out.prev[nx as usize] = h as HalfEdgeId;
    }
    for (&h, &l) in &s.runs {
        if keep_he[h as usize] {
            out.runs.insert(he_id[h as usize], l);
        }
    }
    Ok((out, he_id))
}

/// Expands every edge of the revealed map that is not on the outer face.
pub fn expand_nonsimple(map: &HalfPlaneMap, params: &NonSimpleParams, seed: u64) -> Result<(HalfPlaneMap, ExpandStats)> {
    let mut out = map.clone();
    let stats = expand_store(&mut out.store, params, &mut stream_rng(seed, 0))?;
    Ok((out, stats))
}

pub fn expand_finite(fm: &FiniteMap, params: &NonSimpleParams, seed: u64) -> Result<(FiniteMap, ExpandStats)> {
    let mut out = fm.clone();
    let stats = expand_store(&mut out.store, params, &mut stream_rng(seed, 0))?;
    out.n += stats.loops;
    out.general = true;
    Ok((out, stats))
}

/// Simple core of an expanded half-plane map.
pub fn core(map: &HalfPlaneMap) -> Result<HalfPlaneMap> {
    let (store, he_id) = core_store(&map.store)?;
    let mut out = map.clone();
    out.root = he_id[map.root as usize];
    out.frontier = map.frontier.iter().map(|&h| he_id[h as usize]).collect();
    if out.root == NONE || out.frontier.contains(&NONE) {
        return Err(MapError::Structure("boundary touched by the expansion".into()).into());
    }
    out.store = store;
    Ok(out)
}

pub fn core_finite(fm: &FiniteMap) -> Result<FiniteMap> {
    let (store, he_id) = core_store(&fm.store)?;
    let root = he_id[fm.root as usize];
    if root == NONE {
        return Err(MapError::Structure("boundary touched by the expansion".into()).into());
    }
    let n = store.vertex_kinds().iter().filter(|k| **k == VertexKind::Inner).count() as u64;
    Ok(FiniteMap { store, root, m: fm.m, n, general: false })
}

/// Number of edges that repeat an earlier edge between the same two vertices.
pub fn parallel_classes(s: &Store) -> usize {
    let mut seen = HashSet::new();
    let mut multi = 0;
    for h in 0..s.half_edge_count() as HalfEdgeId {
        let (a, b) = (s.origin(h), s.dest(h));
        if a < b && !seen.insert((a, b)) {
            multi += 1;
        }
    }
    multi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::PeelLaw;
    use crate::map::{validate_finite, validate_halfplane};
    use crate::sampler::{peel_steps, uniform_polygon, Schedule};

    #[test]
    fn zero_rate_is_identity() {
        let law: PeelLaw = "2/3".parse().unwrap();
        let (m, _) = peel_steps(&law, 60, 3, Schedule::leftmost()).unwrap();
        let (e, st) = expand_nonsimple(&m, &NonSimpleParams::new(0.0, Some(2.0 / 3.0)), 1).unwrap();
        assert_eq!(e, m);
        assert_eq!(st.loops, 0);
        assert_eq!(core(&m).unwrap(), m);
    }

    #[test]
    fn core_inverts_expand() {
        let law: PeelLaw = "4/5".parse().unwrap();
        for seed in 0..20 {
            let (m, _) = peel_steps(&law, 80, seed, Schedule::leftmost()).unwrap();
            let (e, st) = expand_nonsimple(&m, &NonSimpleParams::new(0.6, Some(0.8)), seed).unwrap();
            let r = validate_halfplane(&e);
            assert!(r.is_ok(), "{:?}", r.violations);
            assert!(st.loops > 0 || st.edges() == 0);
            if st.loops > 0 {
                assert!(parallel_classes(e.store()) > 0);
            }
            assert_eq!(core(&e).unwrap(), m);
        }
    }

    #[test]
    fn finite_round_trip() {
        for seed in 0..20 {
            let fm = uniform_polygon(5, 6, seed).unwrap();
            let (e, st) = expand_finite(&fm, &NonSimpleParams::new(0.5, Some(0.5)), seed).unwrap();
            let r = validate_finite(&e);
            assert!(r.is_ok(), "{:?}", r.violations);
            assert_eq!(e.inner_count(), fm.inner_count() + st.loops);
            let c = core_finite(&e).unwrap();
            assert!(c.inner_count() <= e.inner_count());
            assert_eq!(c, fm);
        }
    }

    #[test]
    fn symmetric_loops_required() {
        let mut p = NonSimpleParams::new(0.3, Some(0.5));
        p.gamma = 0.7;
        assert!(p.check().is_err());
        p.source_alpha = Some(0.0);
        assert!(p.check().is_ok());
    }
}

//! Structural checks.

use serde::Serialize;
use std::collections::HashSet;

use super::finite::FiniteMap;
use super::halfplane::HalfPlaneMap;
use super::store::*;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
    fn push(&mut self, msg: String) {
        if self.violations.len() < 64 {
            self.violations.push(msg);
        }
    }
}

fn check_store(s: &Store, general: bool, r: &mut ValidationReport) {
    let n = s.half_edge_count();
    let nv = s.vertex_count();
    let nf = s.face_count();
    if n % 2 != 0 {
        r.push(format!("odd half-edge count {n}"));
    }
    let mut has_prev = vec![false; n];
    for h in 0..n as HalfEdgeId {
        let rec = s.he(h);
        if rec.twin as usize >= n || rec.twin == h || s.twin(rec.twin) != h {
            r.push(format!("twin of {h} is not an involution"));
            continue;
        }
        if rec.next as usize >= n {
            r.push(format!("next of {h} out of range"));
            continue;
        }
        if rec.origin as usize >= nv || rec.face as usize >= nf {
            r.push(format!("half-edge {h} has a bad origin or face"));
            continue;
        }
        if has_prev[rec.next as usize] {
            r.push(format!("next is not a permutation at {}", rec.next));
        }
        has_prev[rec.next as usize] = true;
        if s.prev(rec.next) != h {
            r.push(format!("prev of {} is stale", rec.next));
        }
        if s.origin(rec.next) != s.dest(h) {
            r.push(format!("half-edge {h} does not end where its successor starts"));
        }
        if s.face(rec.next) != rec.face {
            r.push(format!("face label changes along the orbit of {h}"));
        }
        if !general && s.origin(h) == s.dest(h) {
            r.push(format!("self-loop at half-edge {h}"));
        }
        if s.run(h) != s.run(rec.twin) {
            r.push(format!("run length of {h} differs from its twin"));
        }
    }
    if !r.is_ok() {
        return;
    }
    for v in 0..nv as VertexId {
        let o = s.vertex_out(v);
        if o == NONE || s.origin(o) != v {
            r.push(format!("vertex {v} has no valid outgoing half-edge"));
        }
    }
    // every face record names one orbit, every orbit has a record
    let mut seen = vec![false; n];
    let mut orbit_faces = HashSet::new();
    for h in 0..n {
        if seen[h] {
            continue;
        }
        let cyc = s.cycle(h as HalfEdgeId);
        for &x in &cyc {
            seen[x as usize] = true;
        }
        let f = s.face(h as HalfEdgeId);
        if !orbit_faces.insert(f) {
            r.push(format!("face {f} has two orbits"));
            continue;
        }
        let kind = s.face_kind(f);
        match kind {
            FaceKind::Peeled | FaceKind::Patch if cyc.len() != 3 => {
                r.push(format!("triangle face {f} has degree {}", cyc.len()))
            }
            FaceKind::Peeled | FaceKind::Patch => {
                let vs: HashSet<_> = cyc.iter().map(|&x| s.origin(x)).collect();
                if !general && vs.len() != 3 {
                    r.push(format!("triangle face {f} repeats a corner"));
                }
            }
            FaceKind::Sealed { perimeter, .. } => {
                let p: u64 = cyc.iter().map(|&x| s.run(x)).sum();
                if p != perimeter {
                    r.push(format!("sealed face {f} has perimeter {p}, recorded {perimeter}"));
                }
            }
            FaceKind::Open => r.push(format!("face {f} left open")),
            FaceKind::NonSimple if !general => r.push(format!("non-simple face {f} in a simple map")),
            _ => {}
        }
    }
    for f in 0..nf as FaceId {
        if !orbit_faces.contains(&f) {
            if f != OUTER || n > 0 {
                r.push(format!("face {f} has no orbit"));
            }
        } else if s.face(s.faces[f as usize].edge) != f {
            r.push(format!("face {f} record points outside its orbit"));
        }
    }
}

pub fn validate_halfplane(map: &HalfPlaneMap) -> ValidationReport {
    let mut r = ValidationReport::default();
    let s = &map.store;
    let general = s.face_records().iter().any(|f| f.kind == FaceKind::NonSimple);
    check_store(s, general, &mut r);
    if !r.is_ok() {
        return r;
    }
    if map.frontier.is_empty() {
        r.push("empty frontier".into());
        return r;
    }
    // the outer orbit is exactly frontier then floor
    for t in 0..map.frontier.len() {
        let h = map.frontier[t];
        if s.face(h) != OUTER {
            r.push(format!("frontier half-edge {h} not on the outer face"));
        }
        if t + 1 < map.frontier.len() && s.next(h) != map.frontier[t + 1] {
            r.push(format!("frontier breaks after {h}"));
        }
    }
    let fv: Vec<VertexId> = std::iter::once(s.origin(map.frontier[0]))
        .chain(map.frontier.iter().map(|&h| s.dest(h)))
        .collect();
    if fv.iter().collect::<HashSet<_>>().len() != fv.len() {
        r.push("frontier is not a simple path".into());
    }
    let floor = map.floor_lower();
    let outer_len = s.cycle(map.frontier[0]).len();
    if outer_len != map.frontier.len() + floor.len() {
        r.push("outer face is not frontier plus floor".into());
    }
    let mut expect = map.hi;
    for &h in &floor {
        let (a, b) = (map.offset(s.origin(h)), map.offset(s.dest(h)));
        if a != Some(expect) || b != Some(expect - s.run(h) as i64) {
            r.push(format!("floor half-edge {h} is out of order"));
            break;
        }
        expect -= s.run(h) as i64;
    }
    if expect != map.lo {
        r.push("floor does not span the window".into());
    }
    if map.offset(fv[0]) != Some(map.lo) || map.offset(*fv.last().unwrap()) != Some(map.hi) {
        r.push("frontier does not end on the window corners".into());
    }
    if map.offset(map.root_vertex()) != Some(0) || map.offset(s.dest(map.root)) != Some(1) {
        r.push("root is not the floor edge at offset 0".into());
    }
    if map.euler() != 1 {
        r.push(format!("Euler characteristic {} instead of 1", map.euler()));
    }
    r
}

pub fn validate_finite(fm: &FiniteMap) -> ValidationReport {
    let mut r = ValidationReport::default();
    let s = &fm.store;
    check_store(s, fm.general, &mut r);
    if !r.is_ok() {
        return r;
    }
    let b = fm.boundary();
    if b.len() as u64 != fm.m {
        r.push(format!("boundary length {} instead of {}", b.len(), fm.m));
    }
    if !fm.is_degenerate() {
        let vs: HashSet<_> = b.iter().map(|&h| s.origin(h)).collect();
        if vs.len() != b.len() {
            r.push("boundary is not a simple cycle".into());
        }
        if s.cycle(s.twin(fm.root)).len() != b.len() {
            r.push("external face is not the boundary cycle".into());
        }
    }
    let inner = s.vertex_kinds().iter().filter(|k| **k == VertexKind::Inner).count() as u64;
    if inner != fm.n {
        r.push(format!("{inner} inner vertices, recorded {}", fm.n));
    }
    if !fm.general {
        let f = fm.internal_face_count() as u64;
        if f != 2 * fm.n + fm.m - 2 {
            r.push(format!("{f} faces instead of {}", 2 * fm.n + fm.m - 2));
        }
    }
    let v = s.vertex_count() as i64;
    let e = (s.half_edge_count() / 2) as i64;
    if v - e + s.face_count() as i64 != 2 {
        r.push("Euler characteristic of the sphere is not 2".into());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::Side;
    use crate::map::PatchCode;

    fn sample() -> HalfPlaneMap {
        let mut m = HalfPlaneMap::new_floor(2).unwrap();
        m.attach_alpha(m.root).unwrap();
        let h = m.frontier[1];
        let hole = m.attach_jump(h, Side::Right, 2).unwrap();
        m.fill_hole_code(hole, &"I S2 E S2 E E".parse::<PatchCode>().unwrap()).unwrap();
        m
    }

    #[test]
    fn constructed_maps_pass() {
        let m = sample();
        let r = validate_halfplane(&m);
        assert!(r.is_ok(), "{:?}", r.violations);
        assert!(validate_finite(&FiniteMap::single_triangle()).is_ok());
        assert!(validate_finite(&FiniteMap::empty_2gon()).is_ok());
    }

    #[test]
    fn corrupted_twin_is_reported() {
        let mut m = sample();
        m.store.he[3].twin = 5;
        assert!(!validate_halfplane(&m).is_ok());
    }

    #[test]
    fn non_simple_frontier_is_reported() {
        let mut m = sample();
        // reroute a frontier edge to end on the root vertex
        let h = *m.frontier.last().unwrap();
        let t = m.store.twin(h);
        m.store.he[t as usize].origin = m.root_vertex();
        assert!(!validate_halfplane(&m).is_ok());
    }
}

//! Revealed part of a half-planar triangulation.
//!
//! Face 0 is the unexplored region together with the external face below the
//! floor. Its cycle is the frontier, left to right, followed by the lower
//! sides of the revealed floor, right to left. Only a window of the infinite
//! floor exists; it grows on demand.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use super::finite::FiniteMap;
use super::patch::{carve, CarveOutcome, CodeDecider, Decider, PatchCode, PatchToken};
use super::store::*;
use super::MapError;
use crate::law::{PeelEvent, Side};

type Result<T> = std::result::Result<T, MapError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfPlaneMap {
    pub(crate) store: Store,
    pub(crate) root: HalfEdgeId,
    pub(crate) frontier: Vec<HalfEdgeId>,
    pub(crate) lo: i64,
    pub(crate) hi: i64,
    pub(crate) initial_width: u64,
}

/// Region cut off by a boundary jump, waiting for its patch.
#[must_use = "a hole leaves the map inconsistent until it is filled"]
#[derive(Debug)]
pub struct Hole {
    pub(crate) face: FaceId,
    pub(crate) side: Side,
    pub(crate) i: u64,
    pub(crate) h: HalfEdgeId,
    pub(crate) apex: VertexId,
    /// The triangle side already in place: apex→origin(h) for a right jump,
    /// dest(h)→apex for a left jump.
    pub(crate) side_edge: HalfEdgeId,
    /// Frontier half-edges enclosed, left to right.
    pub(crate) path: Vec<HalfEdgeId>,
}

impl Hole {
    pub fn perimeter(&self) -> u64 {
        self.i + 1
    }
    pub fn side(&self) -> Side {
        self.side
    }
}

/// Where to peel next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeelSite {
    /// Frontier edge at this index.
    Edge(usize),
    /// Unit `unit` of the run edge at this frontier index.
    RunUnit { index: usize, unit: u64 },
    /// The `t`-th floor edge left of the window (0 = adjacent).
    BeyondLeft(u64),
    BeyondRight(u64),
}

/// Graph distances from a vertex; `u64::MAX` when unreachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distances {
    pub dist: Vec<u64>,
}

impl Distances {
    pub fn get(&self, v: VertexId) -> u64 {
        self.dist[v as usize]
    }
}

impl HalfPlaneMap {
    pub fn new_floor(width: u64) -> Result<Self> {
        if width == 0 {
            return Err(MapError::Domain("floor width must be at least 1".into()));
        }
        let mut s = Store::new();
        let vs: Vec<VertexId> = (0..=width).map(|o| s.add_vertex(VertexKind::Boundary { offset: o as i64 })).collect();
        let mut ups = Vec::with_capacity(width as usize);
        let mut lows = Vec::with_capacity(width as usize);
        for t in 0..width as usize {
            let (u, l) = s.add_edge(vs[t], vs[t + 1]);
            ups.push(u);
            lows.push(l);
        }
        let cycle: Vec<HalfEdgeId> = ups.iter().copied().chain(lows.iter().rev().copied()).collect();
        s.set_cycle(&cycle, OUTER);
        s.faces[OUTER as usize].edge = ups[0];
        Ok(HalfPlaneMap { store: s, root: ups[0], frontier: ups, lo: 0, hi: width as i64, initial_width: width })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }
    pub fn root(&self) -> HalfEdgeId {
        self.root
    }
    pub fn root_vertex(&self) -> VertexId {
        self.store.origin(self.root)
    }
    pub fn frontier(&self) -> &[HalfEdgeId] {
        &self.frontier
    }
    /// Offsets of the leftmost and rightmost revealed floor vertices.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }
    pub fn offset(&self, v: VertexId) -> Option<i64> {
        match self.store.kind(v) {
            VertexKind::Boundary { offset } => Some(offset),
            VertexKind::Inner => None,
        }
    }
    /// Width of the bare floor the map was grown from.
    pub fn initial_width(&self) -> u64 {
        self.initial_width
    }
    pub fn set_half_edge_limit(&mut self, limit: usize) {
        self.store.limit = limit;
    }

    /// Number of faces other than the outer one.
    pub fn internal_face_count(&self) -> usize {
        self.store.face_count() - 1
    }

    /// Frontier length in unit edges.
    pub fn frontier_length(&self) -> u64 {
        self.frontier.iter().map(|&h| self.store.run(h)).sum()
    }

    /// Lower sides of the revealed floor, right to left.
    pub fn floor_lower(&self) -> Vec<HalfEdgeId> {
        let first = self.frontier[0];
        let mut out = Vec::new();
        let mut h = self.store.next(*self.frontier.last().unwrap());
        while h != first {
            out.push(h);
            h = self.store.next(h);
        }
        out
    }

    pub fn frontier_index(&self, h: HalfEdgeId) -> Result<usize> {
        if (h as usize) < self.store.half_edge_count() && self.store.face(h) == OUTER {
            if let Some(j) = self.frontier.iter().position(|&x| x == h) {
                return Ok(j);
            }
        }
        Err(MapError::NotExposed(h))
    }

    fn push_left(&mut self, len: u64) {
        let first = self.frontier[0];
        let f = self.store.origin(first);
        let last_low = self.store.prev(first);
        let v = self.store.add_vertex(VertexKind::Boundary { offset: self.lo - len as i64 });
        let (up, low) = self.store.add_edge(v, f);
        self.store.link(last_low, low);
        self.store.link(low, up);
        self.store.link(up, first);
        self.store.set_face(up, OUTER);
        self.store.set_face(low, OUTER);
        self.store.set_run(up, len);
        self.lo -= len as i64;
        self.frontier.insert(0, up);
    }

    fn push_right(&mut self, len: u64) {
        let last = *self.frontier.last().unwrap();
        let f = self.store.dest(last);
        let first_low = self.store.next(last);
        let v = self.store.add_vertex(VertexKind::Boundary { offset: self.hi + len as i64 });
        let (up, low) = self.store.add_edge(f, v);
        self.store.link(last, up);
        self.store.link(up, low);
        self.store.link(low, first_low);
        self.store.set_face(up, OUTER);
        self.store.set_face(low, OUTER);
        self.store.set_run(up, len);
        self.hi += len as i64;
        self.frontier.push(up);
    }

    /// Reveals `d` more floor edges on `side`. With a margin, a long stretch
    /// becomes `margin` unit edges, one run edge and `margin` unit edges.
    pub(crate) fn extend(&mut self, side: Side, d: u64, margin: Option<u64>) -> Result<()> {
        let pieces: Vec<u64> = match margin {
            Some(mg) if d > 2 * mg + 1 => {
                let mut p = vec![1; mg as usize];
                p.push(d - 2 * mg);
                p.extend(std::iter::repeat(1).take(mg as usize));
                p
            }
            _ => {
                self.store.ensure_room(2 * d as usize)?;
                vec![1; d as usize]
            }
        };
        for len in pieces {
            match side {
                Side::Left => self.push_left(len),
                Side::Right => self.push_right(len),
            }
        }
        Ok(())
    }

    /// Materialises the edge named by `site` and returns it.
    pub fn prepare(&mut self, site: PeelSite) -> Result<HalfEdgeId> {
        match site {
            PeelSite::Edge(j) => self.frontier.get(j).copied().ok_or(MapError::Domain(format!("no frontier edge {j}"))),
            PeelSite::BeyondLeft(t) => {
                self.extend(Side::Left, t + 1, None)?;
                Ok(self.frontier[0])
            }
            PeelSite::BeyondRight(t) => {
                self.extend(Side::Right, t + 1, None)?;
                Ok(*self.frontier.last().unwrap())
            }
            PeelSite::RunUnit { index, unit } => {
                let mut h = self.frontier[index];
                let len = self.store.run(h);
                let mut at = index;
                if unit > 0 {
                    h = self.store.split_run(h, unit);
                    at += 1;
                    self.frontier.insert(at, h);
                }
                if len - unit > 1 {
                    let g = self.store.split_run(h, 1);
                    self.frontier.insert(at + 1, g);
                }
                Ok(h)
            }
        }
    }

    /// Glues a triangle with a new inner apex on the exposed edge `h`.
    pub fn attach_alpha(&mut self, h: HalfEdgeId) -> Result<VertexId> {
        let j = self.frontier_index(h)?;
        if self.store.run(h) != 1 {
            return Err(MapError::Domain("cannot peel a run edge".into()));
        }
        self.store.ensure_room(4)?;
        let s = &mut self.store;
        let (u, v) = (s.origin(h), s.dest(h));
        let (hp, hn) = (s.prev(h), s.next(h));
        let w = s.add_vertex(VertexKind::Inner);
        let (vw, wv) = s.add_edge(v, w);
        let (wu, uw) = s.add_edge(w, u);
        let f = s.add_face(FaceKind::Peeled, h);
        s.set_cycle(&[h, vw, wu], f);
        s.link(hp, uw);
        s.link(uw, wv);
        s.link(wv, hn);
        s.set_face(uw, OUTER);
        s.set_face(wv, OUTER);
        s.faces[OUTER as usize].edge = uw;
        self.frontier.splice(j..=j, [uw, wv]);
        Ok(w)
    }

    /// Glues a triangle on `h` whose apex is the frontier vertex `i` unit
    /// steps away on `side`, extending the floor window if needed.
    pub fn attach_jump(&mut self, h: HalfEdgeId, side: Side, i: u64) -> Result<Hole> {
        self.attach_jump_with(h, side, i, None)
    }

    pub(crate) fn attach_jump_with(&mut self, h: HalfEdgeId, side: Side, i: u64, margin: Option<u64>) -> Result<Hole> {
        if i == 0 {
            return Err(MapError::Domain("jump length must be at least 1".into()));
        }
        let mut j = self.frontier_index(h)?;
        if self.store.run(h) != 1 {
            return Err(MapError::Domain("cannot peel a run edge".into()));
        }
        self.store.ensure_room(4)?;
        // Collect i unit steps of frontier on the chosen side.
        let (a, b) = match side {
            Side::Right => {
                let mut got = 0u64;
                let mut t = j + 1;
                loop {
                    if got == i {
                        break;
                    }
                    if t == self.frontier.len() {
                        self.extend(Side::Right, i - got, margin)?;
                    }
                    let len = self.store.run(self.frontier[t]);
                    if got + len > i {
                        let g = self.store.split_run(self.frontier[t], i - got);
                        self.frontier.insert(t + 1, g);
                        continue;
                    }
                    got += len;
                    t += 1;
                }
                (j + 1, t)
            }
            Side::Left => {
                let mut got = 0u64;
                let mut t = j;
                loop {
                    if got == i {
                        break;
                    }
                    if t == 0 {
                        let before = self.frontier.len();
                        self.extend(Side::Left, i - got, margin)?;
                        let added = self.frontier.len() - before;
                        t += added;
                        j += added;
                    }
                    let e = self.frontier[t - 1];
                    let len = self.store.run(e);
                    if got + len > i {
                        let g = self.store.split_run(e, len - (i - got));
                        self.frontier.insert(t, g);
                        j += 1;
                        t += 1;
                        continue;
                    }
                    got += len;
                    t -= 1;
                }
                (t, j)
            }
        };
        let path: Vec<HalfEdgeId> = self.frontier[a..b].to_vec();
        let s = &mut self.store;
        let (u, v) = (s.origin(h), s.dest(h));
        let f = s.add_face(FaceKind::Peeled, h);
        let (apex, side_edge, outer_edge) = match side {
            Side::Right => {
                let x = s.dest(*path.last().unwrap());
                let hp = s.prev(h);
                let hn = s.next(*path.last().unwrap());
                let (xu, ux) = s.add_edge(x, u);
                s.link(xu, h);
                s.set_face(xu, f);
                s.set_face(h, f);
                s.link(hp, ux);
                s.link(ux, hn);
                s.set_face(ux, OUTER);
                (x, xu, ux)
            }
            Side::Left => {
                let x = s.origin(path[0]);
                let hp = s.prev(path[0]);
                let hn = s.next(h);
                let (vx, xv) = s.add_edge(v, x);
                s.link(h, vx);
                s.set_face(h, f);
                s.set_face(vx, f);
                s.link(hp, xv);
                s.link(xv, hn);
                s.set_face(xv, OUTER);
                (x, vx, xv)
            }
        };
        s.faces[OUTER as usize].edge = outer_edge;
        let (lo, hi) = match side {
            Side::Right => (j, b - 1),
            Side::Left => (a, j),
        };
        self.frontier.splice(lo..=hi, [outer_edge]);
        Ok(Hole { face: f, side, i, h, apex, side_edge, path })
    }

    /// Closes a perimeter-2 hole by gluing its two sides.
    pub(crate) fn close_empty(&mut self, hole: Hole) -> Result<()> {
        if hole.i != 1 {
            return Err(MapError::LengthMismatch { hole: hole.perimeter(), patch: 2 });
        }
        let p = hole.path[0];
        let s = &mut self.store;
        match hole.side {
            Side::Right => s.set_cycle(&[hole.h, p, hole.side_edge], hole.face),
            Side::Left => s.set_cycle(&[hole.h, hole.side_edge, p], hole.face),
        }
        Ok(())
    }

    /// Completes the triangle and turns the hole into an open polygon face;
    /// returns the face, its root and perimeter.
    pub(crate) fn open_hole(&mut self, hole: Hole) -> Result<(FaceId, HalfEdgeId, u64)> {
        self.store.ensure_room(2)?;
        let s = &mut self.store;
        let first = hole.path[0];
        let last = *hole.path.last().unwrap();
        let (u, v) = (s.origin(hole.h), s.dest(hole.h));
        let root = match hole.side {
            Side::Right => {
                let (vx, xv) = s.add_edge(v, hole.apex);
                s.set_cycle(&[hole.h, vx, hole.side_edge], hole.face);
                xv
            }
            Side::Left => {
                let (xu, ux) = s.add_edge(hole.apex, u);
                s.set_cycle(&[hole.h, hole.side_edge, xu], hole.face);
                ux
            }
        };
        let p = s.add_face(FaceKind::Open, root);
        s.link(root, first);
        s.link(last, root);
        s.set_face(root, p);
        for &e in &hole.path {
            s.set_face(e, p);
        }
        Ok((p, root, hole.perimeter()))
    }

    /// Fills a hole by driving the carve engine.
    pub(crate) fn fill_with<D: Decider>(
        &mut self,
        hole: Hole,
        empty: bool,
        ctx: D::Ctx,
        dec: &mut D,
        record: bool,
    ) -> Result<CarveOutcome> {
        if empty {
            self.close_empty(hole)?;
            let code = record.then(|| PatchCode(vec![PatchToken::Empty]));
            return Ok(CarveOutcome { code, new_inner: 0, sealed: Vec::new() });
        }
        let (face, root, m) = self.open_hole(hole)?;
        carve(&mut self.store, face, root, m, ctx, dec, true, FaceKind::Patch, record)
    }

    pub fn fill_hole_code(&mut self, hole: Hole, code: &PatchCode) -> Result<()> {
        let m = hole.perimeter();
        let parsed = code.parse(m)?;
        let empty = parsed.tokens == [PatchToken::Empty];
        let mut dec = CodeDecider { code: &parsed };
        self.fill_with(hole, empty, 0, &mut dec, false).map(|_| ())
    }

    /// Glues `patch` into the hole, matching its root edge with the new
    /// closing edge.
    pub fn fill_hole(&mut self, hole: Hole, patch: &FiniteMap) -> Result<()> {
        if patch.boundary_length() != hole.perimeter() {
            return Err(MapError::LengthMismatch { hole: hole.perimeter(), patch: patch.boundary_length() });
        }
        let code = patch.code()?;
        self.fill_hole_code(hole, &code)
    }

    /// One peeling step at `h` with the hole, if any, filled from `code`.
    pub fn peel_with_code(&mut self, h: HalfEdgeId, event: PeelEvent, code: Option<&PatchCode>) -> Result<()> {
        match event {
            PeelEvent::Alpha => self.attach_alpha(h).map(|_| ()),
            PeelEvent::Boundary { side, i, k } => {
                let hole = self.attach_jump(h, side, i)?;
                match code {
                    Some(c) => {
                        if c.inner_count() != k {
                            return Err(MapError::Malformed(format!("patch has {} inner vertices, event says {k}", c.inner_count())));
                        }
                        self.fill_hole_code(hole, c)
                    }
                    None if i + 1 <= 3 && k == 0 => {
                        let c: PatchCode = if i == 1 { "E" } else { "S2 E E" }.parse()?;
                        self.fill_hole_code(hole, &c)
                    }
                    None => Err(MapError::Malformed("missing patch for a hole with inner vertices".into())),
                }
            }
        }
    }

    /// Carves one root triangle of a sealed face at the unit edge leaving `v`.
    pub(crate) fn expand_sealed_at<D: Decider<Ctx = u64>>(&mut self, face: FaceId, v: VertexId, dec: &mut D) -> Result<CarveOutcome> {
        let FaceKind::Sealed { perimeter, inner } = self.store.face_kind(face) else {
            return Err(MapError::Domain("face is not sealed".into()));
        };
        let start = self.store.faces[face as usize].edge;
        let mut h = start;
        loop {
            if self.store.origin(h) == v {
                break;
            }
            h = self.store.next(h);
            if h == start {
                return Err(MapError::Domain("vertex not on sealed face".into()));
            }
        }
        if self.store.run(h) > 1 {
            self.store.split_run(h, 1);
        }
        self.store.faces[face as usize].kind = FaceKind::Open;
        carve(&mut self.store, face, h, perimeter, inner, dec, false, FaceKind::Patch, false)
    }

    /// Graph distances from `from` over revealed edges; run edges weigh their length.
    pub fn bfs_distance(&self, from: VertexId) -> Distances {
        let s = &self.store;
        let nv = s.vertex_count();
        let mut dist = vec![u64::MAX; nv];
        // adjacency in CSR form
        let mut deg = vec![0usize; nv + 1];
        for r in s.records() {
            deg[r.origin as usize + 1] += 1;
        }
        for t in 0..nv {
            deg[t + 1] += deg[t];
        }
        let mut fill = deg.clone();
        let mut adj = vec![(0u32, 0u64); s.half_edge_count()];
        for (h, r) in s.records().iter().enumerate() {
            let o = r.origin as usize;
            adj[fill[o]] = (s.dest(h as HalfEdgeId), s.run(h as HalfEdgeId));
            fill[o] += 1;
        }
        dist[from as usize] = 0;
        if !s.has_runs() {
            let mut queue = std::collections::VecDeque::from([from]);
            while let Some(x) = queue.pop_front() {
                let d = dist[x as usize] + 1;
                for &(y, _) in &adj[deg[x as usize]..deg[x as usize + 1]] {
                    if dist[y as usize] == u64::MAX {
                        dist[y as usize] = d;
                        queue.push_back(y);
                    }
                }
            }
        } else {
            let mut heap = BinaryHeap::from([Reverse((0u64, from))]);
            while let Some(Reverse((d, x))) = heap.pop() {
                if d > dist[x as usize] {
                    continue;
                }
                for &(y, w) in &adj[deg[x as usize]..deg[x as usize + 1]] {
                    if d + w < dist[y as usize] {
                        dist[y as usize] = d + w;
                        heap.push(Reverse((d + w, y)));
                    }
                }
            }
        }
        Distances { dist }
    }

    /// Reads the peeling event of the root face back from the geometry.
    pub fn classify_root_face(&self) -> Result<PeelEvent> {
        let s = &self.store;
        let f = s.face(self.root);
        if f == OUTER {
            return Err(MapError::NotRevealed);
        }
        if matches!(s.face_kind(f), FaceKind::Sealed { .. } | FaceKind::Open) {
            return Err(MapError::NotRevealed);
        }
        let e1 = s.next(self.root);
        let apex = s.dest(e1);
        let Some(o) = self.offset(apex) else {
            return Ok(PeelEvent::Alpha);
        };
        let (side, i, across) = if o >= 2 {
            (Side::Right, (o - 1) as u64, s.twin(e1))
        } else if o <= -1 {
            (Side::Left, (-o) as u64, s.twin(s.prev(self.root)))
        } else {
            return Err(MapError::Structure(format!("root apex at floor offset {o}")));
        };
        Ok(PeelEvent::Boundary { side, i, k: self.enclosed_inner(across, f) })
    }

    /// Inner vertices reachable through faces from the face of `start`
    /// without entering the outer face or `stop`.
    fn enclosed_inner(&self, start: HalfEdgeId, stop: FaceId) -> u64 {
        let s = &self.store;
        let f0 = s.face(start);
        if f0 == OUTER || f0 == stop {
            return 0;
        }
        let mut seen = HashSet::from([f0]);
        let mut stack = vec![f0];
        let mut verts = HashSet::new();
        let mut sealed = 0u64;
        while let Some(f) = stack.pop() {
            if let FaceKind::Sealed { inner, .. } = s.face_kind(f) {
                sealed += inner;
            }
            let e = s.faces[f as usize].edge;
            for h in s.cycle(e) {
                verts.insert(s.origin(h));
                let g = s.face(s.twin(h));
                if g != OUTER && g != stop && seen.insert(g) {
                    stack.push(g);
                }
            }
        }
        sealed + verts.into_iter().filter(|&v| s.kind(v) == VertexKind::Inner).count() as u64
    }

    /// Euler characteristic of the revealed disc, V − E + F.
    pub fn euler(&self) -> i64 {
        self.store.vertex_count() as i64 - (self.store.half_edge_count() / 2) as i64 + self.internal_face_count() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_floor() {
        let m = HalfPlaneMap::new_floor(1).unwrap();
        assert_eq!(m.store.vertex_count(), 2);
        assert_eq!(m.store.half_edge_count(), 2);
        assert_eq!(m.internal_face_count(), 0);
        let m5 = HalfPlaneMap::new_floor(5).unwrap();
        assert_eq!(m5.euler(), 1);
        assert!(HalfPlaneMap::new_floor(0).is_err());
    }

    #[test]
    fn alpha_on_single_edge() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        let w = m.attach_alpha(m.root).unwrap();
        assert_eq!((m.store.vertex_count(), m.store.half_edge_count() / 2, m.internal_face_count()), (3, 3, 1));
        assert_eq!(m.store.degree(w), 2);
        assert_eq!(m.frontier_length(), 2);
        assert_eq!(m.classify_root_face().unwrap(), PeelEvent::Alpha);
        assert!(m.attach_alpha(m.root).is_err());
    }

    #[test]
    fn unit_jump_with_empty_patch() {
        let mut m = HalfPlaneMap::new_floor(3).unwrap();
        let hole = m.attach_jump(m.root, Side::Right, 1).unwrap();
        m.fill_hole(hole, &FiniteMap::empty_2gon()).unwrap();
        assert_eq!(m.frontier_length(), 2);
        assert_eq!(m.internal_face_count(), 1);
        assert_eq!(m.euler(), 1);
        assert_eq!(m.classify_root_face().unwrap(), PeelEvent::Boundary { side: Side::Right, i: 1, k: 0 });
    }

    #[test]
    fn jump_two_with_triangle() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        let hole = m.attach_jump(m.root, Side::Right, 2).unwrap();
        m.fill_hole(hole, &FiniteMap::single_triangle()).unwrap();
        assert_eq!(m.internal_face_count(), 2);
        assert_eq!(m.window(), (0, 3));
        assert_eq!(m.frontier_length(), 1);
        assert_eq!(m.euler(), 1);
        assert_eq!(m.classify_root_face().unwrap(), PeelEvent::Boundary { side: Side::Right, i: 2, k: 0 });
    }

    #[test]
    fn unit_jump_with_one_inner_vertex() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        let hole = m.attach_jump(m.root, Side::Right, 1).unwrap();
        let patch = FiniteMap::from_code(2, &"I S2 E E".parse().unwrap()).unwrap();
        m.fill_hole(hole, &patch).unwrap();
        assert_eq!(m.classify_root_face().unwrap(), PeelEvent::Boundary { side: Side::Right, i: 1, k: 1 });
        assert_eq!(m.euler(), 1);
    }

    #[test]
    fn left_jump_extends_window() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        let hole = m.attach_jump(m.root, Side::Left, 3).unwrap();
        let patch = FiniteMap::from_code(4, &"S3 S2 E E E".parse().unwrap()).unwrap();
        m.fill_hole(hole, &patch).unwrap();
        assert_eq!(m.window(), (-3, 1));
        assert_eq!(m.classify_root_face().unwrap(), PeelEvent::Boundary { side: Side::Left, i: 3, k: 0 });
        assert_eq!(m.euler(), 1);
    }

    #[test]
    fn mismatched_patch_is_rejected() {
        let mut m = HalfPlaneMap::new_floor(2).unwrap();
        let hole = m.attach_jump(m.root, Side::Right, 1).unwrap();
        assert!(matches!(
            m.fill_hole(hole, &FiniteMap::single_triangle()),
            Err(MapError::LengthMismatch { hole: 2, patch: 3 })
        ));
    }

    #[test]
    fn distances_on_floor_and_after_alpha() {
        let mut m = HalfPlaneMap::new_floor(3).unwrap();
        let d = m.bfs_distance(m.root_vertex());
        let by_offset: Vec<u64> = (0..4).map(|v| d.get(v)).collect();
        assert_eq!(by_offset, vec![0, 1, 2, 3]);
        let w = m.attach_alpha(m.root).unwrap();
        assert_eq!(m.bfs_distance(m.root_vertex()).get(w), 1);
    }

    #[test]
    fn root_unrevealed() {
        let m = HalfPlaneMap::new_floor(2).unwrap();
        assert_eq!(m.classify_root_face(), Err(MapError::NotRevealed));
    }

    #[test]
    fn runs_split_where_the_apex_lands() {
        let mut m = HalfPlaneMap::new_floor(1).unwrap();
        m.extend(Side::Right, 20, Some(2)).unwrap();
        assert!(m.store.has_runs());
        assert_eq!(m.frontier_length(), 21);
        let hole = m.attach_jump(m.root, Side::Right, 10).unwrap();
        assert_eq!(m.offset(hole.apex), Some(11));
        let (_, _, per) = m.open_hole(hole).unwrap();
        assert_eq!(per, 11);
        assert_eq!(m.frontier_length(), 11);
    }
}

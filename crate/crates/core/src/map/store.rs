//! Half-edge storage shared by half-plane and finite maps.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::MapError;

pub type HalfEdgeId = u32;
pub type VertexId = u32;
pub type FaceId = u32;

pub const NONE: u32 = u32::MAX;

/// Face of the unexplored region / external face.
pub const OUTER: FaceId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfEdgeRecord {
    pub twin: HalfEdgeId,
    /// Next half-edge counterclockwise around `face`.
    pub next: HalfEdgeId,
    pub origin: VertexId,
    pub face: FaceId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexKind {
    Inner,
    /// Boundary vertex; for half-plane maps the signed offset from the root
    /// vertex, for finite maps the index along the boundary cycle.
    Boundary { offset: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaceKind {
    Outer,
    /// Triangle revealed by a peeling step.
    Peeled,
    /// Triangle inside a filled hole.
    Patch,
    /// Unexpanded uniform triangulation of a polygon with `inner` inner vertices.
    Sealed { perimeter: u64, inner: u64 },
    /// Polygon still being carved.
    Open,
    /// Face added by the non-simple expansion (2-gon, loop triangle, pendant face).
    NonSimple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceRecord {
    pub edge: HalfEdgeId,
    #[serde(flatten)]
    pub kind: FaceKind,
}

#[derive(Debug, Clone)]
pub struct Store {
    pub(crate) he: Vec<HalfEdgeRecord>,
    pub(crate) prev: Vec<HalfEdgeId>,
    pub(crate) vert_out: Vec<HalfEdgeId>,
    pub(crate) vert_kind: Vec<VertexKind>,
    pub(crate) faces: Vec<FaceRecord>,
    /// Length of floor edges standing for several unit edges, keyed by both halves.
    pub(crate) runs: BTreeMap<HalfEdgeId, u64>,
    pub(crate) limit: usize,
}

pub const DEFAULT_HALF_EDGE_LIMIT: usize = 1 << 25;

// The half-edge budget is a resource setting, not part of the map.
impl PartialEq for Store {
    fn eq(&self, o: &Self) -> bool {
        self.he == o.he
            && self.prev == o.prev
            && self.vert_out == o.vert_out
            && self.vert_kind == o.vert_kind
            && self.faces == o.faces
            && self.runs == o.runs
    }
}

impl Eq for Store {}

impl Default for Store {
    fn default() -> Self {
        Store::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Store {
            he: Vec::new(),
            prev: Vec::new(),
            vert_out: Vec::new(),
            vert_kind: Vec::new(),
            faces: vec![FaceRecord { edge: NONE, kind: FaceKind::Outer }],
            runs: BTreeMap::new(),
            limit: DEFAULT_HALF_EDGE_LIMIT,
        }
    }

    #[inline]
    pub fn he(&self, h: HalfEdgeId) -> &HalfEdgeRecord {
        &self.he[h as usize]
    }
    #[inline]
    pub fn twin(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.he[h as usize].twin
    }
    #[inline]
    pub fn next(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.he[h as usize].next
    }
    #[inline]
    pub fn prev(&self, h: HalfEdgeId) -> HalfEdgeId {
        self.prev[h as usize]
    }
    #[inline]
    pub fn origin(&self, h: HalfEdgeId) -> VertexId {
        self.he[h as usize].origin
    }
    #[inline]
    pub fn dest(&self, h: HalfEdgeId) -> VertexId {
        self.origin(self.twin(h))
    }
    #[inline]
    pub fn face(&self, h: HalfEdgeId) -> FaceId {
        self.he[h as usize].face
    }
    #[inline]
    pub fn run(&self, h: HalfEdgeId) -> u64 {
        if self.runs.is_empty() {
            return 1;
        }
        self.runs.get(&h).copied().unwrap_or(1)
    }
    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.vert_kind[v as usize]
    }
    pub fn face_kind(&self, f: FaceId) -> FaceKind {
        self.faces[f as usize].kind
    }
    pub fn half_edge_count(&self) -> usize {
        self.he.len()
    }
    pub fn vertex_count(&self) -> usize {
        self.vert_kind.len()
    }
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
    pub fn records(&self) -> &[HalfEdgeRecord] {
        &self.he
    }
    pub fn face_records(&self) -> &[FaceRecord] {
        &self.faces
    }
    pub fn vertex_kinds(&self) -> &[VertexKind] {
        &self.vert_kind
    }
    pub fn vertex_out(&self, v: VertexId) -> HalfEdgeId {
        self.vert_out[v as usize]
    }
    pub fn has_runs(&self) -> bool {
        !self.runs.is_empty()
    }

    pub fn ensure_room(&self, extra_half_edges: usize) -> Result<(), MapError> {
        if self.he.len() + extra_half_edges > self.limit {
            return Err(MapError::Resource { limit: self.limit });
        }
        Ok(())
    }

    pub(crate) fn add_vertex(&mut self, kind: VertexKind) -> VertexId {
        self.vert_kind.push(kind);
        self.vert_out.push(NONE);
        (self.vert_kind.len() - 1) as VertexId
    }

    /// New unlinked edge `a → b`; returns `(a→b, b→a)`.
    pub(crate) fn add_edge(&mut self, a: VertexId, b: VertexId) -> (HalfEdgeId, HalfEdgeId) {
        let h = self.he.len() as HalfEdgeId;
        self.he.push(HalfEdgeRecord { twin: h + 1, next: NONE, origin: a, face: NONE });
        self.he.push(HalfEdgeRecord { twin: h, next: NONE, origin: b, face: NONE });
        self.prev.push(NONE);
        self.prev.push(NONE);
        if self.vert_out[a as usize] == NONE {
            self.vert_out[a as usize] = h;
        }
        if self.vert_out[b as usize] == NONE {
            self.vert_out[b as usize] = h + 1;
        }
        (h, h + 1)
    }

    pub(crate) fn add_face(&mut self, kind: FaceKind, edge: HalfEdgeId) -> FaceId {
        self.faces.push(FaceRecord { edge, kind });
        (self.faces.len() - 1) as FaceId
    }

    #[inline]
    pub(crate) fn link(&mut self, a: HalfEdgeId, b: HalfEdgeId) {
        self.he[a as usize].next = b;
        self.prev[b as usize] = a;
    }

    #[inline]
    pub(crate) fn set_face(&mut self, h: HalfEdgeId, f: FaceId) {
        self.he[h as usize].face = f;
    }

    pub(crate) fn set_cycle(&mut self, cycle: &[HalfEdgeId], f: FaceId) {
        for (t, &h) in cycle.iter().enumerate() {
            self.link(h, cycle[(t + 1) % cycle.len()]);
            self.set_face(h, f);
        }
    }

    pub(crate) fn set_run(&mut self, h: HalfEdgeId, len: u64) {
        let t = self.twin(h);
        if len == 1 {
            self.runs.remove(&h);
            self.runs.remove(&t);
        } else {
            self.runs.insert(h, len);
            self.runs.insert(t, len);
        }
    }

    /// Splits the floor edge `h` (a run) at `t` unit steps from its origin.
    /// `h` keeps its id and now ends at the new vertex; returns the new
    /// half-edge leaving the new vertex in `h`'s face.
    pub(crate) fn split_run(&mut self, h: HalfEdgeId, t: u64) -> HalfEdgeId {
        let len = self.run(h);
        debug_assert!(t > 0 && t < len);
        let a = self.origin(h);
        let ht = self.twin(h);
        let b = self.origin(ht);
        let offset = match (self.kind(a), self.kind(b)) {
            (VertexKind::Boundary { offset: oa }, VertexKind::Boundary { offset: ob }) => {
                if ob > oa {
                    oa + t as i64
                } else {
                    oa - t as i64
                }
            }
            _ => unreachable!("runs only live on the floor"),
        };
        let v = self.add_vertex(VertexKind::Boundary { offset });
        let (g, gt) = self.add_edge(v, b);
        self.he[ht as usize].origin = v;
        if self.vert_out[b as usize] == ht {
            self.vert_out[b as usize] = gt;
        }
        self.vert_out[v as usize] = g;
        let hn = self.next(h);
        let f = self.face(h);
        self.link(g, hn);
        self.link(h, g);
        self.set_face(g, f);
        let tp = self.prev(ht);
        let ft = self.face(ht);
        self.link(tp, gt);
        self.link(gt, ht);
        self.set_face(gt, ft);
        self.set_run(h, t);
        self.set_run(g, len - t);
        g
    }

    /// Half-edges of the face cycle through `h`.
    pub fn cycle(&self, h: HalfEdgeId) -> Vec<HalfEdgeId> {
        let mut out = vec![h];
        let mut x = self.next(h);
        while x != h {
            out.push(x);
            x = self.next(x);
        }
        out
    }

    /// Outgoing half-edges of `v`, in rotation order.
    pub fn outgoing(&self, v: VertexId) -> Vec<HalfEdgeId> {
        let start = self.vert_out[v as usize];
        let mut out = vec![start];
        let mut h = self.next(self.twin(start));
        while h != start {
            out.push(h);
            h = self.next(self.twin(h));
        }
        out
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.outgoing(v).len()
    }

    /// Perimeter of the face through `h`, counting run lengths.
    pub fn perimeter(&self, h: HalfEdgeId) -> u64 {
        self.cycle(h).iter().map(|&x| self.run(x)).sum()
    }
}

//! Triangulations of a polygon.

use super::patch::{carve, CarveOutcome, CodeDecider, Decider, PatchCode, PatchToken};
use super::store::*;
use super::MapError;

type Result<T> = std::result::Result<T, MapError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMap {
    pub(crate) store: Store,
    pub(crate) root: HalfEdgeId,
    pub(crate) m: u64,
    pub(crate) n: u64,
    /// Faces may be non-simple (loops, 2-gons).
    pub(crate) general: bool,
}

impl FiniteMap {
    /// Bare m-gon with one open face; returns the face and its root.
    pub(crate) fn polygon(m: u64) -> Result<(Self, FaceId)> {
        if m < 2 {
            return Err(MapError::Domain(format!("perimeter {m} below 2")));
        }
        let mut s = Store::new();
        s.ensure_room(2 * m as usize)?;
        let vs: Vec<VertexId> = (0..m).map(|t| s.add_vertex(VertexKind::Boundary { offset: t as i64 })).collect();
        let mut inner = Vec::with_capacity(m as usize);
        let mut outer = Vec::with_capacity(m as usize);
        for t in 0..m as usize {
            let (a, b) = s.add_edge(vs[t], vs[(t + 1) % m as usize]);
            inner.push(a);
            outer.push(b);
        }
        let f = s.add_face(FaceKind::Open, inner[0]);
        s.set_cycle(&inner, f);
        outer.reverse();
        s.set_cycle(&outer, OUTER);
        s.faces[OUTER as usize].edge = outer[0];
        Ok((FiniteMap { store: s, root: inner[0], m, n: 0, general: false }, f))
    }

    /// The 2-gon with no inner vertex: one edge, both sides on the external face.
    pub fn empty_2gon() -> Self {
        let mut s = Store::new();
        let a = s.add_vertex(VertexKind::Boundary { offset: 0 });
        let b = s.add_vertex(VertexKind::Boundary { offset: 1 });
        let (h, t) = s.add_edge(a, b);
        s.set_cycle(&[h, t], OUTER);
        s.faces[OUTER as usize].edge = t;
        FiniteMap { store: s, root: h, m: 2, n: 0, general: false }
    }

    pub fn single_triangle() -> Self {
        Self::from_code(3, &PatchCode(vec![PatchToken::Split(2), PatchToken::Empty, PatchToken::Empty])).unwrap()
    }

    pub(crate) fn carve_from<D: Decider>(m: u64, ctx: D::Ctx, dec: &mut D) -> Result<(Self, CarveOutcome)> {
        let (mut fm, f) = Self::polygon(m)?;
        let out = carve(&mut fm.store, f, fm.root, m, ctx, dec, false, FaceKind::Patch, false)?;
        fm.n = out.new_inner;
        Ok((fm, out))
    }

    pub fn from_code(m: u64, code: &PatchCode) -> Result<Self> {
        let parsed = code.parse(m)?;
        if parsed.tokens == [PatchToken::Empty] {
            return Ok(Self::empty_2gon());
        }
        let mut dec = CodeDecider { code: &parsed };
        Ok(Self::carve_from(m, 0usize, &mut dec)?.0)
    }

    /// The glued 2-gon.
    pub fn is_degenerate(&self) -> bool {
        self.m == 2 && self.store.face(self.root) == OUTER
    }
    pub fn boundary_length(&self) -> u64 {
        self.m
    }
    pub fn inner_count(&self) -> u64 {
        self.n
    }
    pub fn root(&self) -> HalfEdgeId {
        self.root
    }
    pub fn store(&self) -> &Store {
        &self.store
    }
    pub fn is_general(&self) -> bool {
        self.general
    }
    pub fn internal_face_count(&self) -> usize {
        self.store.face_count() - 1
    }

    /// Boundary half-edges on the interior side, starting at the root.
    pub fn boundary(&self) -> Vec<HalfEdgeId> {
        if self.is_degenerate() {
            return vec![self.root, self.store.twin(self.root)];
        }
        // walk the external face backwards: twins of its cycle in reverse
        let mut out = vec![self.root];
        let mut h = self.store.prev(self.store.twin(self.root));
        while self.store.twin(h) != self.root {
            out.push(self.store.twin(h));
            h = self.store.prev(h);
        }
        out
    }

    /// Root-face decomposition read back from the geometry.
    pub fn code(&self) -> Result<PatchCode> {
        if self.is_degenerate() {
            return Ok(PatchCode(vec![PatchToken::Empty]));
        }
        read_code(&self.store, self.boundary())
    }
}

/// Patch code of the triangulated polygon bounded by `boundary` (interior
/// sides, starting at the root).
pub(crate) fn read_code(s: &Store, boundary: Vec<HalfEdgeId>) -> Result<PatchCode> {
    let mut code = Vec::new();
    let mut stack = vec![Some(boundary)];
    while let Some(item) = stack.pop() {
        let Some(b) = item else {
            code.push(PatchToken::Empty);
            continue;
        };
        let m = b.len();
        let h0 = b[0];
        match s.face_kind(s.face(h0)) {
            FaceKind::Peeled | FaceKind::Patch => {}
            k => return Err(MapError::Unsupported(format!("cannot read a {k:?} face"))),
        }
        let e1 = s.next(h0);
        let e2 = s.next(e1);
        if s.next(e2) != h0 {
            return Err(MapError::Structure("face is not a triangle".into()));
        }
        let w = s.dest(e1);
        let pos = (2..m).find(|&t| s.origin(b[t]) == w);
        match pos {
            None => {
                code.push(PatchToken::Inner);
                let mut nb = Vec::with_capacity(m + 1);
                nb.push(s.twin(e2));
                nb.push(s.twin(e1));
                nb.extend_from_slice(&b[1..]);
                stack.push(Some(nb));
            }
            Some(j) => {
                code.push(PatchToken::Split(j as u64));
                let a = if j == 2 && e1 == b[1] {
                    None
                } else {
                    let mut v = vec![s.twin(e1)];
                    v.extend_from_slice(&b[1..j]);
                    Some(v)
                };
                let bb = if j == m - 1 && e2 == b[m - 1] {
                    None
                } else {
                    let mut v = vec![s.twin(e2)];
                    v.extend_from_slice(&b[j..]);
                    Some(v)
                };
                stack.push(bb);
                stack.push(a);
            }
        }
    }
    Ok(PatchCode(code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_counts() {
        let t = FiniteMap::single_triangle();
        assert_eq!(t.internal_face_count(), 1);
        assert_eq!(t.store.vertex_count(), 3);
        assert_eq!(t.store.half_edge_count(), 6);
        assert_eq!(t.code().unwrap().to_string(), "S2 E E");
    }

    #[test]
    fn degenerate_2gon() {
        let e = FiniteMap::empty_2gon();
        assert!(e.is_degenerate());
        assert_eq!(e.internal_face_count(), 0);
        assert_eq!(e.code().unwrap().to_string(), "E");
    }

    #[test]
    fn code_round_trips() {
        for (m, c) in [(3, "I S2 E E I S2 E E"), (4, "S3 S2 E E E"), (4, "S2 E I S2 E E"), (2, "I S2 I S2 E E E E"), (5, "S3 I S2 E S2 E E E S3 S2 E E E")] {
            let code: PatchCode = c.parse().unwrap();
            let Ok(fm) = FiniteMap::from_code(m, &code) else {
                // not every string is a valid code; the valid ones must round-trip
                assert!(code.parse(m).is_err());
                continue;
            };
            assert_eq!(fm.code().unwrap(), code, "{c}");
            let f = fm.internal_face_count() as u64;
            assert_eq!(f, 2 * fm.n + m - 2, "{c}");
        }
    }
}

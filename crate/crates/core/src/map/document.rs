//! JSON documents and SVG pictures of maps.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use super::eventlog::EventLog;
use super::finite::FiniteMap;
use super::halfplane::HalfPlaneMap;
use super::store::*;
use super::MapError;

type Result<T> = std::result::Result<T, MapError>;

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMode {
    HalfPlane,
    Finite,
    General,
}

/// Serialised map. Half-edges are `[twin, next, origin, face]`; vertices
/// carry their floor offset, or `null` when inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub version: u32,
    pub mode: MapMode,
    pub root: HalfEdgeId,
    pub half_edges: Vec<[u32; 4]>,
    pub floor_offsets: Vec<Option<i64>>,
    pub vertex_out: Vec<HalfEdgeId>,
    pub faces: Vec<FaceRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<(HalfEdgeId, u64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frontier: Vec<HalfEdgeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_width: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_log: Option<EventLog>,
}

fn store_parts(s: &Store) -> (Vec<[u32; 4]>, Vec<Option<i64>>, Vec<(HalfEdgeId, u64)>) {
    let he = s.records().iter().map(|r| [r.twin, r.next, r.origin, r.face]).collect();
    let offs = s
        .vertex_kinds()
        .iter()
        .map(|k| match k {
            VertexKind::Boundary { offset } => Some(*offset),
            VertexKind::Inner => None,
        })
        .collect();
    let runs = s.runs.iter().filter(|(&h, _)| h < s.twin(h)).map(|(&h, &l)| (h, l)).collect();
    (he, offs, runs)
}

impl MapDocument {
    pub fn from_halfplane(map: &HalfPlaneMap, event_log: Option<EventLog>) -> Self {
        let s = map.store();
        let (half_edges, floor_offsets, runs) = store_parts(s);
        let general = s.face_records().iter().any(|f| f.kind == FaceKind::NonSimple);
        MapDocument {
            version: DOCUMENT_VERSION,
            mode: if general { MapMode::General } else { MapMode::HalfPlane },
            root: map.root(),
            half_edges,
            floor_offsets,
            vertex_out: s.vert_out.clone(),
            faces: s.face_records().to_vec(),
            runs,
            frontier: map.frontier().to_vec(),
            window: Some(map.window()),
            initial_width: Some(map.initial_width()),
            boundary_length: None,
            inner_count: None,
            event_log,
        }
    }

    pub fn from_finite(fm: &FiniteMap) -> Self {
        let s = fm.store();
        let (half_edges, floor_offsets, runs) = store_parts(s);
        MapDocument {
            version: DOCUMENT_VERSION,
            mode: if fm.is_general() { MapMode::General } else { MapMode::Finite },
            root: fm.root(),
            half_edges,
            floor_offsets,
            vertex_out: s.vert_out.clone(),
            faces: s.face_records().to_vec(),
            runs,
            frontier: Vec::new(),
            window: None,
            initial_width: None,
            boundary_length: Some(fm.boundary_length()),
            inner_count: Some(fm.inner_count()),
            event_log: None,
        }
    }

    fn store(&self) -> Result<Store> {
        if self.version != DOCUMENT_VERSION {
            return Err(MapError::Malformed(format!("unknown document version {}", self.version)));
        }
        let n = self.half_edges.len();
        let nv = self.floor_offsets.len();
        if self.vertex_out.len() != nv {
            return Err(MapError::Malformed("vertex_out and floor_offsets differ in length".into()));
        }
        let mut s = Store::new();
        s.faces = self.faces.clone();
        s.vert_kind = self
            .floor_offsets
            .iter()
            .map(|o| o.map_or(VertexKind::Inner, |offset| VertexKind::Boundary { offset }))
            .collect();
        s.vert_out = self.vertex_out.clone();
        s.prev = vec![NONE; n];
        for (h, &[twin, next, origin, face]) in self.half_edges.iter().enumerate() {
            if twin as usize >= n || next as usize >= n || origin as usize >= nv || face as usize >= s.faces.len() {
                return Err(MapError::Malformed(format!("half-edge {h} points out of range")));
            }
            s.he.push(HalfEdgeRecord { twin, next, origin, face });
            s.prev[next as usize] = h as HalfEdgeId;
        }
        let mut runs = BTreeMap::new();
        for &(h, l) in &self.runs {
            if h as usize >= n {
                return Err(MapError::Malformed(format!("run on missing half-edge {h}")));
            }
            runs.insert(h, l);
            runs.insert(s.he[h as usize].twin, l);
        }
        s.runs = runs;
        Ok(s)
    }

    pub fn to_halfplane(&self) -> Result<HalfPlaneMap> {
        if !matches!(self.mode, MapMode::HalfPlane | MapMode::General) || self.window.is_none() {
            return Err(MapError::Malformed("document is not a half-plane map".into()));
        }
        let store = self.store()?;
        let (lo, hi) = self.window.unwrap();
        Ok(HalfPlaneMap {
            store,
            root: self.root,
            frontier: self.frontier.clone(),
            lo,
            hi,
            initial_width: self.initial_width.unwrap_or(1),
        })
    }

    pub fn to_finite(&self) -> Result<FiniteMap> {
        let (Some(m), Some(n)) = (self.boundary_length, self.inner_count) else {
            return Err(MapError::Malformed("document is not a finite map".into()));
        };
        Ok(FiniteMap { store: self.store()?, root: self.root, m, n, general: self.mode == MapMode::General })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map documents always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MapError::Malformed(e.to_string()))
    }
}

/// Straight-line picture: vertices on rows by distance from the root
/// vertex, ordered within a row by first discovery.
pub fn render_svg(s: &Store, root: HalfEdgeId) -> String {
    let nv = s.vertex_count();
    let mut layer = vec![usize::MAX; nv];
    let mut rows: Vec<Vec<VertexId>> = Vec::new();
    if nv > 0 {
        let r = s.origin(root);
        layer[r as usize] = 0;
        let mut queue = VecDeque::from([r]);
        // breadth first over edges, in half-edge order for stable output
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); nv];
        for rec in s.records() {
            adj[rec.origin as usize].push(s.origin(rec.twin));
        }
        while let Some(v) = queue.pop_front() {
            let d = layer[v as usize];
            if rows.len() <= d {
                rows.push(Vec::new());
            }
            rows[d].push(v);
            for &w in &adj[v as usize] {
                if layer[w as usize] == usize::MAX {
                    layer[w as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(1).max(1);
    let (dx, dy, pad) = (40.0, 60.0, 20.0);
    let w = pad * 2.0 + dx * width as f64;
    let h = pad * 2.0 + dy * rows.len().max(1) as f64;
    let mut pos = vec![(0.0, 0.0); nv];
    for (d, row) in rows.iter().enumerate() {
        let shift = (width - row.len()) as f64 * dx / 2.0;
        for (t, &v) in row.iter().enumerate() {
            pos[v as usize] = (pad + shift + dx * (t as f64 + 0.5), h - pad - dy * (d as f64 + 0.5));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for (e, rec) in s.records().iter().enumerate() {
        if (e as u32) > rec.twin {
            continue;
        }
        let (a, b) = (rec.origin as usize, s.origin(rec.twin) as usize);
        if layer[a] == usize::MAX || layer[b] == usize::MAX {
            continue;
        }
        let on_outer = rec.face == OUTER || s.face(rec.twin) == OUTER;
        let colour = if e as u32 == root || rec.twin == root {
            "#c0392b"
        } else if on_outer {
            "#2c3e50"
        } else {
            "#95a5a6"
        };
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="{}"/>"#,
            pos[a].0,
            pos[a].1,
            pos[b].0,
            pos[b].1,
            if on_outer { 2 } else { 1 }
        );
    }
    for v in 0..nv {
        if layer[v] == usize::MAX {
            continue;
        }
        let fill = if s.kind(v as VertexId) == VertexKind::Inner { "#ffffff" } else { "#2c3e50" };
        let _ = writeln!(
            out,
            r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{fill}" stroke="#2c3e50"/>"##,
            pos[v].0, pos[v].1
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::PatchCode;

    #[test]
    fn halfplane_json_round_trip() {
        let mut m = HalfPlaneMap::new_floor(2).unwrap();
        m.attach_alpha(m.root()).unwrap();
        let doc = MapDocument::from_halfplane(&m, None);
        let back = MapDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_halfplane().unwrap(), m);
    }

    #[test]
    fn finite_json_round_trip() {
        let fm = FiniteMap::from_code(4, &"S2 E I S2 E S2 E E".parse::<PatchCode>().unwrap()).unwrap();
        let doc = MapDocument::from_finite(&fm);
        assert_eq!(MapDocument::from_json(&doc.to_json()).unwrap().to_finite().unwrap(), fm);
        assert!(doc.to_halfplane().is_err());
    }

    #[test]
    fn svg_has_content() {
        let mut m = HalfPlaneMap::new_floor(3).unwrap();
        m.attach_alpha(m.root()).unwrap();
        let svg = render_svg(m.store(), m.root());
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 5);
        assert_eq!(svg.matches("<line").count(), 5);
    }
}

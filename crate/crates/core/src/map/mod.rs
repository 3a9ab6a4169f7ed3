//! Half-edge maps: the revealed part of a half-planar triangulation and
//! finite triangulations of polygons.

pub mod document;
pub mod eventlog;
pub mod finite;
pub mod halfplane;
pub mod patch;
pub mod store;
pub mod validate;

pub use eventlog::{EventLog, LogStep};
pub use finite::FiniteMap;
pub use halfplane::{Distances, HalfPlaneMap, Hole, PeelSite};
pub use patch::{PatchCode, PatchToken};
pub use store::{FaceId, FaceKind, HalfEdgeId, HalfEdgeRecord, Store, VertexId, VertexKind, NONE, OUTER};
pub use validate::{validate_finite, validate_halfplane, ValidationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("half-edge {0} is not exposed")]
    NotExposed(HalfEdgeId),
    #[error("patch perimeter {patch} does not match hole perimeter {hole}")]
    LengthMismatch { hole: u64, patch: u64 },
    #[error("root face not revealed")]
    NotRevealed,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("half-edge limit {limit} reached")]
    Resource { limit: usize },
    #[error("root-face weights at (m={m}, n={n}) reach only {mass}")]
    NumericLeak { m: u64, n: u64, mass: f64 },
    #[error("{0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("structure: {0}")]
    Structure(String),
    #[error(transparent)]
    Law(#[from] crate::law::LawError),
}

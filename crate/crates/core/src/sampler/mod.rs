//! Map-level samplers.

pub mod ball;
pub mod nonsimple;
pub mod polygon;
pub mod schedule;

use std::sync::OnceLock;

use crate::enumeration::PhiLogTable;
use crate::law::LawError;
use crate::map::MapError;

pub use ball::{build_ball, build_ball_with, check_hull, inner_vertex_total, peel_steps, reveal_around, Anomaly, AnomalyKind, Ball, BallConfig};
pub use nonsimple::{core, core_finite, expand_finite, expand_nonsimple, ExpandStats, NonSimpleParams, OneGonFill};
pub use polygon::{boltzmann_polygon, root_event_of, uniform_polygon, uniform_polygon_with, boltzmann_polygon_with};
pub use schedule::{EdgeSelector, PeekingSelector, Schedule, ScheduleKind, SelectView};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, SamplerError>;

/// Shared table of `ln φ` for small polygons.
pub(crate) fn phi_table() -> &'static PhiLogTable {
    static TABLE: OnceLock<PhiLogTable> = OnceLock::new();
    TABLE.get_or_init(|| PhiLogTable::new(1280, 256))
}

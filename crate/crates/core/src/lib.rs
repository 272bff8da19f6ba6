//! Dual graph models of degenerating curves, their reductions, limit measures and the
//! chart numerics behind them.

pub mod corpus;
pub mod dsl;
pub mod emit;
pub mod error;
pub mod limits;
pub mod local;
pub mod measure;
pub mod model;
pub mod reduction;

pub use error::{Error, NonConvergence, Result};
pub use measure::{CcMeasure, FiberMeasure, HybMeasure, Location, Mass, MeasureKind, Support, VertexMeasure};
pub use model::{validate, ComponentId, DualGraphModel, EdgeId, MarkId, PointId, Q};

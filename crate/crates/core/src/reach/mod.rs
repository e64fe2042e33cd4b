//! Reachable-set over-approximation of the closed loop.
//!
//! The closed loop is written as a scalar computational graph, bounded
//! node by node with affine lower/upper functions of the graph input, and
//! concretized to a hyper-rectangle after every control step.

mod build;
mod certify;
mod geometry;
mod graph;
mod rect;
mod relax;

pub use build::{augmented_graph, build_closed_loop_graph};
pub use certify::{augmented_step, certify, Certificate, CertifyInput};
pub use geometry::{rect_intersects_region, ConvexPolygon, UnsafeRegion};
pub use graph::{CompGraph, GraphBuilder, Node, NodeId, NodeKind};
pub use rect::{concretize, HyperRect};
pub use relax::{relax, AffineBound, LinearBounds};

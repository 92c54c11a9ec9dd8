//! Causal effect identification on acyclic directed mixed graphs.
//!
//! - [`admg`]: the graph type and its structural operations.
//! - [`separation`]: d-separation tests on graphs.
//! - [`expr`]: symbolic probability expressions, simplification, rendering.
//! - [`identify`]: the recursive identification algorithms for `P_x(y)` and
//!   `P_x(y | z)`, returning an expression or a hedge witness.
//! - [`oracle`]: discrete structural causal models with exact enumeration,
//!   used as numerical ground truth.

pub mod admg;
pub mod expr;
pub mod identify;
pub mod oracle;
pub mod separation;

pub use admg::{parse_graph, parse_graph_text, Admg, GraphError, VarSet, VertexName};
pub use expr::{Expression, SimplifyLevel};
pub use identify::{identify, identify_traced, HedgeWitness, IdentifyError, IdentifyOptions, Query};

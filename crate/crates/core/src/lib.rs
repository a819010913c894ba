//! Compiler for grid-based commutative diagrams.
//!
//! Source text is parsed into a [`dsl::DiagramAst`], laid out on a grid of
//! scaled-point (sp) integers, and rendered to SVG or a JSON layout dump.

pub mod batch;
pub mod cache;
pub mod compile;
pub mod dsl;
pub mod fixedmath;
pub mod labels;
pub mod layout;
pub mod render;
pub mod router;
pub mod settings;
pub mod styles;
pub mod units;

//! Balanced separators, shallow minors and treewidth for graphs with
//! strongly sublinear separators, plus the bound calculus that relates
//! separator exponents to polynomial expansion.
//!
//! Every produced object (separator, branch model, tree decomposition) can be
//! rechecked by an independent validator in the same module.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod families;
pub mod graph;
pub mod minor;
pub mod pipeline;
pub mod separator;
pub mod treewidth;

pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, VertexSet};
pub use minor::{BranchModel, Density, MinorResult};
pub use separator::{BalanceCertificate, Separator};
pub use treewidth::TreeDecomposition;

//! Split decompositions, Buneman complexes, tight spans and optimal graph
//! realisations of finite metrics, in exact rational arithmetic.

pub mod buneman;
pub mod corpus;
pub mod embedder;
pub mod error;
pub mod graph;
pub mod lp;
pub mod metric;
pub mod rational;
pub mod realizer;
pub mod split;
pub mod tightspan;

pub use error::{Error, Result};
pub use graph::{VertexPath, VertexRole, WeightedGraph};
pub use metric::FiniteMetric;
pub use rational::Rat;

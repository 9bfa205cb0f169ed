//! Decision trees for weighted hypothesis identification.
//!
//! The crate builds greedy trees, exact depth-bounded optimal trees, and the
//! subexponential `FullTree` approximation, and turns the inequalities that
//! govern them into executable audits: chain decompositions, min-sum set
//! cover correspondences, heavy-path bounds, and instance generators that
//! stress the greedy rule.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod format;
pub mod fulltree;
pub mod generate;
pub mod greedy;
pub mod harness;
pub mod hypset;
pub mod instance;
pub mod mssc;
pub mod num;
pub mod report;
pub mod rounding;
pub mod setcover;
pub mod tree;

pub use error::{Error, Result};
pub use hypset::HypothesisSet;
pub use instance::{DTInstance, ExactInstance, FloatInstance};
pub use num::{Mass, Rational, Value};
pub use tree::DecisionTree;

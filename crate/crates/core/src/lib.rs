//! Hierarchical Choquet integral preference modelling: 2-additive capacities,
//! criteria hierarchies, robust ordinal regression and stochastic
//! multicriteria acceptability analysis.

pub mod capacity;
pub mod dataio;
pub mod hierarchy;
pub mod linprog;
pub mod preference;
pub mod smaa;
pub mod table;

pub use capacity::{EvaluationVector, MobiusCapacity2Add, MobiusLayout};
pub use hierarchy::{CriteriaHierarchy, Direction, NodeId, NodeSpec};
pub use preference::{PreferenceStatement, StatementKind};
pub use table::{Alternative, PerformanceTable};

//! Lee-Yang and Fisher zeros of hypergraph-coloring and CNF partition
//! functions, the projected complex Glauber dynamics behind them, and exact
//! small-instance checks of the accompanying limit theorems.

pub mod acceptance;
pub mod conditions;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod gen;
pub mod interpolate;
pub mod interval;
pub mod model;
pub mod poly;
pub mod stats;
pub mod zerofree;

pub use error::{Error, Result};
pub use exact::{ComplexMeasure, Event, ExactDistribution, PartialAssignment, ProjectedCounts};
pub use model::{
    Assignment, Clause, CnfFormula, Constraint, Csp, Hypergraph, Level, MixedRadix,
    ProjectionScheme, VarProjection,
};
pub use poly::{PartitionPolynomial, PolyVar};

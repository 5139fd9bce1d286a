//! Data model and exact evaluation for the three constraint stages.

mod assignment;
mod brute;
mod clouded;
mod lin2;
mod one_in_three;

pub use assignment::Assignment;
pub use brute::{brute_force_min_unsat, min_unsat_eliminating, ConstraintSystem, DEFAULT_BRUTE_FORCE_VARS};
pub use clouded::{make_cloud_consistent, Cloud, CloudVar, CloudVarKind, CloudedSystem};
pub use lin2::{Lin2Equation, Lin2System};
pub use one_in_three::{
    cluster_outcome, extend_aux_optimal, extend_aux_with, Clause, Cluster, ClusterOutcome, Literal,
    OneInThreeInstance, Role, Variable, CLUSTER_AUX_PAIRS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("assignment covers {found} variables, instance has {expected}")]
    AssignmentSize { expected: usize, found: usize },
    #[error("variable index {var} out of range for {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("equation {equation} repeats a variable")]
    RepeatedVariable { equation: usize },
    #[error("unknown variable id `{0}`")]
    UnknownVariable(String),
    #[error("instance has {vars} free variables, brute force limit is {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("malformed instance: {0}")]
    Malformed(String),
}

//! Bounded symbolic execution and pairwise equivalence checking.
//!
//! Inputs range over a finite [`InputDomain`]. [`sym_execute`] splits that
//! domain into path-constrained traces; [`check_equivalence`] pairs the traces
//! of two programs and searches for the smallest input on which their
//! outcomes differ. [`brute_force_equivalence`] is the exhaustive reference.

mod domain;
mod equiv;
mod explore;
mod expr;
mod solver;

pub use domain::{compare_inputs, input_key, int_rank, ordered_values, InputDomain};
pub use equiv::{
    brute_force_equivalence, check_equivalence, outcomes_distinguish, EquivConfig, EquivVerdict, BRUTE_FORCE_CEILING,
};
pub use explore::{
    to_assignment, to_inputs, ExecCaps, PathConstraint, SymValue, Trace, TraceOutcome, TraceSet, UnknownReason,
};
pub use expr::{Assignment, Evaluator, ExprId, ExprPool, Node, Scalar, Sym};
pub use solver::{Shape, SolveResult, Solver};

use crate::lang::Program;

/// Trace set of one program together with the arena its expressions live in.
#[derive(Debug)]
pub struct SymbolicRun {
    pub pool: ExprPool,
    pub traces: TraceSet,
}

/// Explores every path of `p` over `dom` without a time limit.
pub fn sym_execute(p: &Program, dom: InputDomain, caps: ExecCaps) -> SymbolicRun {
    let mut pool = ExprPool::new();
    let traces = explore::explore(&mut pool, p, dom, caps, None);
    SymbolicRun { pool, traces }
}

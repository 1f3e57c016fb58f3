//! Exact 0-1 solver: depth-first branch-and-bound with propagation and a
//! clique-aware bound, an exhaustive enumeration oracle for tiny programs,
//! and a text interchange format for cross-checking with other solvers.

mod branch_bound;
mod enumerate;
mod lp_text;

pub use branch_bound::{solve, BranchOrder, SolveOptions, Solution, Status};
pub use enumerate::{enumerate_optimal, ENUMERATION_CAP};
pub use lp_text::{export_program, parse_program};

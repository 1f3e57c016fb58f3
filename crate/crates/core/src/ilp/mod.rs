//! The 0-1 integer linear program: decision variables, constraint families,
//! linearizations and the scalarized latency/energy objective.

mod build;
mod expand;
mod index;
mod program;

pub use build::{
    build_assignment_constraints, build_cache_capacity_and_hit, build_caching_constraints,
    build_latency_objective, build_energy_objective, build_linearization_constraints,
    build_program, build_quality_constraint, hit_big_m, normalization_bounds,
    NormalizationBounds, Program, HIT_EPSILON,
};
pub use expand::{expand_plan, extract_plan};
pub use index::{Mode, VarKind, VariableIndex};
pub use program::{Cmp, Constraint, LinearProgram};

use crate::workload::Instance;

/// Quality attained when every request selects the top rate.
pub fn quality_upper_bound(inst: &Instance) -> f64 {
    inst.requests
        .iter()
        .map(|r| r.target_count() as f64 * inst.rate_table.max_ssim())
        .sum()
}

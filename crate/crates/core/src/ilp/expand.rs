//! Bridges between semantic plans and raw binary assignments.

use super::index::{Mode, VarKind, VariableIndex};
use crate::evaluator::Plan;
use crate::workload::Instance;
use crate::{Error, Result};
use std::collections::BTreeSet;

/// Expands a plan into a full assignment over the variable index, deriving
/// the hit indicators and every auxiliary as the product of its operands.
pub fn expand_plan(inst: &Instance, idx: &VariableIndex, plan: &Plan) -> Result<Vec<u8>> {
    let n = inst.request_count();
    if plan.compute.len() != n || plan.storage.len() != n || plan.rate_idx.len() != n {
        return Err(Error::IncompletePlan("placement vectors out of shape".into()));
    }
    let mut a = vec![0u8; idx.len()];

    for &(s, j) in &plan.cached_models {
        let v = idx
            .get(VarKind::P { s, j })
            .ok_or_else(|| Error::IncompletePlan(format!("no variable for model {s} at node {j}")))?;
        a[v] = 1;
    }
    for &(r, s, l) in &plan.cached_aros {
        let v = idx
            .get(VarKind::H { r, s, l })
            .ok_or_else(|| Error::IncompletePlan(format!("request {r} does not target ({s},{l})")))?;
        a[v] = 1;
    }
    for req in &inst.requests {
        let r = req.id;
        let x = idx.get(VarKind::X { r, i: plan.compute[r] }).ok_or_else(|| {
            Error::IncompletePlan(format!(
                "compute node {} of request {r} unavailable in mode {}",
                plan.compute[r],
                idx.mode()
            ))
        })?;
        a[x] = 1;
        let y = idx
            .get(VarKind::Y { r, j: plan.storage[r] })
            .ok_or_else(|| Error::IncompletePlan(format!("storage node {} is not an EC", plan.storage[r])))?;
        a[y] = 1;
        let e = idx
            .get(VarKind::E { r, g: plan.rate_idx[r] })
            .ok_or_else(|| Error::IncompletePlan(format!("rate index {} out of range", plan.rate_idx[r])))?;
        a[e] = 1;
    }

    // Hit flags and auxiliaries follow from the semantic bits.
    for req in &inst.requests {
        let r = req.id;
        for ec in &inst.ecs {
            let j = ec.node;
            let y = a[idx.of(VarKind::Y { r, j })];
            let mut any_hit = 0u8;
            let mut any_model = 0u8;
            for m in &req.models {
                let s = m.id;
                let p = a[idx.of(VarKind::P { s, j })];
                any_model |= p;
                let alpha = p & y;
                a[idx.of(VarKind::Alpha { r, s, j })] = alpha;
                let mut complete = p;
                for t in &m.targets {
                    let h = a[idx.of(VarKind::H { r, s, l: t.id })];
                    let beta = p & h;
                    a[idx.of(VarKind::Beta { r, s, l: t.id, j })] = beta;
                    a[idx.of(VarKind::Lambda { r, s, l: t.id, j })] = alpha & beta;
                    complete &= beta;
                }
                if m.targets.len() > 1 {
                    a[idx.of(VarKind::Hit { r, s, j })] = complete;
                }
                any_hit |= complete;
            }
            a[idx.of(VarKind::Z { r, j })] = any_hit;
            a[idx.of(VarKind::Qc { r, j })] = 1 - any_hit;
            a[idx.of(VarKind::Psi { r, j })] = any_hit & y;
            a[idx.of(VarKind::Miss { r, j })] = (1 - any_hit) & y;
            if req.models.len() > 1 {
                a[idx.of(VarKind::Bare { r, j })] = (1 - any_model) & y;
            }
            for &i in &x_nodes(inst, r, idx.mode()) {
                let x = a[idx.of(VarKind::X { r, i })];
                a[idx.of(VarKind::Xi { r, i, j })] = x & y;
            }
        }
        // phi = e AND model rendered anywhere.
        for m in &req.models {
            let rendered = inst
                .ecs
                .iter()
                .any(|ec| a[idx.of(VarKind::P { s: m.id, j: ec.node })] == 1) as u8;
            for g in 0..inst.rate_table.len() {
                let e = a[idx.of(VarKind::E { r, g })];
                a[idx.of(VarKind::Phi { r, s: m.id, g })] = e & rendered;
            }
        }
    }
    Ok(a)
}

fn x_nodes(inst: &Instance, r: usize, mode: Mode) -> Vec<usize> {
    let mut nodes: Vec<usize> = inst.ecs.iter().map(|e| e.node).collect();
    if mode == Mode::OptimT {
        nodes.push(inst.requests[r].terminal);
    }
    nodes
}

/// Reads the semantic decisions back out of a raw assignment.
pub fn extract_plan(inst: &Instance, idx: &VariableIndex, assignment: &[u8]) -> Result<Plan> {
    if assignment.len() != idx.len() {
        return Err(Error::IncompletePlan("assignment length mismatch".into()));
    }
    let n = inst.request_count();
    let mut compute = vec![usize::MAX; n];
    let mut storage = vec![usize::MAX; n];
    let mut rate_idx = vec![usize::MAX; n];
    let mut cached_models = BTreeSet::new();
    let mut cached_aros = BTreeSet::new();

    for (v, &val) in assignment.iter().enumerate() {
        if val != 1 {
            continue;
        }
        match idx.kind(v) {
            VarKind::X { r, i } => {
                if compute[r] != usize::MAX {
                    return Err(Error::IncompletePlan(format!("request {r} has two compute nodes")));
                }
                compute[r] = i;
            }
            VarKind::Y { r, j } => {
                if storage[r] != usize::MAX {
                    return Err(Error::IncompletePlan(format!("request {r} has two storage nodes")));
                }
                storage[r] = j;
            }
            VarKind::E { r, g } => {
                if rate_idx[r] != usize::MAX {
                    return Err(Error::IncompletePlan(format!("request {r} has two rates")));
                }
                rate_idx[r] = g;
            }
            VarKind::P { s, j } => {
                cached_models.insert((s, j));
            }
            VarKind::H { r, s, l } => {
                cached_aros.insert((r, s, l));
            }
            _ => {}
        }
    }
    for r in 0..n {
        if compute[r] == usize::MAX || storage[r] == usize::MAX || rate_idx[r] == usize::MAX {
            return Err(Error::IncompletePlan(format!("request {r} missing a one-hot choice")));
        }
    }
    Ok(Plan {
        compute,
        storage,
        rate_idx,
        cached_models,
        cached_aros,
    })
}

//! Depth-first branch-and-bound over binary variables.
//!
//! Bounding relaxes every constraint except the one-hot cliques: the bound
//! is the fixed objective mass plus the cheapest free choice of every
//! undecided clique. Propagation walks constraint activities to fixpoint
//! after each decision, which pins all product auxiliaries once their
//! operands are decided. The search is deterministic for fixed options;
//! wall-clock is only consulted when a time limit is set.

use crate::ilp::{Cmp, LinearProgram};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchOrder {
    /// First free variable in index order (caching, placement, rates first).
    PaperOrder,
    /// Free variable with the highest constraint degree; a static stand-in
    /// for most-fractional selection since the bound carries no fractions.
    MostFractional,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit_s: Option<f64>,
    /// Deterministic budget; exceeding it reports the incumbent.
    pub node_limit: Option<u64>,
    pub absolute_gap: f64,
    pub branching: BranchOrder,
    pub seed: u64,
    /// Optional warm-start assignment; ignored with a log message when it is
    /// not feasible.
    pub initial: Option<Vec<u8>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit_s: None,
            node_limit: None,
            absolute_gap: 0.0,
            branching: BranchOrder::PaperOrder,
            seed: 0,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    /// Stopped by the gap tolerance or the node budget, incumbent on board.
    BoundReached,
    TimedOut,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Optimal => write!(f, "optimal"),
            Status::Infeasible => write!(f, "infeasible"),
            Status::BoundReached => write!(f, "bound_reached"),
            Status::TimedOut => write!(f, "timed_out"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub assignment: Vec<u8>,
    pub objective: f64,
    pub status: Status,
    pub nodes: u64,
    pub wall_time_s: f64,
    pub lower_bound: f64,
    /// Objectives of successive incumbents, non-increasing.
    pub incumbent_trace: Vec<f64>,
}

struct Row {
    terms: Vec<(usize, f64)>,
    cmp: Cmp,
    rhs: f64,
    tol: f64,
}

struct Search<'a> {
    lp: &'a LinearProgram,
    rows: Vec<Row>,
    var_rows: Vec<Vec<u32>>,
    obj: Vec<f64>,
    /// Clique id per variable (first Σv = 1 row covering it).
    var_clique: Vec<Option<u32>>,
    clique_vars: Vec<Vec<usize>>,

    vals: Vec<i8>,
    min_act: Vec<f64>,
    max_act: Vec<f64>,
    fixed_obj: f64,
    clique_open: Vec<u32>, // free member count
    clique_taken: Vec<bool>,
    trail: Vec<usize>,

    incumbent: Option<Vec<u8>>,
    incumbent_obj: f64,
    incumbent_trace: Vec<f64>,
    nodes: u64,
}

const PRUNE_EPS: f64 = 1e-12;

impl<'a> Search<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut var_rows = vec![Vec::new(); n];
        for (ri, c) in lp.constraints.iter().enumerate() {
            let scale = c
                .terms
                .iter()
                .map(|&(_, co)| co.abs())
                .fold(c.rhs.abs().max(1.0), f64::max);
            for &(v, _) in &c.terms {
                var_rows[v].push(ri as u32);
            }
            rows.push(Row {
                terms: c.terms.clone(),
                cmp: c.cmp,
                rhs: c.rhs,
                tol: 1e-7 * scale,
            });
        }

        let mut obj = vec![0.0; n];
        for &(v, c) in &lp.objective {
            obj[v] += c;
        }

        let mut var_clique = vec![None; n];
        let mut clique_vars: Vec<Vec<usize>> = Vec::new();
        for c in &lp.constraints {
            if c.cmp == Cmp::Eq
                && (c.rhs - 1.0).abs() < 1e-12
                && c.terms.iter().all(|&(_, co)| (co - 1.0).abs() < 1e-12)
                && c.terms.iter().all(|&(v, _)| var_clique[v].is_none())
            {
                let id = clique_vars.len() as u32;
                for &(v, _) in &c.terms {
                    var_clique[v] = Some(id);
                }
                clique_vars.push(c.terms.iter().map(|&(v, _)| v).collect());
            }
        }

        let min_act = rows
            .iter()
            .map(|r| r.terms.iter().map(|&(_, c)| c.min(0.0)).sum())
            .collect();
        let max_act = rows
            .iter()
            .map(|r| r.terms.iter().map(|&(_, c)| c.max(0.0)).sum())
            .collect();
        let clique_open = clique_vars.iter().map(|c| c.len() as u32).collect();
        let clique_taken = vec![false; clique_vars.len()];

        Search {
            lp,
            rows,
            var_rows,
            obj,
            var_clique,
            clique_vars,
            vals: vec![-1; n],
            min_act,
            max_act,
            fixed_obj: 0.0,
            clique_open,
            clique_taken,
            trail: Vec::new(),
            incumbent: None,
            incumbent_obj: f64::INFINITY,
            incumbent_trace: Vec::new(),
            nodes: 0,
        }
    }

    fn fix(&mut self, var: usize, val: u8) {
        debug_assert_eq!(self.vals[var], -1);
        self.vals[var] = val as i8;
        self.trail.push(var);
        let v = val as f64;
        for &ri in &self.var_rows[var] {
            let row = &self.rows[ri as usize];
            let c = row.terms.iter().find(|&&(w, _)| w == var).unwrap().1;
            self.min_act[ri as usize] += c * v - c.min(0.0);
            self.max_act[ri as usize] += c * v - c.max(0.0);
        }
        if val == 1 {
            self.fixed_obj += self.obj[var];
        }
        if let Some(cq) = self.var_clique[var] {
            self.clique_open[cq as usize] -= 1;
            if val == 1 {
                self.clique_taken[cq as usize] = true;
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            let val = self.vals[var] as u8;
            let v = val as f64;
            for &ri in &self.var_rows[var] {
                let row = &self.rows[ri as usize];
                let c = row.terms.iter().find(|&&(w, _)| w == var).unwrap().1;
                self.min_act[ri as usize] -= c * v - c.min(0.0);
                self.max_act[ri as usize] -= c * v - c.max(0.0);
            }
            if val == 1 {
                self.fixed_obj -= self.obj[var];
            }
            if let Some(cq) = self.var_clique[var] {
                self.clique_open[cq as usize] += 1;
                if val == 1 {
                    self.clique_taken[cq as usize] = false;
                }
            }
            self.vals[var] = -1;
        }
    }

    /// Fixes `var := val` and walks implications to fixpoint. False on conflict.
    fn assign_and_propagate(&mut self, var: usize, val: u8) -> bool {
        let mut queue = vec![(var, val)];
        while let Some((v, b)) = queue.pop() {
            match self.vals[v] {
                -1 => {}
                x if x == b as i8 => continue,
                _ => return false,
            }
            self.fix(v, b);
            for ri_ref in &self.var_rows[v] {
                let ri = *ri_ref as usize;
                if !self.scan_row(ri, &mut queue) {
                    return false;
                }
            }
        }
        true
    }

    /// Checks one row for conflict and emits forced assignments.
    fn scan_row(&self, ri: usize, queue: &mut Vec<(usize, u8)>) -> bool {
        let row = &self.rows[ri];
        let (min_a, max_a) = (self.min_act[ri], self.max_act[ri]);
        let check_le = matches!(row.cmp, Cmp::Le | Cmp::Eq);
        let check_ge = matches!(row.cmp, Cmp::Ge | Cmp::Eq);
        if check_le && min_a > row.rhs + row.tol {
            return false;
        }
        if check_ge && max_a < row.rhs - row.tol {
            return false;
        }
        let le_active = check_le && max_a > row.rhs + row.tol;
        let ge_active = check_ge && min_a < row.rhs - row.tol;
        if !le_active && !ge_active {
            return true;
        }
        for &(w, c) in &row.terms {
            if self.vals[w] != -1 {
                continue;
            }
            if le_active {
                // Value b pushes the minimum activity past the bound.
                let bad_one = min_a + c - c.min(0.0) > row.rhs + row.tol;
                let bad_zero = min_a - c.min(0.0) > row.rhs + row.tol;
                if bad_one && bad_zero {
                    return false;
                } else if bad_one {
                    queue.push((w, 0));
                } else if bad_zero {
                    queue.push((w, 1));
                }
            }
            if ge_active {
                let bad_one = max_a + c - c.max(0.0) < row.rhs - row.tol;
                let bad_zero = max_a - c.max(0.0) < row.rhs - row.tol;
                if bad_one && bad_zero {
                    return false;
                } else if bad_one {
                    queue.push((w, 0));
                } else if bad_zero {
                    queue.push((w, 1));
                }
            }
        }
        true
    }

    /// Root sweep over every row.
    fn propagate_root(&mut self) -> bool {
        let mut queue = Vec::new();
        for ri in 0..self.rows.len() {
            if !self.scan_row(ri, &mut queue) {
                return false;
            }
        }
        while let Some((v, b)) = queue.pop() {
            if !self.assign_and_propagate(v, b) {
                return false;
            }
        }
        true
    }

    /// Fixed mass plus the cheapest completion of every open clique; free
    /// variables outside cliques contribute their negative mass (none in the
    /// service programs, whose objectives are nonnegative).
    fn bound(&self) -> f64 {
        let mut b = self.fixed_obj;
        for (cq, vars) in self.clique_vars.iter().enumerate() {
            if self.clique_taken[cq] || self.clique_open[cq] == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            for &v in vars {
                if self.vals[v] == -1 {
                    let c = self.obj[v];
                    if c < best {
                        best = c;
                    }
                }
            }
            if best.is_finite() {
                b += best;
            }
        }
        for (v, &val) in self.vals.iter().enumerate() {
            if val == -1 && self.obj[v] < 0.0 && self.var_clique[v].is_none() {
                b += self.obj[v];
            }
        }
        b
    }

    fn pick_var(&self, order: BranchOrder, degree: &[u32]) -> Option<usize> {
        match order {
            BranchOrder::PaperOrder => self.vals.iter().position(|&v| v == -1),
            BranchOrder::MostFractional => {
                let mut best: Option<(u32, usize)> = None;
                for (v, &val) in self.vals.iter().enumerate() {
                    if val == -1 {
                        let d = degree[v];
                        if best.map_or(true, |(bd, _)| d > bd) {
                            best = Some((d, v));
                        }
                    }
                }
                best.map(|(_, v)| v)
            }
        }
    }

    fn store_incumbent(&mut self) {
        let assignment: Vec<u8> = self.vals.iter().map(|&v| v as u8).collect();
        // Re-verify from scratch so activity drift can never leak an
        // infeasible incumbent.
        for (c, row) in self.lp.constraints.iter().zip(&self.rows) {
            if !c.satisfied(&assignment, row.tol) {
                return;
            }
        }
        let obj = self.lp.objective_value(&assignment);
        if obj < self.incumbent_obj - PRUNE_EPS {
            self.incumbent_obj = obj;
            self.incumbent = Some(assignment);
            self.incumbent_trace.push(obj);
        }
    }
}

struct Frame {
    var: usize,
    values: [u8; 2],
    next: usize,
    mark: usize,
    bound: f64,
}

/// Solves a binary program to proven optimality within the configured
/// budgets. Deterministic for fixed options when no wall-clock limit is set.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Solution {
    let start = Instant::now();
    let mut search = Search::new(lp);
    let degree: Vec<u32> = (0..lp.num_vars)
        .map(|v| search.var_rows[v].len() as u32)
        .collect();

    if let Some(init) = &opts.initial {
        if init.len() == lp.num_vars && lp.is_feasible(init, 1e-6) {
            search.incumbent_obj = lp.objective_value(init);
            search.incumbent = Some(init.clone());
            search.incumbent_trace.push(search.incumbent_obj);
        } else {
            log::warn!("warm start rejected: not a feasible assignment");
        }
    }

    let root_ok = search.propagate_root();
    let root_bound = search.bound();
    let mut stack: Vec<Frame> = Vec::new();
    let mut status = Status::Optimal;

    if root_ok {
        'search: loop {
            search.nodes += 1;
            if let Some(limit) = opts.node_limit {
                if search.nodes > limit {
                    status = Status::BoundReached;
                    break;
                }
            }
            if let Some(limit) = opts.time_limit_s {
                if search.nodes % 64 == 0 && start.elapsed().as_secs_f64() > limit {
                    status = Status::TimedOut;
                    break;
                }
            }

            let bound = search.bound();
            let prune = bound >= search.incumbent_obj - PRUNE_EPS;
            let mut descend = false;
            if !prune {
                match search.pick_var(opts.branching, &degree) {
                    None => search.store_incumbent(),
                    Some(var) => {
                        // Cliques enumerate membership; elsewhere try the
                        // cheap value first.
                        let values = if search.var_clique[var].is_some() || search.obj[var] <= 0.0 {
                            [1, 0]
                        } else {
                            [0, 1]
                        };
                        stack.push(Frame {
                            var,
                            values,
                            next: 0,
                            mark: search.trail.len(),
                            bound,
                        });
                        descend = true;
                    }
                }
            }

            // Gap check against the cheapest open node.
            if search.incumbent.is_some() && opts.absolute_gap > 0.0 && search.nodes % 64 == 0 {
                let open = stack
                    .iter()
                    .filter(|f| f.next < 2)
                    .map(|f| f.bound)
                    .fold(f64::INFINITY, f64::min);
                if search.incumbent_obj - open.min(root_bound) <= opts.absolute_gap
                    || open == f64::INFINITY
                {
                    status = Status::BoundReached;
                    break;
                }
            }
            let _ = descend;

            // Advance: take the next untried value of the top frame.
            loop {
                match stack.last_mut() {
                    None => break 'search,
                    Some(frame) => {
                        if frame.next >= 2 {
                            let mark = frame.mark;
                            search.undo_to(mark);
                            stack.pop();
                            continue;
                        }
                        let val = frame.values[frame.next];
                        frame.next += 1;
                        let mark = frame.mark;
                        let var = frame.var;
                        search.undo_to(mark);
                        if search.assign_and_propagate(var, val) {
                            break;
                        }
                    }
                }
            }
        }
    }

    let open_bound = stack
        .iter()
        .filter(|f| f.next < 2)
        .map(|f| f.bound)
        .fold(f64::INFINITY, f64::min)
        .min(if status == Status::Optimal && root_ok {
            f64::INFINITY
        } else {
            root_bound
        });

    let wall = start.elapsed().as_secs_f64();
    let (assignment, objective, lower) = match &search.incumbent {
        Some(a) => {
            let lb = if status == Status::Optimal {
                search.incumbent_obj
            } else {
                open_bound.min(search.incumbent_obj)
            };
            (a.clone(), search.incumbent_obj, lb)
        }
        None => {
            if status == Status::Optimal {
                status = Status::Infeasible;
            }
            (Vec::new(), f64::INFINITY, root_bound)
        }
    };

    log::info!(
        "solver status={status} nodes={} objective={objective:.9} lower={lower:.9} wall_s={wall:.3}",
        search.nodes
    );
    Solution {
        assignment,
        objective,
        status,
        nodes: search.nodes,
        wall_time_s: wall,
        lower_bound: lower,
        incumbent_trace: search.incumbent_trace,
    }
}

//! Dense variable index over every decision variable of the program.
//!
//! Semantic variables come first in a fixed kind order (caching, placement,
//! rates, hit indicators), auxiliaries after; branch-and-bound in
//! paper-variable order walks this index front to back.

use crate::workload::{AroId, Instance, ModelId, ReqId};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    /// Terminals may host the computational function.
    OptimT,
    /// EC-only placement.
    OptimNT,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::OptimT => write!(f, "OptimT"),
            Mode::OptimNT => write!(f, "OptimNT"),
        }
    }
}

/// Role of one binary variable. Node subscripts are topology node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKind {
    /// Model `s` rendered at EC `j`.
    P { s: ModelId, j: usize },
    /// ARO `l` of model `s` pre-cached for request `r`.
    H { r: ReqId, s: ModelId, l: AroId },
    /// Storage-intensive function of `r` at EC `j`.
    Y { r: ReqId, j: usize },
    /// Computational function of `r` at node `i` (EC, or own terminal).
    X { r: ReqId, i: usize },
    /// Rate `g` (table index) selected for `r`.
    E { r: ReqId, g: usize },
    /// Cache hit of `r` at EC `j`.
    Z { r: ReqId, j: usize },
    /// Complement of the hit indicator.
    Qc { r: ReqId, j: usize },
    /// p * y.
    Alpha { r: ReqId, s: ModelId, j: usize },
    /// p * h.
    Beta { r: ReqId, s: ModelId, l: AroId, j: usize },
    /// alpha * beta = p * h * y.
    Lambda { r: ReqId, s: ModelId, l: AroId, j: usize },
    /// e * (model s rendered anywhere).
    Phi { r: ReqId, s: ModelId, g: usize },
    /// z * y.
    Psi { r: ReqId, j: usize },
    /// x * y.
    Xi { r: ReqId, i: usize, j: usize },
    /// Every target of model `s` sits at `j` (emitted when |L_rs| > 1; a
    /// single-target model is represented by its beta directly).
    Hit { r: ReqId, s: ModelId, j: usize },
    /// q * y: a miss at the storage node, carries the penalty.
    Miss { r: ReqId, j: usize },
    /// y with no model of the request rendered at `j` (emitted when
    /// |S_r| > 1; with one model the term folds into y and alpha).
    Bare { r: ReqId, j: usize },
}

impl VarKind {
    pub fn name(&self) -> String {
        match *self {
            VarKind::P { s, j } => format!("p_s{s}_n{j}"),
            VarKind::H { r, s, l } => format!("h_r{r}_s{s}_l{l}"),
            VarKind::Y { r, j } => format!("y_r{r}_n{j}"),
            VarKind::X { r, i } => format!("x_r{r}_n{i}"),
            VarKind::E { r, g } => format!("e_r{r}_g{g}"),
            VarKind::Z { r, j } => format!("z_r{r}_n{j}"),
            VarKind::Qc { r, j } => format!("q_r{r}_n{j}"),
            VarKind::Alpha { r, s, j } => format!("al_r{r}_s{s}_n{j}"),
            VarKind::Beta { r, s, l, j } => format!("be_r{r}_s{s}_l{l}_n{j}"),
            VarKind::Lambda { r, s, l, j } => format!("la_r{r}_s{s}_l{l}_n{j}"),
            VarKind::Phi { r, s, g } => format!("ph_r{r}_s{s}_g{g}"),
            VarKind::Psi { r, j } => format!("ps_r{r}_n{j}"),
            VarKind::Xi { r, i, j } => format!("xi_r{r}_i{i}_n{j}"),
            VarKind::Hit { r, s, j } => format!("ht_r{r}_s{s}_n{j}"),
            VarKind::Miss { r, j } => format!("ms_r{r}_n{j}"),
            VarKind::Bare { r, j } => format!("br_r{r}_n{j}"),
        }
    }

    /// Semantic variables are worth branching on; auxiliaries follow from
    /// them by propagation.
    pub fn is_semantic(&self) -> bool {
        matches!(
            self,
            VarKind::P { .. }
                | VarKind::H { .. }
                | VarKind::Y { .. }
                | VarKind::X { .. }
                | VarKind::E { .. }
                | VarKind::Z { .. }
                | VarKind::Qc { .. }
        )
    }
}

/// Bijection between variable kinds and dense indices.
#[derive(Debug, Clone)]
pub struct VariableIndex {
    kinds: Vec<VarKind>,
    lookup: BTreeMap<VarKind, usize>,
    mode: Mode,
    semantic_len: usize,
}

impl VariableIndex {
    pub fn new(inst: &Instance, mode: Mode) -> Self {
        let mut kinds = Vec::new();
        let ecs: Vec<usize> = inst.ecs.iter().map(|e| e.node).collect();

        // Distinct models referenced by any request, in id order.
        let mut models: Vec<ModelId> = inst
            .requests
            .iter()
            .flat_map(|r| r.models.iter().map(|m| m.id))
            .collect();
        models.sort_unstable();
        models.dedup();

        for &s in &models {
            for &j in &ecs {
                kinds.push(VarKind::P { s, j });
            }
        }
        for req in &inst.requests {
            for m in &req.models {
                for t in &m.targets {
                    kinds.push(VarKind::H { r: req.id, s: m.id, l: t.id });
                }
            }
        }
        for req in &inst.requests {
            for &j in &ecs {
                kinds.push(VarKind::Y { r: req.id, j });
            }
        }
        for req in &inst.requests {
            for &i in &ecs {
                kinds.push(VarKind::X { r: req.id, i });
            }
            if mode == Mode::OptimT {
                kinds.push(VarKind::X { r: req.id, i: req.terminal });
            }
        }
        for req in &inst.requests {
            for g in 0..inst.rate_table.len() {
                kinds.push(VarKind::E { r: req.id, g });
            }
        }
        for req in &inst.requests {
            for &j in &ecs {
                kinds.push(VarKind::Z { r: req.id, j });
            }
        }
        for req in &inst.requests {
            for &j in &ecs {
                kinds.push(VarKind::Qc { r: req.id, j });
            }
        }
        let semantic_len = kinds.len();

        for req in &inst.requests {
            for m in &req.models {
                for &j in &ecs {
                    kinds.push(VarKind::Alpha { r: req.id, s: m.id, j });
                }
            }
        }
        for req in &inst.requests {
            for m in &req.models {
                for t in &m.targets {
                    for &j in &ecs {
                        kinds.push(VarKind::Beta { r: req.id, s: m.id, l: t.id, j });
                    }
                }
            }
        }
        for req in &inst.requests {
            for m in &req.models {
                for t in &m.targets {
                    for &j in &ecs {
                        kinds.push(VarKind::Lambda { r: req.id, s: m.id, l: t.id, j });
                    }
                }
            }
        }
        for req in &inst.requests {
            for m in &req.models {
                for g in 0..inst.rate_table.len() {
                    kinds.push(VarKind::Phi { r: req.id, s: m.id, g });
                }
            }
        }
        for req in &inst.requests {
            for &j in &ecs {
                kinds.push(VarKind::Psi { r: req.id, j });
            }
        }
        for req in &inst.requests {
            for &i in &ecs {
                for &j in &ecs {
                    kinds.push(VarKind::Xi { r: req.id, i, j });
                }
            }
            if mode == Mode::OptimT {
                for &j in &ecs {
                    kinds.push(VarKind::Xi { r: req.id, i: req.terminal, j });
                }
            }
        }
        for req in &inst.requests {
            for m in &req.models {
                if m.targets.len() > 1 {
                    for &j in &ecs {
                        kinds.push(VarKind::Hit { r: req.id, s: m.id, j });
                    }
                }
            }
        }
        for req in &inst.requests {
            for &j in &ecs {
                kinds.push(VarKind::Miss { r: req.id, j });
            }
        }
        for req in &inst.requests {
            if req.models.len() > 1 {
                for &j in &ecs {
                    kinds.push(VarKind::Bare { r: req.id, j });
                }
            }
        }

        let lookup = kinds.iter().copied().enumerate().map(|(i, k)| (k, i)).collect();
        VariableIndex {
            kinds,
            lookup,
            mode,
            semantic_len,
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of leading semantic variables.
    pub fn semantic_len(&self) -> usize {
        self.semantic_len
    }

    pub fn kind(&self, idx: usize) -> VarKind {
        self.kinds[idx]
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn get(&self, kind: VarKind) -> Option<usize> {
        self.lookup.get(&kind).copied()
    }

    /// Index of a kind that is known to exist.
    pub fn of(&self, kind: VarKind) -> usize {
        self.lookup[&kind]
    }

    pub fn names(&self) -> Vec<String> {
        self.kinds.iter().map(|k| k.name()).collect()
    }
}

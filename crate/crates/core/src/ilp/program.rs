//! Canonical 0-1 linear program: a dense variable space, sparse constraint
//! rows and a sparse minimization objective.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Cmp::Le => lhs <= rhs + tol,
            Cmp::Ge => lhs >= rhs - tol,
            Cmp::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

/// One linear constraint over binary variables, sparse form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, terms: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) -> Self {
        Constraint {
            name: name.into(),
            terms,
            cmp,
            rhs,
        }
    }

    pub fn le(name: impl Into<String>, terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(name, terms, Cmp::Le, rhs)
    }

    pub fn ge(name: impl Into<String>, terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(name, terms, Cmp::Ge, rhs)
    }

    pub fn eq(name: impl Into<String>, terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self::new(name, terms, Cmp::Eq, rhs)
    }

    pub fn lhs(&self, assignment: &[u8]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * assignment[v] as f64)
            .sum()
    }

    pub fn satisfied(&self, assignment: &[u8], tol: f64) -> bool {
        self.cmp.holds(self.lhs(assignment), self.rhs, tol)
    }
}

/// A complete minimization program over binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub var_names: Vec<String>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective, minimized.
    pub objective: Vec<(usize, f64)>,
}

impl LinearProgram {
    pub fn new(var_names: Vec<String>) -> Self {
        LinearProgram {
            num_vars: var_names.len(),
            var_names,
            constraints: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn objective_value(&self, assignment: &[u8]) -> f64 {
        self.objective
            .iter()
            .map(|&(v, c)| c * assignment[v] as f64)
            .sum()
    }

    pub fn is_feasible(&self, assignment: &[u8], tol: f64) -> bool {
        assignment.len() == self.num_vars && self.constraints.iter().all(|c| c.satisfied(assignment, tol))
    }

    /// First violated constraint, for diagnostics.
    pub fn first_violation(&self, assignment: &[u8], tol: f64) -> Option<&Constraint> {
        self.constraints.iter().find(|c| !c.satisfied(assignment, tol))
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.var_names.len() != self.num_vars {
            return Err(crate::Error::Program("variable name list out of sync".into()));
        }
        for c in &self.constraints {
            for &(v, _) in &c.terms {
                if v >= self.num_vars {
                    return Err(crate::Error::Program(format!(
                        "constraint {} references unknown variable {v}",
                        c.name
                    )));
                }
            }
        }
        for &(v, _) in &self.objective {
            if v >= self.num_vars {
                return Err(crate::Error::Program(format!("objective references unknown variable {v}")));
            }
        }
        Ok(())
    }
}

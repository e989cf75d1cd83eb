//! Backend-neutral sparse linear programs.
//!
//! A [`LinearProgram`] is always a minimization over bounded variables with
//! ranged rows `lo <= a·x <= hi`. Infinite bounds are expressed with
//! `f64::INFINITY` / `f64::NEG_INFINITY`. Solving goes through the
//! [`LpSolver`] trait; [`RevisedSimplex`] is the bundled implementation.

mod export;
mod simplex;

pub use export::write_lp_format;
pub use simplex::RevisedSimplex;

use thiserror::Error;

/// Index of a variable inside a [`LinearProgram`].
pub type VarId = usize;

/// Index of a row inside a [`LinearProgram`].
pub type RowId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable index {index} out of range (num_vars = {num_vars})")]
    VarOutOfRange { index: usize, num_vars: usize },
    #[error("invalid bounds [{lo}, {hi}] for {what}")]
    InvalidBounds { what: String, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {what}")]
    NonFinite { what: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// A ranged constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(VarId, f64)>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    var_lo: Vec<f64>,
    var_hi: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable with bounds `[lo, hi]` and objective coefficient `cost`.
    pub fn add_var(&mut self, lo: f64, hi: f64, cost: f64) -> Result<VarId, LpError> {
        check_range("variable", lo, hi)?;
        if !cost.is_finite() {
            return Err(LpError::NonFinite { what: format!("objective of variable {}", self.objective.len()) });
        }
        self.objective.push(cost);
        self.var_lo.push(lo);
        self.var_hi.push(hi);
        Ok(self.objective.len() - 1)
    }

    /// Adds the row `lo <= Σ coeff·x <= hi`. Duplicate variable entries are summed.
    pub fn add_row(&mut self, coeffs: &[(VarId, f64)], lo: f64, hi: f64) -> Result<RowId, LpError> {
        check_range("row", lo, hi)?;
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(coeffs.len());
        for &(v, a) in coeffs {
            self.check_var(v)?;
            if !a.is_finite() {
                return Err(LpError::NonFinite { what: format!("row {} coefficient", self.rows.len()) });
            }
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(entry) => entry.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row { coeffs: merged, lo, hi });
        Ok(self.rows.len() - 1)
    }

    pub fn set_var_bounds(&mut self, var: VarId, lo: f64, hi: f64) -> Result<(), LpError> {
        self.check_var(var)?;
        check_range("variable", lo, hi)?;
        self.var_lo[var] = lo;
        self.var_hi[var] = hi;
        Ok(())
    }

    pub fn set_objective(&mut self, var: VarId, cost: f64) -> Result<(), LpError> {
        self.check_var(var)?;
        if !cost.is_finite() {
            return Err(LpError::NonFinite { what: format!("objective of variable {var}") });
        }
        self.objective[var] = cost;
        Ok(())
    }

    pub fn var_bounds(&self, var: VarId) -> (f64, f64) {
        (self.var_lo[var], self.var_hi[var])
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any bound or row by `values`, relative to
    /// `1 + |bound|`.
    pub fn max_scaled_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut note = |val: f64, lo: f64, hi: f64| {
            if val < lo {
                worst = worst.max((lo - val) / (1.0 + lo.abs()));
            }
            if val > hi {
                worst = worst.max((val - hi) / (1.0 + hi.abs()));
            }
        };
        for (j, &x) in values.iter().enumerate() {
            note(x, self.var_lo[j], self.var_hi[j]);
        }
        for row in &self.rows {
            let act: f64 = row.coeffs.iter().map(|&(v, a)| a * values[v]).sum();
            note(act, row.lo, row.hi);
        }
        worst
    }

    fn check_var(&self, var: VarId) -> Result<(), LpError> {
        if var >= self.num_vars() {
            return Err(LpError::VarOutOfRange { index: var, num_vars: self.num_vars() });
        }
        Ok(())
    }
}

fn check_range(what: &str, lo: f64, hi: f64) -> Result<(), LpError> {
    if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        return Err(LpError::InvalidBounds { what: what.to_string(), lo, hi });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// A simplex basis that can seed a later solve of a structurally identical
/// program (same variables and rows, possibly different bounds).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub(crate) basic: Vec<usize>,
    pub(crate) at_upper: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// A pluggable LP backend.
pub trait LpSolver: Send + Sync {
    /// Solves `lp`, optionally starting from `warm`. Backends that cannot use
    /// a warm basis ignore it.
    fn solve_from(&self, lp: &LinearProgram, warm: Option<&Basis>) -> Result<LpSolution, LpError>;

    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        self.solve_from(lp, None)
    }
}

/// Solves `lp` from scratch with the bundled revised simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    RevisedSimplex::default().solve(lp)
}

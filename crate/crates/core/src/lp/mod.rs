//! Dense linear programming.
//!
//! Problems are stated as `minimize cᵀx` subject to a list of linear
//! constraints with `≤`, `≥` or `=` relations; each variable is either
//! nonnegative or free. [`solve`] converts the problem to equality standard
//! form (see [`standardize`]) and runs a two-phase primal simplex on a dense
//! tableau. Columns are priced with Devex reference weights and rows chosen
//! by a Harris two-pass ratio test. When the objective stalls, Bland's rule
//! takes over until the next strict improvement, so the method terminates on
//! degenerate and classically cycling instances. The tableau is periodically
//! rebuilt from the original data with an LU factorization of the basis.
//! Bland's rule ignores pivot size, so an infeasible or broken-down verdict
//! reached with its help is rechecked once with Devex alone.
//!
//! Feasibility is judged relative to row activity: a row passes when its
//! violation is within `EPS_FEAS * (1 + Σ|aᵢⱼxⱼ|)`. For well-scaled problems
//! this is the absolute tolerance; for solutions with huge entries (kernel
//! LPs on nearly singular Gram matrices) no double-precision method can do
//! better than rounding error in the activity.

mod simplex;
mod standard;
pub mod text;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use standard::{standardize, ColumnMap, StandardForm};

/// Absolute feasibility tolerance on constraint rows and bounds.
pub const EPS_FEAS: f64 = 1e-8;
/// Objective tolerance used for optimality of reduced costs.
pub const EPS_OBJ: f64 = 1e-7;
/// Scaled violation above which an "optimal" basis is reported as a failure.
const BREAKDOWN_TOL: f64 = 1e-6;
/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coefficients,
            relation,
            rhs,
        }
    }

    /// Signed violation of this row at `x`; zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program in minimization form.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
    /// Optional column names, used only when the problem is written out.
    pub names: Vec<String>,
}

impl LpProblem {
    /// New problem with all variables nonnegative.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBound::NonNegative; n],
            names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints
            .push(Constraint::new(coefficients, relation, rhs));
    }

    pub fn set_free(&mut self, column: usize) {
        self.bounds[column] = VarBound::Free;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::MalformedProblem(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(Error::MalformedProblem(format!(
                "{} names for {} variables",
                self.names.len(),
                n
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProblem("non-finite objective coefficient".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} has a non-finite entry"
                )));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(b, v)| match b {
                VarBound::NonNegative => (-v).max(0.0),
                VarBound::Free => 0.0,
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Largest row violation divided by `1 + Σ|aᵢⱼxⱼ|`, with bound
    /// violations measured absolutely.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| {
                let activity: f64 = c.coefficients.iter().zip(x).map(|(a, v)| (a * v).abs()).sum();
                c.violation(x) / (1.0 + activity)
            })
            .fold(0.0, f64::max);
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(b, v)| match b {
                VarBound::NonNegative => (-v).max(0.0),
                VarBound::Free => 0.0,
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn name(&self, column: usize) -> String {
        self.names
            .get(column)
            .cloned()
            .unwrap_or_else(|| format!("x{}", column + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values of the original variables; empty unless `status` is optimal.
    pub primal_values: Vec<f64>,
    /// Objective at `primal_values`. For infeasible problems this is the
    /// positive phase-one optimum; for unbounded ones it is `-inf`.
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Pivot budget across both phases. `None` means `50 * (rows + columns)`
    /// of the standardized problem.
    pub iteration_limit: Option<usize>,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    /// `0` uses Bland from the start; `usize::MAX` never does.
    pub stall_threshold: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            iteration_limit: None,
            stall_threshold: 50,
            feasibility_tol: EPS_FEAS,
            optimality_tol: 1e-9,
            pivot_tol: PIVOT_TOL,
        }
    }
}

/// Solves `problem` to optimality, or certifies it infeasible or unbounded.
pub fn solve(problem: &LpProblem, options: &SolverOptions) -> Result<LpSolution> {
    problem.validate()?;
    let std = standardize(problem);
    let first = solve_standard(problem, &std, options);
    // Bland's rule is immune to cycling but picks pivots without regard to
    // their size, and on badly conditioned problems that can wreck the basis.
    // A verdict that may be an artefact of that is rechecked once with Devex
    // pricing alone.
    let suspect = match &first {
        Ok((sol, used_bland)) => *used_bland && sol.status == LpStatus::Infeasible,
        Err(Error::SolverFailure(_)) => options.stall_threshold != usize::MAX,
        Err(_) => false,
    };
    if suspect {
        let devex = SolverOptions {
            stall_threshold: usize::MAX,
            ..options.clone()
        };
        if let Ok((sol, _)) = solve_standard(problem, &std, &devex) {
            if sol.status != LpStatus::Infeasible {
                return Ok(sol);
            }
        }
    }
    first.map(|(sol, _)| sol)
}

/// One simplex run; the flag reports whether Bland's rule chose any pivot.
fn solve_standard(
    problem: &LpProblem,
    std: &StandardForm,
    options: &SolverOptions,
) -> Result<(LpSolution, bool)> {
    let raw = simplex::run(&std.problem, options)?;
    let (primal_values, objective_value) = match raw.status {
        LpStatus::Optimal => {
            let x = std.recover(&raw.x);
            let violation = problem.max_scaled_violation(&x);
            if violation > BREAKDOWN_TOL {
                return Err(Error::SolverFailure(format!(
                    "numerical breakdown: scaled constraint violation {violation:e} at the final basis"
                )));
            }
            let obj = problem.objective_at(&x);
            (x, obj)
        }
        LpStatus::Infeasible => (Vec::new(), raw.objective),
        LpStatus::Unbounded => (Vec::new(), f64::NEG_INFINITY),
    };
    let sol = LpSolution {
        status: raw.status,
        primal_values,
        objective_value,
        iterations: raw.iterations,
    };
    Ok((sol, raw.used_bland))
}

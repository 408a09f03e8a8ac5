use super::{Constraint, LpProblem, Relation, VarBound};

/// Where an original variable lives in the standardized column space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnMap {
    Single(usize),
    /// Free variable split as `plus - minus`.
    Split { plus: usize, minus: usize },
}

/// An equality-form, all-nonnegative copy of an [`LpProblem`] together with
/// the map back to the original variables.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub problem: LpProblem,
    pub columns: Vec<ColumnMap>,
    /// Slack (`≤`) or surplus (`≥`) column per original row, if one was added.
    pub slacks: Vec<Option<usize>>,
}

impl StandardForm {
    /// Maps a point of the standardized problem back to the original variables.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|m| match *m {
                ColumnMap::Single(j) => x[j],
                ColumnMap::Split { plus, minus } => x[plus] - x[minus],
            })
            .collect()
    }

    /// Maps an original point into the standardized space, with slacks set
    /// to the row residuals.
    pub fn lift(&self, original: &LpProblem, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.problem.num_vars()];
        for (m, &v) in self.columns.iter().zip(x) {
            match *m {
                ColumnMap::Single(j) => out[j] = v,
                ColumnMap::Split { plus, minus } => {
                    if v >= 0.0 {
                        out[plus] = v;
                    } else {
                        out[minus] = -v;
                    }
                }
            }
        }
        for (row, slack) in original.constraints.iter().zip(&self.slacks) {
            if let Some(s) = *slack {
                let lhs: f64 = row.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
                out[s] = (row.rhs - lhs).abs();
            }
        }
        out
    }
}

/// Rewrites `problem` with nonnegative variables and equality rows.
///
/// Free variables become a `(plus, minus)` column pair placed where the
/// variable was; slack and surplus columns are appended after all variable
/// columns, in row order.
pub fn standardize(problem: &LpProblem) -> StandardForm {
    let mut columns = Vec::with_capacity(problem.num_vars());
    let mut objective = Vec::new();
    let mut names = Vec::new();
    let named = !problem.names.is_empty();
    for (j, bound) in problem.bounds.iter().enumerate() {
        let c = problem.objective[j];
        match bound {
            VarBound::NonNegative => {
                columns.push(ColumnMap::Single(objective.len()));
                objective.push(c);
                if named {
                    names.push(problem.names[j].clone());
                }
            }
            VarBound::Free => {
                let plus = objective.len();
                columns.push(ColumnMap::Split {
                    plus,
                    minus: plus + 1,
                });
                objective.push(c);
                objective.push(-c);
                if named {
                    names.push(format!("{}_p", problem.names[j]));
                    names.push(format!("{}_m", problem.names[j]));
                }
            }
        }
    }
    let structural = objective.len();

    let mut slacks = Vec::with_capacity(problem.constraints.len());
    let mut next = structural;
    for row in &problem.constraints {
        if row.relation == Relation::Eq {
            slacks.push(None);
        } else {
            slacks.push(Some(next));
            next += 1;
        }
    }
    objective.resize(next, 0.0);
    if named {
        for (i, s) in slacks.iter().enumerate() {
            if s.is_some() {
                names.push(format!("s{}", i + 1));
            }
        }
    }

    let constraints = problem
        .constraints
        .iter()
        .zip(&slacks)
        .map(|(row, slack)| {
            let mut a = vec![0.0; next];
            for (m, &coef) in columns.iter().zip(&row.coefficients) {
                match *m {
                    ColumnMap::Single(j) => a[j] = coef,
                    ColumnMap::Split { plus, minus } => {
                        a[plus] = coef;
                        a[minus] = -coef;
                    }
                }
            }
            if let Some(s) = *slack {
                a[s] = if row.relation == Relation::Le { 1.0 } else { -1.0 };
            }
            Constraint::new(a, Relation::Eq, row.rhs)
        })
        .collect();

    StandardForm {
        problem: LpProblem {
            objective,
            constraints,
            bounds: vec![VarBound::NonNegative; next],
            names,
        },
        columns,
        slacks,
    }
}

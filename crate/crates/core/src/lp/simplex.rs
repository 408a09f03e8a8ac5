//! Two-phase dense tableau simplex over `Ax = b, x >= 0`.

use nalgebra::{DMatrix, DVector};

use super::{LpProblem, LpStatus, SolverOptions};
use crate::error::{Error, Result};

pub(super) struct RawSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Whether any pivot was chosen by Bland's rule.
    pub used_bland: bool,
}

/// Basic values this far below zero are treated as rounding noise.
const NEG_ZERO_TOL: f64 = 1e-9;
/// Primal infeasibility tolerated by the first pass of the ratio test in
/// exchange for a larger pivot element.
const HARRIS_TOL: f64 = 1e-9;
/// Bland's rule picks rows by ratio alone, so its pivots must clear these
/// (relative to the column's largest entry, and absolutely).
const BLAND_REL_PIVOT_TOL: f64 = 1e-5;
const BLAND_MIN_PIVOT: f64 = 1e-5;

struct Tableau {
    /// Row-major `rows x width`; the last column is the right-hand side.
    t: Vec<f64>,
    width: usize,
    /// The starting tableau, kept for reinversion.
    a0: Vec<f64>,
    /// Reduced costs, with `-objective` in the last slot.
    d: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Original constraint index of each tableau row.
    origin: Vec<usize>,
    scratch: Vec<f64>,
    /// Nonzero positions of the pivot row.
    nonzero: Vec<usize>,
    used_bland: bool,
    /// Devex reference weights, one per column.
    weights: Vec<f64>,
    since_reinvert: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

enum Step {
    Pivot(usize, usize),
    Optimal,
    Ray,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let alpha = self.at(pr, pc);
        let inv = 1.0 / alpha;
        {
            let row = &mut self.t[pr * w..(pr + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[pc] = 1.0;
            if row[w - 1] < 0.0 && row[w - 1] > -NEG_ZERO_TOL {
                row[w - 1] = 0.0;
            }
            self.scratch.clear();
            self.scratch.extend_from_slice(row);
        }
        let prow = &self.scratch;
        self.nonzero.clear();
        self.nonzero.extend((0..w).filter(|&j| prow[j] != 0.0));
        let sparse = self.nonzero.len() * 2 < w;
        for r in 0..self.basis.len() {
            if r == pr {
                continue;
            }
            let row = &mut self.t[r * w..(r + 1) * w];
            let f = row[pc];
            if f == 0.0 {
                continue;
            }
            if sparse {
                for &j in &self.nonzero {
                    row[j] -= f * prow[j];
                }
            } else {
                for (v, p) in row.iter_mut().zip(prow) {
                    *v -= f * p;
                }
            }
            row[pc] = 0.0;
            let rhs = &mut row[w - 1];
            if *rhs < 0.0 && *rhs > -NEG_ZERO_TOL {
                *rhs = 0.0;
            }
        }
        let f = self.d[pc];
        if f != 0.0 {
            for &j in &self.nonzero {
                self.d[j] -= f * prow[j];
            }
            self.d[pc] = 0.0;
        }

        // Devex: a weight can only grow by what the pivot row contributes.
        let wq = self.weights[pc];
        for &j in &self.nonzero {
            if j + 1 == w {
                continue;
            }
            let cand = prow[j] * prow[j] * wq;
            if cand > self.weights[j] {
                self.weights[j] = cand;
            }
        }
        let leaving = self.basis[pr];
        self.weights[leaving] = (wq / (alpha * alpha)).max(1.0);
        self.weights[pc] = 1.0;
        self.basis[pr] = pc;
        self.since_reinvert += 1;
    }

    /// Starts a phase with column costs `cost` (length `width - 1`).
    fn price(&mut self, cost: &[f64]) {
        self.cost.clear();
        self.cost.extend_from_slice(cost);
        self.weights.clear();
        self.weights.resize(self.width - 1, 1.0);
        self.reprice();
    }

    /// Recomputes reduced costs from the current tableau and costs.
    fn reprice(&mut self) {
        let w = self.width;
        self.d.clear();
        self.d.extend_from_slice(&self.cost);
        self.d.push(0.0);
        for r in 0..self.rows() {
            let cb = self.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * w..(r + 1) * w];
            for (v, a) in self.d.iter_mut().zip(row) {
                *v -= cb * a;
            }
        }
        for r in 0..self.rows() {
            self.d[self.basis[r]] = 0.0;
        }
    }

    /// Rebuilds the tableau as `B⁻¹[A | b]` from the starting data, discarding
    /// the rounding error accumulated by successive pivots, then reprices.
    /// The tableau body is kept when the basis is too ill-conditioned.
    fn reinvert(&mut self) {
        self.since_reinvert = 0;
        if self.rebuild() {
            return;
        }
        self.reprice();
    }

    /// Returns whether the tableau was rebuilt (and repriced).
    fn rebuild(&mut self) -> bool {
        let (k, w) = (self.rows(), self.width);
        if k == 0 {
            return false;
        }
        let b = DMatrix::from_fn(k, k, |i, j| self.a0[i * w + self.basis[j]]);
        let a = DMatrix::from_fn(k, w, |i, j| self.a0[i * w + j]);
        let Some(x) = b.clone().lu().solve(&a) else {
            return false;
        };
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        // Reject the rebuild when the basis is too ill-conditioned for LU to
        // beat the running tableau: the basic values must stay nonnegative,
        // of the same magnitude as before, and reproduce `b` closely.
        let xb = x.column(w - 1);
        let old_max = (0..k).fold(0.0f64, |m, r| m.max(self.at(r, w - 1).abs()));
        let scale = 1.0 + xb.amax();
        if xb.iter().any(|v| *v < -1e-7 * scale) || xb.amax() > 10.0 * (1.0 + old_max) {
            return false;
        }
        let rhs = a.column(w - 1);
        if (&b * xb - rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
            return false;
        }
        for i in 0..k {
            for j in 0..w {
                self.t[i * w + j] = x[(i, j)];
            }
        }
        for (r, &bj) in self.basis.iter().enumerate() {
            for i in 0..k {
                self.t[i * w + bj] = if i == r { 1.0 } else { 0.0 };
            }
            let rhs = &mut self.t[r * w + w - 1];
            if *rhs < 0.0 && *rhs > -NEG_ZERO_TOL {
                *rhs = 0.0;
            }
        }
        self.reprice();
        true
    }

    fn objective(&self) -> f64 {
        -self.d[self.rhs_col()]
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.t.drain(r * w..(r + 1) * w);
        self.a0.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.origin.remove(r);
    }

    /// Largest positive entry of column `j`.
    fn col_max(&self, j: usize) -> f64 {
        (0..self.rows()).fold(0.0f64, |m, r| m.max(self.at(r, j)))
    }

    /// Devex: the improving column with the largest `d_j² / w_j`.
    fn devex_column(&self, allowed: usize, tol: f64) -> Option<usize> {
        let mut best = None;
        let mut best_score = 0.0;
        for j in 0..allowed {
            let dj = self.d[j];
            if dj < -tol {
                let score = dj * dj / self.weights[j];
                if score > best_score {
                    best_score = score;
                    best = Some(j);
                }
            }
        }
        best
    }

    /// Harris two-pass ratio test: bound the step with slightly relaxed rows,
    /// then take the largest pivot among rows blocking within that bound.
    fn harris_row(&self, pc: usize, pivot_tol: f64) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut bound = f64::INFINITY;
        for r in 0..self.rows() {
            let a = self.at(r, pc);
            if a > pivot_tol {
                bound = bound.min((self.at(r, rhs).max(0.0) + HARRIS_TOL) / a);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut chosen: Option<usize> = None;
        for r in 0..self.rows() {
            let a = self.at(r, pc);
            if a > pivot_tol && self.at(r, rhs).max(0.0) / a <= bound {
                match chosen {
                    Some(c) if self.at(c, pc) >= a => {}
                    _ => chosen = Some(r),
                }
            }
        }
        chosen
    }

    /// Exact minimum-ratio row, ties going to the smallest basic index.
    fn bland_row(&self, pc: usize, pivot_tol: f64) -> Option<usize> {
        let rhs = self.rhs_col();
        let value = |r: usize| self.at(r, rhs).max(0.0);
        let mut min_ratio = f64::INFINITY;
        for r in 0..self.rows() {
            let a = self.at(r, pc);
            if a > pivot_tol {
                min_ratio = min_ratio.min(value(r) / a);
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let slack = 1e-12 * (1.0 + min_ratio);
        let mut chosen: Option<usize> = None;
        for r in 0..self.rows() {
            let a = self.at(r, pc);
            if a <= pivot_tol || value(r) / a > min_ratio + slack {
                continue;
            }
            chosen = match chosen {
                Some(c) if self.basis[c] < self.basis[r] => Some(c),
                _ => Some(r),
            };
        }
        chosen
    }

    fn choose(&self, allowed: usize, bland: bool, opts: &SolverOptions) -> Step {
        let tol = opts.optimality_tol;
        if bland {
            // Bland's rule over the pivots that are numerically usable: the
            // first improving column whose exact ratio test lands on an
            // element that is not tiny relative to its column. Rays are left
            // to the fallback below, which confirms them on a rebuilt tableau.
            for j in (0..allowed).filter(|&j| self.d[j] < -tol) {
                if let Some(r) = self.bland_row(j, opts.pivot_tol) {
                    let a = self.at(r, j);
                    if a >= BLAND_MIN_PIVOT && a >= BLAND_REL_PIVOT_TOL * self.col_max(j) {
                        return Step::Pivot(r, j);
                    }
                }
            }
        }
        let Some(pc) = self.devex_column(allowed, tol) else {
            return Step::Optimal;
        };
        match self.harris_row(pc, opts.pivot_tol) {
            Some(pr) => Step::Pivot(pr, pc),
            None => Step::Ray,
        }
    }

    fn iterate(
        &mut self,
        allowed: usize,
        phase: u8,
        iterations: &mut usize,
        limit: usize,
        opts: &SolverOptions,
    ) -> Result<Outcome> {
        let mut stall = 0usize;
        let mut bland = opts.stall_threshold == 0;
        let interval = reinvert_interval(self.rows(), self.width);
        loop {
            if self.since_reinvert >= interval {
                self.reinvert();
            }
            let (pr, pc) = match self.choose(allowed, bland, opts) {
                Step::Pivot(pr, pc) => (pr, pc),
                // Drifted reduced costs can fake either verdict (a
                // numerically zero column looks like a ray), so both are
                // confirmed on a freshly rebuilt tableau. When the basis is
                // too ill-conditioned to rebuild, the verdict stands.
                step if self.since_reinvert > 0 => {
                    self.since_reinvert = 0;
                    if self.rebuild() {
                        continue;
                    }
                    match step {
                        Step::Ray => return Ok(Outcome::Unbounded),
                        _ => return Ok(Outcome::Optimal),
                    }
                }
                Step::Optimal => return Ok(Outcome::Optimal),
                Step::Ray => return Ok(Outcome::Unbounded),
            };
            if *iterations >= limit {
                return Err(Error::IterationLimitExceeded { phase, limit });
            }
            let before = self.objective();
            self.used_bland |= bland;
            self.pivot(pr, pc);
            *iterations += 1;
            let improved = before - self.objective() > 1e-12 * (1.0 + before.abs());
            if improved {
                stall = 0;
                bland = opts.stall_threshold == 0;
            } else {
                stall += 1;
                if stall >= opts.stall_threshold {
                    bland = true;
                }
            }
        }
    }
}

/// Pivots between reinversions, chosen so rebuilding costs about as much as
/// the pivots it follows.
fn reinvert_interval(rows: usize, width: usize) -> usize {
    let rebuild = rows * rows * (rows + 2 * width);
    let pivot = (rows * width).max(1);
    (rebuild / pivot).max(50)
}

pub(super) fn run(problem: &LpProblem, opts: &SolverOptions) -> Result<RawSolution> {
    let n = problem.num_vars();
    let m = problem.constraints.len();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for c in &problem.constraints {
        if c.rhs < 0.0 {
            rows.push(c.coefficients.iter().map(|a| -a).collect());
            rhs.push(-c.rhs);
        } else {
            rows.push(c.coefficients.clone());
            rhs.push(c.rhs);
        }
    }

    // Unit columns give a free starting basis; other rows get an artificial.
    let mut basis: Vec<Option<usize>> = vec![None; m];
    for j in 0..n {
        let mut hit = None;
        let mut unit = true;
        for (i, row) in rows.iter().enumerate() {
            let a = row[j];
            if a == 0.0 {
                continue;
            }
            if a == 1.0 && hit.is_none() {
                hit = Some(i);
            } else {
                unit = false;
                break;
            }
        }
        if let (true, Some(i)) = (unit, hit) {
            if basis[i].is_none() {
                basis[i] = Some(j);
            }
        }
    }
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| basis[i].is_none()).collect();
    let n_art = artificial_rows.len();
    let width = n + n_art + 1;

    let mut t = vec![0.0; m * width];
    for (i, row) in rows.iter().enumerate() {
        t[i * width..i * width + n].copy_from_slice(row);
        t[i * width + width - 1] = rhs[i];
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        t[i * width + n + k] = 1.0;
        basis[i] = Some(n + k);
    }

    let mut tab = Tableau {
        a0: t.clone(),
        t,
        width,
        d: Vec::with_capacity(width),
        cost: Vec::with_capacity(width),
        basis: basis.into_iter().map(|b| b.unwrap()).collect(),
        origin: (0..m).collect(),
        scratch: Vec::with_capacity(width),
        nonzero: Vec::with_capacity(width),
        weights: vec![1.0; width - 1],
        since_reinvert: 0,
        used_bland: false,
    };

    let limit = opts.iteration_limit.unwrap_or(50 * (m + n));
    let mut iterations = 0usize;

    if n_art > 0 {
        let mut cost = vec![0.0; n + n_art];
        for c in &mut cost[n..] {
            *c = 1.0;
        }
        tab.price(&cost);
        // Phase one is bounded below by zero; a ray here is numerical failure.
        if let Outcome::Unbounded = tab.iterate(n + n_art, 1, &mut iterations, limit, opts)? {
            return Err(Error::SolverFailure(
                "phase one found an improving ray on a problem bounded below".into(),
            ));
        }
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let infeasibility = tab.objective();
        if infeasibility > opts.feasibility_tol * scale {
            return Ok(RawSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: infeasibility,
                iterations,
                used_bland: tab.used_bland,
            });
        }
        drive_out_artificials(&mut tab, n, opts.pivot_tol);
    }

    let mut cost = problem.objective.clone();
    cost.resize(n + n_art, 0.0);
    tab.price(&cost);
    let outcome = tab.iterate(n, 2, &mut iterations, limit, opts)?;
    if let Outcome::Unbounded = outcome {
        return Ok(RawSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            iterations,
            used_bland: tab.used_bland,
        });
    }

    let mut x = vec![0.0; n];
    for r in 0..tab.rows() {
        x[tab.basis[r]] = tab.at(r, tab.rhs_col()).max(0.0);
    }
    polish(problem, &tab, &mut x);
    let objective = problem.objective_at(&x);
    Ok(RawSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        iterations,
        used_bland: tab.used_bland,
    })
}

fn drive_out_artificials(tab: &mut Tableau, n: usize, pivot_tol: f64) {
    let mut r = 0;
    while r < tab.rows() {
        if tab.basis[r] < n {
            r += 1;
            continue;
        }
        let mut best = None;
        let mut best_abs = pivot_tol;
        for j in 0..n {
            let a = tab.at(r, j).abs();
            if a > best_abs {
                best_abs = a;
                best = Some(j);
            }
        }
        match best {
            Some(j) => {
                let rc = tab.rhs_col();
                tab.t[r * tab.width + rc] = 0.0;
                tab.pivot(r, j);
                r += 1;
            }
            // Redundant row: no structural column can replace the artificial.
            None => tab.remove_row(r),
        }
    }
}

/// Recomputes basic values from the original columns with an LU solve,
/// which removes error accumulated over many tableau updates.
fn polish(problem: &LpProblem, tab: &Tableau, x: &mut [f64]) {
    let k = tab.rows();
    if k == 0 {
        return;
    }
    let b = DMatrix::from_fn(k, k, |i, j| {
        problem.constraints[tab.origin[i]].coefficients[tab.basis[j]]
    });
    let rhs = DVector::from_fn(k, |i, _| problem.constraints[tab.origin[i]].rhs);
    let Some(sol) = b.lu().solve(&rhs) else {
        return;
    };
    if sol.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return;
    }
    let residual = |x: &[f64]| {
        problem
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max)
    };
    let mut candidate = x.to_vec();
    for (j, v) in sol.iter().enumerate() {
        candidate[tab.basis[j]] = v.max(0.0);
    }
    if residual(&candidate) <= residual(x) {
        x.copy_from_slice(&candidate);
    }
}

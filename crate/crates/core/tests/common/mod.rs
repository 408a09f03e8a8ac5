//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls the simplex solver; the oracles are deliberately naive.
#![allow(dead_code)]

use mcm_core::lp::{LpProblem, Relation, VarBound};
use rand::Rng;

// ---------------------------------------------------------------------------
// LP vertex enumeration

/// Gaussian elimination with partial pivoting. Returns `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn feasible(problem: &LpProblem, x: &[f64], tol: f64) -> bool {
    let bounds_ok = problem
        .bounds
        .iter()
        .zip(x)
        .all(|(bd, v)| *bd == VarBound::Free || *v >= -tol);
    bounds_ok
        && problem.constraints.iter().all(|c| {
            let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            let scale = 1.0 + c.rhs.abs();
            match c.relation {
                Relation::Le => lhs <= c.rhs + tol * scale,
                Relation::Ge => lhs >= c.rhs - tol * scale,
                Relation::Eq => (lhs - c.rhs).abs() <= tol * scale,
            }
        })
}

/// Minimum objective over every basic feasible solution, found by making each
/// subset of `n` hyperplanes (constraint rows and nonnegativity bounds) active
/// and keeping the feasible intersections. `None` if no feasible vertex exists.
pub fn vertex_enumeration(problem: &LpProblem) -> Option<f64> {
    let n = problem.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = problem
        .constraints
        .iter()
        .map(|c| (c.coefficients.clone(), c.rhs))
        .collect();
    for (j, bd) in problem.bounds.iter().enumerate() {
        if *bd == VarBound::NonNegative {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e, 0.0));
        }
    }
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(n);
    enumerate(&planes, n, 0, &mut chosen, &mut |subset| {
        let a = subset.iter().map(|&k| planes[k].0.clone()).collect();
        let b = subset.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(problem, &x, 1e-7) {
                let obj = problem.objective_at(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

fn enumerate(
    pool: &[(Vec<f64>, f64)],
    pick: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == pick {
        visit(chosen);
        return;
    }
    let remaining = pick - chosen.len();
    for k in start..=pool.len().saturating_sub(remaining) {
        if pool.len() < remaining {
            break;
        }
        chosen.push(k);
        enumerate(pool, pick, k + 1, chosen, visit);
        chosen.pop();
    }
}

/// A random LP that is feasible (a known interior-ish point satisfies every
/// row) and bounded (a budget row caps the sum of the variables; a free
/// variable, when present, gets an explicit lower bound row).
///
/// Returns the problem and the point used to construct it.
pub fn random_lp(rng: &mut impl Rng, n: usize, m: usize) -> (LpProblem, Vec<f64>) {
    assert!(m >= 1);
    let free = if n >= 2 && m >= 2 && rng.gen_bool(0.3) {
        Some(rng.gen_range(0..n))
    } else {
        None
    };
    let x0: Vec<f64> = (0..n)
        .map(|j| {
            if Some(j) == free {
                rng.gen_range(-1.0..1.0)
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut lp = LpProblem::new(objective);

    let budget: f64 = x0.iter().map(|v| v.abs()).sum::<f64>() + rng.gen_range(1.0..3.0);
    lp.add_constraint(vec![1.0; n], Relation::Le, budget);
    let mut rows = 1;
    if let Some(j) = free {
        lp.set_free(j);
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        lp.add_constraint(e, Relation::Ge, -5.0);
        rows += 1;
    }
    while rows < m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ax: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        let u: f64 = rng.gen_range(0.0..0.5);
        let (rel, rhs) = match rng.gen_range(0..20) {
            0..=2 => (Relation::Eq, ax),
            3..=11 => (Relation::Le, ax + u),
            _ => (Relation::Ge, ax - u),
        };
        lp.add_constraint(a, rel, rhs);
        rows += 1;
    }
    (lp, x0)
}

// ---------------------------------------------------------------------------
// Linear-fractional brute force

/// Best fractional objective `max yᵢ(uᵀxᵢ+v) / min yᵢ(uᵀxᵢ+v)` for the unit
/// direction `u`, minimized exactly over the offset `v`.
///
/// With `aᵢ = uᵀxᵢ` the margins of positives are `aᵢ + v` and of negatives
/// `-aᵢ - v`, so numerator and denominator are piecewise linear in `v` with
/// one breakpoint each; the ratio is monotone between breakpoints, so the
/// optimum sits on one of them. Returns `inf` if `u` does not separate.
pub fn fractional_at_direction(samples: &[Vec<f64>], labels: &[f64], u: &[f64]) -> f64 {
    let (mut p_min, mut p_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_min, mut n_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in samples.iter().zip(labels) {
        let a: f64 = x.iter().zip(u).map(|(p, q)| p * q).sum();
        if *y > 0.0 {
            p_min = p_min.min(a);
            p_max = p_max.max(a);
        } else {
            n_min = n_min.min(a);
            n_max = n_max.max(a);
        }
    }
    if p_min <= n_max {
        return f64::INFINITY;
    }
    let ratio = |v: f64| {
        let lo = (p_min + v).min(-n_max - v);
        let hi = (p_max + v).max(-n_min - v);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    let v_den = -(p_min + n_max) / 2.0;
    let v_num = -(p_max + n_min) / 2.0;
    ratio(v_den).min(ratio(v_num))
}

/// Minimum of the fractional objective over 2-D unit directions: a uniform
/// angular grid of `steps` directions followed by golden-section refinement
/// around the best grid point.
pub fn brute_force_h_2d(samples: &[Vec<f64>], labels: &[f64], steps: usize) -> f64 {
    let at = |t: f64| fractional_at_direction(samples, labels, &[t.cos(), t.sin()]);
    let dt = std::f64::consts::TAU / steps as f64;
    let (mut best_t, mut best) = (0.0, f64::INFINITY);
    for k in 0..steps {
        let t = k as f64 * dt;
        let v = at(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = (best_t - dt, best_t + dt);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if at(a) < at(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(at((lo + hi) / 2.0))
}

/// Random linearly separable 2-D data with both classes present and a
/// geometric gap of at least 0.05 around a random hyperplane.
pub fn separable_2d(rng: &mut impl Rng, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (w, b) = ([t.cos(), t.sin()], rng.gen_range(-0.3..0.3));
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        while xs.len() < m {
            let x = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let f = w[0] * x[0] + w[1] * x[1] + b;
            if f.abs() >= 0.05 {
                ys.push(f.signum());
                xs.push(x);
            }
        }
        if ys.iter().any(|y| *y > 0.0) && ys.iter().any(|y| *y < 0.0) {
            return (xs, ys);
        }
    }
}

/// Two Gaussian blobs centred at `±offset` on every axis, alternating labels.
pub fn gaussian_blobs(rng: &mut impl Rng, m: usize, n: usize, offset: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for i in 0..m {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        xs.push((0..n).map(|_| y * offset + normal(rng)).collect());
        ys.push(y);
    }
    (xs, ys)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn xor() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![-1.0, -1.0, 1.0, 1.0],
    )
}

//! CPLEX-LP text format.
//!
//! Numbers are written with Rust's `Display` for `f64`, which is fixed-point
//! and the shortest string that parses back to the same value, so a dumped
//! problem reads back bit-identically. The objective lists every column
//! (zeros included) so that column order also survives a round trip.

use std::fmt::Write as _;

use super::{LpProblem, Relation, VarBound};
use crate::error::{Error, Result};

fn push_term(out: &mut String, coef: f64, name: &str) {
    let sign = if coef.is_sign_negative() { '-' } else { '+' };
    let _ = write!(out, " {sign} {} {name}", coef.abs());
}

pub fn write_lp(problem: &LpProblem, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {title}");
    out.push_str("Minimize\n obj:");
    for (j, &c) in problem.objective.iter().enumerate() {
        push_term(&mut out, c, &problem.name(j));
    }
    out.push_str("\nSubject To\n");
    for (i, row) in problem.constraints.iter().enumerate() {
        let _ = write!(out, " c{}:", i + 1);
        let mut any = false;
        for (j, &a) in row.coefficients.iter().enumerate() {
            if a != 0.0 {
                push_term(&mut out, a, &problem.name(j));
                any = true;
            }
        }
        if !any {
            push_term(&mut out, 0.0, &problem.name(0));
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let rhs = if row.rhs == 0.0 { 0.0 } else { row.rhs };
        let _ = writeln!(out, " {rel} {rhs}");
    }
    out.push_str("Bounds\n");
    for (j, b) in problem.bounds.iter().enumerate() {
        if *b == VarBound::Free {
            let _ = writeln!(out, " {} free", problem.name(j));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    End,
}

struct Builder {
    names: Vec<String>,
    index: std::collections::HashMap<String, usize>,
}

impl Builder {
    fn column(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), j);
        j
    }
}

fn parse_terms(
    tokens: &[&str],
    line: usize,
    builder: &mut Builder,
) -> Result<Vec<(usize, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in tokens {
        match *tok {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            t => {
                if let Ok(v) = t.parse::<f64>() {
                    if coef.is_some() {
                        return Err(Error::parse(line, t, "two numbers in a row"));
                    }
                    coef = Some(v);
                } else {
                    let j = builder.column(t);
                    terms.push((j, sign * coef.take().unwrap_or(1.0)));
                    sign = 1.0;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(Error::parse(line, "term", "coefficient without a variable"));
    }
    Ok(terms)
}

fn strip_label(body: &str) -> &str {
    match body.find(':') {
        Some(p) => &body[p + 1..],
        None => body,
    }
}

/// Parses the subset of CPLEX-LP produced by [`write_lp`]: a `Minimize`
/// objective, linear rows, and `free` bounds.
pub fn parse_lp(text: &str) -> Result<LpProblem> {
    let mut builder = Builder {
        names: Vec::new(),
        index: Default::default(),
    };
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut section = Section::Preamble;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('\\').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                section = Section::Objective;
                continue;
            }
            "maximize" | "maximise" | "max" => {
                return Err(Error::parse(line, "section", "only minimization is supported"));
            }
            "subject to" | "such that" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble | Section::End => {
                return Err(Error::parse(line, "line", "content outside a section"));
            }
            Section::Objective => {
                let tokens: Vec<&str> = strip_label(body).split_whitespace().collect();
                objective.extend(parse_terms(&tokens, line, &mut builder)?);
            }
            Section::Constraints => {
                let tokens: Vec<&str> = strip_label(body).split_whitespace().collect();
                let pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "<=" | "=<" | ">=" | "=>" | "="))
                    .ok_or_else(|| Error::parse(line, "relation", "missing <=, >= or ="))?;
                let relation = match tokens[pos] {
                    "<=" | "=<" => Relation::Le,
                    ">=" | "=>" => Relation::Ge,
                    _ => Relation::Eq,
                };
                let rhs_tokens = &tokens[pos + 1..];
                let rhs = match rhs_tokens {
                    [v] => v.parse::<f64>().ok(),
                    ["-", v] => v.parse::<f64>().ok().map(|x| -x),
                    ["+", v] => v.parse::<f64>().ok(),
                    _ => None,
                }
                .ok_or_else(|| Error::parse(line, "rhs", "expected a single number"))?;
                let terms = parse_terms(&tokens[..pos], line, &mut builder)?;
                rows.push((terms, relation, rhs));
            }
            Section::Bounds => {
                let tokens: Vec<&str> = body.split_whitespace().collect();
                match tokens.as_slice() {
                    [name, kw] if kw.eq_ignore_ascii_case("free") => {
                        free.push(builder.column(name));
                    }
                    _ => {
                        return Err(Error::parse(line, "bounds", "only `<name> free` is supported"))
                    }
                }
            }
        }
    }

    let n = builder.names.len();
    let mut problem = LpProblem::new(vec![0.0; n]);
    for (j, c) in objective {
        problem.objective[j] += c;
    }
    for (terms, relation, rhs) in rows {
        let mut a = vec![0.0; n];
        for (j, c) in terms {
            a[j] += c;
        }
        problem.add_constraint(a, relation, rhs);
    }
    for j in free {
        problem.set_free(j);
    }
    problem.names = builder.names;
    Ok(problem)
}

//! Exact rational linear programming.
//!
//! [`solve`] returns an optimum with row multipliers, a Farkas certificate of
//! infeasibility, or an improving ray. Every outcome is checked against the
//! input program in big rationals before it is returned.
//!
//! Sign conventions. Multipliers are shadow prices: `duals[i]` is the rate of
//! change of the optimal value in `rhs[i]`. For a minimization this means
//! `≥` rows carry multipliers `≥ 0` and `≤` rows carry multipliers `≤ 0`; a
//! maximization flips both. A Farkas vector `y` has the minimization signs,
//! satisfies `(Aᵀy)_j ≤ 0` on nonnegative variables, `≥ 0` on nonpositive
//! ones, `= 0` on free ones, and `b·y > 0`.

mod scalar;
mod simplex;

use crate::Q;
use num_traits::{Signed, Zero};
use simplex::{Raw, StandardForm};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    Free,
    NonNegative,
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Q>,
    pub bounds: Vec<VarBound>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: Q,
    pub x: Vec<Q>,
    pub duals: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Farkas {
    pub y: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub point: Vec<Q>,
    pub direction: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(Optimum),
    Infeasible(Farkas),
    Unbounded(Ray),
}

impl LpOutcome {
    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpOutcome::Optimal(o) => Some(o),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            LpOutcome::Optimal(_) => "optimal",
            LpOutcome::Infeasible(_) => "infeasible",
            LpOutcome::Unbounded(_) => "unbounded",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row {row} references variable {var} but the program has {vars} variables")]
    DimensionMismatch { row: usize, var: usize, vars: usize },
    #[error("objective has {got} coefficients for {vars} variables")]
    ObjectiveLength { got: usize, vars: usize },
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, objective: Vec::new(), bounds: Vec::new(), constraints: Vec::new() }
    }

    pub fn add_var(&mut self, bound: VarBound, cost: Q) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.bounds.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Q)>, relation: Relation, rhs: Q) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let vars = self.bounds.len();
        if self.objective.len() != vars {
            return Err(LpError::ObjectiveLength { got: self.objective.len(), vars });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if let Some((var, _)) = c.coeffs.iter().find(|(j, _)| *j >= vars) {
                return Err(LpError::DimensionMismatch { row, var: *var, vars });
            }
        }
        Ok(())
    }

    /// Same program with a minimization objective.
    fn to_min(&self) -> LinearProgram {
        let mut lp = self.clone();
        if self.sense == Sense::Maximize {
            lp.sense = Sense::Minimize;
            lp.objective = lp.objective.iter().map(|c| -c).collect();
        }
        for c in lp.constraints.iter_mut() {
            c.coeffs = merged(&c.coeffs);
        }
        lp
    }
}

fn merged(coeffs: &[(usize, Q)]) -> Vec<(usize, Q)> {
    let mut v: Vec<(usize, Q)> = coeffs.to_vec();
    v.sort_by_key(|(j, _)| *j);
    let mut out: Vec<(usize, Q)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

fn zero() -> Q {
    Q::zero()
}

fn dot_sparse(coeffs: &[(usize, Q)], x: &[Q]) -> Q {
    coeffs.iter().fold(zero(), |acc, (j, a)| acc + a * &x[*j])
}

/// Solves `lp` exactly. Rows far outnumbering columns are handled by solving
/// the dual program and reading the primal solution off its multipliers.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let min = lp.to_min();
    let raw = solve_min(&min, true);
    verify_min(&min, &raw).map_err(LpError::CertificateRejected)?;
    Ok(from_min(lp.sense, raw))
}

fn from_min(sense: Sense, out: LpOutcome) -> LpOutcome {
    match (sense, out) {
        (Sense::Maximize, LpOutcome::Optimal(o)) => LpOutcome::Optimal(Optimum {
            value: -o.value,
            x: o.x,
            duals: o.duals.into_iter().map(|y| -y).collect(),
        }),
        (_, out) => out,
    }
}

fn solve_min(lp: &LinearProgram, allow_dual: bool) -> LpOutcome {
    let m = lp.constraints.len();
    let n = lp.num_vars();
    if allow_dual && m > 2 * n + 4 {
        if let Some(out) = solve_via_dual(lp) {
            return out;
        }
    }
    solve_direct(lp)
}

enum Col {
    Pos(usize),
    Neg(usize),
    Split(usize, usize),
}

fn solve_direct(lp: &LinearProgram) -> LpOutcome {
    let mut ncols = 0;
    let cols: Vec<Col> = lp
        .bounds
        .iter()
        .map(|b| {
            let c = match b {
                VarBound::NonNegative => Col::Pos(ncols),
                VarBound::NonPositive => Col::Neg(ncols),
                VarBound::Free => {
                    ncols += 1;
                    Col::Split(ncols - 1, ncols)
                }
            };
            ncols += 1;
            c
        })
        .collect();
    let mut cost = vec![zero(); ncols];
    for (j, c) in cols.iter().enumerate() {
        let cj = &lp.objective[j];
        match c {
            Col::Pos(k) => cost[*k] = cj.clone(),
            Col::Neg(k) => cost[*k] = -cj,
            Col::Split(p, q) => {
                cost[*p] = cj.clone();
                cost[*q] = -cj;
            }
        }
    }
    let m = lp.constraints.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut flipped = Vec::with_capacity(m);
    let mut slack_of: Vec<Option<(usize, Q)>> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut row = Vec::with_capacity(c.coeffs.len() + 1);
        for (j, a) in &c.coeffs {
            match cols[*j] {
                Col::Pos(k) => row.push((k, a.clone())),
                Col::Neg(k) => row.push((k, -a)),
                Col::Split(p, q) => {
                    row.push((p, a.clone()));
                    row.push((q, -a));
                }
            }
        }
        let slack = match c.relation {
            Relation::Le => Some(Q::from_integer(1.into())),
            Relation::Ge => Some(Q::from_integer((-1).into())),
            Relation::Eq => None,
        };
        let flip = c.rhs.is_negative();
        let sign = if flip { Q::from_integer((-1).into()) } else { Q::from_integer(1.into()) };
        if flip {
            for (_, a) in row.iter_mut() {
                *a = -&*a;
            }
        }
        let s = slack.map(|s| {
            let k = ncols;
            ncols += 1;
            (k, s * &sign)
        });
        if let Some((k, a)) = &s {
            row.push((*k, a.clone()));
        }
        rows.push(row);
        rhs.push(&c.rhs * &sign);
        flipped.push(flip);
        slack_of.push(s);
    }
    cost.resize(ncols, zero());
    let n_real = ncols;
    let mut id_col = Vec::with_capacity(m);
    for (i, s) in slack_of.iter().enumerate() {
        match s {
            Some((k, a)) if a.is_positive() => id_col.push(*k),
            _ => {
                rows[i].push((ncols, Q::from_integer(1.into())));
                id_col.push(ncols);
                ncols += 1;
            }
        }
    }
    cost.resize(ncols, zero());
    let sf = StandardForm { rows, rhs, cost, n_real, ncols, id_col };
    let raw = simplex::run::<scalar::Small>(&sf)
        .or_else(|| simplex::run::<Q>(&sf))
        .expect("big rational simplex cannot overflow");

    let unflip = |y: Vec<Q>| -> Vec<Q> {
        y.into_iter().zip(&flipped).map(|(v, f)| if *f { -v } else { v }).collect()
    };
    let back = |xs: &[Q]| -> Vec<Q> {
        cols.iter()
            .map(|c| match c {
                Col::Pos(k) => xs[*k].clone(),
                Col::Neg(k) => -&xs[*k],
                Col::Split(p, q) => &xs[*p] - &xs[*q],
            })
            .collect()
    };
    match raw {
        Raw::Optimal { x, y } => {
            let x = back(&x);
            let value = dot(&lp.objective, &x);
            LpOutcome::Optimal(Optimum { value, x, duals: unflip(y) })
        }
        Raw::Infeasible { y } => LpOutcome::Infeasible(Farkas { y: unflip(y) }),
        Raw::Unbounded { x, ray } => LpOutcome::Unbounded(Ray { point: back(&x), direction: back(&ray) }),
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x * y)
}

/// Builds `min -b·y` over the row multipliers, solves it directly and maps
/// the answer back. Returns `None` when the dual is infeasible, which leaves
/// the primal either infeasible or unbounded; the caller then solves directly.
fn solve_via_dual(lp: &LinearProgram) -> Option<LpOutcome> {
    let n = lp.num_vars();
    let mut dual = LinearProgram::new(Sense::Minimize);
    for c in &lp.constraints {
        let b = match c.relation {
            Relation::Ge => VarBound::NonNegative,
            Relation::Le => VarBound::NonPositive,
            Relation::Eq => VarBound::Free,
        };
        dual.add_var(b, -&c.rhs);
    }
    let mut cols: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n];
    for (i, c) in lp.constraints.iter().enumerate() {
        for (j, a) in &c.coeffs {
            cols[*j].push((i, a.clone()));
        }
    }
    for (j, col) in cols.into_iter().enumerate() {
        let rel = match lp.bounds[j] {
            VarBound::NonNegative => Relation::Le,
            VarBound::NonPositive => Relation::Ge,
            VarBound::Free => Relation::Eq,
        };
        dual.add_constraint(col, rel, lp.objective[j].clone());
    }
    match solve_direct(&dual) {
        LpOutcome::Optimal(o) => {
            let x: Vec<Q> = o.duals.iter().map(|w| -w).collect();
            let value = dot(&lp.objective, &x);
            Some(LpOutcome::Optimal(Optimum { value, x, duals: o.x }))
        }
        LpOutcome::Unbounded(r) => Some(LpOutcome::Infeasible(Farkas { y: r.direction })),
        LpOutcome::Infeasible(_) => None,
    }
}

fn sign_ok(bound: VarBound, v: &Q) -> bool {
    match bound {
        VarBound::Free => true,
        VarBound::NonNegative => !v.is_negative(),
        VarBound::NonPositive => !v.is_positive(),
    }
}

fn row_ok(rel: Relation, lhs: &Q, rhs: &Q) -> bool {
    match rel {
        Relation::Le => lhs <= rhs,
        Relation::Eq => lhs == rhs,
        Relation::Ge => lhs >= rhs,
    }
}

fn primal_feasible(lp: &LinearProgram, x: &[Q]) -> Result<(), String> {
    if x.len() != lp.num_vars() {
        return Err("primal vector has wrong length".into());
    }
    for (j, (b, v)) in lp.bounds.iter().zip(x).enumerate() {
        if !sign_ok(*b, v) {
            return Err(format!("variable {j} violates its sign bound"));
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if !row_ok(c.relation, &dot_sparse(&c.coeffs, x), &c.rhs) {
            return Err(format!("row {i} violated"));
        }
    }
    Ok(())
}

/// `Aᵀy` as a dense vector.
fn transpose_times(lp: &LinearProgram, y: &[Q]) -> Vec<Q> {
    let mut at = vec![zero(); lp.num_vars()];
    for (c, yi) in lp.constraints.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, a) in &c.coeffs {
            at[*j] += a * yi;
        }
    }
    at
}

fn multiplier_signs_ok(lp: &LinearProgram, y: &[Q]) -> Result<(), String> {
    if y.len() != lp.constraints.len() {
        return Err("multiplier vector has wrong length".into());
    }
    for (i, (c, yi)) in lp.constraints.iter().zip(y).enumerate() {
        let ok = match c.relation {
            Relation::Ge => !yi.is_negative(),
            Relation::Le => !yi.is_positive(),
            Relation::Eq => true,
        };
        if !ok {
            return Err(format!("multiplier {i} has the wrong sign"));
        }
    }
    Ok(())
}

fn verify_min(lp: &LinearProgram, out: &LpOutcome) -> Result<(), String> {
    match out {
        LpOutcome::Optimal(o) => {
            primal_feasible(lp, &o.x)?;
            multiplier_signs_ok(lp, &o.duals)?;
            let at = transpose_times(lp, &o.duals);
            for (j, b) in lp.bounds.iter().enumerate() {
                let r = &lp.objective[j] - &at[j];
                let ok = match b {
                    VarBound::NonNegative => !r.is_negative(),
                    VarBound::NonPositive => !r.is_positive(),
                    VarBound::Free => r.is_zero(),
                };
                if !ok {
                    return Err(format!("reduced cost of variable {j} has the wrong sign"));
                }
            }
            let by = lp.constraints.iter().zip(&o.duals).fold(zero(), |acc, (c, y)| acc + &c.rhs * y);
            if by != o.value || dot(&lp.objective, &o.x) != o.value {
                return Err("primal and dual objectives differ".into());
            }
            Ok(())
        }
        LpOutcome::Infeasible(f) => verify_farkas_min(lp, &f.y),
        LpOutcome::Unbounded(r) => {
            primal_feasible(lp, &r.point)?;
            for (j, (b, v)) in lp.bounds.iter().zip(&r.direction).enumerate() {
                if !sign_ok(*b, v) {
                    return Err(format!("ray leaves the sign bound of variable {j}"));
                }
            }
            for (i, c) in lp.constraints.iter().enumerate() {
                if !row_ok(c.relation, &dot_sparse(&c.coeffs, &r.direction), &zero()) {
                    return Err(format!("ray leaves row {i}"));
                }
            }
            if !dot(&lp.objective, &r.direction).is_negative() {
                return Err("ray does not improve the objective".into());
            }
            Ok(())
        }
    }
}

fn verify_farkas_min(lp: &LinearProgram, y: &[Q]) -> Result<(), String> {
    multiplier_signs_ok(lp, y)?;
    let at = transpose_times(lp, y);
    for (j, b) in lp.bounds.iter().enumerate() {
        let ok = match b {
            VarBound::NonNegative => !at[j].is_positive(),
            VarBound::NonPositive => !at[j].is_negative(),
            VarBound::Free => at[j].is_zero(),
        };
        if !ok {
            return Err(format!("Farkas column {j} has the wrong sign"));
        }
    }
    let by = lp.constraints.iter().zip(y).fold(zero(), |acc, (c, yi)| acc + &c.rhs * yi);
    if !by.is_positive() {
        return Err("Farkas vector does not separate".into());
    }
    Ok(())
}

/// Re-checks an outcome against the program it claims to solve.
pub fn verify(lp: &LinearProgram, out: &LpOutcome) -> Result<(), String> {
    let min = lp.to_min();
    let as_min = match (lp.sense, out.clone()) {
        (Sense::Maximize, LpOutcome::Optimal(o)) => LpOutcome::Optimal(Optimum {
            value: -o.value,
            x: o.x,
            duals: o.duals.into_iter().map(|y| -y).collect(),
        }),
        (_, o) => o,
    };
    verify_min(&min, &as_min)
}

/// Convenience: `true` iff the constraint system admits a point.
pub fn feasible(lp: &LinearProgram) -> Result<bool, LpError> {
    let mut f = lp.clone();
    f.objective = vec![zero(); f.num_vars()];
    Ok(!matches!(solve(&f)?, LpOutcome::Infeasible(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn one_var(sense: Sense, bound: VarBound, cost: Q) -> LinearProgram {
        let mut lp = LinearProgram::new(sense);
        lp.add_var(bound, cost);
        lp
    }

    #[test]
    fn max_zero_over_orthant() {
        let lp = one_var(Sense::Maximize, VarBound::NonNegative, q(0, 1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.optimum().unwrap().value, q(0, 1));
    }

    #[test]
    fn max_x_below_three_sevenths() {
        let mut lp = one_var(Sense::Maximize, VarBound::Free, q(1, 1));
        lp.add_constraint(vec![(0, q(1, 1))], Relation::Le, q(3, 7));
        let o = solve(&lp).unwrap().optimum().cloned().unwrap();
        assert_eq!(o.value, q(3, 7));
        assert_eq!(o.x, vec![q(3, 7)]);
        assert_eq!(o.duals, vec![q(1, 1)]);
    }

    #[test]
    fn binomial_martingale_weight() {
        // q·2 + (1−q)·1/2 = 1, 0 ≤ q ≤ 1, maximize q
        let mut lp = one_var(Sense::Maximize, VarBound::NonNegative, q(1, 1));
        lp.add_constraint(vec![(0, q(3, 2))], Relation::Eq, q(1, 2));
        lp.add_constraint(vec![(0, q(1, 1))], Relation::Le, q(1, 1));
        let o = solve(&lp).unwrap().optimum().cloned().unwrap();
        assert_eq!(o.value, q(1, 3));
    }

    #[test]
    fn infeasible_gets_farkas() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarBound::NonNegative, q(1, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(-1, 1));
        match solve(&lp).unwrap() {
            LpOutcome::Infeasible(f) => assert!(verify(&lp, &LpOutcome::Infeasible(f)).is_ok()),
            other => panic!("expected infeasible, got {}", other.status()),
        }
    }

    #[test]
    fn unbounded_gets_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var(VarBound::Free, q(1, 1));
        let y = lp.add_var(VarBound::NonPositive, q(0, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(1, 1))], Relation::Le, q(2, 1));
        match solve(&lp).unwrap() {
            LpOutcome::Unbounded(r) => assert!(r.direction[0] > q(0, 1)),
            other => panic!("expected unbounded, got {}", other.status()),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(Sense::Minimize);
        let c = [q(-3, 4), q(150, 1), q(-1, 50), q(6, 1)];
        for ci in c {
            lp.add_var(VarBound::NonNegative, ci);
        }
        lp.add_constraint(vec![(0, q(1, 4)), (1, q(-60, 1)), (2, q(-1, 25)), (3, q(9, 1))], Relation::Le, q(0, 1));
        lp.add_constraint(vec![(0, q(1, 2)), (1, q(-90, 1)), (2, q(-1, 50)), (3, q(3, 1))], Relation::Le, q(0, 1));
        lp.add_constraint(vec![(2, q(1, 1))], Relation::Le, q(1, 1));
        let o = solve(&lp).unwrap().optimum().cloned().unwrap();
        assert_eq!(o.value, q(-1, 20));
    }

    #[test]
    fn tall_program_goes_through_the_dual() {
        // min x + y over many cuts x + k y ≥ k.
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarBound::Free, q(1, 1));
        let y = lp.add_var(VarBound::Free, q(1, 1));
        for k in 1..=20 {
            lp.add_constraint(vec![(x, q(1, 1)), (y, q(k, 1))], Relation::Ge, q(k, 1));
            lp.add_constraint(vec![(x, q(k, 1)), (y, q(1, 1))], Relation::Ge, q(k, 1));
        }
        let direct = solve_direct(&lp.to_min());
        let routed = solve(&lp).unwrap();
        assert_eq!(direct.optimum().unwrap().value, routed.optimum().unwrap().value);
        assert!(verify(&lp, &routed).is_ok());
    }

    #[test]
    fn tall_infeasible_program_certificate() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarBound::Free, q(0, 1));
        for k in 1..=12 {
            lp.add_constraint(vec![(x, q(1, 1))], Relation::Ge, q(k, 1));
        }
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(0, 1));
        let out = solve(&lp).unwrap();
        assert_eq!(out.status(), "infeasible");
    }

    #[test]
    fn tall_unbounded_program_falls_back() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var(VarBound::Free, q(1, 1));
        for k in 1..=12 {
            lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(k, 1));
        }
        assert_eq!(solve(&lp).unwrap().status(), "unbounded");
    }

    #[test]
    fn rejects_out_of_range_variable() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_var(VarBound::Free, q(0, 1));
        lp.add_constraint(vec![(3, q(1, 1))], Relation::Le, q(0, 1));
        assert!(matches!(solve(&lp), Err(LpError::DimensionMismatch { .. })));
    }
}

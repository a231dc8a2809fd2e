//! Two-phase dense tableau simplex with Bland's rule.
//!
//! Works on `min c·x, A x = b, x ≥ 0, b ≥ 0` where every row owns an identity
//! column (a slack or an artificial). Identity columns stay in the tableau so
//! that the row multipliers can be read off the final reduced costs.

use super::scalar::Scalar;
use crate::Q;

pub(crate) struct StandardForm {
    pub rows: Vec<Vec<(usize, Q)>>,
    pub rhs: Vec<Q>,
    pub cost: Vec<Q>,
    /// Columns below this index may enter the basis; the rest are artificial.
    pub n_real: usize,
    pub ncols: usize,
    pub id_col: Vec<usize>,
}

pub(crate) enum Raw {
    Optimal { x: Vec<Q>, y: Vec<Q> },
    Infeasible { y: Vec<Q> },
    Unbounded { x: Vec<Q>, ray: Vec<Q> },
}

struct Tableau<F> {
    t: Vec<Vec<F>>,
    obj: Vec<F>,
    basis: Vec<usize>,
    n: usize,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl<F: Scalar> Tableau<F> {
    fn pivot(&mut self, pr: usize, pc: usize) -> Option<()> {
        let n = self.n;
        let p = self.t[pr][pc].clone();
        if !p.is_one() {
            for v in self.t[pr].iter_mut() {
                if !v.is_zero() {
                    *v = v.div(&p)?;
                }
            }
        }
        let nz: Vec<usize> = (0..=n).filter(|&j| !self.t[pr][j].is_zero()).collect();
        let prow: Vec<F> = nz.iter().map(|&j| self.t[pr][j].clone()).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for (k, &j) in nz.iter().enumerate() {
                row[j] = row[j].sub(&f.mul(&prow[k])?)?;
            }
        }
        if !self.obj[pc].is_zero() {
            let f = self.obj[pc].clone();
            for (k, &j) in nz.iter().enumerate() {
                self.obj[j] = self.obj[j].sub(&f.mul(&prow[k])?)?;
            }
        }
        self.basis[pr] = pc;
        Some(())
    }

    fn reset_objective(&mut self, cost: &[F]) -> Option<()> {
        let n = self.n;
        let mut obj: Vec<F> = cost.to_vec();
        obj.push(F::zero());
        for (i, row) in self.t.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=n {
                if !row[j].is_zero() {
                    obj[j] = obj[j].sub(&cb.mul(&row[j])?)?;
                }
            }
        }
        self.obj = obj;
        Some(())
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by the lowest basic variable index.
    fn iterate(&mut self, n_real: usize) -> Option<Step> {
        let n = self.n;
        loop {
            let Some(s) = (0..n_real).find(|&j| self.obj[j].is_negative()) else {
                return Some(Step::Optimal);
            };
            let mut best: Option<(usize, F)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][s];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.t[i][n].div(a)?;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Some(Step::Unbounded(s)),
                Some((r, _)) => self.pivot(r, s)?,
            }
        }
    }

    fn primal(&self) -> Vec<Q> {
        let mut x = vec![Q::from_integer(0.into()); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.t[i][self.n].to_q();
        }
        x
    }

    fn multipliers(&self, cost: &[F], id_col: &[usize]) -> Option<Vec<Q>> {
        id_col
            .iter()
            .map(|&c| cost[c].sub(&self.obj[c]).map(|v| v.to_q()))
            .collect()
    }
}

/// Runs both phases in scalar type `F`; `None` means an arithmetic overflow.
pub(crate) fn run<F: Scalar>(sf: &StandardForm) -> Option<Raw> {
    let m = sf.rows.len();
    let n = sf.ncols;
    let mut t = vec![vec![F::zero(); n + 1]; m];
    for (i, row) in sf.rows.iter().enumerate() {
        for (j, a) in row {
            t[i][*j] = F::from_q(a)?;
        }
        t[i][n] = F::from_q(&sf.rhs[i])?;
    }
    let mut tab = Tableau { t, obj: Vec::new(), basis: sf.id_col.clone(), n };

    if sf.id_col.iter().any(|&c| c >= sf.n_real) {
        let cost1: Vec<F> = (0..n).map(|j| if j >= sf.n_real { F::one() } else { F::zero() }).collect();
        tab.reset_objective(&cost1)?;
        tab.iterate(sf.n_real)?;
        if tab.obj[n].is_negative() {
            let y = tab.multipliers(&cost1, &sf.id_col)?;
            return Some(Raw::Infeasible { y });
        }
        // Drive artificials out of the basis where a real column can replace them.
        for i in 0..m {
            if tab.basis[i] < sf.n_real {
                continue;
            }
            if let Some(j) = (0..sf.n_real).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, j)?;
            }
        }
    }

    let cost: Vec<F> = sf.cost.iter().map(F::from_q).collect::<Option<_>>()?;
    tab.reset_objective(&cost)?;
    match tab.iterate(sf.n_real)? {
        Step::Optimal => {
            let y = tab.multipliers(&cost, &sf.id_col)?;
            Some(Raw::Optimal { x: tab.primal(), y })
        }
        Step::Unbounded(s) => {
            let mut ray = vec![Q::from_integer(0.into()); n];
            ray[s] = Q::from_integer(1.into());
            for (i, &b) in tab.basis.iter().enumerate() {
                ray[b] = -tab.t[i][s].to_q();
            }
            Some(Raw::Unbounded { x: tab.primal(), ray })
        }
    }
}

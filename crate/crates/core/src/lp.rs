//! Dense two-phase simplex over exact rationals, with Bland's rule.
//!
//! Solves `min c·x` subject to linear rows and `x ≥ 0`. Problem sizes here
//! are a few dozen rows and columns, so the full tableau is kept.

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rat>,
    pub sense: Sense,
    pub rhs: Rat,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<Rat>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[Rat], &Rat)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<Rat>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rat>, sense: Sense, rhs: Rat) {
        debug_assert_eq!(coeffs.len(), self.vars());
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// `m` constraint rows, each `cols + 1` wide (last entry is the rhs).
    a: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    n_orig: usize,
    /// Columns `first_artificial..cols` are artificial.
    first_artificial: usize,
    cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.vars();
        let m = lp.rows.len();
        // Normalise to nonnegative right-hand sides.
        let rows: Vec<(Vec<Rat>, Sense, Rat)> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs.is_negative() {
                    let flipped = match r.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (r.coeffs.iter().map(|c| -c).collect(), flipped, -r.rhs.clone())
                } else {
                    (r.coeffs.clone(), r.sense, r.rhs.clone())
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let first_artificial = n + slacks;
        let cols = first_artificial + artificials;
        let mut a = vec![vec![Rat::zero(); cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut t) = (n, first_artificial);
        for (i, (coeffs, sense, rhs)) in rows.into_iter().enumerate() {
            a[i][..n].clone_from_slice(&coeffs);
            a[i][cols] = rhs;
            match sense {
                Sense::Le => {
                    a[i][s] = Rat::one();
                    basis[i] = s;
                    s += 1;
                }
                Sense::Ge => {
                    a[i][s] = -Rat::one();
                    s += 1;
                    a[i][t] = Rat::one();
                    basis[i] = t;
                    t += 1;
                }
                Sense::Eq => {
                    a[i][t] = Rat::one();
                    basis[i] = t;
                    t += 1;
                }
            }
        }
        Tableau { a, basis, n_orig: n, first_artificial, cols }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs of `cost` (indexed by column) for the current basis.
    fn reduced(&self, cost: &[Rat], allowed: usize) -> Vec<Rat> {
        (0..allowed)
            .map(|j| {
                let mut r = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.a[i][j].is_zero() && !cost[b].is_zero() {
                        r -= &cost[b] * &self.a[i][j];
                    }
                }
                r
            })
            .collect()
    }

    /// Simplex iterations on columns `0..allowed`. False if unbounded.
    fn optimise(&mut self, cost: &[Rat], allowed: usize) -> bool {
        loop {
            let red = self.reduced(cost, allowed);
            let Some(col) = (0..allowed).find(|&j| red[j].is_negative()) else {
                return true;
            };
            let rhs = self.cols;
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = &self.a[i][rhs] / &self.a[i][col];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else { return false };
            self.pivot(row, col);
        }
    }

    fn run(mut self, objective: &[Rat]) -> LpOutcome {
        let rhs = self.cols;
        if self.first_artificial < self.cols {
            let mut phase1 = vec![Rat::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = Rat::one();
            }
            self.optimise(&phase1, self.cols);
            let infeasible = self
                .basis
                .iter()
                .enumerate()
                .any(|(i, &b)| b >= self.first_artificial && !self.a[i][rhs].is_zero());
            if infeasible {
                return LpOutcome::Infeasible;
            }
            // Drive zero-valued artificials out of the basis, dropping redundant rows.
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.a[i][j].is_zero()) {
                        Some(j) => self.pivot(i, j),
                        None => {
                            self.a.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = vec![Rat::zero(); self.cols];
        cost[..self.n_orig].clone_from_slice(objective);
        if !self.optimise(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rat::zero(); self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.a[i][rhs].clone();
            }
        }
        let value = x.iter().zip(objective).fold(Rat::zero(), |acc, (xi, ci)| acc + xi * ci);
        LpOutcome::Optimal { x, value }
    }
}

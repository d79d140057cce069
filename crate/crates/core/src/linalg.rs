//! Exact linear algebra over the rationals: square systems by
//! fraction-free elimination and linear programs by a two-phase tableau
//! simplex with Bland's rule.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareSolution {
    Unique(Vec<Rational>),
    Singular,
}

impl SquareSolution {
    pub fn unique(self) -> Option<Vec<Rational>> {
        match self {
            SquareSolution::Unique(x) => Some(x),
            SquareSolution::Singular => None,
        }
    }
}

/// Clears the denominators of `row` by their lcm.
fn integer_row(row: &[Rational], rhs: &Rational) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(std::iter::once(rhs))
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter()
        .chain(std::iter::once(rhs))
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect()
}

/// Solves `A x = b` for square `A` with Bareiss elimination. The pivot in
/// each column is the entry of smallest non-zero magnitude.
pub fn solve_square(sys: &LinearSystem) -> Result<SquareSolution> {
    let n = sys.matrix.len();
    if sys.rhs.len() != n || sys.matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "expected a square system, got {} rows and {} right-hand sides",
            n,
            sys.rhs.len()
        )));
    }
    let mut a: Vec<Vec<BigInt>> = sys.matrix.iter().zip(&sys.rhs).map(|(r, b)| integer_row(r, b)).collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&i| !a[i][k].is_zero())
            .min_by(|&i, &j| a[i][k].magnitude().cmp(a[j][k].magnitude()));
        let Some(p) = pivot else {
            return Ok(SquareSolution::Singular);
        };
        a.swap(k, p);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(a[i][n].clone());
        for j in i + 1..n {
            acc -= Rational::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / Rational::from_integer(a[i][i].clone());
    }
    Ok(SquareSolution::Unique(x))
}

/// Whether a variable is constrained to be non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

/// Minimize `objective . x` subject to equality rows, `>=` rows and
/// per-variable bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub equalities: Vec<(Vec<Rational>, Rational)>,
    pub inequalities: Vec<(Vec<Rational>, Rational)>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// All variables non-negative, no constraints yet.
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        Self {
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            bounds: vec![Bound::NonNegative; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_equality(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.equalities.push((row, rhs));
    }

    pub fn add_geq(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.inequalities.push((row, rhs));
    }

    /// Every constraint holds exactly at `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        let dot = |row: &[Rational]| row.iter().zip(x).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
        x.len() == self.num_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| *b == Bound::Free || !v.is_negative())
            && self.equalities.iter().all(|(r, b)| dot(r) == *b)
            && self.inequalities.iter().all(|(r, b)| dot(r) >= *b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, objective: Rational },
    Infeasible,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs followed by the negated objective value.
    cost: Vec<Rational>,
    cost_value: Rational,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                *v /= &p;
            }
            self.rhs[r] /= &p;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for (v, pv) in self.cost.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.cost_value -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    fn set_objective(&mut self, c: &[Rational]) {
        self.cost = c.to_vec();
        self.cost_value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if self.cost[b].is_zero() {
                continue;
            }
            let f = self.cost[b].clone();
            for (v, rv) in self.cost.iter_mut().zip(&self.rows[i]) {
                if !rv.is_zero() {
                    *v -= &f * rv;
                }
            }
            self.cost_value -= &f * &self.rhs[i];
        }
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic variable. Only the first `active` columns may
    /// enter.
    fn optimize(&mut self, active: usize) -> Result<()> {
        loop {
            let Some(c) = (0..active).find(|&j| self.cost[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(Error::Unbounded),
            }
        }
    }
}

/// Exact two-phase simplex.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars();
    if lp.bounds.len() != n
        || lp
            .equalities
            .iter()
            .chain(&lp.inequalities)
            .any(|(row, _)| row.len() != n)
    {
        return Err(Error::Dimension(format!("linear program with {n} variables has a row of another length")));
    }
    // Standard-form columns: one per non-negative variable, two per free
    // variable, one surplus per `>=` row, then one artificial per row.
    let mut col_of = Vec::with_capacity(n);
    let mut structural = 0;
    for b in &lp.bounds {
        col_of.push(structural);
        structural += if *b == Bound::Free { 2 } else { 1 };
    }
    let m = lp.equalities.len() + lp.inequalities.len();
    let surplus_start = structural;
    let art_start = surplus_start + lp.inequalities.len();
    let width = art_start + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (k, (row, b)) in lp.equalities.iter().chain(&lp.inequalities).enumerate() {
        let mut r = vec![Rational::zero(); width];
        for (j, v) in row.iter().enumerate() {
            r[col_of[j]] = v.clone();
            if lp.bounds[j] == Bound::Free {
                r[col_of[j] + 1] = -v.clone();
            }
        }
        if k >= lp.equalities.len() {
            r[surplus_start + k - lp.equalities.len()] = -Rational::one();
        }
        let mut b = b.clone();
        if b.is_negative() {
            for v in r.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        r[art_start + k] = Rational::one();
        rows.push(r);
        rhs.push(b);
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (art_start..art_start + m).collect(),
        cost: Vec::new(),
        cost_value: Rational::zero(),
    };

    let mut phase1 = vec![Rational::zero(); width];
    for c in phase1.iter_mut().skip(art_start) {
        *c = Rational::one();
    }
    t.set_objective(&phase1);
    t.optimize(width)?;
    if !t.cost_value.is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= art_start {
            match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2 = vec![Rational::zero(); width];
    for (j, c) in lp.objective.iter().enumerate() {
        phase2[col_of[j]] = c.clone();
        if lp.bounds[j] == Bound::Free {
            phase2[col_of[j] + 1] = -c.clone();
        }
    }
    t.set_objective(&phase2);
    t.optimize(art_start)?;

    let mut values = vec![Rational::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        values[b] = t.rhs[i].clone();
    }
    let x: Vec<Rational> = (0..n)
        .map(|j| {
            let v = values[col_of[j]].clone();
            if lp.bounds[j] == Bound::Free {
                v - &values[col_of[j] + 1]
            } else {
                v
            }
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).fold(Rational::zero(), |acc, (c, v)| acc + c * v);
    Ok(LpOutcome::Optimal { x, objective })
}

//! Dense two-phase simplex for small linear programs.
//!
//! The kernel behind every cone predicate. Problems are tiny (tens of
//! variables), so a dense tableau with Bland's rule is plenty: Bland's rule
//! guarantees termination on degenerate problems, which cone feasibility
//! problems almost always are (every right-hand side is zero except the
//! normalisation row).

use crate::tol;

/// Sign restriction on a decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Free,
    NonNeg,
    NonPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

/// A linear program `minimize c·x` subject to linear rows and sign bounds.
///
/// With no objective set this is a pure feasibility problem.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    bounds: Vec<Bound>,
    rows: Vec<Row>,
    objective: Vec<(usize, f64)>,
    maximizing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn add_var(&mut self, bound: Bound) -> usize {
        self.bounds.push(bound);
        self.bounds.len() - 1
    }

    /// Adds `count` variables with the same bound and returns their indices.
    pub fn add_vars(&mut self, count: usize, bound: Bound) -> Vec<usize> {
        (0..count).map(|_| self.add_var(bound)).collect()
    }

    pub fn add_row(&mut self, coeffs: &[(usize, f64)], rel: Relation, rhs: f64) {
        let coeffs = coeffs.iter().copied().filter(|(_, c)| *c != 0.0).collect();
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Fixes a variable to a value.
    pub fn fix(&mut self, var: usize, value: f64) {
        self.add_row(&[(var, 1.0)], Relation::Eq, value);
    }

    /// Sets the objective to minimise. Later calls replace earlier ones.
    pub fn minimize(&mut self, coeffs: &[(usize, f64)]) {
        self.objective = coeffs.to_vec();
        self.maximizing = false;
    }

    pub fn maximize(&mut self, coeffs: &[(usize, f64)]) {
        self.objective = coeffs.iter().map(|(i, c)| (*i, -c)).collect();
        self.maximizing = true;
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_feasible()
    }

    pub fn solve(&self) -> LpOutcome {
        let mut sf = StandardForm::build(self);
        match sf.tableau.run() {
            Phase::Infeasible => LpOutcome::Infeasible,
            Phase::Unbounded => LpOutcome::Unbounded,
            Phase::Optimal => {
                let cols = sf.tableau.primal();
                let x = sf.recover(&cols);
                let value: f64 = self.objective.iter().map(|(i, c)| c * x[*i]).sum();
                let value = if self.maximizing { -value } else { value };
                LpOutcome::Optimal { x, value }
            }
        }
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    Pos(usize),
    Neg(usize),
    Split(usize, usize),
}

struct StandardForm {
    maps: Vec<ColumnMap>,
    tableau: Tableau,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut ncols = 0;
        let maps: Vec<ColumnMap> = lp
            .bounds
            .iter()
            .map(|b| match b {
                Bound::NonNeg => {
                    ncols += 1;
                    ColumnMap::Pos(ncols - 1)
                }
                Bound::NonPos => {
                    ncols += 1;
                    ColumnMap::Neg(ncols - 1)
                }
                Bound::Free => {
                    ncols += 2;
                    ColumnMap::Split(ncols - 2, ncols - 1)
                }
            })
            .collect();
        let structural = ncols;
        let slack_count = lp.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let m = lp.rows.len();
        let total = structural + slack_count + m; // + artificials

        let mut a = vec![vec![0.0; total]; m];
        let mut b = vec![0.0; m];
        let mut slack = structural;
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                match maps[j] {
                    ColumnMap::Pos(k) => a[i][k] += c,
                    ColumnMap::Neg(k) => a[i][k] -= c,
                    ColumnMap::Split(p, q) => {
                        a[i][p] += c;
                        a[i][q] -= c;
                    }
                }
            }
            match row.rel {
                Relation::Le => {
                    a[i][slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    a[i][slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            b[i] = row.rhs;
            if b[i] < 0.0 {
                b[i] = -b[i];
                for v in a[i].iter_mut() {
                    *v = -*v;
                }
            }
            a[i][structural + slack_count + i] = 1.0;
        }

        let mut cost = vec![0.0; total];
        for &(j, c) in &lp.objective {
            match maps[j] {
                ColumnMap::Pos(k) => cost[k] += c,
                ColumnMap::Neg(k) => cost[k] -= c,
                ColumnMap::Split(p, q) => {
                    cost[p] += c;
                    cost[q] -= c;
                }
            }
        }
        let scale = b.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        StandardForm {
            maps,
            tableau: Tableau::new(a, b, cost, structural + slack_count, scale),
        }
    }

    fn recover(&self, cols: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                ColumnMap::Pos(k) => cols[k],
                ColumnMap::Neg(k) => -cols[k],
                ColumnMap::Split(p, q) => cols[p] - cols[q],
            })
            .collect()
    }
}

enum Phase {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Row-major simplex tableau. Columns `first_artificial..` are artificials.
struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    active: Vec<bool>,
    rhs_scale: f64,
}

impl Tableau {
    fn new(a: Vec<Vec<f64>>, b: Vec<f64>, cost: Vec<f64>, first_artificial: usize, rhs_scale: f64) -> Self {
        let m = a.len();
        let total = cost.len();
        Tableau {
            a,
            b,
            cost,
            basis: (0..m).map(|i| first_artificial + i).collect(),
            first_artificial,
            active: vec![true; total],
            rhs_scale,
        }
    }

    fn run(&mut self) -> Phase {
        let total = self.cost.len();
        let phase_one: Vec<f64> = (0..total)
            .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
            .collect();
        if let Phase::Unbounded = self.optimize(&phase_one) {
            // cannot happen: phase one is bounded below by zero
            return Phase::Infeasible;
        }
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.b)
            .filter(|(j, _)| **j >= self.first_artificial)
            .map(|(_, v)| *v)
            .sum();
        if infeasibility > tol::LP * self.rhs_scale {
            return Phase::Infeasible;
        }
        self.evict_artificials();
        for j in self.first_artificial..total {
            self.active[j] = false;
        }
        let cost = self.cost.clone();
        self.optimize(&cost)
    }

    /// Pivots remaining zero-valued artificials out of the basis, dropping
    /// redundant rows.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.basis.len() {
            if self.basis[i] >= self.first_artificial {
                let entering = (0..self.first_artificial).find(|&j| self.a[i][j].abs() > tol::LP);
                match entering {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.a.remove(i);
                        self.b.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn optimize(&mut self, cost: &[f64]) -> Phase {
        loop {
            // Bland: smallest index with negative reduced cost enters.
            let entering = (0..cost.len()).filter(|&j| self.active[j]).find(|&j| {
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.a)
                        .map(|(&bj, row)| cost[bj] * row[j])
                        .sum::<f64>();
                reduced < -tol::LP
            });
            let Some(j) = entering else {
                return Phase::Optimal;
            };
            // ratio test, ties broken by smallest basic index
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][j];
                if aij > tol::LP {
                    let ratio = self.b[i] / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, r)) => {
                            if ratio < r - tol::LP * 1e-3
                                || (ratio <= r + tol::LP * 1e-3 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, r))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Phase::Unbounded,
                Some((i, _)) => self.pivot(i, j),
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        self.b[r] /= p;
        let pivot_row = self.a[r].clone();
        let pivot_b = self.b[r];
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let f = self.a[i][c];
            if f != 0.0 {
                for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.a[i][c] = 0.0;
                self.b[i] -= f * pivot_b;
                if self.b[i] < 0.0 && self.b[i] > -tol::LP * self.rhs_scale {
                    self.b[i] = 0.0;
                }
            }
        }
        self.basis[r] = c;
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cost.len()];
        for (i, &j) in self.basis.iter().enumerate() {
            x[j] = self.b[i];
        }
        x
    }
}

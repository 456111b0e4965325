//! Dense two-phase simplex with Bland's rule, sized for the small programs
//! that arise from vertex-represented polytopes.

/// Absolute tolerance on constraint residuals.
pub const FEAS_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rel: Relation,
    rhs: f64,
}

/// `min objective . x` subject to linear rows, with each variable either
/// nonnegative or free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    kinds: Vec<VarKind>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point, empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    /// `n_vars` nonnegative variables with zero cost.
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            kinds: vec![VarKind::NonNegative; n_vars],
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn set_kind(&mut self, var: usize, kind: VarKind) -> &mut Self {
        self.kinds[var] = kind;
        self
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        assert_eq!(objective.len(), self.n_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars(), "row length");
        self.rows.push(Row { coeffs, rel, rhs });
        self
    }

    pub fn solve(&self) -> LpSolution {
        let n = self.n_vars();
        // structural columns: free variables split into x+ and x-
        let mut col_of = Vec::with_capacity(n);
        let mut n_struct = 0;
        for k in &self.kinds {
            col_of.push(n_struct);
            n_struct += if *k == VarKind::Free { 2 } else { 1 };
        }
        let n_slack = self.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let m = self.rows.len();
        let n_art = m;
        let width = n_struct + n_slack + n_art;

        let mut tab = Tableau {
            t: vec![vec![0.0; width + 1]; m],
            basis: vec![0; m],
            width,
        };
        let mut slack = n_struct;
        for (i, row) in self.rows.iter().enumerate() {
            let line = &mut tab.t[i];
            for (v, &a) in row.coeffs.iter().enumerate() {
                line[col_of[v]] += a;
                if self.kinds[v] == VarKind::Free {
                    line[col_of[v] + 1] -= a;
                }
            }
            match row.rel {
                Relation::Le => {
                    line[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    line[slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            line[width] = row.rhs;
            if row.rhs < 0.0 {
                for v in line.iter_mut() {
                    *v = -*v;
                }
            }
            let art = n_struct + n_slack + i;
            line[art] = 1.0;
            tab.basis[i] = art;
        }

        let art_start = n_struct + n_slack;
        let phase1: Vec<f64> = (0..width).map(|j| if j >= art_start { 1.0 } else { 0.0 }).collect();
        let all: Vec<bool> = vec![true; width];
        if !tab.run(&phase1, &all) {
            // phase one is bounded below by zero; reaching here means the
            // pivot limit was exhausted
            return infeasible();
        }
        let residual: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .map(|(i, _)| tab.t[i][width])
            .sum();
        if residual > FEAS_TOL {
            return infeasible();
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= art_start {
                let entering = (0..art_start)
                    .filter(|&j| tab.t[i][j].abs() > 1e-9)
                    .max_by(|&a, &b| tab.t[i][a].abs().total_cmp(&tab.t[i][b].abs()));
                match entering {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.t.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        let mut cost = vec![0.0; width];
        for (v, &c) in self.objective.iter().enumerate() {
            cost[col_of[v]] = c;
            if self.kinds[v] == VarKind::Free {
                cost[col_of[v] + 1] = -c;
            }
        }
        let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
        if !tab.run(&cost, &allowed) {
            return LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
            };
        }

        let mut std_x = vec![0.0; width];
        for (i, &b) in tab.basis.iter().enumerate() {
            std_x[b] = tab.t[i][width];
        }
        let x: Vec<f64> = (0..n)
            .map(|v| {
                let c = col_of[v];
                if self.kinds[v] == VarKind::Free {
                    std_x[c] - std_x[c + 1]
                } else {
                    std_x[c].max(0.0)
                }
            })
            .collect();
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
        }
    }

    /// Largest violation of any row at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, k) in self.kinds.iter().enumerate() {
            if *k == VarKind::NonNegative {
                worst = worst.max(-x[v]);
            }
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let viol = match row.rel {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        x: Vec::new(),
        objective: f64::INFINITY,
    }
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, line) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = line[c];
            if f != 0.0 {
                for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                line[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` from the current basic feasible solution. Returns
    /// false when the objective is unbounded below.
    fn run(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let w = self.width;
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with negative reduced cost
            let entering = (0..w).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * self.t[i][j])
                    .sum();
                cost[j] - z < -COST_EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.t[i][w].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-12
                            || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        log::warn!("simplex pivot limit reached");
        true
    }
}

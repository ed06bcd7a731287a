//! Dense two-phase primal simplex for small and medium linear programs.
//!
//! Pivoting follows Dantzig's largest-coefficient rule and switches to Bland's
//! rule after a run of degenerate pivots, which rules out cycling.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// A linear constraint `Σ coef_j x_j (sense) rhs` with sparse coefficients.
#[derive(Debug, Clone)]
pub struct Row<T> {
    pub coefs: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

/// `maximize cᵀx` subject to the rows and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub rows: Vec<Row<T>>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFailure {
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: vec![T::zero(); num_vars], rows: Vec::new() }
    }

    pub fn add_row(&mut self, coefs: Vec<(usize, T)>, sense: Sense, rhs: T) {
        self.rows.push(Row { coefs, sense, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpFailure> {
        Tableau::build(self).run(self)
    }
}

/// Feasibility and optimality tolerance for scalar type `T`.
pub fn tolerance<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(1000.0))
}

struct Tableau<T> {
    m: usize,
    width: usize,
    /// Rows `0..m` are constraints, row `m` holds reduced costs; the last
    /// column is the right-hand side.
    data: Vec<T>,
    basis: Vec<usize>,
    num_struct: usize,
    first_art: usize,
    tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars;
        let num_slack = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let num_struct = n + num_slack;
        // An artificial per row keeps the construction uniform; rows whose
        // slack can start basic leave theirs at zero and never let it enter.
        let first_art = num_struct;
        let width = num_struct + m + 1;
        let mut data = vec![T::zero(); (m + 1) * width];
        let mut basis = vec![0; m];
        let mut slack = n;
        for (i, row) in lp.rows.iter().enumerate() {
            let flip = row.rhs < T::zero();
            let sgn = if flip { -T::one() } else { T::one() };
            let r = &mut data[i * width..(i + 1) * width];
            for &(j, v) in &row.coefs {
                r[j] += sgn * v;
            }
            r[width - 1] = sgn * row.rhs;
            let slack_col = match row.sense {
                Sense::Eq => None,
                Sense::Le | Sense::Ge => {
                    let c = slack;
                    slack += 1;
                    let s = if row.sense == Sense::Le { T::one() } else { -T::one() };
                    r[c] = sgn * s;
                    Some(c)
                }
            };
            match slack_col {
                Some(c) if r[c] > T::zero() => basis[i] = c,
                _ => {
                    r[first_art + i] = T::one();
                    basis[i] = first_art + i;
                }
            }
        }
        let tol = tolerance::<T>();
        Self { m, width, data, basis, num_struct, first_art, tol }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> T {
        self.at(i, self.width - 1)
    }

    /// Loads the reduced-cost row for `maximize costᵀx` given the current basis.
    fn set_objective(&mut self, cost: &[T]) {
        let (m, w) = (self.m, self.width);
        for j in 0..w {
            self.data[m * w + j] = -cost.get(j).copied().unwrap_or(T::zero());
        }
        for i in 0..m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(T::zero());
            if cb != T::zero() {
                for j in 0..w {
                    let v = self.data[i * w + j];
                    self.data[m * w + j] += cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = T::one() / self.at(pr, pc);
        for j in 0..w {
            self.data[pr * w + j] *= inv;
        }
        self.data[pr * w + pc] = T::one();
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [T]| {
            let f = row[pc];
            if f != T::zero() {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = T::zero();
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[pr] = pc;
    }

    /// Primal simplex on the loaded objective; columns `>= allowed` never enter.
    fn optimize(&mut self, allowed: usize, pivots: &mut usize) -> Result<(), LpFailure> {
        let m = self.m;
        let limit = 50 * (m + self.width) + 1000;
        let mut degenerate_run = 0;
        loop {
            let bland = degenerate_run > 50;
            let mut enter = None;
            let mut best = -self.tol;
            for j in 0..allowed {
                let d = self.at(m, j);
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(pc) = enter else { return Ok(()) };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..m {
                let a = self.at(i, pc);
                if a > self.tol {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - self.tol
                                || (ratio <= lr + self.tol && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else { return Err(LpFailure::Unbounded) };
            degenerate_run = if ratio <= self.tol { degenerate_run + 1 } else { 0 };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > limit {
                return Err(LpFailure::IterationLimit);
            }
        }
    }

    fn run(mut self, lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpFailure> {
        let mut pivots = 0;
        let has_art = self.basis.iter().any(|&b| b >= self.first_art);
        if has_art {
            let mut cost = vec![T::zero(); self.width - 1];
            for i in 0..self.m {
                cost[self.first_art + i] = -T::one();
            }
            self.set_objective(&cost);
            self.optimize(self.width - 1, &mut pivots)?;
            let infeas: T = (0..self.m)
                .filter(|&i| self.basis[i] >= self.first_art)
                .fold(T::zero(), |acc, i| acc + self.rhs(i));
            let scale = lp.rows.iter().fold(T::one(), |acc, r| acc.max(r.rhs.abs()));
            if infeas > self.tol * scale * T::lit(10.0) {
                return Err(LpFailure::Infeasible);
            }
            // Drive remaining artificials out of the basis where possible.
            for i in 0..self.m {
                if self.basis[i] >= self.first_art {
                    let col = (0..self.num_struct).find(|&j| self.at(i, j).abs() > self.tol);
                    if let Some(j) = col {
                        self.pivot(i, j);
                        pivots += 1;
                    }
                }
            }
        }
        let mut cost = lp.objective.clone();
        cost.resize(self.width - 1, T::zero());
        self.set_objective(&cost);
        self.optimize(self.num_struct, &mut pivots)?;
        let mut x = vec![T::zero(); lp.num_vars];
        for i in 0..self.m {
            if self.basis[i] < lp.num_vars {
                x[self.basis[i]] = self.rhs(i).max(T::zero());
            }
        }
        let objective = crate::scalar::dot(&lp.objective, &x);
        Ok(LpSolution { x, objective, pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add_row(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y (as max −x − y) with x + y = 3, x ≥ 1, y − 2x ≥ −4.
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 1.0);
        lp.add_row(vec![(1, 1.0), (0, -2.0)], Sense::Ge, -4.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 2.0);
        lp.add_row(vec![(0, 1.0)], Sense::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpFailure::Infeasible);
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpFailure::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<f64>::new(3);
        lp.objective = vec![1.0, 2.0, 3.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Sense::Eq, 1.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0), (2, 2.0)], Sense::Eq, 2.0);
        lp.add_row(vec![(2, 1.0)], Sense::Le, 0.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under naive Dantzig pivoting.
        let mut lp = LinearProgram::<f64>::new(4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.add_row(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0);
        lp.add_row(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0);
        lp.add_row(vec![(2, 1.0)], Sense::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.05).abs() < 1e-10);
    }

    #[test]
    fn works_in_single_precision() {
        let mut lp = LinearProgram::<f32>::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 2.0)], Sense::Le, 4.0);
        lp.add_row(vec![(0, 3.0), (1, 1.0)], Sense::Le, 6.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.8).abs() < 1e-4);
    }
}

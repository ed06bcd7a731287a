//! Thin wrapper over the Clarabel interior-point solver for linear objectives
//! with linear and second-order-cone constraints.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type SparseRow<T> = Vec<(usize, T)>;

/// `minimize cᵀx` subject to equalities, `≤` rows and `‖M x‖ ≤ r` cones.
#[derive(Debug, Clone)]
pub struct ConeProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub eq: Vec<(SparseRow<T>, T)>,
    pub le: Vec<(SparseRow<T>, T)>,
    pub soc: Vec<(T, Vec<SparseRow<T>>)>,
}

#[derive(Debug, Clone, Copy)]
pub struct ConeSettings {
    pub tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ConeSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, verbose: false }
    }
}

#[derive(Debug, Clone)]
pub struct ConeSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    pub dual_objective: T,
    pub iterations: u32,
    /// Solver stopped at its reduced-accuracy tolerances.
    pub reduced_accuracy: bool,
}

impl<T: Scalar> ConeProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: vec![T::zero(); num_vars], eq: Vec::new(), le: Vec::new(), soc: Vec::new() }
    }

    pub fn solve(&self, settings: &ConeSettings) -> Result<ConeSolution<T>> {
        let n = self.num_vars;
        let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
        let mut rhs = Vec::new();
        let mut cones = Vec::new();
        let mut row = 0;
        let mut push_rows = |rows: &[(SparseRow<T>, T)], ii: &mut Vec<usize>, jj: &mut Vec<usize>, vv: &mut Vec<T>, rhs: &mut Vec<T>| {
            for (coefs, b) in rows {
                for &(j, v) in coefs {
                    ii.push(row);
                    jj.push(j);
                    vv.push(v);
                }
                rhs.push(*b);
                row += 1;
            }
        };
        if !self.eq.is_empty() {
            push_rows(&self.eq, &mut ii, &mut jj, &mut vv, &mut rhs);
            cones.push(SupportedConeT::ZeroConeT(self.eq.len()));
        }
        if !self.le.is_empty() {
            push_rows(&self.le, &mut ii, &mut jj, &mut vv, &mut rhs);
            cones.push(SupportedConeT::NonnegativeConeT(self.le.len()));
        }
        for (r, m) in &self.soc {
            let mut rows: Vec<(SparseRow<T>, T)> = vec![(Vec::new(), *r)];
            rows.extend(m.iter().map(|coefs| (coefs.iter().map(|&(j, v)| (j, -v)).collect(), T::zero())));
            push_rows(&rows, &mut ii, &mut jj, &mut vv, &mut rhs);
            cones.push(SupportedConeT::SecondOrderConeT(m.len() + 1));
        }
        let m = rhs.len();
        let a = CscMatrix::new_from_triplets(m, n, ii, jj, vv);
        let p = CscMatrix::zeros((n, n));
        let s = DefaultSettings::<T> {
            verbose: settings.verbose,
            max_iter: settings.max_iter,
            tol_gap_abs: T::lit(settings.tol),
            tol_gap_rel: T::lit(settings.tol),
            tol_feas: T::lit(settings.tol),
            presolve_enable: false,
            ..Default::default()
        };
        let mut solver = DefaultSolver::new(&p, &self.objective, &a, &rhs, &cones, s)
            .map_err(|e| Error::Internal(format!("cone solver setup: {e}")))?;
        solver.solve();
        let sol = &solver.solution;
        let gap = (sol.obj_val - sol.obj_val_dual).abs().as_f64();
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(ConeSolution {
                x: sol.x.clone(),
                objective: sol.obj_val,
                dual_objective: sol.obj_val_dual,
                iterations: sol.iterations,
                reduced_accuracy: sol.status == SolverStatus::AlmostSolved,
            }),
            status => Err(Error::Numeric { msg: format!("cone solver stopped with {status:?}"), gap }),
        }
    }
}

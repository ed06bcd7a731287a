//! Studentized support-function statistics.
//!
//! For one covariate cell the statistic is
//! `V = √n · max_{b̃ᵀWb̃ ≤ 1} { b̃ᵀp̂ − h((b̃,0)) }`, computed either through the
//! strong dual as a second-order-cone program, or, when the outcome set's
//! vertices are known, as `√n` times the `W⁻¹`-distance from `p̂` to the set.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bce_polytope::{BcePolytope, SparseMatrix};
use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::{solve_lower, solve_lower_transpose, Mat};
use crate::scalar::{dot, Scalar};
use crate::socp::{ConeProgram, ConeSettings};

/// Upper bound on the dual multipliers.
pub const MULTIPLIER_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    pub w: Mat<T>,
    pub ridge_applied: T,
    pub chol: Mat<T>,
}

impl<T: Scalar> WeightMatrix<T> {
    /// Wraps an arbitrary symmetric positive-definite matrix.
    pub fn from_matrix(w: Mat<T>) -> Result<Self> {
        let chol = w.cholesky().ok_or_else(|| Error::Numeric { msg: "weight matrix not positive definite".into(), gap: f64::NAN })?;
        Ok(Self { w, ridge_applied: T::zero(), chol })
    }

    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    /// `L⁻¹ v` for the Cholesky factor `L`.
    pub fn whiten(&self, v: &[T]) -> Vec<T> {
        solve_lower(&self.chol, v)
    }

    /// `L⁻ᵀ c`, mapping a unit-ball point back to a direction `b̃`.
    pub fn unwhiten_direction(&self, c: &[T]) -> Vec<T> {
        solve_lower_transpose(&self.chol, c)
    }
}

/// `W = (n/n_x)(diag(p̂) − p̂p̂ᵀ)` on the first `|Y|−1` outcomes, plus a ridge
/// `ridge_scale · trace/(|Y|−1)` (or `ridge_scale · n/n_x` if the trace is 0).
pub fn weight_matrix<T: Scalar>(counts_x: &[u64], n: u64, ridge_scale: T) -> Result<WeightMatrix<T>> {
    let n_x: u64 = counts_x.iter().sum();
    if n_x == 0 {
        return Err(Error::EmptyCell("weight matrix of an empty cell".into()));
    }
    if counts_x.len() < 2 {
        return Err(crate::error::domain("need at least two outcomes"));
    }
    let k = counts_x.len() - 1;
    let scale = T::lit(n as f64 / n_x as f64);
    let p: Vec<T> = counts_x.iter().map(|&c| T::lit(c as f64 / n_x as f64)).collect();
    let mut w = Mat::from_fn(k, k, |i, j| {
        let d = if i == j { p[i] } else { T::zero() };
        scale * (d - p[i] * p[j])
    });
    let tr = w.trace();
    let ridge = if tr > T::zero() { ridge_scale * tr / T::from_count(k) } else { ridge_scale * scale };
    for i in 0..k {
        w[(i, i)] += ridge;
    }
    let chol = w.cholesky().ok_or_else(|| Error::Numeric { msg: "weight matrix not positive definite after ridge".into(), gap: f64::NAN })?;
    Ok(WeightMatrix { w, ridge_applied: ridge, chol })
}

/// Explicit form of the dual program over `w = (b̃, λ_eq, λ_ineq)`:
/// `max −γᵀw` s.t. `wᵀΓ₁w ≤ 1`, `Γ₂w = 0`, `Γ₃w ≥ 0`, `lb ≤ w ≤ ub`.
#[derive(Debug, Clone)]
pub struct DualProgram<T> {
    pub reduced_dim: usize,
    pub gamma: Vec<T>,
    /// Leading `reduced_dim` block of Γ₁ (the rest is zero).
    pub gamma1_block: Mat<T>,
    pub gamma2: SparseMatrix<T>,
    pub gamma3: SparseMatrix<T>,
    pub lb: Vec<T>,
    pub ub: Vec<T>,
}

impl<T: Scalar> DualProgram<T> {
    pub fn num_vars(&self) -> usize {
        self.gamma.len()
    }
}

/// Builds the dual program for `poly`, with `p_hat` written into the
/// marginal block of the constant vector.
pub fn dual_program<T: Scalar>(poly: &BcePolytope<T>, p_hat: &[T], w: &WeightMatrix<T>) -> Result<DualProgram<T>> {
    let d = poly.dims;
    let y = d.num_outcomes;
    let k = y - 1;
    if p_hat.len() != y || w.dim() != k {
        return Err(crate::error::domain("dimension mismatch between polytope, p_hat and W"));
    }
    let nv = k + d.d_eq + d.d_ineq;
    let lam = |row: usize| k + row;
    let lam_ineq = |row: usize| k + d.d_eq + row;
    let mut gamma = vec![T::zero(); nv];
    for (i, &ai) in poly.a.iter().enumerate() {
        gamma[lam(i)] = if i < y { p_hat[i] } else { ai };
    }
    // Γ₂: λ_marg = −(b̃, 0).
    let mut g2 = Vec::new();
    for yy in 0..y {
        g2.push((yy, lam(yy), T::one()));
        if yy < k {
            g2.push((yy, yy, T::one()));
        }
    }
    // Γ₃: one row per ν column, (Aᵀλ)_col ≥ 0.
    let mut g3 = Vec::new();
    for &(i, j, v) in &poly.a_eq.entries {
        if j >= y {
            g3.push((j - y, lam(i), v));
        }
    }
    for &(i, j, v) in &poly.a_ineq.entries {
        g3.push((j - y, lam_ineq(i), v));
    }
    let cap = T::lit(MULTIPLIER_CAP);
    let bbox = T::one() / w.w.min_eigenvalue().max(T::epsilon()).sqrt();
    let mut lb = vec![-cap; nv];
    let mut ub = vec![cap; nv];
    for i in 0..k {
        lb[i] = -bbox;
        ub[i] = bbox;
    }
    for r in 0..d.d_ineq {
        lb[lam_ineq(r)] = T::zero();
    }
    Ok(DualProgram {
        reduced_dim: k,
        gamma,
        gamma1_block: w.w.clone(),
        gamma2: SparseMatrix { rows: y, cols: nv, entries: g2 },
        gamma3: SparseMatrix { rows: d.d_nu, cols: nv, entries: g3 },
        lb,
        ub,
    })
}

#[derive(Debug, Clone)]
pub struct DualSolution<T> {
    /// Optimal value of the dual program (not yet scaled by `√n`).
    pub value: T,
    pub b_tilde: Vec<T>,
    pub cap_active: bool,
    pub reduced_accuracy: bool,
}

fn rows_of<T: Scalar>(m: &SparseMatrix<T>) -> Vec<Vec<(usize, T)>> {
    let mut rows = vec![Vec::new(); m.rows];
    for &(i, j, v) in &m.entries {
        rows[i].push((j, v));
    }
    rows
}

/// Solves `max −γᵀw + extra_objectiveᵀb̃` over the dual feasible set, optionally
/// with the extra row `−γᵀw ≥ −slack`.
fn solve_dual<T: Scalar>(
    dual: &DualProgram<T>,
    chol: &Mat<T>,
    objective_b: Option<&[T]>,
    slack: Option<T>,
    settings: &ConeSettings,
) -> Result<DualSolution<T>> {
    let nv = dual.num_vars();
    let k = dual.reduced_dim;
    let mut prog = ConeProgram::new(nv);
    match objective_b {
        None => prog.objective = dual.gamma.clone(),
        Some(g) => {
            for i in 0..k {
                prog.objective[i] = -g[i];
            }
        }
    }
    for row in rows_of(&dual.gamma2) {
        prog.eq.push((row, T::zero()));
    }
    for row in rows_of(&dual.gamma3) {
        prog.le.push((row.into_iter().map(|(j, v)| (j, -v)).collect(), T::zero()));
    }
    for j in 0..nv {
        prog.le.push((vec![(j, T::one())], dual.ub[j]));
        prog.le.push((vec![(j, -T::one())], -dual.lb[j]));
    }
    if let Some(t) = slack {
        let row = dual.gamma.iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(j, &v)| (j, v)).collect();
        prog.le.push((row, t));
    }
    // ‖Lᵀ b̃‖ ≤ 1.
    let cone_rows = (0..k).map(|i| (i..k).map(|j| (j, chol[(j, i)])).collect()).collect();
    prog.soc.push((T::one(), cone_rows));
    let sol = prog.solve(settings)?;
    let cap = T::lit(MULTIPLIER_CAP * 0.99);
    let cap_active = sol.x[k..].iter().any(|v| v.abs() > cap);
    if cap_active {
        log::warn!("dual multiplier cap {MULTIPLIER_CAP} is active");
    }
    if sol.reduced_accuracy {
        log::warn!("cone solver stopped at reduced accuracy");
    }
    Ok(DualSolution {
        value: -sol.objective,
        b_tilde: sol.x[..k].to_vec(),
        cap_active,
        reduced_accuracy: sol.reduced_accuracy,
    })
}

/// `V = √n ·` (optimum of the dual program), via the cone solver.
pub fn solve_v<T: Scalar>(poly: &BcePolytope<T>, p_hat: &[T], w: &WeightMatrix<T>, n: u64, settings: &ConeSettings) -> Result<(T, DualSolution<T>)> {
    let dual = dual_program(poly, p_hat, w)?;
    let sol = solve_dual(&dual, &w.chol, None, None, settings)?;
    let v = (T::lit(n as f64).sqrt() * sol.value).max(T::zero());
    Ok((v, sol))
}

/// Moment-selected bootstrap supremum via the cone solver:
/// `√n · max b̃ᵀ(p* − p̂)` over the ball and `h(b) − bᵀp̂ ≤ τ/√n`.
pub fn gms_sup<T: Scalar>(
    poly: &BcePolytope<T>,
    p_hat: &[T],
    p_star: &[T],
    w: &WeightMatrix<T>,
    n: u64,
    tau: T,
    settings: &ConeSettings,
) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(crate::error::domain("tau_n must be positive"));
    }
    let dual = dual_program(poly, p_hat, w)?;
    let sn = T::lit(n as f64).sqrt();
    let g: Vec<T> = (0..dual.reduced_dim).map(|i| p_star[i] - p_hat[i]).collect();
    let sol = solve_dual(&dual, &w.chol, Some(&g), Some(tau / sn), settings)?;
    Ok((sn * dot(&g, &sol.b_tilde)).max(T::zero()))
}

/// `√n {(b̃ᵀp̂ − h(b̃))/√(b̃ᵀWb̃)}₊` maximized by direction sampling followed
/// by a pattern-search polish. A cross-check for [`solve_v`].
pub fn studentized_sup<T: Scalar, R: Rng>(
    poly: &BcePolytope<T>,
    p_hat: &[T],
    w: &WeightMatrix<T>,
    n: u64,
    num_directions: usize,
    rng: &mut R,
) -> Result<T> {
    if num_directions < 1000 {
        return Err(crate::error::domain("studentized_sup needs at least 1000 directions"));
    }
    let k = w.dim();
    let sn = T::lit(n as f64).sqrt();
    let ratio = |b: &[T]| -> Result<T> {
        let mut full = b.to_vec();
        full.push(T::zero());
        let num = dot(b, &p_hat[..k]) - poly.support_fn(&full)?;
        let den = w.w.quad_form(b).sqrt();
        Ok(if den > T::zero() { num / den } else { T::zero() })
    };
    let mut scored: Vec<(T, Vec<T>)> = Vec::with_capacity(num_directions);
    for _ in 0..num_directions {
        let b: Vec<T> = (0..k).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
        scored.push((ratio(&b)?, b));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = scored[0].0;
    for (v0, b0) in scored.into_iter().take(3) {
        let (v, _) = pattern_search(v0, b0, &ratio)?;
        best = best.max(v);
    }
    Ok((sn * best).max(T::zero()))
}

fn pattern_search<T: Scalar>(mut val: T, mut b: Vec<T>, f: &dyn Fn(&[T]) -> Result<T>) -> Result<(T, Vec<T>)> {
    let k = b.len();
    let nb = dot(&b, &b).sqrt();
    b.iter_mut().for_each(|v| *v /= nb);
    let mut step = T::lit(0.25);
    let floor = T::lit(1e-9).max(T::epsilon().sqrt());
    while step > floor {
        let mut improved = false;
        for i in 0..k {
            for sgn in [T::one(), -T::one()] {
                let mut t = b.clone();
                t[i] += sgn * step;
                let v = f(&t)?;
                if v > val {
                    val = v;
                    b = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= T::lit(0.5);
        }
    }
    Ok((val, b))
}

/// The statistic evaluated in its primal form: sampled directions seed a vertex set,
/// then cutting planes with the LP oracle close the gap between the
/// relaxation (upper) and the exactly evaluated direction (lower).
pub fn primal_value<T: Scalar, R: Rng>(
    poly: &BcePolytope<T>,
    p_hat: &[T],
    w: &WeightMatrix<T>,
    n: u64,
    num_directions: usize,
    rng: &mut R,
) -> Result<T> {
    let k = w.dim();
    let sn = T::lit(n as f64).sqrt();
    let full = |b: &[T]| {
        let mut f = b.to_vec();
        f.push(T::zero());
        f
    };
    let whitened = |q: &[T]| -> Vec<T> {
        let d: Vec<T> = (0..k).map(|i| q[i] - p_hat[i]).collect();
        w.whiten(&d)
    };
    let mut atoms: Vec<Vec<T>> = Vec::new();
    for _ in 0..num_directions.max(1) {
        let b: Vec<T> = (0..k).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
        atoms.push(whitened(&poly.support_point(&full(&b))?.1));
    }
    let tol = T::lit(1e-11).max(T::epsilon() * T::lit(100.0));
    for _ in 0..10_000 {
        let mn = geometry::min_norm_in_hull(&atoms)?;
        let upper = dot(&mn.point, &mn.point).sqrt();
        if upper <= tol {
            return Ok(T::zero());
        }
        let c: Vec<T> = mn.point.iter().map(|&v| -v / upper).collect();
        let b = w.unwhiten_direction(&c);
        let (h, q) = poly.support_point(&full(&b))?;
        let lower = dot(&b, &p_hat[..k]) - h;
        if upper - lower <= tol {
            return Ok((sn * lower).max(T::zero()));
        }
        atoms.push(whitened(&q));
    }
    Err(Error::Iteration { msg: "cutting-plane primal value".into(), residual: f64::NAN })
}

/// Outcome-set vertices for one (θ, x, baseline), independent of data.
#[derive(Debug, Clone)]
pub struct ProjectedSet<T> {
    pub vertices: Vec<Vec<T>>,
    pub affine_dim: usize,
}

impl<T: Scalar> ProjectedSet<T> {
    pub fn from_polytope(poly: &BcePolytope<T>, max_queries: usize) -> Result<Self> {
        let y = poly.dims.num_outcomes;
        let seeds: Vec<Vec<T>> = (0..y)
            .flat_map(|j| {
                [T::one(), -T::one()].map(|s| {
                    let mut e = vec![T::zero(); y];
                    e[j] = s;
                    e
                })
            })
            .collect();
        let r = poly.reconstruct(&seeds, max_queries)?;
        Ok(Self { vertices: r.vertices, affine_dim: r.affine_dim })
    }

    pub fn support_fn(&self, b: &[T]) -> T {
        self.vertices.iter().map(|v| dot(b, v)).fold(T::neg_infinity(), T::max)
    }
}

/// How a cell's statistic is evaluated.
#[derive(Debug, Clone)]
pub enum CellEngine<T> {
    /// Whitened vertex offsets `L⁻¹(q_v − p̂)`.
    Vertices(Vec<Vec<T>>),
    /// Full dual program through the cone solver.
    Cone(Arc<BcePolytope<T>>),
}

/// Everything needed to evaluate `V_{n,x}` and its bootstrap counterpart.
#[derive(Debug, Clone)]
pub struct CellStat<T> {
    pub x_index: usize,
    pub p_hat: Vec<T>,
    pub weight: WeightMatrix<T>,
    pub engine: CellEngine<T>,
    pub settings: ConeSettings,
}

impl<T: Scalar> CellStat<T> {
    pub fn from_vertices(x_index: usize, p_hat: Vec<T>, weight: WeightMatrix<T>, set: &ProjectedSet<T>) -> Self {
        let k = weight.dim();
        let offsets = set
            .vertices
            .iter()
            .map(|q| {
                let d: Vec<T> = (0..k).map(|i| q[i] - p_hat[i]).collect();
                weight.whiten(&d)
            })
            .collect();
        Self { x_index, p_hat, weight, engine: CellEngine::Vertices(offsets), settings: ConeSettings::default() }
    }

    pub fn from_polytope(x_index: usize, p_hat: Vec<T>, weight: WeightMatrix<T>, poly: Arc<BcePolytope<T>>, settings: ConeSettings) -> Self {
        Self { x_index, p_hat, weight, engine: CellEngine::Cone(poly), settings }
    }

    pub fn v(&self, n: u64) -> Result<T> {
        let sn = T::lit(n as f64).sqrt();
        match &self.engine {
            CellEngine::Vertices(a) => {
                let mn = geometry::min_norm_in_hull(a)?;
                let d = dot(&mn.point, &mn.point).sqrt();
                let zero = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
                Ok(if d <= zero { T::zero() } else { sn * d })
            }
            CellEngine::Cone(poly) => Ok(solve_v(poly, &self.p_hat, &self.weight, n, &self.settings)?.0),
        }
    }

    pub fn gms(&self, p_star: &[T], n: u64, tau: T) -> Result<T> {
        let sn = T::lit(n as f64).sqrt();
        match &self.engine {
            CellEngine::Vertices(a) => {
                let k = self.weight.dim();
                let g: Vec<T> = (0..k).map(|i| p_star[i] - self.p_hat[i]).collect();
                let gw = self.weight.whiten(&g);
                Ok(sn * geometry::max_linear_ball_cut(&gw, a, tau / sn)?)
            }
            CellEngine::Cone(poly) => gms_sup(poly, &self.p_hat, p_star, &self.weight, n, tau, &self.settings),
        }
    }
}

/// `T_n = max_x V_{n,x}` with the per-cell values.
pub fn statistic_t<T: Scalar>(cells: &[CellStat<T>], n: u64) -> Result<(T, Vec<T>)> {
    let vs = cells.iter().map(|c| c.v(n)).collect::<Result<Vec<T>>>()?;
    let t = vs.iter().copied().fold(T::zero(), T::max);
    Ok((t, vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bce_polytope::assemble;
    use crate::game_model::{baseline_partition, BaselineKind, DiscretizedGame, GameSpec, Marginal, PayoffSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poly(delta: f64, kind: BaselineKind, r: usize) -> BcePolytope<f64> {
        let spec = GameSpec {
            num_players: 2,
            actions_per_player: vec![2, 2],
            payoff: PayoffSpec { beta: vec![0.0], delta: vec![vec![0.0, delta], vec![delta, 0.0]], interaction_sign: -1.0 },
            type_dist: vec![Marginal::Uniform { lo: -1.0, hi: 1.0 }],
            atoms: None,
            rho: 0.0,
            covariate_support: vec![vec![1.0]],
        };
        let g = DiscretizedGame::new(spec, &[r, r], false).unwrap();
        let part = baseline_partition(&kind, &g.grid).unwrap();
        assemble(&g, &part, &[1.0], &[0.25; 4]).unwrap()
    }

    #[test]
    fn uniform_weight_matrix() {
        let w = weight_matrix::<f64>(&[25, 25, 25, 25], 100, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.25 - 0.0625 } else { -0.0625 };
                assert!((w.w[(i, j)] - expected).abs() < 1e-15);
            }
        }
        let d = weight_matrix::<f64>(&[10, 0, 0, 0], 10, 1e-6).unwrap();
        assert!((d.w[(0, 0)] - 1e-6).abs() < 1e-18 && d.w[(0, 1)] == 0.0);
        assert!(weight_matrix::<f64>(&[0, 0, 0, 0], 10, 1e-6).is_err());
        let r = weight_matrix::<f64>(&[3, 5, 7, 9], 24, 1e-6).unwrap();
        assert!(r.w.min_eigenvalue() >= r.ridge_applied * (1.0 - 1e-9));
    }

    #[test]
    fn v_is_zero_inside_and_positive_outside() {
        let p = poly(0.5, BaselineKind::Complete, 4);
        let w = weight_matrix::<f64>(&[25, 25, 25, 25], 100, 1e-6).unwrap();
        let inside = p.support_point(&[0.3, -0.2, 0.1, 0.0]).unwrap().1;
        let (v, _) = solve_v(&p, &inside, &w, 100, &ConeSettings::default()).unwrap();
        assert!(v.abs() < 1e-5, "{v}");
        let outside = [0.3, 0.2, 0.2, 0.3];
        let (v, _) = solve_v(&p, &outside, &w, 100, &ConeSettings::default()).unwrap();
        let set = ProjectedSet::from_polytope(&p, 10_000).unwrap();
        let cell = CellStat::from_vertices(0, outside.to_vec(), w.clone(), &set);
        let fast = cell.v(100).unwrap();
        assert!(v > 0.1 && (v - fast).abs() < 1e-5, "{v} vs {fast}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let primal = primal_value(&p, &outside, &w, 100, 50, &mut rng).unwrap();
        assert!((primal - fast).abs() < 1e-8, "{primal} vs {fast}");
    }

    #[test]
    fn gms_engines_agree() {
        let p = poly(0.7, BaselineKind::Incomplete, 3);
        let w = weight_matrix::<f64>(&[30, 20, 25, 25], 100, 1e-6).unwrap();
        let p_hat = [0.3, 0.2, 0.25, 0.25];
        let p_star = [0.27, 0.24, 0.22, 0.27];
        let set = ProjectedSet::from_polytope(&p, 10_000).unwrap();
        let cell = CellStat::from_vertices(0, p_hat.to_vec(), w.clone(), &set);
        for tau in [0.05, 0.5, 2.0, 50.0] {
            let a = gms_sup(&p, &p_hat, &p_star, &w, 100, tau, &ConeSettings::default()).unwrap();
            let b = cell.gms(&p_star, 100, tau).unwrap();
            assert!((a - b).abs() < 1e-5, "tau {tau}: {a} vs {b}");
        }
        assert_eq!(cell.gms(&p_hat, 100, 1.0).unwrap(), 0.0);
    }
}

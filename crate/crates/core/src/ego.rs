//! Response-surface global optimization of an expensive black-box map with a
//! Gaussian-process surrogate and the expected-improvement criterion.
//!
//! The surrogate is a constant-mean process with the squared-exponential
//! correlation `exp(−Σ_h (θ_h − θ'_h)² / β_h)`. The mean and variance are
//! estimated by generalized least squares; the length scales by profile
//! likelihood over a log-spaced grid.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};
use crate::linalg::{solve_lower, solve_lower_transpose, Mat};
use crate::normal;
use crate::scalar::{dot, Scalar};

/// Smallest nugget added to the correlation diagonal.
pub const BASE_NUGGET: f64 = 1e-10;
const MAX_NUGGET: f64 = 1e-6;
/// Points closer than this are treated as duplicates.
const DUPLICATE_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> BoxDomain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(error::domain("box bounds must be non-empty and of equal length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(error::domain("box bounds must be finite with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + (u - l) * T::lit(rng.random::<f64>()))
            .collect()
    }

    pub fn clamp(&self, theta: &mut [T]) {
        for ((v, &l), &u) in theta.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(l).min(u);
        }
    }

    fn widths(&self) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| u - l).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GpModel<T> {
    pub eval_points: Vec<Vec<T>>,
    pub values: Vec<T>,
    pub mu_hat: T,
    pub var_hat: T,
    pub beta_scales: Vec<T>,
    pub nugget: T,
    pub corr_chol: Mat<T>,
    /// Largest `|p_L(θ_ℓ) − Y_ℓ|` over the evaluation points.
    pub interpolation_residual: T,
    /// `R⁻¹(Y − μ̂1)`.
    weights: Vec<T>,
    /// `R⁻¹1`.
    rinv_one: Vec<T>,
    one_rinv_one: T,
    log_likelihood: T,
}

fn correlation<T: Scalar>(a: &[T], b: &[T], beta: &[T]) -> T {
    let s = a.iter().zip(b).zip(beta).fold(T::zero(), |acc, ((&x, &y), &bh)| acc + (x - y) * (x - y) / bh);
    (-s).exp()
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

fn chol_solve<T: Scalar>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Fits the surrogate. Points within `1e-12` of an earlier point are dropped
/// with a warning; the nugget is escalated by ×10 up to `1e-6` if needed.
pub fn fit_gp<T: Scalar>(points: &[Vec<T>], values: &[T], beta_scales: &[T], nugget: T) -> Result<GpModel<T>> {
    if points.len() != values.len() {
        return Err(error::domain("points and values differ in length"));
    }
    let dim = beta_scales.len();
    if beta_scales.iter().any(|&b| !(b > T::zero())) {
        return Err(error::domain("kernel lengths must be positive"));
    }
    let mut pts: Vec<Vec<T>> = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(values.len());
    let radius = T::lit(DUPLICATE_RADIUS);
    for (p, &y) in points.iter().zip(values) {
        if p.len() != dim {
            return Err(error::domain("point dimension does not match the kernel"));
        }
        if pts.iter().any(|q| sq_dist(p, q).sqrt() <= radius) {
            log::warn!("dropping duplicate evaluation point {p:?}");
            continue;
        }
        pts.push(p.clone());
        ys.push(y);
    }
    let l = pts.len();
    if l < 2 {
        return Err(error::domain("a surrogate needs at least two distinct points"));
    }
    let base = Mat::from_fn(l, l, |i, j| correlation(&pts[i], &pts[j], beta_scales));
    let mut nug = nugget.max(T::lit(BASE_NUGGET));
    let chol = loop {
        let mut r = base.clone();
        for i in 0..l {
            r[(i, i)] += nug;
        }
        if let Some(c) = r.cholesky() {
            break c;
        }
        nug *= T::lit(10.0);
        if nug > T::lit(MAX_NUGGET) {
            return Err(Error::Numeric { msg: "correlation matrix not positive definite".into(), gap: f64::NAN });
        }
    };
    let ones = vec![T::one(); l];
    let rinv_one = chol_solve(&chol, &ones);
    let one_rinv_one = rinv_one.iter().fold(T::zero(), |a, &v| a + v);
    let mu_hat = dot(&rinv_one, &ys) / one_rinv_one;
    let resid: Vec<T> = ys.iter().map(|&y| y - mu_hat).collect();
    let weights = chol_solve(&chol, &resid);
    let var_hat = (dot(&resid, &weights) / T::from_count(l)).max(T::zero());
    let log_det = (0..l).fold(T::zero(), |a, i| a + chol[(i, i)].ln()) * T::lit(2.0);
    let floor = T::lit(1e-300).max(T::min_positive_value());
    let log_likelihood = -(T::from_count(l) * var_hat.max(floor).ln() + log_det) * T::lit(0.5);
    let mut gp = GpModel {
        eval_points: pts,
        values: ys,
        mu_hat,
        var_hat,
        beta_scales: beta_scales.to_vec(),
        nugget: nug,
        corr_chol: chol,
        interpolation_residual: T::zero(),
        weights,
        rinv_one,
        one_rinv_one,
        log_likelihood,
    };
    gp.interpolation_residual = (0..l)
        .map(|i| (gp.predict(&gp.eval_points[i]).0 - gp.values[i]).abs())
        .fold(T::zero(), T::max);
    Ok(gp)
}

impl<T: Scalar> GpModel<T> {
    /// Correlations with the evaluation points; the nugget is part of the
    /// kernel at zero distance so the predictor interpolates.
    fn corr_vector(&self, theta: &[T]) -> Vec<T> {
        let radius = T::lit(DUPLICATE_RADIUS);
        self.eval_points
            .iter()
            .map(|p| {
                let c = correlation(theta, p, &self.beta_scales);
                if sq_dist(theta, p).sqrt() <= radius {
                    c + self.nugget
                } else {
                    c
                }
            })
            .collect()
    }

    /// Best linear predictor and its mean squared error.
    pub fn predict(&self, theta: &[T]) -> (T, T) {
        let r = self.corr_vector(theta);
        let mean = self.mu_hat + dot(&r, &self.weights);
        let w = solve_lower(&self.corr_chol, &r);
        let u = T::one() - dot(&self.rinv_one, &r);
        let prior = T::one() + self.nugget;
        let s2 = prior - dot(&w, &w) + u * u / self.one_rinv_one;
        (mean, self.var_hat * s2.max(T::zero()))
    }

    pub fn num_points(&self) -> usize {
        self.eval_points.len()
    }
}

/// `E[max(p(θ) − incumbent, 0)]` under the surrogate.
pub fn expected_improvement<T: Scalar>(gp: &GpModel<T>, theta: &[T], incumbent: T) -> T {
    let (m, v) = gp.predict(theta);
    ei_from_moments(m, v.sqrt(), incumbent)
}

fn ei_from_moments<T: Scalar>(m: T, s: T, incumbent: T) -> T {
    let gap = m - incumbent;
    let tiny = T::lit(1e-14).max(T::epsilon());
    if s <= tiny {
        return gap.max(T::zero());
    }
    let z = (gap / s).as_f64();
    (gap * T::lit(normal::cdf(z)) + s * T::lit(normal::pdf(z))).max(T::zero())
}

/// Profile-likelihood choice of kernel lengths, coordinate-wise over a
/// log-spaced grid scaled by the squared box widths. Fits whose
/// interpolation residual exceeds `1e-9` are skipped.
pub fn estimate_scales<T: Scalar>(points: &[Vec<T>], values: &[T], domain: &BoxDomain<T>, nugget: T) -> Result<GpModel<T>> {
    let widths = domain.widths();
    let grid: Vec<f64> = (0..13).map(|i| 10f64.powf(-3.0 + 0.375 * i as f64)).collect();
    let scale = |h: usize, g: f64| {
        let w = widths[h].as_f64().max(1e-6);
        T::lit(g * w * w)
    };
    let dim = domain.dim();
    let mut beta: Vec<T> = (0..dim).map(|h| scale(h, 0.1)).collect();
    let limit = T::lit(1e-9);
    let mut best: Option<GpModel<T>> = None;
    let consider = |b: &[T], best: &mut Option<GpModel<T>>| {
        if let Ok(gp) = fit_gp(points, values, b, nugget) {
            if gp.interpolation_residual <= limit
                && best.as_ref().is_none_or(|cur| gp.log_likelihood > cur.log_likelihood)
            {
                *best = Some(gp);
            }
        }
    };
    consider(&beta, &mut best);
    for _sweep in 0..2 {
        for h in 0..dim {
            for &g in &grid {
                let mut b = best.as_ref().map_or(beta.clone(), |m| m.beta_scales.clone());
                b[h] = scale(h, g);
                consider(&b, &mut best);
            }
        }
        if let Some(m) = &best {
            beta = m.beta_scales.clone();
        }
    }
    match best {
        Some(m) => Ok(m),
        None => fit_gp(points, values, &beta, nugget),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoOptions {
    /// Total number of black-box evaluations.
    pub budget: usize,
    /// Size of the uniform initial design; defaults to `10·dim`.
    pub initial: Option<usize>,
    /// Probability of a uniform exploration draw instead of the EI argmax.
    pub epsilon: f64,
    pub refit_every: usize,
    pub starts: usize,
}

impl Default for EgoOptions {
    fn default() -> Self {
        Self { budget: 100, initial: None, epsilon: 0.1, refit_every: 5, starts: 100 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub theta: Vec<T>,
    pub value: T,
    pub incumbent: T,
    /// Expected improvement of the chosen point; `None` for design or random draws.
    pub ei: Option<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgoOutcome<T> {
    pub theta_best: Vec<T>,
    pub p_best: T,
    /// The incumbent exceeded `alpha` before the budget ran out.
    pub halted_early: bool,
    pub trace: Vec<TraceRow<T>>,
    /// Surrogate fits made, and the largest `|p_L(θ) − Y|` over evaluated points in any of them.
    pub fits: usize,
    pub max_fit_residual: T,
}

/// Maximizes a box-constrained function by local coordinate search from many
/// random starts.
fn multistart<T: Scalar, R: Rng>(f: &dyn Fn(&[T]) -> T, domain: &BoxDomain<T>, starts: usize, extra: &[Vec<T>], rng: &mut R) -> (Vec<T>, T) {
    let widths = domain.widths();
    let mut seeds: Vec<Vec<T>> = (0..starts.max(1)).map(|_| domain.sample(rng)).collect();
    seeds.extend_from_slice(extra);
    let mut scored: Vec<(T, Vec<T>)> = seeds.into_iter().map(|s| (f(&s), s)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = scored[0].clone();
    for (v0, x0) in scored.into_iter().take(5) {
        let (mut v, mut x) = (v0, x0);
        let mut step = T::lit(0.25);
        while step > T::lit(1e-7) {
            let mut improved = false;
            for h in 0..x.len() {
                for sign in [T::one(), -T::one()] {
                    let mut t = x.clone();
                    t[h] += sign * step * widths[h];
                    domain.clamp(&mut t);
                    let ft = f(&t);
                    if ft > v {
                        v = ft;
                        x = t;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= T::lit(0.5);
            }
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    (best.1, best.0)
}

fn is_new<T: Scalar>(points: &[Vec<T>], theta: &[T]) -> bool {
    let radius = T::lit(DUPLICATE_RADIUS);
    points.iter().all(|p| sq_dist(p, theta).sqrt() > radius)
}

/// Searches for `θ` with `pfun(θ) > alpha`, halting as soon as one is found;
/// otherwise returns the best point after `budget` evaluations.
pub fn maximize_pvalue<T: Scalar, R: Rng>(
    pfun: &mut dyn FnMut(&[T]) -> Result<T>,
    domain: &BoxDomain<T>,
    options: &EgoOptions,
    alpha: T,
    rng: &mut R,
) -> Result<EgoOutcome<T>> {
    let dim = domain.dim();
    let initial = options.initial.unwrap_or(10 * dim).max(2);
    if options.budget < initial {
        return Err(error::domain(format!("budget {} is below the initial design size {initial}", options.budget)));
    }
    if !(0.0..=1.0).contains(&options.epsilon) {
        return Err(error::domain("exploration probability must lie in [0, 1]"));
    }
    let mut points: Vec<Vec<T>> = Vec::new();
    let mut values: Vec<T> = Vec::new();
    let mut trace = Vec::new();
    let mut best = (Vec::new(), T::neg_infinity());
    let mut record = |theta: Vec<T>, v: T, ei: Option<T>, points: &mut Vec<Vec<T>>, values: &mut Vec<T>, best: &mut (Vec<T>, T)| {
        if v > best.1 {
            *best = (theta.clone(), v);
        }
        trace.push(TraceRow { iteration: points.len(), theta: theta.clone(), value: v, incumbent: best.1, ei });
        points.push(theta);
        values.push(v);
    };
    for _ in 0..initial {
        let theta = domain.sample(rng);
        let v = pfun(&theta)?;
        record(theta, v, None, &mut points, &mut values, &mut best);
        if best.1 > alpha {
            return Ok(EgoOutcome { theta_best: best.0, p_best: best.1, halted_early: true, trace, fits: 0, max_fit_residual: T::zero() });
        }
    }
    let nugget = T::lit(BASE_NUGGET);
    let mut gp = estimate_scales(&points, &values, domain, nugget)?;
    let mut fits = 1;
    let mut max_fit_residual = gp.interpolation_residual;
    let mut since_refit = 0;
    while points.len() < options.budget {
        let explore = rng.random::<f64>() < options.epsilon;
        let (theta, ei) = if explore {
            (domain.sample(rng), None)
        } else {
            let incumbent = best.1;
            let f = |t: &[T]| expected_improvement(&gp, t, incumbent);
            let (t, e) = multistart(&f, domain, options.starts, &[best.0.clone()], rng);
            if is_new(&points, &t) { (t, Some(e)) } else { (domain.sample(rng), None) }
        };
        let v = pfun(&theta)?;
        record(theta, v, ei, &mut points, &mut values, &mut best);
        if best.1 > alpha {
            return Ok(EgoOutcome { theta_best: best.0, p_best: best.1, halted_early: true, trace, fits, max_fit_residual });
        }
        since_refit += 1;
        gp = if since_refit >= options.refit_every.max(1) {
            since_refit = 0;
            estimate_scales(&points, &values, domain, nugget)?
        } else {
            fit_gp(&points, &values, &gp.beta_scales, nugget)?
        };
        fits += 1;
        max_fit_residual = max_fit_residual.max(gp.interpolation_residual);
    }
    Ok(EgoOutcome { theta_best: best.0, p_best: best.1, halted_early: false, trace, fits, max_fit_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CiEndpoint<T> {
    /// Best feasible evaluated coordinate; `None` when nothing feasible was found.
    pub value: Option<T>,
    pub theta: Option<Vec<T>>,
    pub infeasible: bool,
    pub evaluations: usize,
}

/// Maximizes or minimizes `θ_j` over `{θ : pfun(θ) ≥ alpha}` with a
/// constrained response surface: feasibility probability `Φ((m − α)/s)`
/// multiplies the improvement in the objective coordinate.
pub fn ci_endpoint<T: Scalar, R: Rng>(
    pfun: &mut dyn FnMut(&[T]) -> Result<T>,
    domain: &BoxDomain<T>,
    coordinate: usize,
    direction: Direction,
    alpha: T,
    budget: usize,
    rng: &mut R,
) -> Result<CiEndpoint<T>> {
    let dim = domain.dim();
    if coordinate >= dim {
        return Err(error::domain(format!("coordinate {coordinate} out of range")));
    }
    let sign = match direction {
        Direction::Max => T::one(),
        Direction::Min => -T::one(),
    };
    let bound = match direction {
        Direction::Max => domain.upper[coordinate],
        Direction::Min => domain.lower[coordinate],
    };
    let initial = (10 * dim).min(budget).max(2.min(budget));
    let mut points: Vec<Vec<T>> = Vec::new();
    let mut values: Vec<T> = Vec::new();
    let mut best: Option<(T, Vec<T>)> = None;
    let mut evaluate = |theta: Vec<T>, points: &mut Vec<Vec<T>>, values: &mut Vec<T>, best: &mut Option<(T, Vec<T>)>| -> Result<()> {
        let v = pfun(&theta)?;
        if v >= alpha {
            let score = sign * theta[coordinate];
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                *best = Some((score, theta.clone()));
            }
        }
        points.push(theta);
        values.push(v);
        Ok(())
    };
    for _ in 0..initial {
        evaluate(domain.sample(rng), &mut points, &mut values, &mut best)?;
    }
    let nugget = T::lit(BASE_NUGGET);
    while points.len() < budget {
        // Push the best feasible point to the bound once.
        if let Some((_, theta)) = &best {
            let mut pushed = theta.clone();
            pushed[coordinate] = bound;
            if is_new(&points, &pushed) {
                evaluate(pushed, &mut points, &mut values, &mut best)?;
                continue;
            }
        }
        let fitted = estimate_scales(&points, &values, domain, nugget).ok();
        let candidate = match &fitted {
            Some(gp) if rng.random::<f64>() >= 0.1 => {
                let feas = |t: &[T]| {
                    let (m, v) = gp.predict(t);
                    let s = v.sqrt().max(T::lit(1e-12));
                    T::lit(normal::cdf(((m - alpha) / s).as_f64()))
                };
                let f = |t: &[T]| match &best {
                    None => feas(t),
                    Some((s, _)) => (sign * t[coordinate] - *s).max(T::zero()) * feas(t),
                };
                let extra: Vec<Vec<T>> = best.iter().map(|(_, t)| t.clone()).collect();
                let (t, val) = multistart(&f, domain, 100, &extra, rng);
                if val > T::zero() && is_new(&points, &t) { t } else { domain.sample(rng) }
            }
            _ => domain.sample(rng),
        };
        evaluate(candidate, &mut points, &mut values, &mut best)?;
    }
    Ok(match best {
        Some((s, theta)) => CiEndpoint { value: Some(sign * s), theta: Some(theta), infeasible: false, evaluations: points.len() },
        None => CiEndpoint { value: None, theta: None, infeasible: true, evaluations: points.len() },
    })
}

/// Writes the optimization trace as CSV:
/// `iteration, theta_0.., value, incumbent, ei`.
pub fn write_trace<T: Scalar, W: Write>(trace: &[TraceRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = trace.first().map_or(0, |r| r.theta.len());
    let mut header = vec!["iteration".to_string()];
    header.extend((0..dim).map(|h| format!("theta_{h}")));
    header.extend(["value", "incumbent", "ei"].map(String::from));
    w.write_record(&header)?;
    for row in trace {
        let mut rec = vec![row.iteration.to_string()];
        rec.extend(row.theta.iter().map(|v| v.as_f64().to_string()));
        rec.push(row.value.as_f64().to_string());
        rec.push(row.incumbent.as_f64().to_string());
        rec.push(row.ei.map_or(String::new(), |e| e.as_f64().to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

//! Low-dimensional convex geometry driven by a support oracle: incremental
//! hulls, polytope reconstruction from support queries, Wolfe's minimum-norm
//! point, and a barrier solver for linear maximization over a ball cut by
//! halfspaces.

use crate::error::{Error, Result};
use crate::lp::tolerance;
use crate::scalar::{dot, Scalar};

fn norm<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let tiny = scale * T::epsilon() * T::lit(16.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > tiny) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != T::zero() {
                for j in col..n {
                    let v = a[col][j];
                    a[i][j] -= f * v;
                }
                let bc = b[col];
                b[i] -= f * bc;
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * b[j];
        }
        b[i] = s / a[i][i];
    }
    Some(b)
}

fn det<T: Scalar>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut d = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            a.swap(col, piv);
            d = -d;
        }
        d *= a[col][col];
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..n {
                let v = a[col][j];
                a[i][j] -= f * v;
            }
        }
    }
    d
}

/// Unit normal of the hyperplane through `d` points in `R^d` (generalized
/// cross product), or `None` when the points are affinely dependent.
fn hyperplane_normal<T: Scalar>(pts: &[&[T]]) -> Option<Vec<T>> {
    let d = pts[0].len();
    if d == 1 {
        return Some(vec![T::one()]);
    }
    let rows: Vec<Vec<T>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let mut n: Vec<T> = (0..d)
        .map(|i| {
            let minor: Vec<Vec<T>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect())
                .collect();
            let c = det(minor);
            if i % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    let len = norm(&n);
    let scale = rows.iter().map(|r| norm(r)).fold(T::one(), |a, b| a * b.max(T::epsilon()));
    if !(len > scale * T::epsilon() * T::lit(64.0)) {
        return None;
    }
    n.iter_mut().for_each(|v| *v /= len);
    Some(n)
}

#[derive(Debug, Clone)]
struct Facet<T> {
    verts: Vec<usize>,
    normal: Vec<T>,
    offset: T,
    confirmed: bool,
}

/// Incremental convex hull in `R^d` with simplicial facets.
#[derive(Debug, Clone)]
pub struct Hull<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    facets: Vec<Facet<T>>,
    interior: Vec<T>,
    eps: T,
}

impl<T: Scalar> Hull<T> {
    /// Starts from `d + 1` affinely independent points.
    pub fn from_simplex(simplex: Vec<Vec<T>>, eps: T) -> Result<Self> {
        let dim = simplex[0].len();
        if simplex.len() != dim + 1 {
            return Err(Error::Internal("initial simplex needs d + 1 points".into()));
        }
        let mut interior = vec![T::zero(); dim];
        for p in &simplex {
            for (c, &v) in interior.iter_mut().zip(p) {
                *c += v / T::from_count(dim + 1);
            }
        }
        let mut hull = Self { dim, points: simplex, facets: Vec::new(), interior, eps };
        for skip in 0..=dim {
            let verts: Vec<usize> = (0..=dim).filter(|&v| v != skip).collect();
            let f = hull.make_facet(verts).ok_or_else(|| Error::Internal("degenerate simplex".into()))?;
            hull.facets.push(f);
        }
        Ok(hull)
    }

    fn make_facet(&self, verts: Vec<usize>) -> Option<Facet<T>> {
        let pts: Vec<&[T]> = verts.iter().map(|&v| self.points[v].as_slice()).collect();
        let mut normal = if self.dim == 1 {
            vec![T::one()]
        } else {
            hyperplane_normal(&pts)?
        };
        let mut offset = dot(&normal, pts[0]);
        if dot(&normal, &self.interior) > offset {
            normal.iter_mut().for_each(|v| *v = -*v);
            offset = -offset;
        }
        Some(Facet { verts, normal, offset, confirmed: false })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Adds `p`; returns `false` (and leaves the hull unchanged) if `p` lies
    /// inside within tolerance.
    pub fn add_point(&mut self, p: Vec<T>) -> bool {
        let visible: Vec<usize> = (0..self.facets.len())
            .filter(|&f| dot(&self.facets[f].normal, &p) - self.facets[f].offset > self.eps)
            .collect();
        if visible.is_empty() {
            return false;
        }
        let mut ridges: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
        for &f in &visible {
            let verts = &self.facets[f].verts;
            for skip in 0..verts.len() {
                let mut r: Vec<usize> = verts.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let idx = self.points.len();
        self.points.push(p);
        let mut new_facets = Vec::new();
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|&(_, c)| c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        for mut r in horizon {
            r.push(idx);
            if let Some(f) = self.make_facet(r) {
                new_facets.push(f);
            }
        }
        let mut keep = vec![true; self.facets.len()];
        visible.iter().for_each(|&f| keep[f] = false);
        let mut k = 0;
        self.facets.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        self.facets.extend(new_facets);
        true
    }

    /// Indices of points that are vertices of some facet.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.verts.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    /// Facet inequalities `normal·z ≤ offset`.
    pub fn inequalities(&self) -> Vec<(Vec<T>, T)> {
        self.facets.iter().map(|f| (f.normal.clone(), f.offset)).collect()
    }
}

/// Result of reconstructing a polytope from its support function.
#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    /// Vertices in ambient coordinates.
    pub vertices: Vec<Vec<T>>,
    /// Dimension of the affine hull.
    pub affine_dim: usize,
    pub queries: usize,
}

/// Support oracle: direction `b` ↦ (`max bᵀq`, a maximizer `q`).
pub type SupportOracle<'a, T> = dyn FnMut(&[T]) -> Result<(T, Vec<T>)> + 'a;

/// Recovers the full vertex set of a polytope given only its support oracle.
///
/// The loop keeps a hull of oracle points and queries each facet normal;
/// when no facet can be pushed outward the hull equals the polytope.
pub fn reconstruct<T: Scalar>(
    ambient_dim: usize,
    seed_directions: &[Vec<T>],
    oracle: &mut SupportOracle<'_, T>,
    max_queries: usize,
) -> Result<Reconstruction<T>> {
    let tol = tolerance::<T>();
    let mut queries = 0usize;
    let mut ask = |b: &[T], queries: &mut usize| -> Result<(T, Vec<T>)> {
        *queries += 1;
        if *queries > max_queries {
            return Err(Error::Capacity(format!("polytope reconstruction exceeded {max_queries} support queries")));
        }
        oracle(b)
    };
    let mut pts: Vec<Vec<T>> = Vec::new();
    for d in seed_directions {
        pts.push(ask(d, &mut queries)?.1);
    }
    if pts.is_empty() {
        let mut e = vec![T::zero(); ambient_dim];
        e[0] = T::one();
        pts.push(ask(&e, &mut queries)?.1);
    }
    let origin = pts[0].clone();

    // Affine hull: orthonormal basis of point differences, then verify every
    // complementary direction is flat.
    let mut basis: Vec<Vec<T>> = Vec::new();
    let add_to_basis = |basis: &mut Vec<Vec<T>>, v: &[T]| -> bool {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for u in basis.iter() {
                let c = dot(&w, u);
                w.iter_mut().zip(u).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let l = norm(&w);
        if l > tol * T::lit(100.0) {
            w.iter_mut().for_each(|x| *x /= l);
            basis.push(w);
            true
        } else {
            false
        }
    };
    let mut simplex_pts = vec![origin.clone()];
    for p in &pts[1..] {
        if basis.len() < ambient_dim && add_to_basis(&mut basis, &sub(p, &origin)) {
            simplex_pts.push(p.clone());
        }
    }
    'outer: loop {
        let mut comp = basis.clone();
        for j in 0..ambient_dim {
            let mut e = vec![T::zero(); ambient_dim];
            e[j] = T::one();
            let before = comp.len();
            if !add_to_basis(&mut comp, &e) || comp.len() == before {
                continue;
            }
            let w = comp.last().unwrap().clone();
            let base = dot(&w, &origin);
            for sgn in [T::one(), -T::one()] {
                let dir: Vec<T> = w.iter().map(|&x| sgn * x).collect();
                let (h, q) = ask(&dir, &mut queries)?;
                if h - sgn * base > tol * T::lit(10.0) {
                    if add_to_basis(&mut basis, &sub(&q, &origin)) {
                        simplex_pts.push(q.clone());
                    }
                    pts.push(q);
                    continue 'outer;
                }
            }
        }
        break;
    }
    let a = basis.len();
    if a == 0 {
        return Ok(Reconstruction { vertices: vec![origin], affine_dim: 0, queries });
    }
    let local = |q: &[T]| -> Vec<T> {
        let d = sub(q, &origin);
        basis.iter().map(|u| dot(u, &d)).collect()
    };
    let to_ambient = |z: &[T]| -> Vec<T> {
        let mut dir = vec![T::zero(); ambient_dim];
        for (u, &zi) in basis.iter().zip(z) {
            dir.iter_mut().zip(u).for_each(|(x, &y)| *x += zi * y);
        }
        dir
    };
    let mut ambient_pts: Vec<Vec<T>> = simplex_pts.clone();
    let mut hull = Hull::from_simplex(simplex_pts.iter().map(|p| local(p)).collect(), tol)?;
    for p in &pts {
        if hull.add_point(local(p)) {
            ambient_pts.push(p.clone());
        }
    }
    while let Some(fi) = hull.facets.iter().position(|f| !f.confirmed) {
        let (normal, offset) = (hull.facets[fi].normal.clone(), hull.facets[fi].offset);
        let dir = to_ambient(&normal);
        let (_, q) = ask(&dir, &mut queries)?;
        let z = local(&q);
        if dot(&normal, &z) - offset > tol && hull.add_point(z) {
            ambient_pts.push(q);
        } else {
            hull.facets[fi].confirmed = true;
        }
    }
    let vertices = hull.vertex_indices().into_iter().map(|i| ambient_pts[i].clone()).collect();
    Ok(Reconstruction { vertices, affine_dim: a, queries })
}

/// Minimum-norm point of a polytope accessed through a linear minimization
/// oracle `x ↦ argmin_{p} xᵀp`.
#[derive(Debug, Clone)]
pub struct MinNormPoint<T> {
    pub point: Vec<T>,
    pub atoms: Vec<Vec<T>>,
    pub weights: Vec<T>,
    pub iterations: usize,
}

/// Wolfe's algorithm. `start` must be a point of the polytope. `stop` is
/// consulted after every major iteration with the current point and its
/// certified lower bound on the distance; returning `true` ends the search.
pub fn wolfe_min_norm<T: Scalar>(
    start: Vec<T>,
    lmo: &mut dyn FnMut(&[T]) -> Result<Vec<T>>,
    stop: &mut dyn FnMut(&[T], T) -> bool,
) -> Result<MinNormPoint<T>> {
    let eps = T::epsilon() * T::lit(1e3);
    let mut atoms = vec![start];
    let mut weights = vec![T::one()];
    let mut x = atoms[0].clone();
    let mut scale = dot(&x, &x).max(T::epsilon());
    for iter in 0..1000 {
        let xx = dot(&x, &x);
        if xx == T::zero() {
            return Ok(MinNormPoint { point: x, atoms, weights, iterations: iter });
        }
        let q = lmo(&x)?;
        scale = scale.max(dot(&q, &q));
        let xq = dot(&x, &q);
        let gap = xx - xq;
        // For any p in P, xᵀp ≥ xᵀq, so xᵀq/‖x‖ lower-bounds the distance.
        let lower = (xq / xx.sqrt()).max(T::zero());
        if gap <= eps * scale || stop(&x, lower) {
            return Ok(MinNormPoint { point: x, atoms, weights, iterations: iter });
        }
        if atoms.iter().any(|a| crate::scalar::max_abs_diff(a, &q) <= T::epsilon() * T::lit(16.0)) {
            return Ok(MinNormPoint { point: x, atoms, weights, iterations: iter });
        }
        atoms.push(q);
        weights.push(T::zero());
        loop {
            let Some(alpha) = affine_min_norm(&atoms) else {
                // Numerically dependent atoms: drop the newest and stop.
                atoms.pop();
                weights.pop();
                return Ok(MinNormPoint { point: x, atoms, weights, iterations: iter });
            };
            if alpha.iter().all(|&a| a > eps) {
                weights = alpha;
                break;
            }
            let mut theta = T::one();
            for (&l, &a) in weights.iter().zip(&alpha) {
                if a <= eps && l - a > T::zero() {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, &a) in weights.iter_mut().zip(&alpha) {
                *l = theta * a + (T::one() - theta) * *l;
            }
            let mut k = 0;
            let keep: Vec<bool> = weights.iter().map(|&l| l > eps).collect();
            atoms.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            weights.retain(|&l| l > eps);
            let total = weights.iter().fold(T::zero(), |a, &b| a + b);
            weights.iter_mut().for_each(|l| *l /= total);
            if atoms.len() == 1 {
                weights = vec![T::one()];
                break;
            }
        }
        x = combine(&atoms, &weights);
    }
    Err(Error::Iteration { msg: "minimum-norm point".into(), residual: f64::NAN })
}

fn combine<T: Scalar>(atoms: &[Vec<T>], w: &[T]) -> Vec<T> {
    let mut x = vec![T::zero(); atoms[0].len()];
    for (a, &l) in atoms.iter().zip(w) {
        x.iter_mut().zip(a).for_each(|(xi, &ai)| *xi += l * ai);
    }
    x
}

/// Affine-hull minimizer: `argmin ‖Σ α_i p_i‖` subject to `Σ α_i = 1`.
fn affine_min_norm<T: Scalar>(atoms: &[Vec<T>]) -> Option<Vec<T>> {
    let k = atoms.len();
    let mut a = vec![vec![T::zero(); k + 1]; k + 1];
    for i in 0..k {
        for j in 0..=i {
            let g = dot(&atoms[i], &atoms[j]);
            a[i][j] = g;
            a[j][i] = g;
        }
        a[i][k] = T::one();
        a[k][i] = T::one();
    }
    let mut b = vec![T::zero(); k + 1];
    b[k] = T::one();
    let mut sol = solve_dense(a, b)?;
    sol.truncate(k);
    Some(sol)
}

/// Minimum-norm point of the convex hull of finitely many points.
pub fn min_norm_in_hull<T: Scalar>(points: &[Vec<T>]) -> Result<MinNormPoint<T>> {
    let start = points
        .iter()
        .min_by(|a, b| dot(a, a).partial_cmp(&dot(b, b)).unwrap())
        .ok_or_else(|| Error::Internal("empty point set".into()))?
        .clone();
    let mut lmo = |x: &[T]| -> Result<Vec<T>> {
        Ok(points
            .iter()
            .min_by(|a, b| dot(x, a).partial_cmp(&dot(x, b)).unwrap())
            .unwrap()
            .clone())
    };
    wolfe_min_norm(start, &mut lmo, &mut |_, _| false)
}

/// `max gᵀc` subject to `‖c‖ ≤ 1` and `a_iᵀc ≤ t` for all rows, with `t > 0`.
///
/// The origin is strictly feasible, so a primal log-barrier path from the
/// origin is used; the returned value is within `1e-11·max(1,‖g‖)` of the
/// optimum for `f64`.
pub fn max_linear_ball_cut<T: Scalar>(g: &[T], rows: &[Vec<T>], t: T) -> Result<T> {
    let gn = norm(g);
    if gn == T::zero() {
        return Ok(T::zero());
    }
    let relevant: Vec<&Vec<T>> = rows.iter().filter(|a| norm(a) > t).collect();
    // Unconstrained optimum first.
    let ghat: Vec<T> = g.iter().map(|&v| v / gn).collect();
    if relevant.iter().all(|a| dot(a, &ghat) <= t) {
        return Ok(gn);
    }
    // Cutting planes: solve on a working set, then add the most violated rows.
    let slack = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
    let violation = |a: &Vec<T>, c: &[T]| (dot(a, c) - t) / norm(a).max(T::one());
    let mut in_set = vec![false; relevant.len()];
    let mut working: Vec<&Vec<T>> = Vec::new();
    let mut c = ghat;
    loop {
        let mut worst: Vec<(T, usize)> = relevant
            .iter()
            .enumerate()
            .filter(|&(i, _)| !in_set[i])
            .map(|(i, a)| (violation(a, &c), i))
            .filter(|&(v, _)| v > slack)
            .collect();
        if worst.is_empty() {
            return Ok(dot(g, &c).max(T::zero()));
        }
        worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        for &(_, i) in worst.iter().take(8) {
            in_set[i] = true;
            working.push(relevant[i]);
        }
        let (value, point) = ball_cut_barrier(g, &working, t);
        if working.len() == relevant.len() {
            return Ok(value);
        }
        c = point;
    }
}

/// Barrier solve over `active`, followed by an exact active-set polish.
/// Returns the value and the point attaining it.
fn ball_cut_barrier<T: Scalar>(g: &[T], active: &[&Vec<T>], t: T) -> (T, Vec<T>) {
    let k = g.len();
    let gn = norm(g);
    let m = active.len();
    let nu = T::from_count(m + 2);
    let target = T::lit(1e-11).max(T::epsilon() * T::lit(100.0)) * gn.max(T::one());
    let mut c = vec![T::zero(); k];
    let mut s = nu / gn;
    let feasible = |c: &[T]| dot(c, c) < T::one() && active.iter().all(|a| dot(a, c) < t);
    let mut total_newton = 0;
    loop {
        for _ in 0..100 {
            let cc = dot(&c, &c);
            let rb = T::one() - cc;
            let two = T::lit(2.0);
            let mut grad: Vec<T> = (0..k).map(|i| -s * g[i] + two * c[i] / rb).collect();
            let mut hess = vec![vec![T::zero(); k]; k];
            for i in 0..k {
                hess[i][i] += two / rb;
                for j in 0..k {
                    hess[i][j] += T::lit(4.0) * c[i] * c[j] / (rb * rb);
                }
            }
            for a in active {
                let sl = t - dot(a, &c);
                for i in 0..k {
                    grad[i] += a[i] / sl;
                    for j in 0..k {
                        hess[i][j] += a[i] * a[j] / (sl * sl);
                    }
                }
            }
            let neg: Vec<T> = grad.iter().map(|&v| -v).collect();
            let Some(step) = solve_dense(hess, neg) else { break };
            let dec = -dot(&grad, &step);
            total_newton += 1;
            if dec <= T::lit(1e-16).max(T::epsilon() * T::epsilon() * T::lit(100.0)) {
                break;
            }
            // Damped Newton on a self-concordant function needs no line search.
            let lambda = dec.max(T::zero()).sqrt();
            let mut alpha = if lambda > T::lit(0.25) { T::one() / (T::one() + lambda) } else { T::one() };
            loop {
                let trial: Vec<T> = c.iter().zip(&step).map(|(&x, &d)| x + alpha * d).collect();
                if feasible(&trial) {
                    c = trial;
                    break;
                }
                alpha *= T::lit(0.5);
                if alpha < T::lit(1e-12) {
                    break;
                }
            }
            if alpha < T::lit(1e-12) || total_newton > 5000 {
                break;
            }
        }
        if nu / s <= target || total_newton > 5000 {
            break;
        }
        s *= T::lit(8.0);
    }
    let rough = dot(g, &c);
    match polish_active_set(g, active, t, &c) {
        Some((v, p)) if v >= rough => (v.max(T::zero()), p),
        _ => (rough.max(T::zero()), c),
    }
}

/// Solves the KKT system on the constraints that are nearly tight at `c`,
/// returning the exact value if the resulting point is feasible.
fn polish_active_set<T: Scalar>(g: &[T], rows: &[&Vec<T>], t: T, c: &[T]) -> Option<(T, Vec<T>)> {
    let k = g.len();
    let near = T::lit(1e-5).max(T::epsilon().sqrt());
    let mut order: Vec<(T, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, a)| ((t - dot(a, c)) / norm(a), i))
        .filter(|&(sl, _)| sl <= near)
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Linearly independent subset, tightest first.
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut chosen: Vec<&Vec<T>> = Vec::new();
    for &(_, i) in &order {
        let mut r = rows[i].clone();
        for q in &basis {
            let d = dot(&r, q);
            r.iter_mut().zip(q).for_each(|(x, &y)| *x -= d * y);
        }
        let rn = norm(&r);
        if rn > T::lit(1e-8) * norm(rows[i]) {
            basis.push(r.into_iter().map(|x| x / rn).collect());
            chosen.push(rows[i]);
        }
        if chosen.len() == k {
            break;
        }
    }
    let ball_tight = T::one() - norm(c) <= near;
    let m = chosen.len();
    let gram = |v: &[T]| -> Option<Vec<T>> {
        let a: Vec<Vec<T>> = (0..m).map(|i| (0..m).map(|j| dot(chosen[i], chosen[j])).collect()).collect();
        solve_dense(a, (0..m).map(|i| dot(chosen[i], v)).collect())
    };
    // c0 is the least-norm point of the tight affine set; gp is the objective projected onto it.
    let mut c0 = vec![T::zero(); k];
    let mut gp = g.to_vec();
    if m > 0 {
        let a: Vec<Vec<T>> = (0..m).map(|i| (0..m).map(|j| dot(chosen[i], chosen[j])).collect()).collect();
        let y = solve_dense(a, vec![t; m])?;
        let z = gram(g)?;
        for ((row, &yi), &zi) in chosen.iter().zip(&y).zip(&z) {
            c0.iter_mut().zip(row.iter()).for_each(|(x, &v)| *x += yi * v);
            gp.iter_mut().zip(row.iter()).for_each(|(x, &v)| *x -= zi * v);
        }
    }
    let gpn = norm(&gp);
    let candidate: Vec<T> = if gpn <= T::lit(1e-9) * norm(g) {
        c0
    } else if ball_tight {
        let rho2 = T::one() - dot(&c0, &c0);
        if rho2 < T::zero() {
            return None;
        }
        let rho = rho2.sqrt();
        c0.iter().zip(&gp).map(|(&x, &v)| x + rho * v / gpn).collect()
    } else {
        return None;
    };
    let slack = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
    let ok = dot(&candidate, &candidate) <= T::one() + slack
        && rows.iter().all(|a| dot(a, &candidate) <= t + slack * norm(a).max(T::one()));
    ok.then(|| (dot(g, &candidate), candidate))
}

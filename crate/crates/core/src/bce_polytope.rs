//! Linear description of the Bayes correlated equilibrium outcome set over
//! the vectorized decision rule, plus the LP-based queries built on it.
//!
//! Variables are `z = (p̃, ν)` with `p̃ = p̂ − q` on the first `|Y|` slots and
//! `ν(y, ε)` stacked column by column (outcome fastest) after them.
//!
//! The constraint system splits into independent blocks of payoff types: two
//! types belong to the same block when some player cannot tell them apart.
//! Only the marginal rows couple blocks, so support queries decompose into
//! one small LP per block.

use std::io::Write;

use crate::error::{domain, Error, Result};
use crate::game_model::{DiscretizedGame, InfoPartition};
use crate::geometry::{self, Reconstruction};
use crate::lp::{tolerance, LinearProgram, LpFailure, Sense};
use crate::scalar::{dot, Scalar};

/// Largest number of decision-rule entries a single block may carry.
pub const MAX_BLOCK_VARS: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub num_outcomes: usize,
    pub grid_size: usize,
    pub d_nu: usize,
    pub d_z: usize,
    pub d_eq: usize,
    pub d_ineq: usize,
}

/// Canonical index maps; the last player's coordinate varies fastest for
/// both outcomes and types.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizationOrder {
    pub outcomes: Vec<Vec<usize>>,
    pub types: Vec<Vec<usize>>,
}

impl VectorizationOrder {
    /// Position of `ν(y, e)` inside `z`.
    #[inline]
    pub fn z_index(&self, y: usize, e: usize) -> usize {
        let k = self.outcomes.len();
        k + e * k + y
    }
}

/// Triplet-form sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            d[i][j] += v;
        }
        d
    }
}

/// One obedience constraint: player `player`, told `recommended`, gains
/// nothing by switching to `deviation` within information cell `cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct IcRow<T> {
    pub player: usize,
    pub recommended: usize,
    pub deviation: usize,
    pub cell: usize,
    /// `(y, e, coefficient)` on `ν(y, e)`.
    pub coefs: Vec<(usize, usize, T)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Block {
    types: Vec<usize>,
    ic_rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BcePolytope<T> {
    pub dims: Dims,
    pub a_eq: SparseMatrix<T>,
    pub a: Vec<T>,
    pub a_ineq: SparseMatrix<T>,
    pub order: VectorizationOrder,
    pub prior: Vec<T>,
    pub ic_rows: Vec<IcRow<T>>,
    blocks: Vec<Block>,
}

/// Builds the system for one covariate value. `p_hat` only enters the
/// constant vector `a`.
pub fn assemble<T: Scalar>(
    game: &DiscretizedGame<T>,
    partition: &InfoPartition,
    x: &[T],
    p_hat: &[T],
) -> Result<BcePolytope<T>> {
    partition.check_grid(&game.grid)?;
    let k = game.actions.len();
    let r = game.grid.total_size;
    if p_hat.len() != k {
        return Err(domain(format!("outcome distribution has {} entries, |Y| = {k}", p_hat.len())));
    }
    if game.spec.payoff.beta.len() != x.len() {
        return Err(domain("covariate dimension does not match beta"));
    }
    let index = dot(&game.spec.payoff.beta, x);
    let n = game.spec.num_players;
    let order = VectorizationOrder {
        outcomes: game.actions.profiles().to_vec(),
        types: (0..r).map(|e| game.grid.coords(e)).collect(),
    };
    let d_nu = k * r;
    let d_z = k + d_nu;

    let mut eq = Vec::with_capacity(2 * d_z + d_nu);
    for y in 0..k {
        eq.push((y, y, T::one()));
        for e in 0..r {
            eq.push((y, order.z_index(y, e), T::one()));
        }
    }
    for e in 0..r {
        for y in 0..k {
            eq.push((k + e, order.z_index(y, e), T::one()));
        }
    }
    for j in k..d_z {
        eq.push((k + r, j, T::one()));
    }
    let mut a = p_hat.to_vec();
    a.extend_from_slice(&game.prior.masses);
    a.push(T::one());

    let mut ic_rows = Vec::new();
    for i in 0..n {
        let ai = game.spec.actions_per_player[i];
        for (c, cell) in partition.cells(i).iter().enumerate() {
            for rec in 0..ai {
                for dev in (0..ai).filter(|&d| d != rec) {
                    let mut coefs = Vec::new();
                    for &e in cell {
                        let eps_i = game.grid.value(e, i);
                        for (y, prof) in game.actions.profiles().iter().enumerate() {
                            if prof[i] != rec {
                                continue;
                            }
                            let mut alt = prof.clone();
                            alt[i] = dev;
                            let pay = &game.spec.payoff;
                            let gain = pay.payoff_with_index(i, &alt, eps_i, index)
                                - pay.payoff_with_index(i, prof, eps_i, index);
                            if gain != T::zero() {
                                coefs.push((y, e, gain));
                            }
                        }
                    }
                    ic_rows.push(IcRow { player: i, recommended: rec, deviation: dev, cell: c, coefs });
                }
            }
        }
    }
    let d_ineq = ic_rows.len();
    let ord = &order;
    let ineq = ic_rows
        .iter()
        .enumerate()
        .flat_map(|(row, ic)| ic.coefs.iter().map(move |&(y, e, v)| (row, ord.z_index(y, e), v)))
        .collect();

    let blocks = decompose(game, partition, &ic_rows);
    for b in &blocks {
        if b.types.len() * k > MAX_BLOCK_VARS {
            return Err(Error::Capacity(format!(
                "a constraint block has {} decision-rule entries (limit {MAX_BLOCK_VARS})",
                b.types.len() * k
            )));
        }
    }

    let dims = Dims { num_outcomes: k, grid_size: r, d_nu, d_z, d_eq: k + r + 1, d_ineq };
    Ok(BcePolytope {
        dims,
        a_eq: SparseMatrix { rows: k + r + 1, cols: d_z, entries: eq },
        a,
        a_ineq: SparseMatrix { rows: d_ineq, cols: d_z, entries: ineq },
        order,
        prior: game.prior.masses.clone(),
        ic_rows,
        blocks,
    })
}

fn decompose<T: Scalar>(game: &DiscretizedGame<T>, partition: &InfoPartition, ic_rows: &[IcRow<T>]) -> Vec<Block> {
    let r = game.grid.total_size;
    let mut parent: Vec<usize> = (0..r).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..partition.num_players() {
        for cell in partition.cells(i) {
            let root = find(&mut parent, cell[0]);
            for &e in &cell[1..] {
                let re = find(&mut parent, e);
                if re != root {
                    parent[re] = root;
                }
            }
        }
    }
    let mut id = vec![usize::MAX; r];
    let mut blocks: Vec<Block> = Vec::new();
    let mut block_of = vec![0; r];
    for e in 0..r {
        let root = find(&mut parent, e);
        if id[root] == usize::MAX {
            id[root] = blocks.len();
            blocks.push(Block { types: Vec::new(), ic_rows: Vec::new() });
        }
        block_of[e] = id[root];
        blocks[id[root]].types.push(e);
    }
    for (row, ic) in ic_rows.iter().enumerate() {
        let e0 = partition.cells(ic.player)[ic.cell][0];
        blocks[block_of[e0]].ic_rows.push(row);
    }
    blocks
}

impl<T: Scalar> BcePolytope<T> {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn block_lp(&self, block: &Block, b: &[T]) -> LinearProgram<T> {
        let k = self.dims.num_outcomes;
        let mut local = std::collections::HashMap::with_capacity(block.types.len());
        for (li, &e) in block.types.iter().enumerate() {
            local.insert(e, li);
        }
        let mut lp = LinearProgram::new(k * block.types.len());
        for li in 0..block.types.len() {
            for y in 0..k {
                lp.objective[li * k + y] = b[y];
            }
        }
        for (li, &e) in block.types.iter().enumerate() {
            lp.add_row((0..k).map(|y| (li * k + y, T::one())).collect(), Sense::Eq, self.prior[e]);
        }
        for &row in &block.ic_rows {
            let coefs = self.ic_rows[row].coefs.iter().map(|&(y, e, v)| (local[&e] * k + y, v)).collect();
            lp.add_row(coefs, Sense::Le, T::zero());
        }
        lp
    }

    /// Support function value and a maximizing outcome distribution.
    pub fn support_point(&self, b: &[T]) -> Result<(T, Vec<T>)> {
        let k = self.dims.num_outcomes;
        if b.len() != k {
            return Err(domain(format!("direction has {} entries, |Y| = {k}", b.len())));
        }
        let mut q = vec![T::zero(); k];
        for block in &self.blocks {
            let sol = self.block_lp(block, b).solve().map_err(|f| match f {
                LpFailure::Infeasible => Error::Model("BCE constraint block is infeasible".into()),
                LpFailure::Unbounded => Error::Internal("support LP unbounded".into()),
                LpFailure::IterationLimit => Error::Numeric { msg: "simplex iteration limit".into(), gap: f64::NAN },
            })?;
            for (j, &v) in sol.x.iter().enumerate() {
                q[j % k] += v;
            }
        }
        let value = dot(b, &q);
        Ok((value, q))
    }

    /// `h(b) = max bᵀq` over the outcome set.
    pub fn support_fn(&self, b: &[T]) -> Result<T> {
        Ok(self.support_point(b)?.0)
    }

    /// Sharp lower and upper bounds on the probability of outcome `y`.
    pub fn outcome_bounds(&self, y: usize) -> Result<(T, T)> {
        let k = self.dims.num_outcomes;
        if y >= k {
            return Err(domain(format!("outcome {y} out of range")));
        }
        let mut e = vec![T::zero(); k];
        e[y] = T::one();
        let hi = self.support_fn(&e)?;
        e[y] = -T::one();
        let lo = -self.support_fn(&e)?;
        let clamp = |v: T| v.max(T::zero()).min(T::one());
        Ok((clamp(lo), clamp(hi)))
    }

    /// Euclidean distance from `q` to the outcome set, or an early exit as
    /// soon as the distance is certified to exceed `stop_above`.
    pub fn distance(&self, q: &[T], stop_above: T) -> Result<T> {
        let k = self.dims.num_outcomes;
        if q.len() != k {
            return Err(domain("outcome distribution has the wrong length"));
        }
        let shift = |p: &[T]| -> Vec<T> { p.iter().zip(q).map(|(&a, &b)| a - b).collect() };
        let start = shift(&self.support_point(&vec![T::zero(); k])?.1);
        let mut lmo = |x: &[T]| -> Result<Vec<T>> {
            let b: Vec<T> = x.iter().map(|&v| -v).collect();
            Ok(shift(&self.support_point(&b)?.1))
        };
        let mut lower = T::zero();
        let res = geometry::wolfe_min_norm(start, &mut lmo, &mut |_, lb| {
            lower = lower.max(lb);
            lb > stop_above
        })?;
        let d = dot(&res.point, &res.point).sqrt();
        Ok(if lower > stop_above { lower } else { d })
    }

    /// True iff `q` lies within Euclidean distance `tol` of the outcome set.
    pub fn membership(&self, q: &[T], tol: T) -> Result<bool> {
        validate_distribution(q)?;
        Ok(self.distance(q, tol)? <= tol)
    }

    /// Direct feasibility LP over the whole system with per-row slack `tol`.
    /// Only for small instances; used to cross-check [`Self::membership`].
    pub fn membership_lp(&self, q: &[T], tol: T) -> Result<bool> {
        validate_distribution(q)?;
        let d = self.dims;
        if d.d_z > MAX_BLOCK_VARS {
            return Err(Error::Capacity(format!("d_z = {} exceeds {MAX_BLOCK_VARS}", d.d_z)));
        }
        let mut lp = LinearProgram::new(d.d_nu);
        let col = |y: usize, e: usize| e * d.num_outcomes + y;
        for y in 0..d.num_outcomes {
            let coefs: Vec<(usize, T)> = (0..d.grid_size).map(|e| (col(y, e), T::one())).collect();
            lp.add_row(coefs.clone(), Sense::Le, q[y] + tol);
            lp.add_row(coefs, Sense::Ge, q[y] - tol);
        }
        for e in 0..d.grid_size {
            let coefs: Vec<(usize, T)> = (0..d.num_outcomes).map(|y| (col(y, e), T::one())).collect();
            lp.add_row(coefs.clone(), Sense::Le, self.prior[e] + tol);
            lp.add_row(coefs, Sense::Ge, self.prior[e] - tol);
        }
        for ic in &self.ic_rows {
            lp.add_row(ic.coefs.iter().map(|&(y, e, v)| (col(y, e), v)).collect(), Sense::Le, tol);
        }
        match lp.solve() {
            Ok(_) => Ok(true),
            Err(LpFailure::Infeasible) => Ok(false),
            Err(f) => Err(Error::Numeric { msg: format!("membership LP failed: {f:?}"), gap: f64::NAN }),
        }
    }

    /// Full vertex set of the outcome polytope, rebuilt from support queries.
    pub fn reconstruct(&self, seeds: &[Vec<T>], max_queries: usize) -> Result<Reconstruction<T>> {
        let mut oracle = |b: &[T]| self.support_point(b);
        geometry::reconstruct(self.dims.num_outcomes, seeds, &mut oracle, max_queries)
    }

    /// Vertices of the outcome polytope for small instances (`d_ν ≤ 64`),
    /// seeded by LP solves along `directions`.
    pub fn vertex_oracle(&self, directions: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        if directions.is_empty() {
            return Err(domain("vertex oracle needs at least one direction"));
        }
        if self.dims.d_nu > 64 {
            return Err(Error::Capacity(format!("d_nu = {} exceeds 64", self.dims.d_nu)));
        }
        Ok(self.reconstruct(directions, 200_000)?.vertices)
    }

    /// Writes `(A_eq, a, A_ineq)` as text: a header `d_eq d_ineq d_z`, then
    /// one `row col value` triplet per line (1-based). Inequality rows are
    /// numbered after the equality rows; column `d_z + 1` holds `a`.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dims;
        writeln!(out, "{} {} {}", d.d_eq, d.d_ineq, d.d_z)?;
        for &(i, j, v) in &self.a_eq.entries {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v.as_f64())?;
        }
        for (i, &v) in self.a.iter().enumerate() {
            writeln!(out, "{} {} {:e}", i + 1, d.d_z + 1, v.as_f64())?;
        }
        for &(i, j, v) in &self.a_ineq.entries {
            writeln!(out, "{} {} {:e}", d.d_eq + i + 1, j + 1, v.as_f64())?;
        }
        Ok(())
    }
}

pub(crate) fn validate_distribution<T: Scalar>(q: &[T]) -> Result<()> {
    let total = q.iter().fold(T::zero(), |a, &b| a + b);
    if q.iter().any(|&v| !(v >= -tolerance::<T>())) || (total - T::one()).abs() > T::lit(1e-6) {
        return Err(domain("expected a probability vector"));
    }
    Ok(())
}

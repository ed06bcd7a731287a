//! Parametric discrete games: action profiles, linear payoffs, a discretized
//! payoff-type space with a Gaussian-copula prior, and baseline information
//! structures encoded as per-player partitions of the type grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::normal;
use crate::scalar::Scalar;

/// Marginal law of a player's continuous payoff shock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Marginal {
    StandardNormal,
    Uniform { lo: f64, hi: f64 },
}

impl Marginal {
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => normal::ppf(p),
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * p,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::StandardNormal => normal::cdf(x),
            Marginal::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }
}

/// Discrete additive component of every player's payoff type: the type is
/// `value[s] + continuous shock`, with `s` drawn independently across players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec<T> {
    pub values: Vec<T>,
    pub probs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec<T> {
    /// Coefficients on the covariate vector.
    pub beta: Vec<T>,
    /// Strategic interaction, `delta[i][j]` is the effect of `j`'s action on `i`.
    pub delta: Vec<Vec<T>>,
    /// `+1` for `x'β + Δ y_{-i} + ε_i`, `-1` for `-Δ y_{-i} + ε_i`.
    pub interaction_sign: T,
}

impl<T: Scalar> PayoffSpec<T> {
    pub fn validate(&self, num_players: usize) -> Result<()> {
        if self.delta.len() != num_players || self.delta.iter().any(|r| r.len() != num_players) {
            return Err(domain("delta must be |N| x |N|"));
        }
        if (0..num_players).any(|i| self.delta[i][i] != T::zero()) {
            return Err(domain("delta must have a zero diagonal"));
        }
        if self.interaction_sign.abs() != T::one() {
            return Err(domain("interaction_sign must be +1 or -1"));
        }
        Ok(())
    }

    /// Payoff of player `i` at profile `y` with own shock `eps_i` and covariates `x`.
    pub fn payoff(&self, i: usize, y: &[usize], eps_i: T, x: &[T]) -> Result<T> {
        if self.beta.len() != x.len() {
            return Err(domain(format!(
                "beta has {} entries, covariate vector has {}",
                self.beta.len(),
                x.len()
            )));
        }
        if y[i] == 0 {
            return Ok(T::zero());
        }
        let index = crate::scalar::dot(&self.beta, x);
        Ok(T::from_count(y[i]) * (index + self.strategic(i, y) + eps_i))
    }

    /// Payoff with the covariate index precomputed; used in hot loops.
    #[inline]
    pub(crate) fn payoff_with_index(&self, i: usize, y: &[usize], eps_i: T, index: T) -> T {
        if y[i] == 0 {
            return T::zero();
        }
        T::from_count(y[i]) * (index + self.strategic(i, y) + eps_i)
    }

    #[inline]
    fn strategic(&self, i: usize, y: &[usize]) -> T {
        let mut s = T::zero();
        for (j, &yj) in y.iter().enumerate() {
            if j != i {
                s += self.delta[i][j] * T::from_count(yj);
            }
        }
        self.interaction_sign * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec<T> {
    pub num_players: usize,
    pub actions_per_player: Vec<usize>,
    pub payoff: PayoffSpec<T>,
    /// One marginal per player, or a single entry applied to all.
    pub type_dist: Vec<Marginal>,
    #[serde(default)]
    pub atoms: Option<AtomSpec<T>>,
    /// Copula correlation of the continuous shocks.
    #[serde(default)]
    pub rho: T,
    pub covariate_support: Vec<Vec<T>>,
}

impl<T: Scalar> GameSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.num_players == 0 || self.actions_per_player.len() != self.num_players {
            return Err(domain("actions_per_player must list one size per player"));
        }
        if self.actions_per_player.contains(&0) {
            return Err(domain("every player needs at least one action"));
        }
        if self.actions_per_player.iter().product::<usize>() < 2 {
            return Err(domain("|Y| must be at least 2"));
        }
        self.payoff.validate(self.num_players)?;
        if self.type_dist.len() != 1 && self.type_dist.len() != self.num_players {
            return Err(domain("type_dist must have 1 or |N| entries"));
        }
        for m in &self.type_dist {
            if let Marginal::Uniform { lo, hi } = *m {
                if !(lo < hi) {
                    return Err(domain("uniform marginal needs lo < hi"));
                }
            }
        }
        if self.covariate_support.is_empty() {
            return Err(domain("covariate_support must be non-empty"));
        }
        for (a, xa) in self.covariate_support.iter().enumerate() {
            if xa.len() != self.payoff.beta.len() {
                return Err(domain(format!("covariate {a} does not match beta dimension")));
            }
            if self.covariate_support[..a].iter().any(|xb| xb == xa) {
                return Err(domain(format!("covariate {a} is duplicated")));
            }
        }
        if let Some(atoms) = &self.atoms {
            if atoms.values.is_empty() || atoms.values.len() != atoms.probs.len() {
                return Err(domain("atom values and probs must be non-empty and aligned"));
            }
            let total = atoms.probs.iter().fold(T::zero(), |a, &b| a + b);
            if atoms.probs.iter().any(|&p| p < T::zero()) || (total - T::one()).abs() > T::lit(1e-9) {
                return Err(domain("atom probs must be a distribution"));
            }
        }
        Ok(())
    }

    pub fn marginal(&self, i: usize) -> Marginal {
        if self.type_dist.len() == 1 {
            self.type_dist[0]
        } else {
            self.type_dist[i]
        }
    }

    pub fn num_outcomes(&self) -> usize {
        self.actions_per_player.iter().product()
    }
}

/// Enumerates action profiles; the last player's action varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    sizes: Vec<usize>,
    profiles: Vec<Vec<usize>>,
}

impl ActionSpace {
    pub fn new(sizes: &[usize]) -> Self {
        Self { sizes: sizes.to_vec(), profiles: mixed_radix(sizes) }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profile(&self, k: usize) -> &[usize] {
        &self.profiles[k]
    }

    pub fn profiles(&self) -> &[Vec<usize>] {
        &self.profiles
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn index_of(&self, y: &[usize]) -> Option<usize> {
        if y.len() != self.sizes.len() || y.iter().zip(&self.sizes).any(|(a, s)| a >= s) {
            return None;
        }
        Some(y.iter().zip(&self.sizes).fold(0, |acc, (&a, &s)| acc * s + a))
    }

    /// Index of `y` with player `i`'s action replaced by `a`.
    pub fn with_action(&self, y: &[usize], i: usize, a: usize) -> usize {
        let mut z = y.to_vec();
        z[i] = a;
        self.index_of(&z).expect("valid profile")
    }
}

fn mixed_radix(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut k| {
            let mut digits = vec![0; sizes.len()];
            for (d, &s) in digits.iter_mut().zip(sizes).rev() {
                *d = k % s;
                k /= s;
            }
            digits
        })
        .collect()
}

/// One player's discretized types.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerGrid<T> {
    /// Continuous-shock grid values, strictly increasing.
    pub points: Vec<T>,
    /// Quantile levels of `points`, strictly increasing in (0,1).
    pub quantile_levels: Vec<T>,
    /// Discrete component values (a single zero when the game has no atoms).
    pub shifts: Vec<T>,
    pub shift_probs: Vec<T>,
}

impl<T: Scalar> PlayerGrid<T> {
    /// Number of local types: `|shifts| * |points|`, shift index slowest.
    pub fn len(&self) -> usize {
        self.shifts.len() * self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, local: usize) -> T {
        let r = self.points.len();
        self.shifts[local / r] + self.points[local % r]
    }

    pub fn shift_index(&self, local: usize) -> usize {
        local / self.points.len()
    }

    pub fn point_index(&self, local: usize) -> usize {
        local % self.points.len()
    }

    /// Cell boundaries in quantile space: midpoints between consecutive levels.
    fn level_bounds(&self) -> Vec<f64> {
        let lv: Vec<f64> = self.quantile_levels.iter().map(|l| l.as_f64()).collect();
        let mut b = Vec::with_capacity(lv.len() + 1);
        b.push(0.0);
        for w in lv.windows(2) {
            b.push(0.5 * (w[0] + w[1]));
        }
        b.push(1.0);
        b
    }
}

/// Product grid of payoff types; the last player's coordinate varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeGrid<T> {
    pub players: Vec<PlayerGrid<T>>,
    pub total_size: usize,
    strides: Vec<usize>,
}

impl<T: Scalar> TypeGrid<T> {
    pub fn new(players: Vec<PlayerGrid<T>>) -> Result<Self> {
        for (i, p) in players.iter().enumerate() {
            if p.points.len() != p.quantile_levels.len() || p.points.is_empty() {
                return Err(domain(format!("player {i}: points and levels must align")));
            }
            if p.points.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(domain(format!("player {i}: grid points must increase strictly")));
            }
            if p.quantile_levels.windows(2).any(|w| !(w[0] < w[1]))
                || p.quantile_levels.iter().any(|&l| !(l > T::zero() && l < T::one()))
            {
                return Err(domain(format!("player {i}: levels must increase strictly within (0,1)")));
            }
            if p.points.iter().any(|v| !v.is_finite()) {
                return Err(Error::Internal(format!("player {i}: non-finite quantile")));
            }
        }
        let sizes: Vec<usize> = players.iter().map(PlayerGrid::len).collect();
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let total_size = sizes.iter().product();
        Ok(Self { players, total_size, strides })
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.players.iter().map(PlayerGrid::len).collect()
    }

    /// Local coordinate of player `i` in joint type `e`.
    #[inline]
    pub fn coord(&self, e: usize, i: usize) -> usize {
        (e / self.strides[i]) % self.players[i].len()
    }

    pub fn coords(&self, e: usize) -> Vec<usize> {
        (0..self.num_players()).map(|i| self.coord(e, i)).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Payoff type of player `i` at joint type `e`.
    #[inline]
    pub fn value(&self, e: usize, i: usize) -> T {
        self.players[i].value(self.coord(e, i))
    }
}

/// Builds the quantile grid. Level `k` of player `i` is `(k - 0.5) / r_i`;
/// with `tails` the 0.01 and 0.99 quantiles are added.
pub fn make_grid<T: Scalar>(game: &GameSpec<T>, r_per_player: &[usize], tails: bool) -> Result<TypeGrid<T>> {
    game.validate()?;
    if r_per_player.len() != game.num_players {
        return Err(domain("need one grid size per player"));
    }
    if r_per_player.iter().any(|&r| r < 2) {
        return Err(domain("grid sizes must be at least 2"));
    }
    let (shifts, shift_probs) = match &game.atoms {
        Some(a) => (a.values.clone(), a.probs.clone()),
        None => (vec![T::zero()], vec![T::one()]),
    };
    let players = r_per_player
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut levels: Vec<f64> = (1..=r).map(|k| (k as f64 - 0.5) / r as f64).collect();
            if tails {
                for extra in [0.01, 0.99] {
                    if levels.iter().all(|&l| (l - extra).abs() > 1e-12) {
                        levels.push(extra);
                    }
                }
                levels.sort_by(f64::total_cmp);
            }
            let m = game.marginal(i);
            PlayerGrid {
                points: levels.iter().map(|&l| T::lit(m.quantile(l))).collect(),
                quantile_levels: levels.iter().map(|&l| T::lit(l)).collect(),
                shifts: shifts.clone(),
                shift_probs: shift_probs.clone(),
            }
        })
        .collect();
    TypeGrid::new(players)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorPMF<T> {
    pub masses: Vec<T>,
    pub copula_corr: T,
}

/// Gaussian-copula masses of the grid cells (times the independent atom
/// probabilities), renormalized to sum to one.
pub fn prior_pmf<T: Scalar>(grid: &TypeGrid<T>, rho: T) -> Result<PriorPMF<T>> {
    let rho_f = rho.as_f64();
    if !(rho_f > -1.0 && rho_f < 1.0) {
        return Err(domain(format!("copula correlation {rho_f} outside (-1, 1)")));
    }
    let n = grid.num_players();
    if n >= 3 && rho_f < 0.0 {
        return Err(domain("negative exchangeable correlation is supported for two players only"));
    }
    let bounds: Vec<Vec<f64>> = grid.players.iter().map(PlayerGrid::level_bounds).collect();
    let zb: Vec<Vec<f64>> = bounds.iter().map(|b| b.iter().map(|&u| normal::ppf(u)).collect()).collect();
    let r: Vec<usize> = grid.players.iter().map(|p| p.points.len()).collect();

    // Copula masses over point indices only; atoms multiply in independently.
    let point_cells: usize = r.iter().product();
    let point_mass: Vec<f64> = mixed_radix(&r)
        .into_iter()
        .map(|k| {
            if rho_f == 0.0 {
                return (0..n).map(|i| bounds[i][k[i] + 1] - bounds[i][k[i]]).product();
            }
            let lo: Vec<f64> = (0..n).map(|i| zb[i][k[i]]).collect();
            let hi: Vec<f64> = (0..n).map(|i| zb[i][k[i] + 1]).collect();
            if n == 1 {
                normal::cdf(hi[0]) - normal::cdf(lo[0])
            } else if n == 2 {
                normal::bvn_rect(lo[0], hi[0], lo[1], hi[1], rho_f)
            } else {
                normal::exchangeable_rect(&lo, &hi, rho_f)
            }
        })
        .collect();
    debug_assert_eq!(point_mass.len(), point_cells);

    let mut masses = Vec::with_capacity(grid.total_size);
    for e in 0..grid.total_size {
        let mut atom = 1.0;
        let mut pidx = 0;
        for (i, p) in grid.players.iter().enumerate() {
            let local = grid.coord(e, i);
            atom *= p.shift_probs[p.shift_index(local)].as_f64();
            pidx = pidx * r[i] + p.point_index(local);
        }
        masses.push(atom * point_mass[pidx]);
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Internal("prior masses sum to zero".into()));
    }
    Ok(PriorPMF {
        masses: masses.into_iter().map(|m| T::lit(m / total)).collect(),
        copula_corr: rho,
    })
}

/// Baseline information structures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaselineKind {
    /// Uninformative signals; players still know their own type.
    Null,
    Incomplete,
    Complete,
    Privileged { player: usize },
    /// Each player additionally observes the opponents' discrete components.
    Public,
}

impl BaselineKind {
    pub fn label(&self) -> String {
        match self {
            BaselineKind::Null => "null".into(),
            BaselineKind::Incomplete => "incomplete".into(),
            BaselineKind::Complete => "complete".into(),
            BaselineKind::Privileged { player } => format!("privileged({player})"),
            BaselineKind::Public => "public".into(),
        }
    }
}

/// A deterministic signal structure: player `i` learns which of its cells
/// contains the realized joint type.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoPartition {
    grid_shape: Vec<usize>,
    cells: Vec<Vec<Vec<usize>>>,
    cell_of: Vec<Vec<usize>>,
}

impl InfoPartition {
    /// Builds a partition from explicit cells and validates it against `grid`.
    pub fn from_cells<T: Scalar>(grid: &TypeGrid<T>, cells: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if cells.len() != grid.num_players() {
            return Err(domain("need one cell list per player"));
        }
        let r = grid.total_size;
        let mut cell_of = Vec::with_capacity(cells.len());
        for (i, player_cells) in cells.iter().enumerate() {
            let mut owner = vec![usize::MAX; r];
            for (c, cell) in player_cells.iter().enumerate() {
                if cell.is_empty() {
                    return Err(domain(format!("player {i}: empty cell {c}")));
                }
                let own = grid.coord(cell[0], i);
                for &e in cell {
                    if e >= r {
                        return Err(domain(format!("player {i}: type {e} out of range")));
                    }
                    if owner[e] != usize::MAX {
                        return Err(domain(format!("player {i}: type {e} in two cells")));
                    }
                    if grid.coord(e, i) != own {
                        return Err(domain(format!(
                            "player {i}: cell {c} mixes own types (player must know its own type)"
                        )));
                    }
                    owner[e] = c;
                }
            }
            if owner.contains(&usize::MAX) {
                return Err(domain(format!("player {i}: cells do not cover the grid")));
            }
            cell_of.push(owner);
        }
        Ok(Self { grid_shape: grid.shape(), cells, cell_of })
    }

    fn from_key<T: Scalar, K: std::hash::Hash + Eq>(grid: &TypeGrid<T>, key: impl Fn(usize, usize) -> K) -> Self {
        let n = grid.num_players();
        let mut cells = vec![Vec::new(); n];
        let mut cell_of = vec![vec![0; grid.total_size]; n];
        for i in 0..n {
            let mut ids: HashMap<K, usize> = HashMap::new();
            for e in 0..grid.total_size {
                let next = ids.len();
                let c = *ids.entry(key(i, e)).or_insert(next);
                if c == cells[i].len() {
                    cells[i].push(Vec::new());
                }
                cells[i][c].push(e);
                cell_of[i][e] = c;
            }
        }
        Self { grid_shape: grid.shape(), cells, cell_of }
    }

    pub fn num_players(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self, i: usize) -> &[Vec<usize>] {
        &self.cells[i]
    }

    pub fn cell_of(&self, i: usize, e: usize) -> usize {
        self.cell_of[i][e]
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape
    }

    pub fn check_grid<T: Scalar>(&self, grid: &TypeGrid<T>) -> Result<()> {
        if self.grid_shape != grid.shape() {
            return Err(domain("partition was built for a different grid"));
        }
        Ok(())
    }
}

/// Partition for a baseline. `Null` maps to the own-type partition.
pub fn baseline_partition<T: Scalar>(kind: &BaselineKind, grid: &TypeGrid<T>) -> Result<InfoPartition> {
    let n = grid.num_players();
    Ok(match *kind {
        BaselineKind::Null | BaselineKind::Incomplete => {
            InfoPartition::from_key(grid, |i, e| vec![grid.coord(e, i)])
        }
        BaselineKind::Complete => InfoPartition::from_key(grid, |_, e| vec![e]),
        BaselineKind::Privileged { player } => {
            if player >= n {
                return Err(domain(format!("privileged player {player} out of range")));
            }
            InfoPartition::from_key(grid, |i, e| if i == player { vec![e] } else { vec![grid.coord(e, i)] })
        }
        BaselineKind::Public => InfoPartition::from_key(grid, |i, e| {
            (0..n)
                .map(|j| {
                    let local = grid.coord(e, j);
                    if j == i {
                        local
                    } else {
                        grid.players[j].shift_index(local)
                    }
                })
                .collect::<Vec<_>>()
        }),
    })
}

/// True iff every cell of `a` lies inside a cell of `b`, for every player.
pub fn is_refinement(a: &InfoPartition, b: &InfoPartition) -> Result<bool> {
    if a.grid_shape != b.grid_shape {
        return Err(domain("partitions are defined on different grids"));
    }
    for i in 0..a.num_players() {
        for cell in a.cells(i) {
            let target = b.cell_of(i, cell[0]);
            if cell.iter().any(|&e| b.cell_of(i, e) != target) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Coordinates of θ inside the game primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaComponent {
    Beta { index: usize },
    Delta { i: usize, j: usize },
    /// Sets every off-diagonal interaction coefficient.
    DeltaAll,
    /// Sets row `i` of the interaction matrix (player `i`'s sensitivity).
    DeltaRow { i: usize },
    Rho,
}

/// Returns the game obtained by writing `theta` into the coordinates named by `map`.
pub fn apply_theta<T: Scalar>(base: &GameSpec<T>, map: &[ThetaComponent], theta: &[T]) -> Result<GameSpec<T>> {
    if map.len() != theta.len() {
        return Err(domain(format!("theta has {} entries, map has {}", theta.len(), map.len())));
    }
    let mut g = base.clone();
    let n = g.num_players;
    for (c, &v) in map.iter().zip(theta) {
        match *c {
            ThetaComponent::Beta { index } => {
                *g.payoff.beta.get_mut(index).ok_or_else(|| domain("beta index out of range"))? = v;
            }
            ThetaComponent::Delta { i, j } => {
                if i >= n || j >= n || i == j {
                    return Err(domain("delta index must be off-diagonal and in range"));
                }
                g.payoff.delta[i][j] = v;
            }
            ThetaComponent::DeltaAll => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            g.payoff.delta[i][j] = v;
                        }
                    }
                }
            }
            ThetaComponent::DeltaRow { i } => {
                if i >= n {
                    return Err(domain("delta row out of range"));
                }
                for j in 0..n {
                    if j != i {
                        g.payoff.delta[i][j] = v;
                    }
                }
            }
            ThetaComponent::Rho => g.rho = v,
        }
    }
    g.validate()?;
    Ok(g)
}

/// A game at a fixed θ with its grid and prior.
#[derive(Debug, Clone)]
pub struct DiscretizedGame<T> {
    pub spec: GameSpec<T>,
    pub grid: TypeGrid<T>,
    pub prior: PriorPMF<T>,
    pub actions: ActionSpace,
}

impl<T: Scalar> DiscretizedGame<T> {
    pub fn new(spec: GameSpec<T>, r_per_player: &[usize], tails: bool) -> Result<Self> {
        let grid = make_grid(&spec, r_per_player, tails)?;
        let prior = prior_pmf(&grid, spec.rho)?;
        let actions = ActionSpace::new(&spec.actions_per_player);
        Ok(Self { spec, grid, prior, actions })
    }

    /// Same grid and prior, different payoff parameters (ρ must match).
    pub fn with_spec(&self, spec: GameSpec<T>) -> Result<Self> {
        if spec.rho != self.spec.rho {
            let prior = prior_pmf(&self.grid, spec.rho)?;
            return Ok(Self { spec, grid: self.grid.clone(), prior, actions: self.actions.clone() });
        }
        Ok(Self { spec, grid: self.grid.clone(), prior: self.prior.clone(), actions: self.actions.clone() })
    }
}

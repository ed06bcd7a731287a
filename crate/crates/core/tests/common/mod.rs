#![allow(dead_code)]

use infotest::bce_polytope::{assemble, BcePolytope};
use infotest::bootstrap_test::{EnginePreference, TauRule, TestConfig, ThetaDomain};
use infotest::game_model::{baseline_partition, BaselineKind, DiscretizedGame, GameSpec, Marginal, PayoffSpec, ThetaComponent};
use infotest::lp::{LinearProgram, Sense};
use infotest::mc_sim::{CcpLaw, PowerConfig, SignalDgp};

/// Two-player entry game with payoffs `y_i(−Δ_i y_{-i} + ε_i)` and uniform(−1,1) types.
pub fn uniform_entry_game(d1: f64, d2: f64) -> GameSpec<f64> {
    GameSpec {
        num_players: 2,
        actions_per_player: vec![2, 2],
        payoff: PayoffSpec { beta: vec![0.0], delta: vec![vec![0.0, d1], vec![d2, 0.0]], interaction_sign: -1.0 },
        type_dist: vec![Marginal::Uniform { lo: -1.0, hi: 1.0 }],
        atoms: None,
        rho: 0.0,
        covariate_support: vec![vec![1.0]],
    }
}

pub fn uniform_entry_polytope(d1: f64, d2: f64, kind: BaselineKind, r: [usize; 2]) -> BcePolytope<f64> {
    let g = DiscretizedGame::new(uniform_entry_game(d1, d2), &r, false).unwrap();
    let part = baseline_partition(&kind, &g.grid).unwrap();
    assemble(&g, &part, &[1.0], &[0.25; 4]).unwrap()
}

/// `h(b)` from one LP over the whole system, without block decomposition.
pub fn support_by_full_lp(poly: &BcePolytope<f64>, b: &[f64]) -> f64 {
    let d = poly.dims;
    let col = |y: usize, e: usize| e * d.num_outcomes + y;
    let mut lp = LinearProgram::new(d.d_nu);
    for e in 0..d.grid_size {
        for (y, &by) in b.iter().enumerate() {
            lp.objective[col(y, e)] = by;
        }
        let row = (0..d.num_outcomes).map(|y| (col(y, e), 1.0)).collect();
        lp.add_row(row, Sense::Eq, poly.prior[e]);
    }
    for ic in &poly.ic_rows {
        lp.add_row(ic.coefs.iter().map(|&(y, e, v)| (col(y, e), v)).collect(), Sense::Le, 0.0);
    }
    lp.solve().unwrap().objective
}

/// Simulation design for the public-signal null: `x ∈ {−1, 1}`, `Δ = −3`,
/// `η = 1.5`, six quantile points per player and a five-point `Δ` grid.
pub const DESIGN_DELTA: f64 = -3.0;
pub const DESIGN_GRID_POINTS: usize = 6;

pub fn design_dgp(xi: f64) -> SignalDgp<f64> {
    SignalDgp { beta: 0.5, m: 1.0, delta: DESIGN_DELTA, eta: 1.5, mu: 0.5, xi }
}

pub fn delta_grid() -> ThetaDomain<f64> {
    ThetaDomain {
        map: vec![ThetaComponent::DeltaAll],
        lower: vec![-4.0],
        upper: vec![-2.0],
        resolution: None,
        grid: Some(vec![vec![-3.0], vec![-3.5], vec![-2.5], vec![-4.0], vec![-2.0]]),
    }
}

pub fn design_test_config(seed: u64, draws: usize) -> TestConfig<f64> {
    TestConfig {
        alpha: 0.05,
        draws,
        tau_rule: TauRule::SqrtLogN,
        ridge_scale: 1e-6,
        seed,
        min_cell: 1,
        theta: delta_grid(),
        ego: Default::default(),
        engine: EnginePreference::Vertices,
    }
}

pub fn design_power_config(xi_grid: Vec<f64>, reps: usize, seed: u64) -> PowerConfig<f64> {
    PowerConfig {
        dgp: design_dgp(1.0),
        xi_grid,
        m_list: vec![1.0],
        n: 1000,
        reps,
        law: CcpLaw::SignalIntegrated,
        grid_points: DESIGN_GRID_POINTS,
        tails: false,
        test: design_test_config(seed, 299),
    }
}

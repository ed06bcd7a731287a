//! Entry-game simulator with private signals about the opponent's discrete
//! payoff component, and size/power experiments for the public-signal null.
//!
//! Player `i` enters when `xβ + Δ y_{-i} + ν_i + ϵ_i ≥ 0`, with
//! `ν_i ∈ {η, −η}` (`P(ν_i = η) = μ`) and `ϵ_i` standard normal. Player `i`
//! privately observes `t_i`, which equals `ν_{-i}` with probability `ξ`.
//! Equilibrium strategies are thresholds on `ϵ_i` indexed by `(ν_i, t_i)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bootstrap_test::{test_null, GeometryCache, MarketDataset, TestConfig, TestModel, ThetaEvaluator};
use crate::error::{domain, Error, Result};
use crate::game_model::{AtomSpec, BaselineKind, GameSpec, Marginal, PayoffSpec};
use crate::normal;
use crate::scalar::Scalar;

/// State index 0 is `+η`, index 1 is `−η`.
const STATES: [usize; 2] = [0, 1];

/// `τ[ν][t]`, index 0 for `+η`.
pub type Thresholds = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SignalDgp<T> {
    pub beta: T,
    /// Covariate half-support: `x ∈ {−M, M}`.
    pub m: T,
    pub delta: T,
    pub eta: T,
    pub mu: T,
    /// Signal quality `P(t_i = ν_{-i})`.
    pub xi: T,
}

impl<T: Scalar> SignalDgp<T> {
    pub fn validate(&self) -> Result<()> {
        let (xi, mu, eta) = (self.xi.as_f64(), self.mu.as_f64(), self.eta.as_f64());
        if !(0.5..=1.0).contains(&xi) {
            return Err(domain(format!("signal quality {xi} outside [0.5, 1]")));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(domain(format!("state probability {mu} outside [0, 1]")));
        }
        if !(eta > 0.0) {
            return Err(domain("state magnitude must be positive"));
        }
        if ![self.beta, self.m, self.delta].iter().all(|v| v.is_finite()) {
            return Err(domain("payoff parameters must be finite"));
        }
        Ok(())
    }

    fn state_value(&self, s: usize) -> f64 {
        if s == 0 {
            self.eta.as_f64()
        } else {
            -self.eta.as_f64()
        }
    }

    fn state_prob(&self, s: usize) -> f64 {
        if s == 0 {
            self.mu.as_f64()
        } else {
            1.0 - self.mu.as_f64()
        }
    }

    /// The two covariate values `(−M, M)`.
    pub fn covariates(&self) -> [T; 2] {
        [-self.m, self.m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    /// `P(ν_{-i} = η | t_i = η)`.
    pub rho_eta: f64,
    /// `P(ν_{-i} = −η | t_i = −η)`.
    pub rho_neg_eta: f64,
    /// A signal value has probability zero; its posterior is the perfect-signal limit.
    pub degenerate: bool,
}

impl Posterior {
    /// `P(ν_{-i} = state | t_i = signal)`.
    fn prob(&self, state: usize, signal: usize) -> f64 {
        let same = if signal == 0 { self.rho_eta } else { self.rho_neg_eta };
        if state == signal {
            same
        } else {
            1.0 - same
        }
    }
}

pub fn posterior_rho(mu: f64, xi: f64) -> Result<Posterior> {
    if !(0.0..=1.0).contains(&mu) || !(0.5..=1.0).contains(&xi) {
        return Err(domain(format!("posterior needs mu in [0,1] and xi in [0.5,1], got ({mu}, {xi})")));
    }
    let d_eta = mu * xi + (1.0 - mu) * (1.0 - xi);
    let d_neg = (1.0 - mu) * xi + mu * (1.0 - xi);
    let mut degenerate = false;
    let mut ratio = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else {
            degenerate = true;
            1.0
        }
    };
    let rho_eta = ratio(mu * xi, d_eta);
    let rho_neg_eta = ratio((1.0 - mu) * xi, d_neg);
    Ok(Posterior { rho_eta, rho_neg_eta, degenerate })
}

/// Symmetric equilibrium thresholds `τ(ν, t)` at one covariate value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub x: f64,
    pub tau: Thresholds,
    pub residual: f64,
    pub iterations: usize,
    /// A restart from a random point converged elsewhere.
    pub multiple_equilibria: bool,
}

/// `Ψ(τ) = P(ϵ ≥ τ)`.
fn survival(tau: f64) -> f64 {
    normal::sf(tau)
}

/// Right-hand side of the fixed-point system.
fn threshold_map<T: Scalar>(dgp: &SignalDgp<T>, post: &Posterior, x: f64, tau: &Thresholds) -> Thresholds {
    let xi = dgp.xi.as_f64();
    let index = x * dgp.beta.as_f64();
    let delta = dgp.delta.as_f64();
    let mut out = [[0.0; 2]; 2];
    for nu in STATES {
        for t in STATES {
            // The opponent's signal matches ν with probability ξ.
            let expected: f64 = STATES
                .iter()
                .map(|&other| {
                    post.prob(other, t) * (xi * survival(tau[other][nu]) + (1.0 - xi) * survival(tau[other][1 - nu]))
                })
                .sum();
            out[nu][t] = -(index + delta * expected + dgp.state_value(nu));
        }
    }
    out
}

fn sup_gap(a: &Thresholds, b: &Thresholds) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).abs())).fold(0.0, f64::max)
}

/// Residuals of the four equilibrium equations, ordered `(η,η), (η,−η), (−η,η), (−η,−η)`.
pub fn threshold_residuals<T: Scalar>(dgp: &SignalDgp<T>, table: &ThresholdTable) -> Result<[f64; 4]> {
    let post = posterior_rho(dgp.mu.as_f64(), dgp.xi.as_f64())?;
    let f = threshold_map(dgp, &post, table.x, &table.tau);
    Ok([
        f[0][0] - table.tau[0][0],
        f[0][1] - table.tau[0][1],
        f[1][0] - table.tau[1][0],
        f[1][1] - table.tau[1][1],
    ])
}

fn iterate(dgp_map: &dyn Fn(&Thresholds) -> Thresholds, start: Thresholds) -> Result<(Thresholds, f64, usize)> {
    let mut tau = start;
    let mut damping = 0.5;
    let mut last = f64::INFINITY;
    for it in 1..=10_000 {
        let f = dgp_map(&tau);
        let res = sup_gap(&f, &tau);
        if res < 1e-10 {
            // One undamped step leaves the residual well below tolerance.
            let polished = dgp_map(&tau);
            let final_res = sup_gap(&dgp_map(&polished), &polished);
            return if final_res < res { Ok((polished, final_res, it)) } else { Ok((tau, res, it)) };
        }
        if res > last {
            damping *= 0.5;
        }
        last = res;
        for i in 0..2 {
            for j in 0..2 {
                tau[i][j] = (1.0 - damping) * tau[i][j] + damping * f[i][j];
            }
        }
    }
    let res = sup_gap(&dgp_map(&tau), &tau);
    Err(Error::Iteration { msg: "equilibrium threshold iteration".into(), residual: res })
}

/// Damped fixed-point iteration from `τ = 0`, followed by eight random
/// restarts that flag multiplicity.
pub fn solve_thresholds<T: Scalar>(dgp: &SignalDgp<T>, x: T) -> Result<ThresholdTable> {
    dgp.validate()?;
    let post = posterior_rho(dgp.mu.as_f64(), dgp.xi.as_f64())?;
    let xf = x.as_f64();
    let map = |tau: &Thresholds| threshold_map(dgp, &post, xf, tau);
    let (tau, residual, iterations) = iterate(&map, [[0.0; 2]; 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let spread = 3.0 + dgp.delta.as_f64().abs() + dgp.eta.as_f64() + (xf * dgp.beta.as_f64()).abs();
    let mut multiple_equilibria = false;
    for _ in 0..8 {
        let mut start = [[0.0; 2]; 2];
        start.iter_mut().flatten().for_each(|v| *v = spread * (2.0 * rng.random::<f64>() - 1.0));
        if let Ok((other, _, _)) = iterate(&map, start) {
            if sup_gap(&other, &tau) > 1e-6 {
                multiple_equilibria = true;
            }
        }
    }
    if multiple_equilibria {
        log::warn!("several symmetric equilibria at x = {xf}; keeping the one reached from zero");
    }
    Ok(ThresholdTable { x: xf, tau, residual, iterations, multiple_equilibria })
}

/// How the joint outcome law is assembled from the thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcpLaw {
    /// Actions are independent given `(ν₁, ν₂)`; each player's signal is the
    /// opponent's state with probability `ξ`.
    #[default]
    SignalIntegrated,
    /// Product of the state-conditional entry rates `P_{ν_i, x}` as displayed
    /// in the design, mixed over `(ν₁, ν₂)`.
    DisplayLiteral,
}

/// `P(enter | ν_i, ν_{-i})` under the signal-integrated law.
fn entry_given_states(tau: &Thresholds, xi: f64, own: usize, other: usize) -> f64 {
    xi * survival(tau[own][other]) + (1.0 - xi) * survival(tau[own][1 - other])
}

/// `P_{ν,x} = ξΨ(τ(ν,ν)) + (1−ξ)Ψ(τ(ν,−ν))`.
pub fn state_entry_rates(table: &ThresholdTable, xi: f64) -> [f64; 2] {
    [0, 1].map(|s| xi * survival(table.tau[s][s]) + (1.0 - xi) * survival(table.tau[s][1 - s]))
}

/// `P(enter | ν_i)` under the signal-integrated law, averaging over the
/// opponent's state.
pub fn marginal_entry_rates<T: Scalar>(dgp: &SignalDgp<T>, table: &ThresholdTable) -> [f64; 2] {
    let xi = dgp.xi.as_f64();
    [0, 1].map(|s| STATES.iter().map(|&o| dgp.state_prob(o) * entry_given_states(&table.tau, xi, s, o)).sum())
}

/// Equilibrium outcome distribution over `(0,0), (0,1), (1,0), (1,1)`.
pub fn equilibrium_ccp<T: Scalar>(dgp: &SignalDgp<T>, x: T, law: CcpLaw) -> Result<Vec<T>> {
    let table = solve_thresholds(dgp, x)?;
    Ok(ccp_from_thresholds(dgp, &table, law))
}

pub fn ccp_from_thresholds<T: Scalar>(dgp: &SignalDgp<T>, table: &ThresholdTable, law: CcpLaw) -> Vec<T> {
    let xi = dgp.xi.as_f64();
    let rates = state_entry_rates(table, xi);
    let mut p = [0.0f64; 4];
    for s1 in STATES {
        for s2 in STATES {
            let w = dgp.state_prob(s1) * dgp.state_prob(s2);
            if w == 0.0 {
                continue;
            }
            let (e1, e2) = match law {
                CcpLaw::SignalIntegrated => (entry_given_states(&table.tau, xi, s1, s2), entry_given_states(&table.tau, xi, s2, s1)),
                CcpLaw::DisplayLiteral => (rates[s1], rates[s2]),
            };
            p[0] += w * (1.0 - e1) * (1.0 - e2);
            p[1] += w * (1.0 - e1) * e2;
            p[2] += w * e1 * (1.0 - e2);
            p[3] += w * e1 * e2;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter().map(|&v| T::lit(v / total)).collect()
}

/// Incomplete-information equilibrium of the same game, each player knowing
/// only `ν_i + ϵ_i`; solved by bisection on the common entry rate.
pub fn incomplete_information_ccp<T: Scalar>(dgp: &SignalDgp<T>, x: T) -> Result<Vec<T>> {
    dgp.validate()?;
    let index = x.as_f64() * dgp.beta.as_f64();
    let delta = dgp.delta.as_f64();
    let rate = |s: f64| -> f64 {
        STATES.iter().map(|&k| dgp.state_prob(k) * survival(-(index + delta * s + dgp.state_value(k)))).sum()
    };
    // g(s) = rate(s) − s is strictly decreasing when Δ ≤ 0; otherwise bisection still brackets a root.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let enter: Vec<f64> = STATES.iter().map(|&k| survival(-(index + delta * s + dgp.state_value(k)))).collect();
    let mut p = [0.0f64; 4];
    for s1 in STATES {
        for s2 in STATES {
            let w = dgp.state_prob(s1) * dgp.state_prob(s2);
            let (e1, e2) = (enter[s1], enter[s2]);
            p[0] += w * (1.0 - e1) * (1.0 - e2);
            p[1] += w * (1.0 - e1) * e2;
            p[2] += w * e1 * (1.0 - e2);
            p[3] += w * e1 * e2;
        }
    }
    Ok(p.iter().map(|&v| T::lit(v)).collect())
}

/// `P(Y = (1,0)) = (1+Δ₂)/((2+Δ₁)(2+Δ₂))` for the uniform(−1,1) entry game
/// with payoffs `y_i(−Δ_i y_{-i} + ε_i)`.
pub fn closed_form_incomplete_ccp<T: Scalar>(delta1: T, delta2: T) -> T {
    (T::one() + delta2) / ((T::lit(2.0) + delta1) * (T::lit(2.0) + delta2))
}

/// Incomplete-information equilibrium of the uniform(−1,1) entry game with
/// payoffs `y_i(−Δ_i y_{-i} + ε_i)`: `p_i = (1 − Δ_i p_{-i})/2`.
pub fn uniform_game_bne_ccp<T: Scalar>(delta1: T, delta2: T) -> Vec<T> {
    let (d1, d2) = (delta1.as_f64(), delta2.as_f64());
    let den = 4.0 - d1 * d2;
    let p1 = (2.0 - d1) / den;
    let p2 = (2.0 - d2) / den;
    [(1.0 - p1) * (1.0 - p2), (1.0 - p1) * p2, p1 * (1.0 - p2), p1 * p2].iter().map(|&v| T::lit(v)).collect()
}

/// Draws `x` uniformly on `{−M, M}`, then `y` from the equilibrium law.
pub fn simulate_dataset<T: Scalar, R: Rng>(dgp: &SignalDgp<T>, n: u64, law: CcpLaw, rng: &mut R) -> Result<MarketDataset> {
    if n == 0 {
        return Err(domain("sample size must be positive"));
    }
    let ccps: Vec<Vec<f64>> = dgp
        .covariates()
        .iter()
        .map(|&x| Ok(equilibrium_ccp(dgp, x, law)?.iter().map(|v| v.as_f64()).collect()))
        .collect::<Result<_>>()?;
    let mut counts = vec![vec![0u64; 4]; 2];
    for _ in 0..n {
        let x = usize::from(rng.random::<bool>());
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut y = 3;
        for (k, &p) in ccps[x].iter().enumerate() {
            acc += p;
            if u < acc {
                y = k;
                break;
            }
        }
        counts[x][y] += 1;
    }
    let m = dgp.m.as_f64();
    MarketDataset::new(counts, vec![format!("x={}", -m), format!("x={m}")])
}

/// The entry game the simulator plays, as a test model: standard normal
/// shocks with `±η` atoms and covariate support `{−M, M}`.
pub fn dgp_model<T: Scalar>(dgp: &SignalDgp<T>, grid_points: usize, tails: bool) -> TestModel<T> {
    let game = GameSpec {
        num_players: 2,
        actions_per_player: vec![2, 2],
        payoff: PayoffSpec {
            beta: vec![dgp.beta],
            delta: vec![vec![T::zero(), dgp.delta], vec![dgp.delta, T::zero()]],
            interaction_sign: T::one(),
        },
        type_dist: vec![Marginal::StandardNormal],
        atoms: Some(AtomSpec { values: vec![dgp.eta, -dgp.eta], probs: vec![dgp.mu, T::one() - dgp.mu] }),
        rho: T::zero(),
        covariate_support: dgp.covariates().iter().map(|&x| vec![x]).collect(),
    };
    TestModel { game, grid_sizes: vec![grid_points; 2], tails }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PowerConfig<T> {
    /// `β, Δ, η, μ` of the design; `ξ` and `M` are overwritten from the grids.
    pub dgp: SignalDgp<T>,
    pub xi_grid: Vec<T>,
    pub m_list: Vec<T>,
    pub n: u64,
    pub reps: usize,
    #[serde(default)]
    pub law: CcpLaw,
    pub grid_points: usize,
    #[serde(default)]
    pub tails: bool,
    pub test: TestConfig<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub xi: f64,
    pub m: f64,
    pub rejection_rate: f64,
    pub mc_se: f64,
    pub reps: usize,
}

/// Rejection frequency of the public-signal null for every `(ξ, M)`.
pub fn power_experiment<T: Scalar>(config: &PowerConfig<T>, cache: &GeometryCache<T>) -> Result<Vec<PowerRow>> {
    if config.reps < 50 {
        return Err(Error::Config(format!("reps = {} is below the minimum of 50", config.reps)));
    }
    config.test.validate()?;
    let mut rows = Vec::with_capacity(config.xi_grid.len() * config.m_list.len());
    for (mi, &m) in config.m_list.iter().enumerate() {
        for (xi_i, &xi) in config.xi_grid.iter().enumerate() {
            let dgp = SignalDgp { xi, m, ..config.dgp.clone() };
            dgp.validate()?;
            let model = dgp_model(&dgp, config.grid_points, config.tails);
            let cell = (mi * config.xi_grid.len() + xi_i) as u64;
            let mut rejections = 0usize;
            for rep in 0..config.reps {
                let (data, test) = replication(config, &dgp, cell, rep)?;
                let eval = ThetaEvaluator::new(&data, &model, BaselineKind::Public, &test, cache)?;
                if test_null(&eval)?.reject {
                    rejections += 1;
                }
            }
            let rate = rejections as f64 / config.reps as f64;
            rows.push(PowerRow {
                xi: xi.as_f64(),
                m: m.as_f64(),
                rejection_rate: rate,
                mc_se: (rate * (1.0 - rate) / config.reps as f64).sqrt(),
                reps: config.reps,
            });
            log::info!("xi = {}, M = {}: rejection rate {rate:.3}", xi.as_f64(), m.as_f64());
        }
    }
    Ok(rows)
}

/// Dataset and bootstrap seed for one replication of one design cell.
pub fn replication<T: Scalar>(config: &PowerConfig<T>, dgp: &SignalDgp<T>, cell: u64, rep: usize) -> Result<(MarketDataset, TestConfig<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.test.seed);
    rng.set_stream((cell << 32) | rep as u64);
    let data = simulate_dataset(dgp, config.n, config.law, &mut rng)?;
    let mut test = config.test.clone();
    test.seed = rng.random();
    Ok((data, test))
}

pub fn write_power_csv<W: Write>(rows: &[PowerRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi", "M", "rejection_rate", "mc_se"])?;
    for r in rows {
        w.write_record([r.xi.to_string(), r.m.to_string(), r.rejection_rate.to_string(), r.mc_se.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgp(xi: f64, delta: f64, mu: f64) -> SignalDgp<f64> {
        SignalDgp { beta: 0.5, m: 1.0, delta, eta: 1.0, mu, xi }
    }

    #[test]
    fn posterior_cases() {
        let p = posterior_rho(0.5, 0.8).unwrap();
        assert!((p.rho_eta - 0.8).abs() < 1e-15);
        let p = posterior_rho(0.3, 0.5).unwrap();
        assert!((p.rho_eta - 0.3).abs() < 1e-15);
        assert!((p.rho_neg_eta - 0.7).abs() < 1e-15);
        let p = posterior_rho(0.3, 1.0).unwrap();
        assert_eq!((p.rho_eta, p.rho_neg_eta, p.degenerate), (1.0, 1.0, false));
        let p = posterior_rho(0.0, 1.0).unwrap();
        assert!(p.degenerate);
        assert!(posterior_rho(0.5, 0.4).is_err());
    }

    #[test]
    fn zero_interaction_decouples() {
        let d = SignalDgp { beta: 0.7, ..dgp(0.8, 0.0, 0.4) };
        for x in [-1.0, 1.0] {
            let t = solve_thresholds(&d, x).unwrap();
            for (s, nu) in [(0, 1.0), (1, -1.0)] {
                for sig in 0..2 {
                    assert_eq!(t.tau[s][sig], -(x * 0.7 + nu));
                }
            }
        }
    }

    #[test]
    fn uninformative_signal_is_signal_independent() {
        let t = solve_thresholds(&dgp(0.5, -2.0, 0.5), 1.0).unwrap();
        for s in 0..2 {
            assert!((t.tau[s][0] - t.tau[s][1]).abs() < 1e-9);
        }
    }

    #[test]
    fn residuals_are_tiny() {
        for xi in [0.5, 0.6, 0.75, 0.9, 1.0] {
            for delta in [-3.0, -1.0, 0.5] {
                let d = dgp(xi, delta, 0.3);
                let t = solve_thresholds(&d, 1.0).unwrap();
                let r = threshold_residuals(&d, &t).unwrap();
                assert!(r.iter().all(|v| v.abs() < 1e-9), "{r:?}");
            }
        }
    }

    #[test]
    fn ccp_is_a_distribution() {
        for law in [CcpLaw::SignalIntegrated, CcpLaw::DisplayLiteral] {
            let p = equilibrium_ccp(&dgp(0.7, -2.0, 0.4), 1.0, law).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn marginal_entry_matches_state_rates() {
        let d = dgp(0.7, -2.0, 0.35);
        let t = solve_thresholds(&d, 1.0).unwrap();
        let mu = [0.35, 0.65];
        let cases = [
            (CcpLaw::SignalIntegrated, marginal_entry_rates(&d, &t)),
            (CcpLaw::DisplayLiteral, state_entry_rates(&t, 0.7)),
        ];
        for (law, rates) in cases {
            let p = ccp_from_thresholds(&d, &t, law);
            let expected = mu[0] * rates[0] + mu[1] * rates[1];
            assert!((p[2] + p[3] - expected).abs() < 1e-12);
            assert!((p[1] + p[3] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_zero_index_game() {
        let d = SignalDgp { beta: 0.0, ..dgp(0.7, 0.0, 0.5) };
        let p = equilibrium_ccp(&d, 1.0, CcpLaw::SignalIntegrated).unwrap();
        assert!((p[3] - 0.25).abs() < 1e-12);
        let enter = p[2] + p[3];
        assert!((enter - 0.5).abs() < 1e-12);
    }

    #[test]
    fn half_quality_matches_incomplete_information() {
        for delta in [-2.0, -0.5, 0.8] {
            let d = dgp(0.5, delta, 0.35);
            for x in [-1.0, 1.0] {
                let a = equilibrium_ccp(&d, x, CcpLaw::SignalIntegrated).unwrap();
                let b = incomplete_information_ccp(&d, x).unwrap();
                for (u, v) in a.iter().zip(&b) {
                    assert!((u - v).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn uniform_game_closed_form() {
        assert!((closed_form_incomplete_ccp(0.5f64, 0.5) - 0.24).abs() < 1e-15);
        assert!((closed_form_incomplete_ccp(1e-12f64, 1e-12) - 0.25).abs() < 1e-11);
        let p = uniform_game_bne_ccp(0.5f64, 0.5);
        assert!((p[2] - 0.24).abs() < 1e-15);
    }

    #[test]
    fn simulation_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = simulate_dataset(&dgp(0.8, -2.0, 0.5), 1, CcpLaw::SignalIntegrated, &mut rng).unwrap();
        assert_eq!(d.n, 1);
        let a = simulate_dataset(&dgp(0.8, -2.0, 0.5), 500, CcpLaw::SignalIntegrated, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate_dataset(&dgp(0.8, -2.0, 0.5), 500, CcpLaw::SignalIntegrated, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}

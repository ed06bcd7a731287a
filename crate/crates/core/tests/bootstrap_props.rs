mod common;

use common::{design_dgp, design_test_config};
use infotest::bootstrap_test::{pvalues_from_draws, resample, test_null, GeometryCache, MarketDataset, TestConfig, TestModel, ThetaEvaluator};
use infotest::game_model::BaselineKind;
use infotest::mc_sim::{dgp_model, simulate_dataset, CcpLaw};
use infotest::multi_test::market_pvalues;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_model() -> TestModel<f64> {
    dgp_model(&design_dgp(1.0), 3, false)
}

fn small_config(seed: u64) -> TestConfig<f64> {
    let mut c = design_test_config(seed, 99);
    c.theta.grid = Some(vec![vec![-3.0], vec![-2.0]]);
    c
}

fn sample(xi: f64, n: u64, seed: u64) -> MarketDataset {
    simulate_dataset(&design_dgp(xi), n, CcpLaw::SignalIntegrated, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn results_are_reproducible_across_thread_counts() {
    let (model, config, data) = (small_model(), small_config(9), sample(0.6, 400, 1));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let cache = GeometryCache::new(None).unwrap();
            let eval = ThetaEvaluator::new(&data, &model, BaselineKind::Public, &config, &cache).unwrap();
            test_null(&eval).unwrap()
        })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    for (a, b) in one.records.iter().zip(&four.records) {
        assert!(a.t_star.iter().zip(&b.t_star).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn disk_cache_does_not_change_results() {
    let (model, config, data) = (small_model(), small_config(3), sample(0.8, 400, 2));
    let dir = tempfile::tempdir().unwrap();
    let decide = |cache: &GeometryCache<f64>| {
        let eval = ThetaEvaluator::new(&data, &model, BaselineKind::Public, &config, cache).unwrap();
        test_null(&eval).unwrap()
    };
    let memory = decide(&GeometryCache::new(None).unwrap());
    let cold = GeometryCache::new(Some(dir.path().to_path_buf())).unwrap();
    let first = decide(&cold);
    let warm = GeometryCache::new(Some(dir.path().to_path_buf())).unwrap();
    let second = decide(&warm);
    assert!(cold.misses() > 0);
    assert!(warm.hits() > 0);
    assert_eq!(memory, first);
    assert_eq!(first, second);
}

#[test]
fn single_market_pvalue_equals_the_restricted_test() {
    let (model, config) = (small_model(), small_config(5));
    let full = sample(0.6, 400, 4);
    let only_high = MarketDataset::new(vec![vec![0; 4], full.counts[1].clone()], full.covariate_labels.clone()).unwrap();
    let cache = GeometryCache::new(None).unwrap();
    let markets = market_pvalues(&only_high, &model, &[BaselineKind::Public], &config, &cache).unwrap();
    assert_eq!(markets.len(), 1);
    assert_eq!(markets[0].x, 1);
    let eval = ThetaEvaluator::new(&only_high, &model, BaselineKind::Public, &config, &cache).unwrap();
    let sup = config.theta.points().unwrap().iter().map(|t| eval.pvalue(t).unwrap().p_value).fold(0.0, f64::max);
    assert_eq!(markets[0].p_value, sup);
}

#[test]
fn pvalue_conventions_are_ordered() {
    let (model, config, data) = (small_model(), small_config(8), sample(0.55, 400, 6));
    let cache = GeometryCache::new(None).unwrap();
    let eval = ThetaEvaluator::new(&data, &model, BaselineKind::Public, &config, &cache).unwrap();
    for theta in [[-3.0], [-2.5], [-2.0]] {
        let r = eval.pvalue(&theta).unwrap();
        assert!(r.p_strict <= r.p_value && r.p_value <= r.p_weak);
        assert!(r.p_strict >= 1.0 / 100.0 && r.p_weak <= 1.0);
        assert_eq!(r.t_star.len(), 99);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pvalues_from_draws_are_bounded(t in 0.0f64..5.0, draws in prop::collection::vec(0.0f64..5.0, 1..200)) {
        let (strict, weak) = pvalues_from_draws(t, &draws);
        let floor = 1.0 / (draws.len() + 1) as f64;
        prop_assert!(floor <= strict && strict <= weak && weak <= 1.0);
        let (strict_hi, weak_hi) = pvalues_from_draws(t + 1.0, &draws);
        prop_assert!(strict_hi <= strict && weak_hi <= weak);
    }

    #[test]
    fn resampling_keeps_sample_size(seed in any::<u64>(), counts in prop::collection::vec(prop::collection::vec(0u64..20, 4), 2)) {
        prop_assume!(counts.iter().all(|c| c.iter().sum::<u64>() > 0));
        let data = MarketDataset::new(counts, vec!["a".into(), "b".into()]).unwrap();
        let a = resample(&data, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = resample(&data, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.n, data.n);
        prop_assert_eq!(a.counts.iter().flatten().sum::<u64>(), data.n);
        for (row, orig) in a.counts.iter().zip(&data.counts) {
            prop_assert!(row.iter().sum::<u64>() > 0);
            prop_assert!(row.iter().zip(orig).all(|(&k, &c)| c > 0 || k == 0));
        }
    }
}

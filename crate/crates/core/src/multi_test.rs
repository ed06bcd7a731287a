//! Several nulls at once: a sequential test along a chain of nested
//! baselines, and per-market confidence sets with Bonferroni or Holm control.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bootstrap_test::{sup_pvalue, test_null, GeometryCache, MarketDataset, TestConfig, TestModel, ThetaEvaluator};
use crate::error::{Error, Result};
use crate::game_model::{baseline_partition, is_refinement, make_grid, BaselineKind, InfoPartition};
use crate::scalar::Scalar;

/// Baselines ordered from most to least informative.
#[derive(Debug, Clone)]
pub struct BaselineChain {
    pub kinds: Vec<BaselineKind>,
    pub labels: Vec<String>,
    pub partitions: Vec<InfoPartition>,
}

impl BaselineChain {
    /// Fails with an ordering error unless each baseline refines the next.
    pub fn new<T: Scalar>(kinds: Vec<BaselineKind>, model: &TestModel<T>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::Config("baseline chain is empty".into()));
        }
        let grid = make_grid(&model.game, &model.grid_sizes, model.tails)?;
        let partitions = kinds.iter().map(|k| baseline_partition(k, &grid)).collect::<Result<Vec<_>>>()?;
        for (j, pair) in partitions.windows(2).enumerate() {
            if !is_refinement(&pair[0], &pair[1])? {
                return Err(Error::Ordering(format!(
                    "baseline {} ({}) is not at least as informative as baseline {} ({})",
                    j + 1,
                    kinds[j].label(),
                    j + 2,
                    kinds[j + 1].label()
                )));
            }
        }
        let labels = kinds.iter().map(BaselineKind::label).collect();
        Ok(Self { kinds, labels, partitions })
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }
}

/// Number of leading p-values at or below `alpha`, and the index of the first
/// one above it (`None` when every null is rejected).
pub fn sequential_decision<T: Scalar>(pvals: &[T], alpha: T) -> (usize, Option<usize>) {
    match pvals.iter().position(|&p| p > alpha) {
        Some(stop) => (stop, Some(stop)),
        None => (pvals.len(), None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChainStep<T> {
    pub label: String,
    pub p_value: T,
    pub theta_best: Vec<T>,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SequentialResult<T> {
    pub alpha: T,
    /// Baselines actually tested, in chain order.
    pub steps: Vec<ChainStep<T>>,
    /// The first `rejected` nulls of the chain are rejected.
    pub rejected: usize,
    /// Zero-based index of the first retained null.
    pub stop_index: Option<usize>,
}

/// Tests the chain in order at level `α` each, stopping at the first null
/// that is not rejected.
pub fn sequential_test<T: Scalar>(
    chain: &BaselineChain,
    data: &MarketDataset,
    model: &TestModel<T>,
    config: &TestConfig<T>,
    cache: &GeometryCache<T>,
) -> Result<SequentialResult<T>> {
    let mut steps = Vec::new();
    for (kind, label) in chain.kinds.iter().zip(&chain.labels) {
        let eval = ThetaEvaluator::new(data, model, kind.clone(), config, cache)?;
        let d = test_null(&eval)?;
        log::info!("baseline {label}: sup p = {}", d.sup_p.as_f64());
        let reject = d.reject;
        steps.push(ChainStep { label: label.clone(), p_value: d.sup_p, theta_best: d.theta_best, reject });
        if !reject {
            break;
        }
    }
    let pvals: Vec<T> = steps.iter().map(|s| s.p_value).collect();
    let (rejected, stop_index) = sequential_decision(&pvals, config.alpha);
    Ok(SequentialResult { alpha: config.alpha, steps, rejected, stop_index })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MarketPValue<T> {
    /// Covariate cell index.
    pub x: usize,
    pub label: String,
    pub n_x: u64,
    pub p_value: T,
    pub theta_best: Vec<T>,
}

/// `p_n(x) = sup_θ p_n(θ, x)` for every observed cell, each computed from that
/// cell's statistic alone. `baselines` holds one entry for all cells or one
/// per cell.
pub fn market_pvalues<T: Scalar>(
    data: &MarketDataset,
    model: &TestModel<T>,
    baselines: &[BaselineKind],
    config: &TestConfig<T>,
    cache: &GeometryCache<T>,
) -> Result<Vec<MarketPValue<T>>> {
    let nx = data.num_covariates();
    if baselines.len() != 1 && baselines.len() != nx {
        return Err(Error::Config(format!("need 1 or {nx} baselines, got {}", baselines.len())));
    }
    let mut out = Vec::new();
    let mut evaluators: Vec<(BaselineKind, ThetaEvaluator<'_, T>)> = Vec::new();
    for x in 0..nx {
        if data.n_x(x) == 0 {
            continue;
        }
        let kind = &baselines[if baselines.len() == 1 { 0 } else { x }];
        let pos = match evaluators.iter().position(|(k, _)| k == kind) {
            Some(p) => p,
            None => {
                evaluators.push((kind.clone(), ThetaEvaluator::new(data, model, kind.clone(), config, cache)?));
                evaluators.len() - 1
            }
        };
        let d = sup_pvalue(&evaluators[pos].1, Some(&[x]), T::one())?;
        out.push(MarketPValue {
            x,
            label: data.covariate_labels[x].clone(),
            n_x: data.n_x(x),
            p_value: d.sup_p,
            theta_best: d.theta_best,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    Bonferroni,
    Holm,
}

/// Decisions for one family of market nulls; vectors follow input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MarketCSResult<T> {
    pub method: Correction,
    pub alpha: T,
    pub p_values: Vec<T>,
    pub thresholds: Vec<T>,
    pub rejected: Vec<bool>,
    /// Positions with `p > α_x`: the confidence set of markets.
    pub retained: Vec<usize>,
}

impl<T: Scalar> MarketCSResult<T> {
    fn finish(method: Correction, alpha: T, p_values: &[T], thresholds: Vec<T>, rejected: Vec<bool>) -> Self {
        let retained = (0..p_values.len()).filter(|&i| !rejected[i]).collect();
        Self { method, alpha, p_values: p_values.to_vec(), thresholds, rejected, retained }
    }
}

/// Rejects `x` iff `p(x) ≤ α/|X|`.
pub fn bonferroni_select<T: Scalar>(pvals: &[T], alpha: T) -> Result<MarketCSResult<T>> {
    if pvals.is_empty() {
        return Err(Error::Config("no market p-values".into()));
    }
    let threshold = alpha / T::from_count(pvals.len());
    let rejected = pvals.iter().map(|&p| p <= threshold).collect();
    Ok(MarketCSResult::finish(Correction::Bonferroni, alpha, pvals, vec![threshold; pvals.len()], rejected))
}

/// Step-down Holm: the `k`-th smallest p-value faces `α/(|X|−k+1)`; ties
/// keep input order.
pub fn holm_select<T: Scalar>(pvals: &[T], alpha: T) -> Result<MarketCSResult<T>> {
    if pvals.is_empty() {
        return Err(Error::Config("no market p-values".into()));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut thresholds = vec![T::zero(); m];
    let mut rejected = vec![false; m];
    let mut stopped = false;
    for (k, &i) in order.iter().enumerate() {
        thresholds[i] = alpha / T::from_count(m - k);
        if !stopped && pvals[i] <= thresholds[i] {
            rejected[i] = true;
        } else {
            stopped = true;
        }
    }
    Ok(MarketCSResult::finish(Correction::Holm, alpha, pvals, thresholds, rejected))
}

fn decision(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "retain"
    }
}

/// One row per market: id, covariates, `n_x`, p-value and both decisions.
pub fn write_market_csv<T: Scalar, W: Write>(
    markets: &[MarketPValue<T>],
    covariates: &[Vec<T>],
    bonferroni: &MarketCSResult<T>,
    holm: &MarketCSResult<T>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["market", "covariates", "n_x", "p_value", "bonferroni", "holm"])?;
    for (i, m) in markets.iter().enumerate() {
        let cov = covariates
            .get(m.x)
            .map(|v| v.iter().map(|c| c.as_f64().to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        w.write_record([
            m.label.clone(),
            cov,
            m.n_x.to_string(),
            m.p_value.as_f64().to_string(),
            decision(bonferroni.rejected[i]).to_string(),
            decision(holm.rejected[i]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_traces() {
        assert_eq!(sequential_decision(&[0.01, 0.20], 0.05), (1, Some(1)));
        assert_eq!(sequential_decision(&[0.20, 0.01], 0.05), (0, Some(0)));
        assert_eq!(sequential_decision(&[0.01, 0.02, 0.01], 0.05), (3, None));
        assert_eq!(sequential_decision(&[0.05], 0.05), (1, None));
    }

    #[test]
    fn holm_trace() {
        let r = holm_select(&[0.001f64, 0.004, 0.9], 0.05).unwrap();
        assert_eq!(r.rejected, vec![true, true, false]);
        assert_eq!(r.retained, vec![2]);
        let expected = [0.05 / 3.0, 0.025, 0.05];
        for (t, e) in r.thresholds.iter().zip(expected) {
            assert!((t - e).abs() < 1e-15);
        }
        let r = holm_select(&[1.0; 5], 0.05).unwrap();
        assert!(r.rejected.iter().all(|&b| !b));
    }

    #[test]
    fn holm_stops_at_first_failure() {
        let r = holm_select(&[0.02, 0.001, 0.03], 0.05).unwrap();
        // Sorted: 0.001 ≤ 0.0167, 0.02 ≤ 0.025, 0.03 ≤ 0.05.
        assert_eq!(r.rejected, vec![true, true, true]);
        let r = holm_select(&[0.001, 0.3, 0.04], 0.05).unwrap();
        // 0.04 > 0.025 stops the procedure before 0.3.
        assert_eq!(r.rejected, vec![true, false, false]);
    }

    #[test]
    fn holm_ties_keep_input_order() {
        let r = holm_select(&[0.02f64, 0.02, 0.02], 0.05).unwrap();
        assert!((r.thresholds[0] - 0.05 / 3.0).abs() < 1e-15);
        assert!((r.thresholds[1] - 0.025).abs() < 1e-15);
        assert!((r.thresholds[2] - 0.05).abs() < 1e-15);
        assert_eq!(r.rejected, vec![false; 3]);
    }

    #[test]
    fn bonferroni_threshold() {
        let mut p = vec![0.5; 16];
        p[3] = 0.003;
        p[7] = 0.0032;
        let r = bonferroni_select(&p, 0.05).unwrap();
        assert_eq!(r.thresholds[0], 0.003125);
        assert!(r.rejected[3]);
        assert!(!r.rejected[7]);
        assert_eq!(r.retained.len(), 15);
        assert!(bonferroni_select::<f64>(&[], 0.05).is_err());
    }
}

//! Customer-count probabilities and the usual performance measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::QueueParams;
use crate::solver::StationaryDistribution;
use crate::state_space::StateSpace;

/// `p[n]` is the stationary probability of `n` customers in the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedDistribution {
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMeasures {
    /// Mean number in system.
    #[serde(rename = "L")]
    pub l: f64,
    /// Mean number waiting.
    #[serde(rename = "Lq")]
    pub lq: f64,
    /// Mean time in system.
    #[serde(rename = "W")]
    pub w: f64,
    /// Mean time waiting.
    #[serde(rename = "Wq")]
    pub wq: f64,
    pub p_block: f64,
    pub lambda_eff: f64,
    pub rho: f64,
}

impl PerformanceMeasures {
    pub fn mean_in_service(&self) -> f64 {
        self.l - self.lq
    }
}

/// Sums stage-level probabilities into `P_0 .. P_{c+K}`.
pub fn aggregate(
    pi: &StationaryDistribution,
    space: &StateSpace,
) -> Result<AggregatedDistribution> {
    aggregate_vector(&pi.pi, space)
}

pub fn aggregate_vector(pi: &[f64], space: &StateSpace) -> Result<AggregatedDistribution> {
    if pi.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            actual: pi.len(),
        });
    }
    let mut p = vec![0.0; space.params().capacity() + 1];
    for (prob, state) in pi.iter().zip(space.states()) {
        p[state.customers()] += prob;
    }
    Ok(AggregatedDistribution { p })
}

pub fn performance_measures(
    agg: &AggregatedDistribution,
    params: &QueueParams,
) -> Result<PerformanceMeasures> {
    let capacity = params.capacity();
    if agg.p.len() != capacity + 1 {
        return Err(Error::DimensionMismatch {
            expected: capacity + 1,
            actual: agg.p.len(),
        });
    }
    let c = params.c;
    let l: f64 = agg.p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let lq: f64 = agg
        .p
        .iter()
        .enumerate()
        .skip(c + 1)
        .map(|(n, p)| (n - c) as f64 * p)
        .sum();
    let p_block = agg.p[capacity];
    let lambda_eff = params.lambda * (1.0 - p_block);
    if lambda_eff.is_nan() || lambda_eff <= 0.0 {
        return Err(Error::ZeroThroughput);
    }
    Ok(PerformanceMeasures {
        l,
        lq,
        w: l / lambda_eff,
        wq: lq / lambda_eff,
        p_block,
        lambda_eff,
        rho: params.rho(),
    })
}

/// Erlang(r) density with stage rate `mu`: `mu (mu t)^{r-1} e^{-mu t} / (r-1)!`.
pub fn erlang_pdf(t: f64, r: usize, mu: f64) -> f64 {
    if t < 0.0 || r == 0 {
        return 0.0;
    }
    if t == 0.0 {
        return if r == 1 { mu } else { 0.0 };
    }
    let log_fact: f64 = (1..r).map(|k| (k as f64).ln()).sum();
    let log = mu.ln() + (r - 1) as f64 * (mu * t).ln() - mu * t - log_fact;
    log.exp()
}

/// Mean of the Erlang(r) service time, `r / mu`.
pub fn erlang_mean(r: usize, mu: f64) -> f64 {
    r as f64 / mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;
    use crate::solver::{stationary_distribution, Method, SolverConfig};

    fn solve(params: &QueueParams) -> (StateSpace, StationaryDistribution) {
        let space = StateSpace::enumerate(params).unwrap();
        let q = build_generator(params, &space).unwrap();
        let pi = stationary_distribution(&q, Method::Linear, &SolverConfig::default()).unwrap();
        (space, pi)
    }

    #[test]
    fn single_customer_states_aggregate() {
        let params = QueueParams::new(1.0, 1.0, 2, 2, 1).unwrap();
        let (space, pi) = solve(&params);
        let agg = aggregate(&pi, &space).unwrap();
        // (0,1,0) and (0,0,1) are ordinals 1 and 3
        assert_eq!(agg.p[1], pi.pi[1] + pi.pi[3]);
        assert_eq!(agg.p.len(), 4);
        assert!((agg.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mm1_two_places() {
        let params = QueueParams::new(1.0, 2.0, 1, 1, 1).unwrap();
        let (space, pi) = solve(&params);
        let agg = aggregate(&pi, &space).unwrap();
        for (got, want) in agg.p.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let m = performance_measures(&agg, &params).unwrap();
        assert!((m.l - 4.0 / 7.0).abs() < 1e-12);
        assert!((m.lq - 1.0 / 7.0).abs() < 1e-12);
        assert!((m.p_block - 1.0 / 7.0).abs() < 1e-12);
        assert!((m.w * m.lambda_eff - m.l).abs() < 1e-15);
        assert!((m.mean_in_service() - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned_vector_rejected() {
        let params = QueueParams::new(1.0, 1.0, 2, 2, 1).unwrap();
        let space = StateSpace::enumerate(&params).unwrap();
        assert!(aggregate_vector(&[1.0], &space).is_err());
        let agg = AggregatedDistribution { p: vec![1.0] };
        assert!(performance_measures(&agg, &params).is_err());
    }

    #[test]
    fn full_system_has_no_throughput() {
        let params = QueueParams::new(1.0, 1.0, 1, 1, 0).unwrap();
        let agg = AggregatedDistribution { p: vec![0.0, 1.0] };
        assert_eq!(
            performance_measures(&agg, &params),
            Err(Error::ZeroThroughput)
        );
    }

    #[test]
    fn pdf_values() {
        assert_eq!(erlang_pdf(0.0, 1, 2.0), 2.0);
        assert_eq!(erlang_pdf(0.0, 3, 2.0), 0.0);
        assert!((erlang_pdf(1.0, 2, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(erlang_pdf(-1.0, 2, 1.0), 0.0);
        assert_eq!(erlang_mean(4, 2.0), 2.0);
    }

    #[test]
    fn pdf_integrates_to_one() {
        // composite Simpson on [0, 50/mu]
        for (r, mu) in [(1, 1.0), (2, 1.0), (4, 2.0), (7, 0.5)] {
            let upper = 50.0 / mu;
            let n = 20_000;
            let h = upper / n as f64;
            let mut s = erlang_pdf(0.0, r, mu) + erlang_pdf(upper, r, mu);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * erlang_pdf(i as f64 * h, r, mu);
            }
            let integral = s * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-8, "r={r} mu={mu}: {integral}");
        }
    }
}

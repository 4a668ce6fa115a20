//! Stationary distribution of the generator by three independent routes.
//!
//! The matrix-exponential route forms `P = exp(hQ)` and squares it until the
//! rows stop changing; the converged matrix has rank one and each of its
//! rows is the stationary vector. A direct linear solve of `pi Q = 0` and
//! power iteration on the uniformized chain serve as cross-checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::generator::GeneratorMatrix;

/// Negative entries of `exp(hQ)` or of a solved vector above this magnitude
/// are treated as a numerical failure rather than roundoff.
pub const NEGATIVE_CLAMP: f64 = 1e-13;

/// Target truncation error of the series part of `exp(hQ)`.
const SERIES_TOLERANCE: f64 = 1e-14;

const UNIFORMIZATION_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Squaring,
    Linear,
    #[serde(rename = "uniform")]
    Uniformization,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Squaring, Method::Linear, Method::Uniformization];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Squaring => "squaring",
            Method::Linear => "linear",
            Method::Uniformization => "uniform",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squaring" => Ok(Method::Squaring),
            "linear" => Ok(Method::Linear),
            "uniform" | "uniformization" => Ok(Method::Uniformization),
            other => Err(Error::InvalidParams(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Convergence threshold on the max-abs difference of successive iterates.
    pub delta: f64,
    /// Largest accepted `||pi Q||_inf`.
    pub residual_tol: f64,
    pub max_squarings: usize,
    pub max_power_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 1e-12,
            residual_tol: 1e-9,
            max_squarings: 60,
            max_power_iterations: 500_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParams("delta must be positive".into()));
        }
        if self.residual_tol.is_nan() || self.residual_tol <= 0.0 {
            return Err(Error::InvalidParams("residual_tol must be positive".into()));
        }
        if self.max_squarings == 0 || self.max_power_iterations == 0 {
            return Err(Error::InvalidParams(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub method: Method,
    pub iterations: usize,
    /// `||pi Q||_inf` (or `||pi P - pi||_inf` when only `P` was available).
    pub residual: f64,
}

/// `exp(hQ)` together with bookkeeping about how it was obtained.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub matrix: DenseMatrix,
    pub step: f64,
    pub series_terms: usize,
    pub scaling_squarings: usize,
    /// Largest correction applied when clamping negatives and renormalising rows.
    pub adjustment: f64,
}

/// The step used when none is given: `1 / (1.05 max |q_ii|)`.
pub fn default_step(q: &GeneratorMatrix) -> f64 {
    let rate = q.max_exit_rate();
    if rate > 0.0 {
        1.0 / (UNIFORMIZATION_FACTOR * rate)
    } else {
        1.0
    }
}

/// Computes `exp(hQ)` by scaling and squaring.
///
/// With `d = t max|q_ii|` for the scaled step `t = h / 2^s`, the matrix
/// `B = tQ + dI` is nonnegative and `exp(tQ) = e^{-d} exp(B)`, so the Taylor
/// series of `exp(B)` has no cancellation. `s` is chosen so that `d <= 1/2`.
pub fn transition_matrix(q: &GeneratorMatrix, h: f64) -> Result<TransitionMatrix> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParams(format!(
            "time step must be positive, got {h}"
        )));
    }
    let n = q.dim();
    let rate = q.max_exit_rate();
    if rate == 0.0 {
        return Ok(TransitionMatrix {
            matrix: DenseMatrix::identity(n),
            step: h,
            series_terms: 0,
            scaling_squarings: 0,
            adjustment: 0.0,
        });
    }

    let mut scaling_squarings = 0usize;
    let mut t = h;
    while t * rate > 0.5 {
        t *= 0.5;
        scaling_squarings += 1;
    }
    let d = t * rate;
    if !d.is_finite() {
        return Err(Error::NonFinite("matrix exponential scaling"));
    }

    // B = tQ + dI in CSR-like rows.
    let shifted: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            q.row(i)
                .map(|(j, v)| (j, if i == j { t * v + d } else { t * v }))
                .filter(|&(_, v)| v != 0.0)
                .collect()
        })
        .collect();

    let tolerance = (SERIES_TOLERANCE / (1u64 << scaling_squarings.min(40)) as f64).max(1e-17);
    let mut sum = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    let mut next = DenseMatrix::zeros(n);
    let mut series_terms = 0usize;
    for k in 1.. {
        // next = term * B / k
        for i in 0..n {
            let out = next.row_mut(i);
            out.fill(0.0);
            for (j, &tij) in term.row(i).iter().enumerate() {
                if tij == 0.0 {
                    continue;
                }
                for &(col, b) in &shifted[j] {
                    out[col] += tij * b;
                }
            }
            let inv_k = 1.0 / k as f64;
            out.iter_mut().for_each(|v| *v *= inv_k);
        }
        std::mem::swap(&mut term, &mut next);
        for i in 0..n {
            for (s, v) in sum.row_mut(i).iter_mut().zip(term.row(i)) {
                *s += v;
            }
        }
        series_terms = k;
        // ||B||_inf = d, so the tail past term k is at most
        // d^{k+1}/(k+1)! / (1 - d/(k+2)); scaled by e^{-d}.
        let mut bound = (-d).exp();
        for m in 1..=k + 1 {
            bound *= d / m as f64;
        }
        bound /= 1.0 - d / (k + 2) as f64;
        if bound <= tolerance {
            break;
        }
    }

    let scale = (-d).exp();
    let mut matrix = sum;
    for i in 0..n {
        matrix.row_mut(i).iter_mut().for_each(|v| *v *= scale);
    }
    for _ in 0..scaling_squarings {
        matrix = matrix.square();
    }
    if !matrix.is_finite() {
        return Err(Error::NonFinite("matrix exponential"));
    }
    let adjustment = clamp_and_normalize_rows(&mut matrix)?;
    Ok(TransitionMatrix {
        matrix,
        step: h,
        series_terms,
        scaling_squarings,
        adjustment,
    })
}

fn clamp_and_normalize_rows(m: &mut DenseMatrix) -> Result<f64> {
    let mut adjustment = 0.0f64;
    for i in 0..m.dim() {
        let row = m.row_mut(i);
        for (j, v) in row.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -NEGATIVE_CLAMP {
                    return Err(Error::NegativeProbability {
                        row: i,
                        col: j,
                        value: *v,
                    });
                }
                adjustment = adjustment.max(-*v);
                *v = 0.0;
            }
        }
        let sum: f64 = row.iter().sum();
        adjustment = adjustment.max((sum - 1.0).abs());
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(adjustment)
}

/// Clamps roundoff-level negatives to zero and rescales to unit mass.
fn finalize(mut pi: Vec<f64>) -> Result<Vec<f64>> {
    for (j, v) in pi.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite("stationary vector"));
        }
        if *v < 0.0 {
            if *v < -NEGATIVE_CLAMP {
                return Err(Error::NegativeProbability {
                    row: 0,
                    col: j,
                    value: *v,
                });
            }
            *v = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

/// Iteratively squares the stochastic matrix `p` until successive iterates
/// differ by at most `config.delta` elementwise, then averages the rows.
pub fn steady_state_squaring(
    p: &DenseMatrix,
    config: &SolverConfig,
) -> Result<StationaryDistribution> {
    config.validate()?;
    let n = p.dim();
    if n == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    for i in 0..n {
        let row = p.row(i);
        if row.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::InvalidParams(format!(
                "row {i} of the transition matrix has a negative or non-finite entry"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "row {i} of the transition matrix sums to {sum}"
            )));
        }
    }
    check_ergodic_dense(p)?;

    let mut old = p.clone();
    let mut new = p.square();
    let mut iterations = 1;
    let mut diff = new.max_abs_diff(&old);
    while diff > config.delta {
        if iterations >= config.max_squarings {
            return Err(Error::NotConverged {
                method: "iterative squaring",
                iterations,
                last_diff: diff,
            });
        }
        old = new;
        new = old.square();
        iterations += 1;
        diff = new.max_abs_diff(&old);
        if !diff.is_finite() {
            return Err(Error::NonFinite("iterative squaring"));
        }
    }

    let pi = finalize(new.column_means())?;
    let mut residual = 0.0f64;
    for j in 0..n {
        let pj: f64 = (0..n).map(|i| pi[i] * p[(i, j)]).sum();
        residual = residual.max((pj - pi[j]).abs());
    }
    Ok(StationaryDistribution {
        pi,
        method: Method::Squaring,
        iterations,
        residual,
    })
}

/// Solves `pi Q = 0, sum(pi) = 1` directly: the last equation of `Q^T pi = 0`
/// is replaced by the normalisation row.
pub fn steady_state_linear(q: &GeneratorMatrix) -> Result<StationaryDistribution> {
    let n = q.dim();
    if n == 0 {
        return Err(Error::InvalidParams("empty generator".into()));
    }
    check_irreducible(&q.adjacency())?;
    let mut a = DenseMatrix::zeros(n);
    for (i, j, v) in q.entries() {
        a[(j, i)] = v;
    }
    a.row_mut(n - 1).fill(1.0);
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = finalize(a.solve(&b)?)?;
    let residual = residual(q, &pi);
    Ok(StationaryDistribution {
        pi,
        method: Method::Linear,
        iterations: 1,
        residual,
    })
}

/// Power iteration on `P = I + Q / Lambda` with `Lambda = 1.05 max |q_ii|`,
/// started from the uniform vector.
pub fn steady_state_uniformization(
    q: &GeneratorMatrix,
    config: &SolverConfig,
) -> Result<StationaryDistribution> {
    config.validate()?;
    let n = q.dim();
    if n == 0 {
        return Err(Error::InvalidParams("empty generator".into()));
    }
    check_irreducible(&q.adjacency())?;
    if n == 1 {
        return Ok(StationaryDistribution {
            pi: vec![1.0],
            method: Method::Uniformization,
            iterations: 0,
            residual: 0.0,
        });
    }
    let lambda = UNIFORMIZATION_FACTOR * q.max_exit_rate();
    let mut x = vec![1.0 / n as f64; n];
    let mut flow = vec![0.0; n];
    let mut iterations = 0;
    loop {
        q.left_multiply(&x, &mut flow);
        let mut diff = 0.0f64;
        let mut total = 0.0;
        for (xi, fi) in x.iter_mut().zip(&flow) {
            let step = fi / lambda;
            *xi += step;
            diff = diff.max(step.abs());
            total += *xi;
        }
        x.iter_mut().for_each(|v| *v /= total);
        iterations += 1;
        if !diff.is_finite() {
            return Err(Error::NonFinite("uniformization"));
        }
        if diff <= config.delta {
            break;
        }
        if iterations >= config.max_power_iterations {
            return Err(Error::NotConverged {
                method: "uniformization",
                iterations,
                last_diff: diff,
            });
        }
    }
    let pi = finalize(x)?;
    let residual = residual(q, &pi);
    Ok(StationaryDistribution {
        pi,
        method: Method::Uniformization,
        iterations,
        residual,
    })
}

/// `||pi Q||_inf`.
pub fn residual(q: &GeneratorMatrix, pi: &[f64]) -> f64 {
    let mut out = vec![0.0; q.dim()];
    q.left_multiply(pi, &mut out);
    out.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves with the chosen method, recomputes the residual against `q` and
/// enforces `config.residual_tol`.
pub fn stationary_distribution(
    q: &GeneratorMatrix,
    method: Method,
    config: &SolverConfig,
) -> Result<StationaryDistribution> {
    config.validate()?;
    let mut dist = match method {
        Method::Squaring => {
            let p = transition_matrix(q, default_step(q))?;
            steady_state_squaring(&p.matrix, config)?
        }
        Method::Linear => steady_state_linear(q)?,
        Method::Uniformization => steady_state_uniformization(q, config)?,
    };
    dist.residual = residual(q, &dist.pi);
    if dist.residual > config.residual_tol {
        return Err(Error::Residual {
            residual: dist.residual,
            tolerance: config.residual_tol,
        });
    }
    Ok(dist)
}

fn reaches_all<F, I>(n: usize, successors: F) -> bool
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in successors(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

fn check_irreducible(adj: &[Vec<usize>]) -> Result<()> {
    let n = adj.len();
    let mut reverse = vec![Vec::new(); n];
    for (u, targets) in adj.iter().enumerate() {
        for &v in targets {
            reverse[v].push(u);
        }
    }
    if !reaches_all(n, |u| adj[u].iter().copied())
        || !reaches_all(n, |u| reverse[u].iter().copied())
    {
        return Err(Error::NotErgodic(
            "transition graph is not strongly connected",
        ));
    }
    Ok(())
}

/// Irreducibility and aperiodicity of the positive pattern of `p`.
fn check_ergodic_dense(p: &DenseMatrix) -> Result<()> {
    let n = p.dim();
    let forward = |u: usize| {
        p.row(u)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(j, _)| j)
    };
    let backward = |v: usize| (0..n).filter(move |&u| p[(u, v)] > 0.0);
    if !reaches_all(n, forward) || !reaches_all(n, backward) {
        return Err(Error::NotErgodic("transition matrix is reducible"));
    }
    if (0..n).any(|i| p[(i, i)] > 0.0) {
        return Ok(());
    }
    // Period = gcd over edges u -> v of level(u) + 1 - level(v) with BFS levels.
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in forward(u) {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0usize;
    for u in 0..n {
        for v in forward(u) {
            let gap = (level[u] + 1).abs_diff(level[v]);
            period = gcd(period, gap);
        }
        if period == 1 {
            return Ok(());
        }
    }
    Err(Error::NotErgodic("transition matrix is periodic"))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;
    use crate::params::QueueParams;
    use crate::state_space::StateSpace;

    fn generator(lambda: f64, mu: f64, r: usize, c: usize, k: usize) -> GeneratorMatrix {
        let p = QueueParams::new(lambda, mu, r, c, k).unwrap();
        build_generator(&p, &StateSpace::enumerate(&p).unwrap()).unwrap()
    }

    #[test]
    fn exp_of_zero_generator() {
        let q = GeneratorMatrix::from_off_diagonal(1, vec![]).unwrap();
        let p = transition_matrix(&q, 3.7).unwrap();
        assert_eq!(p.matrix.to_rows(), vec![vec![1.0]]);
    }

    #[test]
    fn exp_two_state_closed_form() {
        for (a, b, h) in [(1.0, 2.0, 0.1), (0.3, 5.0, 2.0), (4.0, 4.0, 10.0)] {
            let q = GeneratorMatrix::from_off_diagonal(2, vec![(0, 1, a), (1, 0, b)]).unwrap();
            let p = transition_matrix(&q, h).unwrap().matrix;
            let e = (-(a + b) * h).exp();
            let s = a + b;
            let want = [
                [(b + a * e) / s, (a - a * e) / s],
                [(b - b * e) / s, (a + b * e) / s],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p[(i, j)] - want[i][j]).abs() < 1e-14, "{a} {b} {h}");
                }
            }
        }
    }

    #[test]
    fn exp_is_stochastic() {
        let q = generator(1.0, 1.0, 2, 2, 1);
        let p = transition_matrix(&q, 0.1).unwrap();
        assert!(p.matrix.max_row_sum_deviation(1.0) <= 1e-12);
        assert!(p.adjustment <= 1e-12);
    }

    #[test]
    fn identity_rejected() {
        let err = steady_state_squaring(&DenseMatrix::identity(3), &SolverConfig::default());
        assert!(matches!(err, Err(Error::NotErgodic(_))));
    }

    #[test]
    fn periodic_rejected() {
        let p = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            steady_state_squaring(&p, &SolverConfig::default()),
            Err(Error::NotErgodic("transition matrix is periodic"))
        ));
    }

    #[test]
    fn aperiodic_without_self_loops_accepted() {
        // cycles of length 2 and 3 through state 0
        let p = DenseMatrix::from_rows(&[
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let d = steady_state_squaring(&p, &SolverConfig::default()).unwrap();
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn squaring_cap_reported() {
        let q = generator(1.0, 1.0, 2, 3, 4);
        let p = transition_matrix(&q, default_step(&q)).unwrap();
        let config = SolverConfig {
            max_squarings: 2,
            ..SolverConfig::default()
        };
        match steady_state_squaring(&p.matrix, &config) {
            Err(Error::NotConverged {
                iterations,
                last_diff,
                ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(last_diff > config.delta);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn reducible_generator_rejected() {
        let q = GeneratorMatrix::from_off_diagonal(3, vec![(0, 1, 1.0), (1, 0, 1.0), (2, 0, 1.0)])
            .unwrap();
        assert!(matches!(steady_state_linear(&q), Err(Error::NotErgodic(_))));
        assert!(matches!(
            steady_state_uniformization(&q, &SolverConfig::default()),
            Err(Error::NotErgodic(_))
        ));
    }

    #[test]
    fn mm11_symmetric() {
        let q = generator(2.0, 2.0, 1, 1, 0);
        for m in Method::ALL {
            let d = stationary_distribution(&q, m, &SolverConfig::default()).unwrap();
            assert!(
                (d.pi[0] - 0.5).abs() < 1e-12 && (d.pi[1] - 0.5).abs() < 1e-12,
                "{m}"
            );
        }
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("gauss".parse::<Method>().is_err());
    }
}

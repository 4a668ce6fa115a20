//! Exact steady-state analysis of M/E_r/c/K queues.
//!
//! Poisson arrivals at rate `lambda` are served FCFS by `c` identical
//! channels whose service time is Erlang(r): `r` exponential stages with rate
//! `mu` each. At most `K` customers wait; further arrivals balk.
//!
//! The pipeline enumerates the phase-occupancy states ([`StateSpace`]),
//! builds the sparse generator ([`build_generator`]), solves for the
//! stationary distribution ([`stationary_distribution`]) and aggregates it
//! into customer-count probabilities and performance measures.
//!
//! ```
//! use erlang_queue::{Method, QueueParams, SolverConfig, solve};
//!
//! let params = QueueParams::from_rho(0.5, 4, 2, 1.0, 1).unwrap();
//! let solution = solve(&params, Method::Squaring, &SolverConfig::default()).unwrap();
//! assert!((solution.measures.l - 1.958).abs() < 1e-3);
//! ```

pub mod dense;
pub mod error;
pub mod generator;
pub mod measures;
pub mod params;
pub mod sim;
pub mod solver;
pub mod state_space;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use generator::{build_generator, GeneratorMatrix};
pub use measures::{
    aggregate, aggregate_vector, erlang_mean, erlang_pdf, performance_measures,
    AggregatedDistribution, PerformanceMeasures,
};
pub use params::QueueParams;
pub use sim::{sample_service_time, simulate, SimConfig, SimResult};
pub use solver::{
    default_step, stationary_distribution, steady_state_linear, steady_state_squaring,
    steady_state_uniformization, transition_matrix, Method, SolverConfig, StationaryDistribution,
    TransitionMatrix,
};
pub use state_space::{state_count, state_count_single_waiting_place, StateSpace, StateVector};

/// Everything produced by one end-to-end solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub space: StateSpace,
    pub generator: GeneratorMatrix,
    pub stationary: StationaryDistribution,
    pub distribution: AggregatedDistribution,
    pub measures: PerformanceMeasures,
}

/// Enumerates states, builds the generator, solves with `method` and derives
/// the performance measures.
pub fn solve(params: &QueueParams, method: Method, config: &SolverConfig) -> Result<Solution> {
    let space = StateSpace::enumerate(params)?;
    let generator = build_generator(params, &space)?;
    let stationary = stationary_distribution(&generator, method, config)?;
    let distribution = aggregate(&stationary, &space)?;
    let measures = performance_measures(&distribution, params)?;
    Ok(Solution {
        space,
        generator,
        stationary,
        distribution,
        measures,
    })
}

/// Parameters with arrival rate `lambda = rho * mu * c / r`.
pub fn params_from_rho(
    rho: f64,
    c: usize,
    r: usize,
    mu: f64,
    max_queue: usize,
) -> Result<QueueParams> {
    QueueParams::from_rho(rho, c, r, mu, max_queue)
}

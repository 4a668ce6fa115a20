//! Independent oracles for the state space, generator and solvers.

use std::collections::{BTreeSet, VecDeque};

use erlang_queue::*;
use proptest::prelude::*;

/// M/M/c with waiting room `k`: p_n proportional to a^n/n! up to c, then
/// geometric with ratio a/c.
fn mmck_distribution(lambda: f64, mu: f64, c: usize, k: usize) -> Vec<f64> {
    let a = lambda / mu;
    let mut w = vec![1.0f64];
    for n in 1..=c + k {
        let prev = w[n - 1];
        w.push(prev * a / n.min(c) as f64);
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Every vector with s0 <= K and stage counts <= c, filtered by the
/// state invariants.
fn brute_force_states(r: usize, c: usize, k: usize) -> BTreeSet<StateVector> {
    let mut out = BTreeSet::new();
    let combos = (c + 1).pow(r as u32);
    for s0 in 0..=k {
        for code in 0..combos {
            let mut phases = Vec::with_capacity(r);
            let mut x = code;
            for _ in 0..r {
                phases.push(x % (c + 1));
                x /= c + 1;
            }
            let busy: usize = phases.iter().sum();
            if busy <= c && (s0 == 0 || busy == c) {
                out.insert(StateVector::new(s0, phases));
            }
        }
    }
    out
}

fn generator_for(params: &QueueParams) -> (StateSpace, GeneratorMatrix) {
    let space = StateSpace::enumerate(params).unwrap();
    let q = build_generator(params, &space).unwrap();
    (space, q)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn enumeration_matches_brute_force() {
    for r in 1..=4 {
        for c in 1..=6 {
            for k in 0..=4 {
                let params = QueueParams::new(1.0, 1.0, r, c, k).unwrap();
                let space = StateSpace::enumerate(&params).unwrap();
                let enumerated: BTreeSet<_> = space.states().iter().cloned().collect();
                let oracle = brute_force_states(r, c, k);
                assert_eq!(enumerated.len(), space.len(), "duplicates for {r} {c} {k}");
                assert_eq!(enumerated, oracle, "r={r} c={c} K={k}");
                assert_eq!(state_count(r, c, k).unwrap() as usize, oracle.len());
            }
        }
    }
}

#[test]
fn worked_example_counts() {
    assert_eq!(brute_force_states(3, 2, 2).len(), 22);
    assert_eq!(brute_force_states(2, 2, 1).len(), 9);
}

#[test]
fn exponential_service_matches_closed_form() {
    for &(c, k, rho) in &[
        (1, 1, 0.5),
        (1, 5, 0.9),
        (2, 2, 0.7),
        (3, 0, 1.1),
        (4, 6, 0.95),
        (8, 3, 0.3),
    ] {
        let params = QueueParams::from_rho(rho, c, 1, 1.0, k).unwrap();
        let (space, q) = generator_for(&params);
        let oracle = mmck_distribution(params.lambda, params.mu, c, k);
        for method in Method::ALL {
            let pi = stationary_distribution(&q, method, &SolverConfig::default()).unwrap();
            let agg = aggregate(&pi, &space).unwrap();
            assert!(max_diff(&agg.p, &oracle) < 1e-10, "{method} c={c} K={k}");
        }
    }
}

#[test]
fn mm1_two_places_every_method() {
    let params = QueueParams::new(1.0, 2.0, 1, 1, 1).unwrap();
    let (space, q) = generator_for(&params);
    for method in Method::ALL {
        let pi = stationary_distribution(&q, method, &SolverConfig::default()).unwrap();
        let agg = aggregate(&pi, &space).unwrap();
        assert!(
            max_diff(&agg.p, &[4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) < 1e-12,
            "{method}"
        );
    }
}

#[test]
fn erlang_b_for_loss_systems() {
    // K = 0 with exponential service: blocking is Erlang-B.
    for &(c, a) in &[(1usize, 0.5f64), (3, 2.0), (6, 5.5)] {
        let mut b = 1.0;
        for n in 1..=c {
            b = a * b / (n as f64 + a * b);
        }
        let params = QueueParams::new(a, 1.0, 1, c, 0).unwrap();
        let sol = solve(&params, Method::Squaring, &SolverConfig::default()).unwrap();
        assert!((sol.measures.p_block - b).abs() < 1e-12);
    }
}

#[test]
fn solvers_agree_on_small_grid() {
    for r in 1..=3 {
        for c in 1..=3 {
            for k in [0, 2] {
                for rho in [0.3, 1.2] {
                    let params = QueueParams::from_rho(rho, c, r, 1.0, k).unwrap();
                    let (_, q) = generator_for(&params);
                    let config = SolverConfig::default();
                    let sols: Vec<_> = Method::ALL
                        .iter()
                        .map(|&m| stationary_distribution(&q, m, &config).unwrap())
                        .collect();
                    for a in &sols {
                        assert!(a.residual <= 1e-9);
                        for b in &sols {
                            assert!(max_diff(&a.pi, &b.pi) <= 1e-10, "{r} {c} {k} {rho}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn step_size_does_not_change_the_limit() {
    let params = QueueParams::from_rho(0.8, 3, 3, 1.0, 2).unwrap();
    let (_, q) = generator_for(&params);
    let h = default_step(&q);
    let config = SolverConfig::default();
    let a = steady_state_squaring(&transition_matrix(&q, h).unwrap().matrix, &config).unwrap();
    let b =
        steady_state_squaring(&transition_matrix(&q, 2.0 * h).unwrap().matrix, &config).unwrap();
    let c =
        steady_state_squaring(&transition_matrix(&q, 37.0 * h).unwrap().matrix, &config).unwrap();
    assert!(max_diff(&a.pi, &b.pi) <= 1e-10);
    assert!(max_diff(&a.pi, &c.pi) <= 1e-10);
}

#[test]
fn chain_is_irreducible() {
    for &(r, c, k) in &[(1, 1, 0), (2, 2, 1), (3, 4, 3), (4, 5, 2), (2, 8, 10)] {
        let params = QueueParams::new(0.9, 1.1, r, c, k).unwrap();
        let (_, q) = generator_for(&params);
        let adj = q.adjacency();
        let n = adj.len();
        let reach = |edges: &Vec<Vec<usize>>| {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut queue = VecDeque::from([0]);
            while let Some(u) = queue.pop_front() {
                for &v in &edges[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        let mut reverse = vec![Vec::new(); n];
        for (u, vs) in adj.iter().enumerate() {
            for &v in vs {
                reverse[v].push(u);
            }
        }
        assert!(reach(&adj) && reach(&reverse), "{r} {c} {k}");
    }
}

#[test]
fn worked_example_rows_carry_full_completion_rate() {
    let params = QueueParams::new(1.0, 1.0, 2, 2, 1).unwrap();
    let (space, q) = generator_for(&params);
    for ordinal in [2, 5, 7, 8] {
        let state = space.get(ordinal).unwrap();
        let last = *state.phases.last().unwrap();
        let completions: f64 = q
            .row(ordinal)
            .filter(|&(j, _)| j != ordinal)
            .filter(|&(j, _)| {
                let t = space.get(j).unwrap();
                t.phases.last() < state.phases.last() && t.customers() < state.customers()
            })
            .map(|(_, v)| v)
            .sum();
        assert_eq!(completions, last as f64 * params.mu, "state {state}");
    }
}

#[test]
fn table_spot_values() {
    let cases = [
        (2, 4, 1, 0.5, 1.958),
        (3, 6, 10, 0.9, 7.730),
        (2, 4, 1, 0.1, 0.400),
    ];
    for (r, c, k, rho, want) in cases {
        let params = QueueParams::from_rho(rho, c, r, 1.0, k).unwrap();
        let sol = solve(&params, Method::Squaring, &SolverConfig::default()).unwrap();
        assert!(
            (sol.measures.l - want).abs() < 1e-3,
            "{r} {c} {k} {rho}: {}",
            sol.measures.l
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_invariants(r in 1usize..=5, c in 1usize..=6, k in 0usize..=6) {
        let params = QueueParams::new(1.0, 1.0, r, c, k).unwrap();
        let space = StateSpace::enumerate(&params).unwrap();
        prop_assert_eq!(space.len() as u64, state_count(r, c, k).unwrap());
        for (i, s) in space.states().iter().enumerate() {
            prop_assert!(s.is_valid(r, c, k));
            prop_assert_eq!(space.index_of(s), Some(i));
        }
    }

    #[test]
    fn generator_rows_balance(
        r in 1usize..=4, c in 1usize..=5, k in 0usize..=4,
        lambda in 0.01f64..20.0, mu in 0.01f64..20.0,
    ) {
        let params = QueueParams::new(lambda, mu, r, c, k).unwrap();
        let (_, q) = generator_for(&params);
        prop_assert!(q.max_row_sum() <= 1e-12 * q.max_exit_rate());
        for (i, j, v) in q.entries() {
            let ok = if i == j { v <= 0.0 } else { v > 0.0 };
            prop_assert!(ok, "entry ({}, {}) = {}", i, j, v);
        }
    }

    #[test]
    fn common_rate_scaling_leaves_pi_unchanged(
        r in 1usize..=3, c in 1usize..=4, k in 0usize..=3,
        rho in 0.05f64..1.5, factor in 0.01f64..100.0,
    ) {
        let base = QueueParams::from_rho(rho, c, r, 1.0, k).unwrap();
        let scaled = base.scaled(factor).unwrap();
        let config = SolverConfig::default();
        let a = solve(&base, Method::Linear, &config).unwrap();
        let b = solve(&scaled, Method::Linear, &config).unwrap();
        prop_assert!(max_diff(&a.stationary.pi, &b.stationary.pi) <= 1e-12);
    }

    #[test]
    fn measures_are_consistent(
        r in 1usize..=3, c in 1usize..=4, k in 0usize..=4, rho in 0.05f64..2.0,
    ) {
        let params = QueueParams::from_rho(rho, c, r, 1.0, k).unwrap();
        let sol = solve(&params, Method::Linear, &SolverConfig::default()).unwrap();
        let m = sol.measures;
        let mass: f64 = sol.distribution.p.iter().sum();
        let pi_mass: f64 = sol.stationary.pi.iter().sum();
        prop_assert!((mass - pi_mass).abs() <= 1e-14);
        prop_assert!((mass - 1.0).abs() <= 1e-12);
        prop_assert!((m.w * m.lambda_eff - m.l).abs() <= 1e-12 * m.l.max(1.0));
        prop_assert!((m.wq * m.lambda_eff - m.lq).abs() <= 1e-12 * m.lq.max(1.0));
        prop_assert!((0.0..=1.0).contains(&m.p_block));
        prop_assert!(m.lq <= m.l && m.l <= (c + k) as f64);
        prop_assert!(m.mean_in_service() <= c as f64 + 1e-12);
    }

    #[test]
    fn mean_size_grows_with_waiting_room(r in 1usize..=3, c in 1usize..=4, rho in 0.1f64..1.2) {
        let config = SolverConfig::default();
        let mut last = 0.0;
        for k in 0..=5 {
            let params = QueueParams::from_rho(rho, c, r, 1.0, k).unwrap();
            let l = solve(&params, Method::Linear, &config).unwrap().measures.l;
            prop_assert!(l >= last - 1e-12);
            last = l;
        }
    }
}

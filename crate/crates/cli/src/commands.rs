use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use erlang_queue::{simulate, solve, Method, QueueParams, SimConfig, SolverConfig, StateSpace};

use crate::args::{
    BenchArgs, Cli, Command, Format, RateArgs, ShapeArgs, SimulateArgs, SolveArgs, SolverArgs,
    StatesArgs, TableArgs,
};
use crate::record::{BenchRow, OutputRecord, SimulationRecord, Table, TableCell};
use crate::{classify, CliError};

/// Traffic densities of the published tables.
pub const DEFAULT_RHOS: [f64; 9] = [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99];
pub const DEFAULT_TABLE_KS: [usize; 5] = [1, 3, 5, 7, 10];
pub const DEFAULT_BENCH_KS: [usize; 5] = [1, 3, 6, 8, 10];

/// Largest accepted pairwise gap for `--check-all`.
pub const AGREEMENT_TOL: f64 = 1e-10;

/// What a command produced. `failed` marks partial numerical failures
/// (e.g. a table cell) that should still yield exit code 2.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub body: String,
    pub out: Option<PathBuf>,
    pub failed: bool,
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Table(args) => run_table(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Bench(args) => run_bench(args),
        Command::States(args) => run_states(args),
    }
}

pub fn solver_config(args: &SolverArgs) -> Result<SolverConfig, CliError> {
    let config = SolverConfig {
        delta: args.delta,
        ..SolverConfig::default()
    };
    config.validate().map_err(classify)?;
    Ok(config)
}

pub fn params_from(shape: &ShapeArgs, rates: &RateArgs) -> Result<QueueParams, CliError> {
    let result = match (rates.lambda, rates.rho) {
        (Some(lambda), None) => QueueParams::new(lambda, rates.mu, shape.r, shape.c, shape.k),
        (None, Some(rho)) => QueueParams::from_rho(rho, shape.c, shape.r, rates.mu, shape.k),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --lambda and --rho is required".into(),
            ))
        }
    };
    result.map_err(classify)
}

/// Runs the full pipeline for one instance.
pub fn solve_record(
    params: &QueueParams,
    method: Method,
    config: &SolverConfig,
    check_all: bool,
) -> Result<OutputRecord, CliError> {
    let start = Instant::now();
    let solution = solve(params, method, config).map_err(classify)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let solver_agreement = if check_all {
        let mut worst = 0.0f64;
        let mut vectors = vec![solution.stationary.pi.clone()];
        for other in Method::ALL.into_iter().filter(|&m| m != method) {
            let pi = erlang_queue::stationary_distribution(&solution.generator, other, config)?.pi;
            vectors.push(pi);
        }
        for a in &vectors {
            for b in &vectors {
                let gap = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(gap);
            }
        }
        if worst > AGREEMENT_TOL {
            return Err(CliError::Numerical(erlang_queue::Error::NotConverged {
                method: "cross-solver agreement",
                iterations: Method::ALL.len(),
                last_diff: worst,
            }));
        }
        Some(worst)
    } else {
        None
    };

    Ok(OutputRecord {
        params: *params,
        rho: params.rho(),
        method,
        n_states: solution.space.len(),
        p_n: solution.distribution.p,
        measures: solution.measures,
        residual: solution.stationary.residual,
        iterations: solution.stationary.iterations,
        wall_time_s,
        solver_agreement,
    })
}

pub fn record_csv(record: &OutputRecord) -> String {
    let p = &record.params;
    let m = &record.measures;
    let mut out = String::from("field,value\n");
    let mut row = |k: &str, v: String| writeln!(out, "{k},{v}").unwrap();
    row("r", p.r.to_string());
    row("c", p.c.to_string());
    row("K", p.max_queue.to_string());
    row("lambda", p.lambda.to_string());
    row("mu", p.mu.to_string());
    row("rho", record.rho.to_string());
    row("method", record.method.to_string());
    row("N", record.n_states.to_string());
    row("L", m.l.to_string());
    row("Lq", m.lq.to_string());
    row("W", m.w.to_string());
    row("Wq", m.wq.to_string());
    row("p_block", m.p_block.to_string());
    row("lambda_eff", m.lambda_eff.to_string());
    row("residual", record.residual.to_string());
    row("iterations", record.iterations.to_string());
    row("wall_time_s", record.wall_time_s.to_string());
    if let Some(gap) = record.solver_agreement {
        row("solver_agreement", gap.to_string());
    }
    for (n, v) in record.p_n.iter().enumerate() {
        row(&format!("P_{n}"), v.to_string());
    }
    out
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

fn run_solve(args: SolveArgs) -> Result<Output, CliError> {
    let params = params_from(&args.shape, &args.rates)?;
    let config = solver_config(&args.solver)?;
    let mut stdout = String::new();
    if args.dump_q {
        let space = StateSpace::enumerate(&params).map_err(classify)?;
        let q = erlang_queue::build_generator(&params, &space).map_err(classify)?;
        stdout.push_str(&q.to_coordinate_text());
    }
    let record = solve_record(&params, args.solver.method.into(), &config, args.check_all)?;
    let body = match args.format {
        Format::Json => to_json(&record),
        Format::Csv => record_csv(&record),
    };
    Ok(Output {
        stdout,
        body,
        out: args.out,
        failed: false,
    })
}

/// Solves every (K, rho) cell; failures are recorded in the cell.
pub fn build_table(
    r: usize,
    c: usize,
    rhos: &[f64],
    ks: &[usize],
    mu: f64,
    method: Method,
    config: &SolverConfig,
) -> Table {
    let mut cells = Vec::with_capacity(rhos.len() * ks.len());
    for &k in ks {
        for &rho in rhos {
            let outcome = QueueParams::from_rho(rho, c, r, mu, k)
                .map_err(classify)
                .and_then(|params| solve_record(&params, method, config, false));
            let (record, error) = match outcome {
                Ok(rec) => (Some(rec), None),
                Err(e) => (None, Some(e.to_string())),
            };
            cells.push(TableCell {
                k,
                rho,
                record,
                error,
            });
        }
    }
    Table {
        r,
        c,
        mu,
        method,
        rhos: rhos.to_vec(),
        ks: ks.to_vec(),
        cells,
    }
}

/// Header `K,rho_1,..`, then one row per queue limit with L to 3 decimals.
pub fn table_csv(table: &Table) -> String {
    let mut out = String::from("K");
    for rho in &table.rhos {
        write!(out, ",{rho}").unwrap();
    }
    out.push('\n');
    for &k in &table.ks {
        write!(out, "{k}").unwrap();
        for &rho in &table.rhos {
            match table.cell(k, rho).and_then(TableCell::mean_size) {
                Some(l) => write!(out, ",{l:.3}").unwrap(),
                None => out.push_str(",ERR"),
            }
        }
        out.push('\n');
    }
    out
}

fn run_table(args: TableArgs) -> Result<Output, CliError> {
    let config = solver_config(&args.solver)?;
    if args.r == 0 || args.c == 0 {
        return Err(CliError::Usage("r and c must be at least 1".into()));
    }
    if args.rhos.is_empty() || args.ks.is_empty() {
        return Err(CliError::Usage("empty --rhos or --ks list".into()));
    }
    let table = build_table(
        args.r,
        args.c,
        &args.rhos,
        &args.ks,
        args.mu,
        args.solver.method.into(),
        &config,
    );
    let body = match args.format {
        Format::Csv => table_csv(&table),
        Format::Json => to_json(&table),
    };
    Ok(Output {
        stdout: String::new(),
        body,
        out: args.out,
        failed: table.has_failures(),
    })
}

/// Times each (r, K) cell, keeping the fastest of `repeats` runs.
#[allow(clippy::too_many_arguments)]
pub fn bench_sweep(
    rs: &[usize],
    ks: &[usize],
    c: usize,
    rho: f64,
    mu: f64,
    repeats: usize,
    method: Method,
    config: &SolverConfig,
) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &r in rs {
        for &k in ks {
            let params = QueueParams::from_rho(rho, c, r, mu, k).map_err(classify)?;
            let mut best = f64::INFINITY;
            let mut last = None;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                let sol = solve(&params, method, config).map_err(classify)?;
                best = best.min(start.elapsed().as_secs_f64());
                last = Some(sol);
            }
            let sol = last.expect("at least one repeat");
            rows.push(BenchRow {
                r,
                c,
                k,
                rho,
                n_states: sol.space.len(),
                seconds: best,
                l: sol.measures.l,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("r,c,K,rho,N,seconds,L\n");
    for b in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            b.r, b.c, b.k, b.rho, b.n_states, b.seconds, b.l
        )
        .unwrap();
    }
    out
}

fn run_bench(args: BenchArgs) -> Result<Output, CliError> {
    let config = solver_config(&args.solver)?;
    let rows = bench_sweep(
        &args.rs,
        &args.ks,
        args.c,
        args.rho,
        args.mu,
        args.repeats,
        args.solver.method.into(),
        &config,
    )?;
    let body = match args.format {
        Format::Csv => bench_csv(&rows),
        Format::Json => to_json(&rows),
    };
    Ok(Output {
        stdout: String::new(),
        body,
        out: args.out,
        failed: false,
    })
}

pub fn simulation_record(
    config: &SimConfig,
    compare: Option<(Method, &SolverConfig)>,
) -> Result<SimulationRecord, CliError> {
    let result = simulate(config).map_err(classify)?;
    let (analytic_l, covered) = match compare {
        Some((method, solver)) => {
            let l = solve(&config.params, method, solver)
                .map_err(classify)?
                .measures
                .l;
            (Some(l), Some(result.covers_l(l)))
        }
        None => (None, None),
    };
    Ok(SimulationRecord {
        config: *config,
        result,
        analytic_l,
        covered,
    })
}

fn simulation_csv(rec: &SimulationRecord) -> String {
    let mut out = String::from("field,value\n");
    let res = &rec.result;
    writeln!(out, "seed,{}", rec.config.seed).unwrap();
    writeln!(out, "horizon,{}", rec.config.horizon).unwrap();
    writeln!(out, "L_hat,{}", res.l_hat).unwrap();
    writeln!(out, "L_half_width,{}", res.l_half_width).unwrap();
    if let Some(l) = rec.analytic_l {
        writeln!(out, "L_analytic,{l}").unwrap();
    }
    if let Some(c) = rec.covered {
        writeln!(out, "covered,{c}").unwrap();
    }
    writeln!(out, "events,{}", res.events).unwrap();
    for (n, (p, h)) in res.p_hat.iter().zip(&res.p_half_widths).enumerate() {
        writeln!(out, "P_{n},{p}").unwrap();
        writeln!(out, "P_{n}_half_width,{h}").unwrap();
    }
    out
}

fn run_simulate(args: SimulateArgs) -> Result<Output, CliError> {
    let params = params_from(&args.shape, &args.rates)?;
    let solver = solver_config(&args.solver)?;
    let mut config = SimConfig::new(params, args.horizon, args.seed);
    config.batches = args.batches;
    if let Some(w) = args.warmup {
        config.warmup = w;
    }
    let method: Method = args.solver.method.into();
    let record = simulation_record(&config, args.compare.then_some((method, &solver)))?;
    let body = match args.format {
        Format::Json => to_json(&record),
        Format::Csv => simulation_csv(&record),
    };
    Ok(Output {
        stdout: String::new(),
        body,
        out: args.out,
        failed: false,
    })
}

fn run_states(args: StatesArgs) -> Result<Output, CliError> {
    let params =
        QueueParams::new(1.0, 1.0, args.shape.r, args.shape.c, args.shape.k).map_err(classify)?;
    let space = StateSpace::enumerate(&params).map_err(classify)?;
    let body = match args.format {
        Format::Csv => {
            let mut out = String::from("index,s0");
            for i in 1..=params.r {
                write!(out, ",s{i}").unwrap();
            }
            out.push('\n');
            for (i, s) in space.states().iter().enumerate() {
                write!(out, "{i},{}", s.waiting).unwrap();
                for v in &s.phases {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
            }
            out
        }
        Format::Json => to_json(
            &space
                .states()
                .iter()
                .map(|s| {
                    let mut v = vec![s.waiting];
                    v.extend(&s.phases);
                    v
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output {
        stdout: String::new(),
        body,
        out: args.out,
        failed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_cells_print_err() {
        let config = SolverConfig {
            max_squarings: 1,
            ..SolverConfig::default()
        };
        let table = build_table(2, 4, &[0.5], &[1], 1.0, Method::Squaring, &config);
        assert!(table.has_failures());
        assert_eq!(table_csv(&table), "K,0.5\n1,ERR\n");
    }

    #[test]
    fn record_csv_has_one_row_per_field() {
        let params = QueueParams::new(1.0, 2.0, 1, 1, 1).unwrap();
        let rec = solve_record(&params, Method::Linear, &SolverConfig::default(), true).unwrap();
        let csv = record_csv(&rec);
        let fields: Vec<&str> = csv.lines().map(|l| l.split(',').next().unwrap()).collect();
        for f in ["field", "N", "L", "P_0", "P_2", "solver_agreement"] {
            assert!(fields.contains(&f), "missing {f} in\n{csv}");
        }
    }

    #[test]
    fn params_need_exactly_one_rate() {
        let shape = ShapeArgs { r: 2, c: 2, k: 1 };
        let rates = RateArgs {
            lambda: None,
            rho: None,
            mu: 1.0,
        };
        assert_eq!(params_from(&shape, &rates).unwrap_err().exit_code(), 1);
        let rates = RateArgs {
            rho: Some(0.5),
            ..rates
        };
        assert_eq!(params_from(&shape, &rates).unwrap().lambda, 0.5);
    }
}

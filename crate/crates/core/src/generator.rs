//! Sparse infinitesimal generator of the M/E_r/c/K chain.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::params::QueueParams;
use crate::state_space::{StateSpace, StateVector};

/// Generator stored in compressed sparse row form. Each row holds its
/// off-diagonal entries in ascending column order plus the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    rates: Vec<f64>,
}

impl GeneratorMatrix {
    /// Builds a generator from off-diagonal triplets. Duplicate (row, col)
    /// pairs are summed; diagonal entries are derived so that rows sum to zero.
    pub fn from_off_diagonal(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: i.max(j) + 1,
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "off-diagonal rate {v} at ({i}, {j}) must be finite and nonnegative"
                )));
            }
        }
        triplets.retain(|&(i, j, v)| i != j && v > 0.0);
        triplets.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len() + n);
        let mut rates = Vec::with_capacity(triplets.len() + n);
        let mut iter = triplets.into_iter().peekable();
        row_ptr.push(0);
        for row in 0..n {
            let start = cols.len();
            let mut outflow = 0.0;
            while let Some(&(i, j, v)) = iter.peek() {
                if i != row {
                    break;
                }
                iter.next();
                outflow += v;
                if cols.len() > start && *cols.last().unwrap() == j {
                    *rates.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    rates.push(v);
                }
            }
            let pos = start + cols[start..].partition_point(|&j| j < row);
            cols.insert(pos, row);
            rates.insert(pos, -outflow);
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            rates,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Entries of one row as `(col, rate)`, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.rates[range].iter().copied())
    }

    /// All stored entries as `(row, col, rate)`, rows ascending.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Largest exit rate, `max_i |q_ii|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.n)
            .map(|i| self.diagonal(i).abs())
            .fold(0.0, f64::max)
    }

    /// Computes `x Q` for a row vector `x`.
    pub fn left_multiply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                out[j] += xi * v;
            }
        }
    }

    /// `max |sum_j q_ij|` over all rows.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.entries() {
            dense[i][j] = v;
        }
        dense
    }

    /// Coordinate-format dump, one `row col rate` line per stored entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.entries() {
            writeln!(out, "{i} {j} {v}").unwrap();
        }
        out
    }

    /// Successors of each state in the transition graph.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .filter(|&(j, v)| j != i && v > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }
}

/// Builds the generator of the M/E_r/c/K chain over `space`.
///
/// Transitions out of a state `(s0, s1..sr)` with `b = s1 + .. + sr`:
/// 1. `s0 = 0, b < c`: an arrival enters stage 1 at rate `lambda`.
/// 2. `s0 < K, b = c`: an arrival joins the queue at rate `lambda`.
/// 3. a customer in stage `i < r` advances to `i + 1` at rate `s_i * mu`.
/// 4. a customer in stage `r` departs at rate `s_r * mu`; the head of the
///    queue, if any, starts stage 1.
pub fn build_generator(params: &QueueParams, space: &StateSpace) -> Result<GeneratorMatrix> {
    params.validate()?;
    if space.params().r != params.r
        || space.params().c != params.c
        || space.params().max_queue != params.max_queue
    {
        return Err(Error::InvalidParams(
            "state space was enumerated for a different (r, c, K)".into(),
        ));
    }
    let QueueParams {
        lambda,
        mu,
        r,
        c,
        max_queue,
    } = *params;

    let mut triplets = Vec::with_capacity(space.len() * (r + 2));
    for (row, state) in space.states().iter().enumerate() {
        let busy = state.in_service();
        let mut push = |target: StateVector, rate: f64, rule: u8| -> Result<()> {
            let col = space
                .index_of(&target)
                .ok_or_else(|| Error::MissingTarget {
                    source_state: state.to_string(),
                    target: target.to_string(),
                    rule,
                })?;
            triplets.push((row, col, rate));
            Ok(())
        };

        if state.waiting == 0 && busy < c {
            let mut t = state.clone();
            t.phases[0] += 1;
            push(t, lambda, 1)?;
        }
        if state.waiting < max_queue && busy == c {
            let mut t = state.clone();
            t.waiting += 1;
            push(t, lambda, 2)?;
        }
        for i in 0..r - 1 {
            let n = state.phases[i];
            if n > 0 {
                let mut t = state.clone();
                t.phases[i] -= 1;
                t.phases[i + 1] += 1;
                push(t, n as f64 * mu, 3)?;
            }
        }
        let finishing = state.phases[r - 1];
        if finishing > 0 {
            let mut t = state.clone();
            t.phases[r - 1] -= 1;
            if t.waiting > 0 {
                t.waiting -= 1;
                t.phases[0] += 1;
            }
            push(t, finishing as f64 * mu, 4)?;
        }
    }
    GeneratorMatrix::from_off_diagonal(space.len(), triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generator(lambda: f64, mu: f64, r: usize, c: usize, k: usize) -> GeneratorMatrix {
        let p = QueueParams::new(lambda, mu, r, c, k).unwrap();
        let s = StateSpace::enumerate(&p).unwrap();
        build_generator(&p, &s).unwrap()
    }

    /// The 9x9 matrix of the M/E_2/2/1 example, written out by hand. The
    /// arrival from (0,0,1) to (0,1,1) carries rate `l`; printing it as `m`
    /// would break the zero row sum whenever `l != m`.
    fn example_matrix(l: f64, m: f64) -> Vec<Vec<f64>> {
        vec![
            vec![-l, l, 0., 0., 0., 0., 0., 0., 0.],
            vec![0., -(l + m), l, m, 0., 0., 0., 0., 0.],
            vec![0., 0., -(l + 2. * m), 0., 2. * m, 0., l, 0., 0.],
            vec![m, 0., 0., -(l + m), l, 0., 0., 0., 0.],
            vec![0., m, 0., 0., -(l + 2. * m), m, 0., l, 0.],
            vec![0., 0., 0., 2. * m, 0., -(l + 2. * m), 0., 0., l],
            vec![0., 0., 0., 0., 0., 0., -2. * m, 2. * m, 0.],
            vec![0., 0., m, 0., 0., 0., 0., -2. * m, m],
            vec![0., 0., 0., 0., 2. * m, 0., 0., 0., -2. * m],
        ]
    }

    #[test]
    fn matches_worked_example() {
        for (l, m) in [(1.0, 1.0), (2.0, 3.0), (0.7, 5.25)] {
            assert_eq!(generator(l, m, 2, 2, 1).to_dense(), example_matrix(l, m));
        }
    }

    #[test]
    fn completion_rate_scales_with_occupancy() {
        let q = generator(1.0, 3.0, 2, 2, 1);
        // (0,0,2) -> (0,0,1) at 2 mu and -> (1,0,2) at lambda
        assert_eq!(q.get(5, 3), 6.0);
        assert_eq!(q.get(5, 8), 1.0);
        // (1,0,2) -> (0,1,1): departure plus queue head entering stage 1
        assert_eq!(q.get(8, 4), 6.0);
    }

    #[test]
    fn rows_sum_to_zero() {
        for (r, c, k) in [(1, 1, 0), (2, 3, 2), (4, 3, 5), (3, 6, 1)] {
            let q = generator(1.3, 0.7, r, c, k);
            let scale = q.max_exit_rate();
            assert!(q.max_row_sum() <= 1e-12 * scale);
            for (i, j, v) in q.entries() {
                if i == j {
                    assert!(v <= 0.0);
                } else {
                    assert!(v > 0.0);
                }
            }
        }
    }

    #[test]
    fn exponential_service_is_birth_death() {
        let (l, m) = (1.5, 0.8);
        let (c, k) = (2, 2);
        let q = generator(l, m, 1, c, k);
        let n = c + k + 1;
        // states of an r = 1 system are already ordered by customer count
        let mut oracle = vec![vec![0.0; n]; n];
        for i in 0..n {
            if i + 1 < n {
                oracle[i][i + 1] = l;
            }
            if i > 0 {
                oracle[i][i - 1] = i.min(c) as f64 * m;
            }
            oracle[i][i] = -(0..n)
                .filter(|&j| j != i)
                .map(|j| oracle[i][j])
                .sum::<f64>();
        }
        assert_eq!(q.to_dense(), oracle);
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let q = GeneratorMatrix::from_off_diagonal(2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.5)])
            .unwrap();
        assert_eq!(q.to_dense(), vec![vec![-3.0, 3.0], vec![0.5, -0.5]]);
        assert_eq!(q.nnz(), 4);
    }

    #[test]
    fn coordinate_dump() {
        let q = generator(1.0, 1.0, 1, 1, 0);
        assert_eq!(q.to_coordinate_text(), "0 0 -1\n0 1 1\n1 0 1\n1 1 -1\n");
    }

    #[test]
    fn mismatched_space_rejected() {
        let p = QueueParams::new(1.0, 1.0, 2, 2, 1).unwrap();
        let other = QueueParams::new(1.0, 1.0, 2, 2, 2).unwrap();
        let s = StateSpace::enumerate(&other).unwrap();
        assert!(build_generator(&p, &s).is_err());
    }
}

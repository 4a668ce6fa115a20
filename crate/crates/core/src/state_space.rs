//! Enumeration of the phase-occupancy states of an M/E_r/c/K queue.
//!
//! A state records the number of waiting customers together with how many
//! customers in service currently occupy each of the `r` Erlang stages.
//! States with an empty queue come first, in odometer order over the stage
//! counts (stage 1 is the fastest-moving digit), followed by one block of
//! "all channels busy" states per queue length `1..=K`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::params::QueueParams;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector {
    /// Customers waiting in the queue (`s0`).
    pub waiting: usize,
    /// `phases[i]` is the number of customers in service stage `i + 1`.
    pub phases: Vec<usize>,
}

impl StateVector {
    pub fn new(waiting: usize, phases: Vec<usize>) -> Self {
        Self { waiting, phases }
    }

    pub fn in_service(&self) -> usize {
        self.phases.iter().sum()
    }

    pub fn customers(&self) -> usize {
        self.waiting + self.in_service()
    }

    /// Checks the structural invariants for a queue with `c` channels and
    /// waiting room `max_queue`.
    pub fn is_valid(&self, r: usize, c: usize, max_queue: usize) -> bool {
        let busy = self.in_service();
        self.phases.len() == r
            && busy <= c
            && self.waiting <= max_queue
            && (self.waiting == 0 || busy == c)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.waiting)?;
        for s in &self.phases {
            write!(f, ",{s}")?;
        }
        write!(f, ")")
    }
}

/// Ordered, indexed set of all states of an M/E_r/c/K queue.
#[derive(Debug, Clone)]
pub struct StateSpace {
    params: QueueParams,
    states: Vec<StateVector>,
    index: HashMap<StateVector, usize>,
    idle_block: usize,
}

impl StateSpace {
    pub fn enumerate(params: &QueueParams) -> Result<Self> {
        params.validate()?;
        let QueueParams {
            r, c, max_queue, ..
        } = *params;
        let expected = state_count(r, c, max_queue)?;
        let expected = usize::try_from(expected).map_err(|_| Error::Overflow("state count"))?;

        let mut states = Vec::with_capacity(expected);
        for phases in OdometerStates::new(r, c) {
            states.push(StateVector::new(0, phases));
        }
        let idle_block = states.len();

        let saturated: Vec<Vec<usize>> = states
            .iter()
            .filter(|s| s.in_service() == c)
            .map(|s| s.phases.clone())
            .collect();
        for waiting in 1..=max_queue {
            states.extend(
                saturated
                    .iter()
                    .map(|phases| StateVector::new(waiting, phases.clone())),
            );
        }
        debug_assert_eq!(states.len(), expected);

        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            params: *params,
            states,
            index,
            idle_block,
        })
    }

    pub fn params(&self) -> &QueueParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn get(&self, ordinal: usize) -> Option<&StateVector> {
        self.states.get(ordinal)
    }

    pub fn index_of(&self, state: &StateVector) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Number of states with an empty queue (the leading block).
    pub fn idle_block_len(&self) -> usize {
        self.idle_block
    }
}

/// Stage-count vectors with total at most `c`, in the order produced by an
/// odometer whose first digit turns fastest. Digits carry as soon as the
/// total exceeds `c`, which skips the invalid vectors without changing the
/// relative order of the valid ones.
struct OdometerStates {
    digits: Vec<usize>,
    total: usize,
    cap: usize,
    done: bool,
}

impl OdometerStates {
    fn new(r: usize, c: usize) -> Self {
        Self {
            digits: vec![0; r],
            total: 0,
            cap: c,
            done: false,
        }
    }
}

impl Iterator for OdometerStates {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.digits.clone();
        let mut i = 0;
        loop {
            self.digits[i] += 1;
            self.total += 1;
            if self.total <= self.cap {
                break;
            }
            if i + 1 == self.digits.len() {
                self.done = true;
                break;
            }
            self.total -= self.digits[i];
            self.digits[i] = 0;
            i += 1;
        }
        Some(current)
    }
}

/// Exact binomial coefficient with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) / i stays integral at every step.
        acc = acc
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// Number of states: `1 + sum_{i=1}^{c} C(i+r-1, i) + K * C(c+r-1, c)`.
pub fn state_count(r: usize, c: usize, max_queue: usize) -> Result<u64> {
    if r == 0 || c == 0 {
        return Err(Error::InvalidParams("r and c must be at least 1".into()));
    }
    let (r, c, k) = (r as u64, c as u64, max_queue as u64);
    let mut idle: u64 = 1;
    for i in 1..=c {
        let term = binomial(i + r - 1, i)?;
        idle = idle
            .checked_add(term)
            .ok_or(Error::Overflow("state count"))?;
    }
    let per_queue_length = binomial(c + r - 1, c)?;
    let waiting = per_queue_length
        .checked_mul(k)
        .ok_or(Error::Overflow("state count"))?;
    idle.checked_add(waiting)
        .ok_or(Error::Overflow("state count"))
}

/// Closed form of [`state_count`] for a single waiting place,
/// `(c + 2r) / r * C(c+r-1, c)`.
pub fn state_count_single_waiting_place(r: usize, c: usize) -> Result<u64> {
    if r == 0 || c == 0 {
        return Err(Error::InvalidParams("r and c must be at least 1".into()));
    }
    let b = binomial((c + r - 1) as u64, c as u64)? as u128;
    let num = b * (c as u128 + 2 * r as u128);
    u64::try_from(num / r as u128).map_err(|_| Error::Overflow("state count"))
}

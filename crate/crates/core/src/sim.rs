//! Discrete-event simulation of the M/E_r/c/K queue.
//!
//! Random numbers come from `ChaCha8Rng` seeded with `seed_from_u64`, which
//! is specified bit-for-bit and gives identical streams on every platform.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::params::QueueParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: QueueParams,
    /// Simulated time discarded before measuring.
    pub warmup: f64,
    /// Simulated time measured after the warmup.
    pub horizon: f64,
    pub seed: u64,
    pub batches: usize,
}

impl SimConfig {
    /// 20 batches and a warmup of 10% of the horizon.
    pub fn new(params: QueueParams, horizon: f64, seed: u64) -> Self {
        Self {
            params,
            warmup: 0.1 * horizon,
            horizon,
            seed,
            batches: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParams("horizon must be positive".into()));
        }
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return Err(Error::InvalidParams("warmup must be nonnegative".into()));
        }
        if self.batches < 2 {
            return Err(Error::InvalidParams(
                "at least two batches are required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Time-average fraction of the measured period with `n` customers present.
    pub p_hat: Vec<f64>,
    pub l_hat: f64,
    /// 95% batch-means half-width for `l_hat`.
    pub l_half_width: f64,
    /// 95% batch-means half-widths for each entry of `p_hat`.
    pub p_half_widths: Vec<f64>,
    pub events: u64,
    /// Arrivals and balking arrivals during the measured period.
    pub arrivals: u64,
    pub blocked: u64,
}

impl SimResult {
    pub fn l_interval(&self) -> (f64, f64) {
        (
            self.l_hat - self.l_half_width,
            self.l_hat + self.l_half_width,
        )
    }

    pub fn covers_l(&self, l: f64) -> bool {
        (self.l_hat - l).abs() <= self.l_half_width
    }
}

/// Erlang(r) service time as the sum of `r` independent Exp(mu) stages.
pub fn sample_service_time<R: Rng + ?Sized>(rng: &mut R, r: usize, mu: f64) -> f64 {
    let stage = Exp::new(mu).expect("stage rate must be positive");
    (0..r).map(|_| stage.sample(rng)).sum()
}

/// Time-weighted occupancy split into equal-length batches.
struct Recorder {
    start: f64,
    batch_len: f64,
    occupancy: Vec<Vec<f64>>,
}

impl Recorder {
    /// Credits the interval `[from, to)` spent with `n` customers.
    fn record(&mut self, mut from: f64, to: f64, n: usize) {
        let end = self.start + self.batch_len * self.occupancy.len() as f64;
        from = from.max(self.start);
        let to = to.min(end);
        while from < to {
            let batch =
                (((from - self.start) / self.batch_len) as usize).min(self.occupancy.len() - 1);
            let boundary = self.start + self.batch_len * (batch + 1) as f64;
            let seg_end = if batch + 1 == self.occupancy.len() {
                to
            } else {
                to.min(boundary)
            };
            self.occupancy[batch][n] += seg_end - from;
            from = seg_end;
        }
    }
}

fn mean_and_half_width(samples: &[f64], t_quantile: f64) -> (f64, f64) {
    let b = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / b;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, t_quantile * (var / b).sqrt())
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let QueueParams {
        lambda,
        mu,
        r,
        c,
        max_queue,
    } = config.params;
    let capacity = c + max_queue;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let interarrival = Exp::new(lambda).map_err(|e| Error::InvalidParams(e.to_string()))?;

    let start = config.warmup;
    let stop = config.warmup + config.horizon;
    let mut recorder = Recorder {
        start,
        batch_len: config.horizon / config.batches as f64,
        occupancy: vec![vec![0.0; capacity + 1]; config.batches],
    };

    // completion time per channel, None when idle
    let mut channels: Vec<Option<f64>> = vec![None; c];
    let mut free: Vec<usize> = Vec::with_capacity(c);
    let mut waiting = 0usize;
    let mut busy = 0usize;
    let mut now = 0.0;
    let mut next_arrival = interarrival.sample(&mut rng);
    let (mut events, mut arrivals, mut blocked) = (0u64, 0u64, 0u64);

    loop {
        let (departure_channel, departure_time) = channels
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (i, t)))
            .fold((usize::MAX, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        let event_time = next_arrival.min(departure_time);
        recorder.record(now, event_time.min(stop), waiting + busy);
        if event_time >= stop {
            break;
        }
        now = event_time;
        events += 1;

        if next_arrival <= departure_time {
            let measured = now >= start;
            arrivals += measured as u64;
            if busy < c {
                free.clear();
                free.extend((0..c).filter(|&i| channels[i].is_none()));
                let &channel = free.choose(&mut rng).expect("a free channel exists");
                channels[channel] = Some(now + sample_service_time(&mut rng, r, mu));
                busy += 1;
            } else if waiting < max_queue {
                waiting += 1;
            } else {
                blocked += measured as u64;
            }
            next_arrival = now + interarrival.sample(&mut rng);
        } else if waiting > 0 {
            waiting -= 1;
            channels[departure_channel] = Some(now + sample_service_time(&mut rng, r, mu));
        } else {
            channels[departure_channel] = None;
            busy -= 1;
        }
        assert!(busy <= c, "channel occupancy exceeded c");
        assert!(waiting <= max_queue, "queue exceeded K");
        assert!(
            waiting == 0 || busy == c,
            "customer waiting while a channel is idle"
        );
    }

    let batch_len = recorder.batch_len;
    let t_quantile = StudentsT::new(0.0, 1.0, (config.batches - 1) as f64)
        .map_err(|e| Error::InvalidParams(e.to_string()))?
        .inverse_cdf(0.975);

    let batch_p: Vec<Vec<f64>> = recorder
        .occupancy
        .iter()
        .map(|occ| occ.iter().map(|t| t / batch_len).collect())
        .collect();
    let batch_l: Vec<f64> = batch_p
        .iter()
        .map(|p| p.iter().enumerate().map(|(n, v)| n as f64 * v).sum())
        .collect();
    let (_, l_half_width) = mean_and_half_width(&batch_l, t_quantile);

    let mut p_hat = vec![0.0; capacity + 1];
    for occ in &recorder.occupancy {
        for (acc, t) in p_hat.iter_mut().zip(occ) {
            *acc += t;
        }
    }
    let measured: f64 = p_hat.iter().sum();
    p_hat.iter_mut().for_each(|v| *v /= measured);
    let l_hat = p_hat.iter().enumerate().map(|(n, v)| n as f64 * v).sum();

    let p_half_widths = (0..=capacity)
        .map(|n| {
            let samples: Vec<f64> = batch_p.iter().map(|p| p[n]).collect();
            mean_and_half_width(&samples, t_quantile).1
        })
        .collect();

    Ok(SimResult {
        p_hat,
        l_hat,
        l_half_width,
        p_half_widths,
        events,
        arrivals,
        blocked,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of an M/E_r/c/K queue.
///
/// `mu` is the rate of a single Erlang stage, so the mean service time is
/// `r / mu`. `max_queue` is the waiting-room size and excludes customers in
/// service.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    pub lambda: f64,
    pub mu: f64,
    pub r: usize,
    pub c: usize,
    #[serde(rename = "K")]
    pub max_queue: usize,
}

impl QueueParams {
    pub fn new(lambda: f64, mu: f64, r: usize, c: usize, max_queue: usize) -> Result<Self> {
        let params = Self {
            lambda,
            mu,
            r,
            c,
            max_queue,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a per-channel traffic density, `lambda = rho * mu * c / r`.
    pub fn from_rho(rho: f64, c: usize, r: usize, mu: f64, max_queue: usize) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParams(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if r == 0 || c == 0 {
            return Err(Error::InvalidParams("r and c must be at least 1".into()));
        }
        Self::new(rho * mu * c as f64 / r as f64, mu, r, c, max_queue)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mu must be positive and finite, got {}",
                self.mu
            )));
        }
        if self.r == 0 {
            return Err(Error::InvalidParams(
                "Erlang order r must be at least 1".into(),
            ));
        }
        if self.c == 0 {
            return Err(Error::InvalidParams(
                "number of channels c must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Offered load per channel, `lambda * r / (mu * c)`.
    pub fn rho(&self) -> f64 {
        self.lambda * self.r as f64 / (self.mu * self.c as f64)
    }

    /// Largest number of customers the system can hold.
    pub fn capacity(&self) -> usize {
        self.c + self.max_queue
    }

    /// Same queue with both rates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.lambda * factor,
            self.mu * factor,
            self.r,
            self.c,
            self.max_queue,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        assert!(QueueParams::new(0.0, 1.0, 1, 1, 0).is_err());
        assert!(QueueParams::new(1.0, -1.0, 1, 1, 0).is_err());
        assert!(QueueParams::new(1.0, 1.0, 0, 1, 0).is_err());
        assert!(QueueParams::new(1.0, 1.0, 1, 0, 0).is_err());
        assert!(QueueParams::new(f64::NAN, 1.0, 1, 1, 0).is_err());
        assert!(QueueParams::new(1.0, 1.0, 1, 1, 0).is_ok());
    }

    #[test]
    fn rho_inversion() {
        let p = QueueParams::from_rho(0.9, 6, 3, 1.0, 1).unwrap();
        assert_eq!(p.lambda, 1.8);
        let p = QueueParams::from_rho(0.5, 4, 2, 1.0, 1).unwrap();
        assert_eq!(p.lambda, 1.0);
        for (c, r, mu) in [(4, 2, 1.0), (6, 3, 2.5), (7, 4, 0.3), (15, 2, 1.0)] {
            let p = QueueParams::from_rho(1.0, c, r, mu, 3).unwrap();
            assert_eq!(p.lambda, mu * c as f64 / r as f64);
            assert_eq!(p.rho(), 1.0);
        }
    }
}

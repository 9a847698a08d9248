//! Scenario parameters shared by every module.

use crate::error::{Error, Result};

/// Dimensions and powers of one downlink scenario. Powers are linear.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemConfig {
    m: usize,
    k: usize,
    tau: usize,
    rho_p: f64,
    p_t: f64,
}

impl SystemConfig {
    /// Builds a config with pilot length equal to the user count.
    pub fn new(m: usize, k: usize, rho_p: f64, p_t: f64) -> Result<Self> {
        Self::with_pilot_length(m, k, k, rho_p, p_t)
    }

    pub fn with_pilot_length(m: usize, k: usize, tau: usize, rho_p: f64, p_t: f64) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "need M >= 1 and K >= 1, got M={m}, K={k}"
            )));
        }
        if tau != k {
            return Err(Error::Unsupported(format!(
                "pilot length {tau} differs from user count {k}; only tau = K is modeled"
            )));
        }
        if !(rho_p > 0.0 && rho_p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "training power must be positive, got {rho_p}"
            )));
        }
        // P_t = 0 is admitted as the zero-rate limit
        if !(p_t >= 0.0 && p_t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "transmit power must be nonnegative, got {p_t}"
            )));
        }
        Ok(Self { m, k, tau, rho_p, p_t })
    }

    /// Builds a config from powers given in dB.
    pub fn from_db(m: usize, k: usize, rho_p_db: f64, p_t_db: f64) -> Result<Self> {
        Self::new(m, k, db_to_linear(rho_p_db), db_to_linear(p_t_db))
    }

    /// Base-station antenna count M.
    pub fn m(&self) -> usize {
        self.m
    }

    /// User count K.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Pilot length in symbols.
    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Per-user training power.
    pub fn rho_p(&self) -> f64 {
        self.rho_p
    }

    /// Total downlink transmit power.
    pub fn p_t(&self) -> f64 {
        self.p_t
    }

    pub fn with_antennas(&self, m: usize) -> Result<Self> {
        Self::new(m, self.k, self.rho_p, self.p_t)
    }

    pub fn with_training_power(&self, rho_p: f64) -> Result<Self> {
        Self::new(self.m, self.k, rho_p, self.p_t)
    }

    pub fn with_transmit_power(&self, p_t: f64) -> Result<Self> {
        Self::new(self.m, self.k, self.rho_p, p_t)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

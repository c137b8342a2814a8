//! Run configuration shared by every generator, verifier and command.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances. Field names follow the report schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative modulus residual accepted for Q-witnesses.
    pub tol_q: f64,
    /// Relative equality tolerance for the two-point constraint.
    pub tau_eq: f64,
    /// Margin below 2 that separates Gleason parts.
    pub tau_part: f64,
    /// Coefficient of the invertibility threshold `tau_inv * (1 + sup|a|)`.
    pub tau_inv: f64,
    /// Logs are clamped at `-m_clamp`.
    pub m_clamp: f64,
    /// Successive-cutoff tolerance of the log-integrability heuristic.
    pub tol_logint: f64,
    /// Energy fraction allowed outside the analytic band.
    pub analyticity_tol: f64,
    /// Numerical slack added to the rigged-stage bound `6 sqrt(eps)`.
    pub slack_num: f64,
    /// Endpoint tolerance for smile maps.
    pub tau_smile: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_q: 1e-10,
            tau_eq: 1e-9,
            tau_part: 1e-3,
            tau_inv: 1e-6,
            m_clamp: 30.0,
            tol_logint: 1e-3,
            analyticity_tol: 1e-8,
            slack_num: 1e-3,
            tau_smile: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid_n: usize,
    pub oversample: usize,
    pub max_degree: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_n: 1024,
            oversample: 4,
            max_degree: 4096,
            tolerances: Tolerances::default(),
            seed: 20240601,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 16 || !self.grid_n.is_power_of_two() {
            return Err(Error::InvalidGrid(self.grid_n));
        }
        if self.max_degree == 0 || !self.max_degree.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "max_degree {} must be a positive power of two",
                self.max_degree
            )));
        }
        if self.oversample == 0 {
            return Err(Error::InvalidArgument("oversample must be positive".into()));
        }
        let t = &self.tolerances;
        let all = [
            t.tol_q,
            t.tau_eq,
            t.tau_part,
            t.tau_inv,
            t.m_clamp,
            t.tol_logint,
            t.analyticity_tol,
            t.slack_num,
            t.tau_smile,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

use serde::{Deserialize, Serialize};

use crate::analytics::optimal_rho;
use crate::error::{Error, Result};
use crate::iterative::SelectionRule;

/// User placement model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Uniform in each hexagon, at least `min_dist_m` from the BS.
    Uniform { cell_radius_m: f64, min_dist_m: f64 },
    /// Equally spaced on a circle around each BS.
    Circle { cell_radius_m: f64, user_circle_radius_m: f64 },
}

impl Scenario {
    pub fn cell_radius_m(&self) -> f64 {
        match *self {
            Scenario::Uniform { cell_radius_m, .. } | Scenario::Circle { cell_radius_m, .. } => cell_radius_m,
        }
    }
}

/// Which form of the optimal pilot/data split to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RhoRule {
    Exact,
    #[default]
    Approximate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of cells L.
    pub l: usize,
    /// Users per cell K.
    pub k: usize,
    /// BS antennas M.
    pub m: usize,
    /// Uplink symbols per coherence block C_u.
    pub c_u: usize,
    /// Coherence block length C.
    pub c: usize,
    /// TP training length, always r·K.
    pub tau: usize,
    /// TP pilot reuse factor.
    pub r: usize,
    /// QAM order P.
    pub qam_order: usize,
    /// ω/σ² in dB.
    pub snr_db: f64,
    /// Received power target of statistics-aware power control.
    pub omega: f64,
    pub scenario: Scenario,
    pub path_loss_exponent: f64,
    /// Iterations ν of the data-aided estimator.
    pub iterations: usize,
    pub seed: u64,
    pub rho_rule: RhoRule,
    pub selection_rule: SelectionRule,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            l: 7,
            k: 5,
            m: 100,
            c_u: 100,
            c: 200,
            tau: 5,
            r: 1,
            qam_order: 4,
            snr_db: 10.0,
            omega: 1.0,
            scenario: Scenario::Circle { cell_radius_m: 1000.0, user_circle_radius_m: 800.0 },
            path_loss_exponent: 3.0,
            iterations: 4,
            seed: 0x5eed,
            rho_rule: RhoRule::Approximate,
            selection_rule: SelectionRule::Fixed,
        }
    }
}

impl SystemConfig {
    /// Total number of users L·K.
    pub fn n_users(&self) -> usize {
        self.l * self.k
    }

    /// Noise variance σ² = ω / 10^(snr/10).
    pub fn noise_variance(&self) -> f64 {
        self.omega / 10f64.powf(self.snr_db / 10.0)
    }

    /// Sets K and keeps τ = r·K.
    pub fn with_users_per_cell(mut self, k: usize) -> Self {
        self.k = k;
        self.tau = self.r * k;
        self
    }

    /// Sets r and keeps τ = r·K.
    pub fn with_reuse(mut self, r: usize) -> Self {
        self.r = r;
        self.tau = r * self.k;
        self
    }

    /// Data power fraction λ² for an SP slot of `slot_len` symbols.
    pub fn data_fraction(&self, slot_len: usize) -> f64 {
        let (exact, approx) = optimal_rho(self.m, self.l, self.k, slot_len);
        match self.rho_rule {
            RhoRule::Exact => exact.0,
            RhoRule::Approximate => approx.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.l == 0 || self.k == 0 || self.m == 0 || self.c_u == 0 {
            return bad("L, K, M and C_u must all be at least 1".into());
        }
        if self.c < self.c_u {
            return bad(format!("C = {} is shorter than C_u = {}", self.c, self.c_u));
        }
        if self.r == 0 || self.r > self.l {
            return bad(format!("reuse factor r = {} must lie in 1..=L", self.r));
        }
        if self.tau != self.r * self.k {
            return bad(format!("tau = {} must equal r*K = {}", self.tau, self.r * self.k));
        }
        if self.tau > self.c_u {
            return bad(format!("tau = {} exceeds C_u = {}", self.tau, self.c_u));
        }
        if !(self.omega > 0.0) || !self.snr_db.is_finite() {
            return bad("omega must be positive and snr_db finite".into());
        }
        if !(self.path_loss_exponent > 0.0) {
            return bad("path_loss_exponent must be positive".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        crate::waveform::Qam::new(self.qam_order)?;
        match self.scenario {
            Scenario::Uniform { cell_radius_m, min_dist_m } => {
                if !(cell_radius_m > 0.0) || !(min_dist_m >= 0.0) || min_dist_m >= cell_radius_m {
                    return bad("scenario needs 0 <= min_dist_m < cell_radius_m".into());
                }
            }
            Scenario::Circle { cell_radius_m, user_circle_radius_m } => {
                if !(cell_radius_m > 0.0) || !(user_circle_radius_m > 0.0) {
                    return bad("scenario radii must be positive".into());
                }
            }
        }
        Ok(())
    }
}

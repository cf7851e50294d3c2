//! Closed-form single-zone quanta balance, `dN/dt = q - (Q/V) N`, `N(0) = 0`.
//!
//! Used as an analytic reference for the agent-based totals: continuous
//! source, one well-mixed zone, no inhalation losses.

use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnParameters {
    /// Source rate, quanta per second.
    pub source_qps: f64,
    /// Ventilation flow, m³/s.
    pub airflow_m3ps: f64,
    /// Room volume, m³.
    pub volume_m3: f64,
}

impl GnParameters {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            source_qps: config.quanta_rate_mean_qph / 3600.0,
            airflow_m3ps: config.airflow(),
            volume_m3: config.room_volume(),
        }
    }

    /// Removal rate per second.
    pub fn lambda(&self) -> f64 {
        self.airflow_m3ps / self.volume_m3
    }

    /// Quanta in the room at `t` seconds.
    pub fn quanta_at(&self, t: f64) -> f64 {
        let lambda = self.lambda();
        if lambda == 0.0 {
            return self.source_qps * t;
        }
        // -expm1 keeps precision when lambda * t is tiny.
        self.source_qps / lambda * -(-lambda * t).exp_m1()
    }

    /// Long-run limit `qV/Q`; infinite without ventilation.
    pub fn steady_state(&self) -> f64 {
        let lambda = self.lambda();
        if lambda == 0.0 {
            f64::INFINITY
        } else {
            self.source_qps / lambda
        }
    }

    /// Time integral of the concentration, quanta·s/m³.
    pub fn integrated_concentration(&self, t: f64) -> f64 {
        let lambda = self.lambda();
        if lambda == 0.0 {
            return self.source_qps * t * t / (2.0 * self.volume_m3);
        }
        let decay = -(-lambda * t).exp_m1();
        self.source_qps / self.airflow_m3ps * (t - decay / lambda)
    }

    /// Dose in milliquanta for someone breathing `breath_rate_m3ph` from time 0 to `t`.
    pub fn expected_dose(&self, breath_rate_m3ph: f64, t: f64) -> f64 {
        breath_rate_m3ph / 3600.0 * self.integrated_concentration(t) * 1000.0
    }
}

/// Breath rate at the middle of each weight quartile.
pub fn class_mean_breath_rates(config: &ScenarioConfig) -> [f64; 4] {
    [0.125, 0.375, 0.625, 0.875].map(|u| crate::scenario::breath_rate(config, u))
}

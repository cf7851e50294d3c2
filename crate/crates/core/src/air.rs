//! Two-zone quanta inventory: the cough cylinder around the infector and the
//! rest of the room.
//!
//! Quantities are in milliquanta (mq) and cubic meters. Coughs land in the
//! cough zone, breaths draw from whichever zone the agent sits in,
//! ventilation removes the same fraction from both zones, and mixing relaxes
//! the cough zone toward the room-average concentration.

use crate::error::{Error, Result};
use crate::scenario::{Point, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Cough,
    Bulk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AirState {
    cough_zone_quanta: f64,
    bulk_quanta: f64,
    cough_zone_volume: f64,
    bulk_volume: f64,
    room_volume: f64,
    airflow: f64,
    mixing_tau: f64,
    cough_radius: f64,
    cough_center: Point,
}

/// Slack on the cough-zone boundary test so seats exactly one radius away
/// (two in-row seats at the default pitch) count as inside despite rounding.
const BOUNDARY_EPS_M: f64 = 1e-9;

impl AirState {
    /// Clean air with the cough cylinder centered on `infector_seat`.
    pub fn new(config: &ScenarioConfig, infector_seat: Point) -> Result<Self> {
        let room_volume = config.room_volume();
        let cough_zone_volume = config.cough_zone_volume();
        if cough_zone_volume >= room_volume {
            return Err(Error::Constraint(format!(
                "cough cylinder volume {cough_zone_volume} m³ must be smaller than room volume {room_volume} m³"
            )));
        }
        if !(config.mixing_tau_s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mixing_tau must be > 0, got {}",
                config.mixing_tau_s
            )));
        }
        Ok(Self {
            cough_zone_quanta: 0.0,
            bulk_quanta: 0.0,
            cough_zone_volume,
            bulk_volume: room_volume - cough_zone_volume,
            room_volume,
            airflow: config.airflow(),
            mixing_tau: config.mixing_tau_s,
            cough_radius: config.cough_radius_m,
            cough_center: infector_seat,
        })
    }

    pub fn quanta(&self, zone: Zone) -> f64 {
        match zone {
            Zone::Cough => self.cough_zone_quanta,
            Zone::Bulk => self.bulk_quanta,
        }
    }

    pub fn volume(&self, zone: Zone) -> f64 {
        match zone {
            Zone::Cough => self.cough_zone_volume,
            Zone::Bulk => self.bulk_volume,
        }
    }

    pub fn room_volume(&self) -> f64 {
        self.room_volume
    }

    pub fn airflow(&self) -> f64 {
        self.airflow
    }

    pub fn cough_center(&self) -> Point {
        self.cough_center
    }

    /// Zone containing a floor position.
    pub fn zone_at(&self, p: Point) -> Zone {
        if p.distance(self.cough_center) <= self.cough_radius + BOUNDARY_EPS_M {
            Zone::Cough
        } else {
            Zone::Bulk
        }
    }

    /// Concentration in mq/m³.
    pub fn concentration(&self, zone: Zone) -> f64 {
        self.quanta(zone) / self.volume(zone)
    }

    pub fn total_quanta(&self) -> f64 {
        self.cough_zone_quanta + self.bulk_quanta
    }

    pub fn inject_cough(&mut self, amount: f64) -> Result<()> {
        if !(amount >= 0.0) || !amount.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cough amount must be a finite value >= 0, got {amount}"
            )));
        }
        self.cough_zone_quanta += amount;
        Ok(())
    }

    /// Removes and returns the quanta contained in `tidal_volume` of the zone's air.
    pub fn inhale(&mut self, zone: Zone, tidal_volume: f64) -> Result<f64> {
        let zone_volume = self.volume(zone);
        if !(tidal_volume >= 0.0) || tidal_volume >= zone_volume {
            return Err(Error::InvalidArgument(format!(
                "tidal volume {tidal_volume} m³ must lie in [0, {zone_volume}) m³"
            )));
        }
        let dose = self.concentration(zone) * tidal_volume;
        let slot = match zone {
            Zone::Cough => &mut self.cough_zone_quanta,
            Zone::Bulk => &mut self.bulk_quanta,
        };
        *slot = (*slot - dose).max(0.0);
        Ok(dose)
    }

    /// Exhausts `airflow * dt` of well-mixed air; returns the quanta removed.
    pub fn ventilate(&mut self, dt: f64) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        let fraction = self.airflow * dt / self.room_volume;
        if fraction >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "airflow {} m³/s over {dt} s exhausts the whole {} m³ room",
                self.airflow, self.room_volume
            )));
        }
        let before = self.total_quanta();
        let keep = 1.0 - fraction;
        self.cough_zone_quanta *= keep;
        self.bulk_quanta *= keep;
        Ok(before - self.total_quanta())
    }

    /// Relaxes the cough-zone concentration toward the room average:
    /// `C' = C* + (C - C*) exp(-dt / tau)`. The bulk zone takes the balance.
    pub fn mix_zones(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        let total = self.total_quanta();
        let uniform = total / self.room_volume;
        let excess = self.concentration(Zone::Cough) - uniform;
        let relaxed = uniform + excess * (-dt / self.mixing_tau).exp();
        let cough = (relaxed * self.cough_zone_volume).clamp(0.0, total);
        self.cough_zone_quanta = cough;
        self.bulk_quanta = (total - cough).max(0.0);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_config;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fresh() -> AirState {
        AirState::new(&default_config(), Point { x: 4.0, y: 3.0 }).unwrap()
    }

    #[test]
    fn default_volumes_and_flow() {
        let air = fresh();
        assert_relative_eq!(air.volume(Zone::Cough), 14.6006, max_relative = 1e-5);
        assert_relative_eq!(air.volume(Zone::Bulk), 117.399, max_relative = 1e-5);
        assert_relative_eq!(air.volume(Zone::Cough) + air.volume(Zone::Bulk), 132.0);
        assert_relative_eq!(air.airflow(), 0.146667, max_relative = 1e-5);
        assert_eq!(air.total_quanta(), 0.0);
        assert_eq!(air.concentration(Zone::Cough), 0.0);
        assert_eq!(air.concentration(Zone::Bulk), 0.0);
    }

    #[test]
    fn oversized_cylinder_rejected() {
        let cfg = crate::scenario::ScenarioConfig {
            room_length_m: 2.0,
            room_width_m: 2.0,
            cough_radius_m: 1.3,
            ..default_config()
        };
        assert!(AirState::new(&cfg, Point { x: 1.0, y: 1.0 }).is_err());
    }

    #[test]
    fn airflow_override() {
        let cfg = crate::scenario::ScenarioConfig {
            room_height_m: 5.0,
            airflow_m3_per_s: Some(0.5),
            ..default_config()
        };
        let air = AirState::new(&cfg, Point { x: 4.0, y: 3.0 }).unwrap();
        assert_eq!(air.airflow(), 0.5);
    }

    #[test]
    fn inject_cough_only_touches_cough_zone() {
        let mut air = fresh();
        air.inject_cough(0.0).unwrap();
        assert_eq!(air, fresh());
        air.inject_cough(1583.33).unwrap();
        assert_relative_eq!(air.concentration(Zone::Cough), 108.44, max_relative = 1e-4);
        assert_eq!(air.concentration(Zone::Bulk), 0.0);
        assert_eq!(air.total_quanta(), 1583.33);
        assert!(air.inject_cough(-1.0).is_err());
    }

    #[test]
    fn injections_add() {
        let mut a = fresh();
        a.inject_cough(100.0).unwrap();
        a.inject_cough(250.5).unwrap();
        let mut b = fresh();
        b.inject_cough(350.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inhale_dose() {
        let mut air = fresh();
        assert_eq!(air.inhale(Zone::Bulk, 1.1111e-4).unwrap(), 0.0);

        // 927.53 mq/m³ in the bulk zone.
        air.bulk_quanta = 927.53 * air.volume(Zone::Bulk);
        let dose = air.inhale(Zone::Bulk, 1.1111e-4).unwrap();
        assert_relative_eq!(dose, 0.10306, max_relative = 1e-4);
        assert!(air.inhale(Zone::Bulk, air.volume(Zone::Bulk)).is_err());
        assert!(air.inhale(Zone::Cough, -1.0).is_err());
    }

    #[test]
    fn two_breaths_deplete_between() {
        let mut once = fresh();
        once.inject_cough(1000.0).unwrap();
        let mut twice = once.clone();
        let v = 0.5;
        let single = once.inhale(Zone::Cough, 2.0 * v).unwrap();
        let double = twice.inhale(Zone::Cough, v).unwrap() + twice.inhale(Zone::Cough, v).unwrap();
        // Closed form: N(1 - (1 - v/V)^2) vs 2Nv/V.
        let vol = once.volume(Zone::Cough);
        assert_relative_eq!(
            double,
            1000.0 * (1.0 - (1.0 - v / vol).powi(2)),
            max_relative = 1e-12
        );
        assert_relative_eq!(single, 1000.0 * 2.0 * v / vol, max_relative = 1e-12);
        assert!(double < single);
    }

    #[test]
    fn ventilate_removes_four_per_hour_fraction() {
        let mut air = fresh();
        air.cough_zone_quanta = 30_000.0;
        air.bulk_quanta = 70_000.0;
        let removed = air.ventilate(1.0).unwrap();
        assert_relative_eq!(air.total_quanta(), 99_888.89, max_relative = 1e-7);
        assert_relative_eq!(removed, 100_000.0 * 4.0 / 3600.0, max_relative = 1e-9);
        assert_relative_eq!(
            air.quanta(Zone::Cough) / air.quanta(Zone::Bulk),
            3.0 / 7.0,
            max_relative = 1e-12
        );
        assert!(air.ventilate(0.0).is_err());
        assert!(air.ventilate(1e6).is_err());
    }

    #[test]
    fn ventilation_compounds_per_step() {
        let mut stepped = fresh();
        stepped.bulk_quanta = 1000.0;
        let mut single = stepped.clone();
        stepped.ventilate(1.0).unwrap();
        stepped.ventilate(1.0).unwrap();
        single.ventilate(2.0).unwrap();
        let lambda = stepped.airflow() / stepped.room_volume();
        assert_relative_eq!(
            stepped.total_quanta(),
            1000.0 * (1.0 - lambda).powi(2),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            single.total_quanta(),
            1000.0 * (1.0 - 2.0 * lambda),
            max_relative = 1e-12
        );
        assert!(stepped.total_quanta() > single.total_quanta());
    }

    #[test]
    fn no_airflow_no_removal() {
        let cfg = crate::scenario::ScenarioConfig {
            ach_per_hour: 0.0,
            ..default_config()
        };
        let mut air = AirState::new(&cfg, Point { x: 4.0, y: 3.0 }).unwrap();
        air.inject_cough(500.0).unwrap();
        let before = air.clone();
        assert_eq!(air.ventilate(1.0).unwrap(), 0.0);
        assert_eq!(air, before);
    }

    #[test]
    fn mixing_fixed_point() {
        let mut air = fresh();
        air.cough_zone_quanta = 10.0 * air.volume(Zone::Cough);
        air.bulk_quanta = 10.0 * air.volume(Zone::Bulk);
        let before = air.clone();
        air.mix_zones(1.0).unwrap();
        assert_relative_eq!(
            air.quanta(Zone::Cough),
            before.quanta(Zone::Cough),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            air.quanta(Zone::Bulk),
            before.quanta(Zone::Bulk),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mixing_excess_decay() {
        let mut air = fresh();
        // Cough-zone excess of 100 mq/m³ over a uniform 50 mq/m³.
        let v_c = air.volume(Zone::Cough);
        let v = air.room_volume();
        // Solve for quanta that produce C_c - C* = 100 with total 50 * V.
        let total = 50.0 * v;
        let c_c = 50.0 + 100.0;
        air.cough_zone_quanta = c_c * v_c;
        air.bulk_quanta = total - c_c * v_c;
        air.mix_zones(1.0).unwrap();
        let excess = air.concentration(Zone::Cough) - air.total_quanta() / v;
        assert_relative_eq!(excess, 81.873, max_relative = 1e-5);
        assert_relative_eq!(air.total_quanta(), total, max_relative = 1e-12);
    }

    #[test]
    fn repeated_mixing_converges() {
        let mut air = fresh();
        air.inject_cough(2000.0).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            air.mix_zones(1.0).unwrap();
            let excess = air.concentration(Zone::Cough) - air.total_quanta() / air.room_volume();
            assert!(excess >= 0.0 && excess < last);
            last = excess;
        }
        // e^-20 of the initial ~137 mq/m³ excess.
        assert!(last < 1e-6);
        assert_relative_eq!(
            air.concentration(Zone::Cough),
            air.concentration(Zone::Bulk),
            max_relative = 1e-7
        );
    }

    #[test]
    fn zone_boundary_includes_two_seats() {
        let air = fresh();
        assert_eq!(
            air.zone_at(Point {
                x: 4.0 + 1.3,
                y: 3.0
            }),
            Zone::Cough
        );
        assert_eq!(
            air.zone_at(Point {
                x: 4.0,
                y: 3.0 + 1.4
            }),
            Zone::Bulk
        );
    }

    proptest! {
        #[test]
        fn mixing_is_exact_geometric_decay(
            cough in 0.0f64..1e6,
            bulk in 0.0f64..1e6,
            tau in 0.5f64..60.0,
            dt in 0.1f64..5.0,
        ) {
            let cfg = crate::scenario::ScenarioConfig { mixing_tau_s: tau, ..default_config() };
            let mut air = AirState::new(&cfg, Point { x: 4.0, y: 3.0 }).unwrap();
            air.cough_zone_quanta = cough;
            air.bulk_quanta = bulk;
            let total = air.total_quanta();
            let uniform = total / air.room_volume();
            let excess0 = air.concentration(Zone::Cough) - uniform;
            air.mix_zones(dt).unwrap();
            let excess1 = air.concentration(Zone::Cough) - uniform;
            prop_assert!(air.quanta(Zone::Cough) >= 0.0 && air.quanta(Zone::Bulk) >= 0.0);
            prop_assert!((air.total_quanta() - total).abs() <= 1e-9 * total.max(1.0));
            let want = excess0 * (-dt / tau).exp();
            prop_assert!((excess1 - want).abs() <= 1e-9 * excess0.abs().max(1.0));
        }

        #[test]
        fn operations_keep_zones_nonnegative(
            ops in proptest::collection::vec((0u8..4, 0.0f64..5000.0), 1..200)
        ) {
            let mut air = fresh();
            for (op, amount) in ops {
                match op {
                    0 => air.inject_cough(amount).unwrap(),
                    1 => { air.inhale(Zone::Cough, amount * 1e-3).unwrap(); }
                    2 => { air.inhale(Zone::Bulk, amount * 1e-3).unwrap(); }
                    _ => { air.ventilate(1.0).unwrap(); air.mix_zones(1.0).unwrap(); }
                }
                prop_assert!(air.quanta(Zone::Cough) >= 0.0);
                prop_assert!(air.quanta(Zone::Bulk) >= 0.0);
            }
        }
    }
}

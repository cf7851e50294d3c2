//! Scenario configuration, seat layout and agent population.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::MersenneTwister;

/// Physical and demographic parameters of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub room_length_m: f64,
    pub room_width_m: f64,
    pub room_height_m: f64,
    pub ach_per_hour: f64,
    /// Fixed ventilation flow; when absent the flow follows `ach_per_hour`.
    pub airflow_m3_per_s: Option<f64>,
    /// Total number of people, the infector included.
    pub n_agents: usize,
    pub duration_s: u32,
    pub cough_interval_s: u32,
    pub quanta_rate_mean_qph: f64,
    pub quanta_rate_sd_qph: f64,
    pub cough_radius_m: f64,
    pub mixing_tau_s: f64,
    pub breath_base_m3ph: f64,
    pub breath_spread: f64,
    pub seat_rows: usize,
    pub seat_cols: usize,
    pub seat_pitch_x_m: f64,
    pub seat_pitch_y_m: f64,
    pub seed: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            room_length_m: 8.0,
            room_width_m: 6.0,
            room_height_m: 2.75,
            ach_per_hour: 4.0,
            airflow_m3_per_s: None,
            n_agents: 20,
            duration_s: 1800,
            cough_interval_s: 10,
            quanta_rate_mean_qph: 570.0,
            quanta_rate_sd_qph: 143.0,
            cough_radius_m: 1.3,
            mixing_tau_s: 5.0,
            breath_base_m3ph: 0.36,
            breath_spread: 0.3,
            seat_rows: 5,
            seat_cols: 7,
            seat_pitch_x_m: 0.65,
            seat_pitch_y_m: 1.4,
            seed: 42,
        }
    }
}

/// Default scenario: 8 x 6 x 2.75 m room, 4 ACH, 20 people on 35 seats, 30 minutes.
pub fn default_config() -> ScenarioConfig {
    ScenarioConfig::default()
}

impl ScenarioConfig {
    /// Simulation step length in seconds. Not configurable.
    pub const STEP_DT_S: f64 = 1.0;

    /// Always exactly one infector.
    pub const N_INFECTORS: usize = 1;

    pub fn room_volume(&self) -> f64 {
        self.room_length_m * self.room_width_m * self.room_height_m
    }

    /// Ventilation flow in m³/s: the override if present, else `ACH * V / 3600`.
    pub fn airflow(&self) -> f64 {
        self.airflow_m3_per_s
            .unwrap_or(self.ach_per_hour * self.room_volume() / 3600.0)
    }

    pub fn cough_zone_volume(&self) -> f64 {
        std::f64::consts::PI * self.cough_radius_m.powi(2) * self.room_height_m
    }

    pub fn steps(&self) -> u64 {
        (self.duration_s as f64 / Self::STEP_DT_S) as u64
    }

    pub fn seat_count(&self) -> usize {
        self.seat_rows * self.seat_cols
    }

    /// Mean quanta released per cough, in milliquanta.
    pub fn cough_mean_mq(&self) -> f64 {
        self.quanta_rate_mean_qph * 1000.0 * self.cough_interval_s as f64 / 3600.0
    }

    /// Standard deviation of the per-cough release, in milliquanta.
    pub fn cough_sd_mq(&self) -> f64 {
        self.quanta_rate_sd_qph * 1000.0 * self.cough_interval_s as f64 / 3600.0
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Constraint(format!("{name} must be > 0, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Constraint(format!("{name} must be >= 0, got {v}")))
            }
        }

        positive("room_length_m", self.room_length_m)?;
        positive("room_width_m", self.room_width_m)?;
        positive("room_height_m", self.room_height_m)?;
        non_negative("ach_per_hour", self.ach_per_hour)?;
        if let Some(flow) = self.airflow_m3_per_s {
            non_negative("airflow_m3_per_s", flow)?;
        }
        non_negative("quanta_rate_mean_qph", self.quanta_rate_mean_qph)?;
        non_negative("quanta_rate_sd_qph", self.quanta_rate_sd_qph)?;
        positive("cough_radius_m", self.cough_radius_m)?;
        positive("mixing_tau_s", self.mixing_tau_s)?;
        non_negative("breath_base_m3ph", self.breath_base_m3ph)?;
        non_negative("breath_spread", self.breath_spread)?;
        non_negative("seat_pitch_x_m", self.seat_pitch_x_m)?;
        non_negative("seat_pitch_y_m", self.seat_pitch_y_m)?;

        if self.n_agents < 1 {
            return Err(Error::Constraint("n_agents must be >= 1".into()));
        }
        if self.seat_rows < 1 || self.seat_cols < 1 {
            return Err(Error::Constraint(
                "seat_rows and seat_cols must be >= 1".into(),
            ));
        }
        if self.n_agents > self.seat_count() {
            return Err(Error::Constraint(format!(
                "n_agents ({}) must not exceed seat_rows * seat_cols ({})",
                self.n_agents,
                self.seat_count()
            )));
        }
        if self.duration_s == 0 {
            return Err(Error::Constraint(
                "duration_s must be a positive multiple of the 1 s step".into(),
            ));
        }
        if self.cough_interval_s == 0 {
            return Err(Error::Constraint("cough_interval_s must be >= 1".into()));
        }
        let diameter = 2.0 * self.cough_radius_m;
        if diameter > self.room_length_m || diameter > self.room_width_m {
            return Err(Error::Constraint(format!(
                "cough cylinder diameter {diameter} m does not fit the {} x {} m floor",
                self.room_length_m, self.room_width_m
            )));
        }
        if self.cough_zone_volume() >= self.room_volume() {
            return Err(Error::Constraint(
                "cough cylinder volume must be smaller than the room volume".into(),
            ));
        }
        let flow = self.airflow() * Self::STEP_DT_S;
        if flow >= self.room_volume() {
            return Err(Error::Constraint(format!(
                "airflow of {flow} m³ per step must be smaller than the room volume"
            )));
        }
        seat_positions(self).map(|_| ())
    }

    /// Renders the config in the `key = value` document format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("room_length_m", self.room_length_m.to_string());
        put("room_width_m", self.room_width_m.to_string());
        put("room_height_m", self.room_height_m.to_string());
        put("ach_per_hour", self.ach_per_hour.to_string());
        if let Some(flow) = self.airflow_m3_per_s {
            put("airflow_m3_per_s", flow.to_string());
        }
        put("n_agents", self.n_agents.to_string());
        put("duration_s", self.duration_s.to_string());
        put("cough_interval_s", self.cough_interval_s.to_string());
        put(
            "quanta_rate_mean_qph",
            self.quanta_rate_mean_qph.to_string(),
        );
        put("quanta_rate_sd_qph", self.quanta_rate_sd_qph.to_string());
        put("cough_radius_m", self.cough_radius_m.to_string());
        put("mixing_tau_s", self.mixing_tau_s.to_string());
        put("breath_base_m3ph", self.breath_base_m3ph.to_string());
        put("breath_spread", self.breath_spread.to_string());
        put("seat_rows", self.seat_rows.to_string());
        put("seat_cols", self.seat_cols.to_string());
        put("seat_pitch_x_m", self.seat_pitch_x_m.to_string());
        put("seat_pitch_y_m", self.seat_pitch_y_m.to_string());
        put("seed", self.seed.to_string());
        out
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::InvalidValue {
        key: key.to_string(),
        message: format!("`{raw}`: {e}"),
    })
}

/// Parses a `key = value` document on top of the defaults and validates it.
///
/// `#` starts a comment anywhere on a line. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Syntax {
                line: lineno + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "room_length_m" => cfg.room_length_m = parse_value(key, value)?,
            "room_width_m" => cfg.room_width_m = parse_value(key, value)?,
            "room_height_m" => cfg.room_height_m = parse_value(key, value)?,
            "ach_per_hour" => cfg.ach_per_hour = parse_value(key, value)?,
            "airflow_m3_per_s" => cfg.airflow_m3_per_s = Some(parse_value(key, value)?),
            "n_agents" => cfg.n_agents = parse_value(key, value)?,
            "n_infectors" => {
                let n: usize = parse_value(key, value)?;
                if n != ScenarioConfig::N_INFECTORS {
                    return Err(Error::Constraint(format!(
                        "n_infectors is fixed at 1, got {n}"
                    )));
                }
            }
            "duration_s" => cfg.duration_s = parse_value(key, value)?,
            "cough_interval_s" => cfg.cough_interval_s = parse_value(key, value)?,
            "quanta_rate_mean_qph" => cfg.quanta_rate_mean_qph = parse_value(key, value)?,
            "quanta_rate_sd_qph" => cfg.quanta_rate_sd_qph = parse_value(key, value)?,
            "cough_radius_m" => cfg.cough_radius_m = parse_value(key, value)?,
            "mixing_tau_s" => cfg.mixing_tau_s = parse_value(key, value)?,
            "breath_base_m3ph" => cfg.breath_base_m3ph = parse_value(key, value)?,
            "breath_spread" => cfg.breath_spread = parse_value(key, value)?,
            "seat_rows" => cfg.seat_rows = parse_value(key, value)?,
            "seat_cols" => cfg.seat_cols = parse_value(key, value)?,
            "seat_pitch_x_m" => cfg.seat_pitch_x_m = parse_value(key, value)?,
            "seat_pitch_y_m" => cfg.seat_pitch_y_m = parse_value(key, value)?,
            "seed" => cfg.seed = parse_value(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A floor position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Seat coordinates, indexed row-major (`row * seat_cols + col`).
#[derive(Debug, Clone, PartialEq)]
pub struct SeatLayout {
    pub cols: usize,
    pub seats: Vec<Point>,
}

impl SeatLayout {
    pub fn len(&self) -> usize {
        self.seats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }

    /// `(row, col)` of a seat index.
    pub fn row_col(&self, seat: usize) -> (usize, usize) {
        (seat / self.cols, seat % self.cols)
    }
}

/// A `seat_rows x seat_cols` grid centered on the floor.
pub fn seat_positions(config: &ScenarioConfig) -> Result<SeatLayout> {
    let rows = config.seat_rows;
    let cols = config.seat_cols;
    let span_x = (cols - 1) as f64 * config.seat_pitch_x_m;
    let span_y = (rows - 1) as f64 * config.seat_pitch_y_m;
    if span_x >= config.room_length_m || span_y >= config.room_width_m {
        return Err(Error::Constraint(format!(
            "seat grid {span_x} x {span_y} m exceeds the {} x {} m floor",
            config.room_length_m, config.room_width_m
        )));
    }
    if (cols > 1 && config.seat_pitch_x_m <= 0.0) || (rows > 1 && config.seat_pitch_y_m <= 0.0) {
        return Err(Error::Constraint(
            "seat pitch must be > 0 along any axis with more than one seat".into(),
        ));
    }
    let cx = config.room_length_m / 2.0;
    let cy = config.room_width_m / 2.0;
    let mid_col = (cols - 1) as f64 / 2.0;
    let mid_row = (rows - 1) as f64 / 2.0;
    let seats = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| Point {
            x: cx + (c as f64 - mid_col) * config.seat_pitch_x_m,
            y: cy + (r as f64 - mid_row) * config.seat_pitch_y_m,
        })
        .collect();
    Ok(SeatLayout { cols, seats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Infector,
    Susceptible,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Infector => "infector",
            Role::Susceptible => "susceptible",
        }
    }
}

/// Weight quartile, 1 (lightest) to 4 (heaviest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightClass(u8);

impl WeightClass {
    pub const ALL: [WeightClass; 4] = [
        WeightClass(1),
        WeightClass(2),
        WeightClass(3),
        WeightClass(4),
    ];

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

/// Quartile of the weight fraction; half-open bins with a closed top.
pub fn classify_weight(u: f64) -> Result<WeightClass> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!(
            "weight fraction must lie in [0, 1], got {u}"
        )));
    }
    let class = if u < 0.25 {
        1
    } else if u < 0.5 {
        2
    } else if u < 0.75 {
        3
    } else {
        4
    };
    Ok(WeightClass(class))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub id: usize,
    pub role: Role,
    pub seat: usize,
    /// Position of the agent's mass within the population range, in `[0, 1]`.
    pub weight_fraction: f64,
    pub breath_rate_m3ph: f64,
}

impl AgentSpec {
    pub fn weight_class(&self) -> WeightClass {
        classify_weight(self.weight_fraction).expect("weight fraction drawn in [0, 1)")
    }
}

pub fn breath_rate(config: &ScenarioConfig, weight_fraction: f64) -> f64 {
    config.breath_base_m3ph * (1.0 + config.breath_spread * weight_fraction)
}

/// Seats `n_agents` people on distinct seats and draws their weights.
///
/// Seats come from one shuffle of all seat indices; then one uniform per
/// agent gives its weight fraction. Agent 0 is the infector.
pub fn populate(config: &ScenarioConfig, rng: &mut MersenneTwister) -> Vec<AgentSpec> {
    let seats = rng.shuffle(config.seat_count());
    let mut agents = Vec::with_capacity(config.n_agents);
    for (id, &seat) in seats.iter().take(config.n_agents).enumerate() {
        let weight_fraction = rng.uniform01();
        agents.push(AgentSpec {
            id,
            role: if id < ScenarioConfig::N_INFECTORS {
                Role::Infector
            } else {
                Role::Susceptible
            },
            seat,
            weight_fraction,
            breath_rate_m3ph: breath_rate(config, weight_fraction),
        });
    }
    agents
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn defaults_match_waiting_room() {
        let cfg = default_config();
        assert_relative_eq!(cfg.room_volume(), 132.0);
        assert_eq!(cfg.seat_count(), 35);
        assert_relative_eq!(cfg.airflow(), 0.146667, max_relative = 1e-5);
        assert_eq!(cfg.steps(), 1800);
        assert_relative_eq!(cfg.cough_mean_mq(), 1583.33, max_relative = 1e-5);
        assert_relative_eq!(cfg.cough_sd_mq(), 397.2, max_relative = 1e-3);
        cfg.validate().unwrap();
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(parse_config("").unwrap(), default_config());
        assert_eq!(
            parse_config("# nothing\n\n   \n").unwrap(),
            default_config()
        );
    }

    #[test]
    fn taller_room() {
        let cfg = parse_config("room_height_m = 5.0").unwrap();
        assert_relative_eq!(cfg.room_volume(), 240.0);
    }

    #[test]
    fn whitespace_and_comments() {
        let cfg = parse_config("  n_agents=10   # fewer people\nseed   =   7").unwrap();
        assert_eq!(cfg.n_agents, 10);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn second_infector_rejected() {
        let err = parse_config("n_infectors = 2").unwrap_err();
        assert!(err.to_string().contains("fixed at 1"), "{err}");
        assert!(parse_config("n_infectors = 1").is_ok());
    }

    #[test]
    fn unknown_key_named() {
        let err = parse_config("ceiling_fans = 3").unwrap_err();
        assert!(matches!(err, Error::UnknownKey(ref k) if k == "ceiling_fans"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_config("n_agents 10"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("n_agents = ten"),
            Err(Error::InvalidValue { .. })
        ));
    }

    #[test]
    fn constraint_violations() {
        for doc in [
            "n_agents = 36",
            "n_agents = 0",
            "room_height_m = 0",
            "ach_per_hour = -1",
            "duration_s = 0",
            "cough_interval_s = 0",
            "mixing_tau_s = 0",
            "cough_radius_m = 4",
            "seat_pitch_x_m = 2.0",
            "airflow_m3_per_s = 200",
        ] {
            assert!(
                matches!(parse_config(doc), Err(Error::Constraint(_))),
                "{doc} should violate a constraint"
            );
        }
    }

    #[test]
    fn render_round_trips() {
        let cfg = default_config();
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
        let cfg = ScenarioConfig {
            airflow_m3_per_s: Some(0.1466666),
            room_height_m: 3.5,
            ..default_config()
        };
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn default_layout() {
        let cfg = default_config();
        let layout = seat_positions(&cfg).unwrap();
        assert_eq!(layout.len(), 35);
        assert_relative_eq!(
            layout.seats[0].distance(layout.seats[1]),
            0.65,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            layout.seats[0].distance(layout.seats[2]),
            1.3,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            layout.seats[0].distance(layout.seats[7]),
            1.4,
            epsilon = 1e-12
        );
        for p in &layout.seats {
            assert!(p.x > 0.0 && p.x < cfg.room_length_m);
            assert!(p.y > 0.0 && p.y < cfg.room_width_m);
        }
        assert_eq!(layout.row_col(9), (1, 2));
    }

    #[test]
    fn single_seat_is_centered() {
        let cfg = ScenarioConfig {
            seat_rows: 1,
            seat_cols: 1,
            n_agents: 1,
            ..default_config()
        };
        let layout = seat_positions(&cfg).unwrap();
        assert_eq!(layout.seats, vec![Point { x: 4.0, y: 3.0 }]);
    }

    #[test]
    fn full_room_occupies_every_seat() {
        let cfg = ScenarioConfig {
            n_agents: 35,
            ..default_config()
        };
        let agents = populate(&cfg, &mut MersenneTwister::new(1));
        let mut seats: Vec<_> = agents.iter().map(|a| a.seat).collect();
        seats.sort_unstable();
        assert_eq!(seats, (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn breath_rate_spread() {
        let cfg = default_config();
        assert_relative_eq!(breath_rate(&cfg, 0.0), 0.36);
        assert_relative_eq!(breath_rate(&cfg, 1.0), 0.468);
        assert_relative_eq!(breath_rate(&cfg, 1.0) / breath_rate(&cfg, 0.0), 1.3);
    }

    #[test]
    fn population_is_deterministic() {
        let cfg = default_config();
        let a = populate(&cfg, &mut MersenneTwister::new(5));
        let b = populate(&cfg, &mut MersenneTwister::new(5));
        assert_eq!(a, b);
        assert_ne!(a, populate(&cfg, &mut MersenneTwister::new(6)));
    }

    #[test]
    fn weight_classes() {
        assert_eq!(classify_weight(0.10).unwrap().get(), 1);
        assert_eq!(classify_weight(0.0).unwrap().get(), 1);
        assert_eq!(classify_weight(0.25).unwrap().get(), 2);
        assert_eq!(classify_weight(0.5).unwrap().get(), 3);
        assert_eq!(classify_weight(0.75).unwrap().get(), 4);
        assert_eq!(classify_weight(1.0).unwrap().get(), 4);
        assert!(classify_weight(-0.01).is_err());
        assert!(classify_weight(1.01).is_err());
        assert!(classify_weight(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn population_invariants(seed in any::<u32>(), n in 1usize..=35, spread in 0.0f64..1.0) {
            let cfg = ScenarioConfig { n_agents: n, breath_spread: spread, ..default_config() };
            let agents = populate(&cfg, &mut MersenneTwister::new(seed));
            prop_assert_eq!(agents.len(), n);
            prop_assert_eq!(agents.iter().filter(|a| a.role == Role::Infector).count(), 1);
            let mut seats: Vec<_> = agents.iter().map(|a| a.seat).collect();
            seats.sort_unstable();
            seats.dedup();
            prop_assert_eq!(seats.len(), n);
            let hi = cfg.breath_base_m3ph * (1.0 + spread);
            for a in &agents {
                prop_assert!(a.breath_rate_m3ph >= cfg.breath_base_m3ph && a.breath_rate_m3ph <= hi);
            }
        }

        #[test]
        fn weight_classes_partition(u in 0.0f64..=1.0) {
            let class = classify_weight(u).unwrap().get();
            let lo = (class - 1) as f64 * 0.25;
            prop_assert!(u >= lo);
            prop_assert!(u < lo + 0.25 || (class == 4 && u <= 1.0));
        }
    }
}

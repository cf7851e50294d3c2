//! The per-second simulation loop.
//!
//! Each step draws a random order over every agent plus one ventilation
//! actor. Agents breathe from the zone they sit in; the infector also coughs
//! whenever the end of the step falls on a cough boundary. After all actors
//! have run, the two air zones mix once, and the step's air snapshot is
//! recorded.

use crate::air::{AirState, Zone};
use crate::error::{Error, Result};
use crate::rng::MersenneTwister;
use crate::scenario::{self, AgentSpec, Point, Role, ScenarioConfig, SeatLayout, WeightClass};

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub spec: AgentSpec,
    pub position: Point,
    pub zone: Zone,
    /// Air drawn per step, m³.
    pub tidal_volume_per_step: f64,
    pub cumulative_dose: f64,
}

impl Agent {
    pub fn in_cough_zone(&self) -> bool {
        self.zone == Zone::Cough
    }

    pub fn is_infector(&self) -> bool {
        self.spec.role == Role::Infector
    }
}

/// Running totals of every quanta flow into and out of the air.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuantaLedger {
    pub injected: f64,
    pub inhaled: f64,
    pub ventilated: f64,
}

impl QuantaLedger {
    /// What the air should hold if nothing leaked.
    pub fn balance(&self) -> f64 {
        self.injected - self.inhaled - self.ventilated
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// 1-based index of the completed step.
    pub step: u64,
    pub t_s: f64,
    pub cough_zone_mq: f64,
    pub bulk_mq: f64,
    pub total_mq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRecord {
    pub agent_id: usize,
    pub role: Role,
    pub weight_fraction: f64,
    pub weight_class: WeightClass,
    pub seat: usize,
    pub seat_row: usize,
    pub seat_col: usize,
    pub in_cough_zone: bool,
    pub breath_rate_m3ph: f64,
    pub dose_mq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub seed: u32,
    pub steps: Vec<StepRecord>,
    pub agents: Vec<AgentRecord>,
    pub coughs: u64,
    pub truncated_coughs: u64,
    pub ledger: QuantaLedger,
}

impl RunResult {
    pub fn final_total_mq(&self) -> f64 {
        self.steps.last().map_or(0.0, |r| r.total_mq)
    }

    pub fn susceptibles(&self) -> impl Iterator<Item = &AgentRecord> {
        self.agents.iter().filter(|a| a.role == Role::Susceptible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoughDraw {
    pub amount: f64,
    pub truncated: bool,
}

/// One cough's release in milliquanta, `max(0, Normal(mean, sd))`.
pub fn cough_amount(rng: &mut MersenneTwister, mean_mq: f64, sd_mq: f64) -> Result<CoughDraw> {
    Ok(clamp_cough(rng.normal(mean_mq, sd_mq)?))
}

fn clamp_cough(raw: f64) -> CoughDraw {
    if raw < 0.0 {
        CoughDraw {
            amount: 0.0,
            truncated: true,
        }
    } else {
        CoughDraw {
            amount: raw,
            truncated: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    seed: u32,
    layout: SeatLayout,
    air: AirState,
    agents: Vec<Agent>,
    rng: MersenneTwister,
    step_index: u64,
    total_steps: u64,
    ledger: QuantaLedger,
    coughs: u64,
    truncated_coughs: u64,
    records: Vec<StepRecord>,
}

impl Simulation {
    pub fn new(config: &ScenarioConfig, seed: u32) -> Result<Self> {
        config.validate()?;
        let layout = scenario::seat_positions(config)?;
        let mut rng = MersenneTwister::new(seed);
        let specs = scenario::populate(config, &mut rng);
        let infector = specs
            .iter()
            .find(|a| a.role == Role::Infector)
            .expect("populate always designates an infector");
        let air = AirState::new(config, layout.seats[infector.seat])?;
        let agents = specs
            .into_iter()
            .map(|spec| {
                let position = layout.seats[spec.seat];
                Agent {
                    zone: air.zone_at(position),
                    position,
                    tidal_volume_per_step: spec.breath_rate_m3ph / 3600.0
                        * ScenarioConfig::STEP_DT_S,
                    cumulative_dose: 0.0,
                    spec,
                }
            })
            .collect();
        let total_steps = config.steps();
        Ok(Self {
            config: config.clone(),
            seed,
            layout,
            air,
            agents,
            rng,
            step_index: 0,
            total_steps,
            ledger: QuantaLedger::default(),
            coughs: 0,
            truncated_coughs: 0,
            records: Vec::with_capacity(total_steps as usize),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn air(&self) -> &AirState {
        &self.air
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn layout(&self) -> &SeatLayout {
        &self.layout
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn is_finished(&self) -> bool {
        self.step_index >= self.total_steps
    }

    pub fn ledger(&self) -> QuantaLedger {
        self.ledger
    }

    pub fn coughs(&self) -> u64 {
        self.coughs
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    fn cough_due(&self) -> bool {
        // Steps are whole seconds, so the step's end time is step_index + 1.
        (self.step_index + 1).is_multiple_of(u64::from(self.config.cough_interval_s))
    }

    pub fn step(&mut self) -> Result<()> {
        if self.is_finished() {
            return Err(Error::Finished(self.step_index));
        }
        let dt = ScenarioConfig::STEP_DT_S;
        let ventilation_actor = self.agents.len();
        let order = self.rng.shuffle(self.agents.len() + 1);
        let cough_due = self.cough_due();

        for actor in order {
            if actor == ventilation_actor {
                self.ledger.ventilated += self.air.ventilate(dt)?;
                continue;
            }
            if cough_due && self.agents[actor].is_infector() {
                let draw = cough_amount(
                    &mut self.rng,
                    self.config.cough_mean_mq(),
                    self.config.cough_sd_mq(),
                )?;
                self.air.inject_cough(draw.amount)?;
                self.ledger.injected += draw.amount;
                self.coughs += 1;
                self.truncated_coughs += u64::from(draw.truncated);
            }
            let agent = &mut self.agents[actor];
            let dose = self.air.inhale(agent.zone, agent.tidal_volume_per_step)?;
            agent.cumulative_dose += dose;
            self.ledger.inhaled += dose;
        }
        self.air.mix_zones(dt)?;

        self.step_index += 1;
        self.records.push(StepRecord {
            step: self.step_index,
            t_s: self.step_index as f64 * dt,
            cough_zone_mq: self.air.quanta(Zone::Cough),
            bulk_mq: self.air.quanta(Zone::Bulk),
            total_mq: self.air.total_quanta(),
        });
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    pub fn agent_records(&self) -> Vec<AgentRecord> {
        self.agents
            .iter()
            .map(|a| {
                let (seat_row, seat_col) = self.layout.row_col(a.spec.seat);
                AgentRecord {
                    agent_id: a.spec.id,
                    role: a.spec.role,
                    weight_fraction: a.spec.weight_fraction,
                    weight_class: a.spec.weight_class(),
                    seat: a.spec.seat,
                    seat_row,
                    seat_col,
                    in_cough_zone: a.in_cough_zone(),
                    breath_rate_m3ph: a.spec.breath_rate_m3ph,
                    dose_mq: a.cumulative_dose,
                }
            })
            .collect()
    }

    pub fn into_result(self) -> RunResult {
        let agents = self.agent_records();
        RunResult {
            config: self.config,
            seed: self.seed,
            steps: self.records,
            agents,
            coughs: self.coughs,
            truncated_coughs: self.truncated_coughs,
            ledger: self.ledger,
        }
    }
}

/// Runs one full simulation.
pub fn run(config: &ScenarioConfig, seed: u32) -> Result<RunResult> {
    let mut sim = Simulation::new(config, seed)?;
    sim.run_to_end()?;
    Ok(sim.into_result())
}

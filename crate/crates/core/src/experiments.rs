//! Replicated parameter sweeps: seat placement, crowd density and room volume.
//!
//! Replication `r` of any cell runs with seed `base_seed + r` (wrapping).
//! Replications may execute on a thread pool, but results are always folded
//! in replication order, so reports do not depend on scheduling.

use rayon::prelude::*;

use crate::engine::{self, AgentRecord, RunResult};
use crate::error::{Error, Result};
use crate::scenario::{Role, ScenarioConfig, WeightClass};

pub const DENSITY_AGENT_COUNTS: [usize; 3] = [10, 20, 35];
pub const DENSITY_REPLICATIONS: usize = 10;
pub const VOLUME_HEIGHTS_M: [f64; 4] = [2.40, 2.75, 3.5, 5.0];
pub const VOLUME_AGENT_COUNTS: [usize; 3] = [10, 20, 35];
pub const VOLUME_REPLICATIONS: usize = 20;
pub const PLACEMENT_MIN_SAMPLES: usize = 20;
/// Upper bound on placement replications before giving up.
pub const PLACEMENT_MAX_REPLICATIONS: usize = 10_000;
const PLACEMENT_BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum ExperimentKind {
    Placement,
    Density,
    Volume,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Placement => "placement",
            ExperimentKind::Density => "density",
            ExperimentKind::Volume => "volume",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentOptions {
    pub parallelism: Parallelism,
    /// Replications per cell for density and volume sweeps; minimum samples
    /// per cell for the placement study. `None` uses the standard design.
    pub replications: Option<usize>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            parallelism: Parallelism::Parallel,
            replications: None,
        }
    }
}

/// Sample count, mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

impl CellStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                n,
                mean: None,
                sd: None,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = (n > 1).then(|| {
            let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            (ss / (n - 1) as f64).sqrt()
        });
        Self {
            n,
            mean: Some(mean),
            sd,
        }
    }

    fn per_volume(self, volume_m3: f64) -> Self {
        Self {
            n: self.n,
            mean: self.mean.map(|m| m / volume_m3),
            sd: self.sd.map(|s| s / volume_m3),
        }
    }
}

/// Per-class statistics over susceptible dose records, classes 1..=4 in order.
///
/// Records are sorted by value before summing, so the result does not depend
/// on record order.
pub fn aggregate_by_class<'a, I>(records: I) -> [CellStats; 4]
where
    I: IntoIterator<Item = &'a AgentRecord>,
{
    let mut buckets: [Vec<f64>; 4] = Default::default();
    for r in records.into_iter().filter(|r| r.role == Role::Susceptible) {
        buckets[r.weight_class.index()].push(r.dose_mq);
    }
    buckets.map(|mut values| {
        values.sort_by(f64::total_cmp);
        CellStats::from_values(&values)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellKey {
    Placement { class: WeightClass, inside: bool },
    Density { n_agents: usize, class: WeightClass },
    Volume { volume_m3: f64, n_agents: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Milliquanta,
    MilliquantaPerM3,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Milliquanta => "mq",
            Unit::MilliquantaPerM3 => "mq/m3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub key: CellKey,
    pub stats: CellStats,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub cells: Vec<ReportCell>,
    /// Seeds of every replication that contributed, ascending.
    pub seeds: Vec<u32>,
}

impl ExperimentReport {
    pub fn cell(&self, key: CellKey) -> Option<&ReportCell> {
        self.cells.iter().find(|c| c.key == key)
    }

    /// Volume sweep only: the same grid as mean concentration (quanta / V).
    pub fn concentration(&self) -> Option<ExperimentReport> {
        if self.kind != ExperimentKind::Volume {
            return None;
        }
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let CellKey::Volume { volume_m3, .. } = c.key else {
                    unreachable!("volume report holds volume cells")
                };
                ReportCell {
                    key: c.key,
                    stats: c.stats.per_volume(volume_m3),
                    unit: Unit::MilliquantaPerM3,
                }
            })
            .collect();
        Some(ExperimentReport {
            kind: self.kind,
            cells,
            seeds: self.seeds.clone(),
        })
    }
}

fn replication_seed(base_seed: u32, replication: usize) -> u32 {
    base_seed.wrapping_add(replication as u32)
}

/// Runs replications `range` of `config` and maps each result, in order.
fn replicate<T, F>(
    config: &ScenarioConfig,
    base_seed: u32,
    range: std::ops::Range<usize>,
    parallelism: Parallelism,
    summarize: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RunResult) -> T + Sync,
{
    let one = |r: usize| engine::run(config, replication_seed(base_seed, r)).map(&summarize);
    match parallelism {
        Parallelism::Sequential => range.map(one).collect(),
        Parallelism::Parallel => range.into_par_iter().map(one).collect(),
    }
}

fn seeds(base_seed: u32, count: usize) -> Vec<u32> {
    (0..count).map(|r| replication_seed(base_seed, r)).collect()
}

/// Mean dose per weight class, split by whether the agent sits in the cough zone.
///
/// Whole replications are added until every one of the eight cells holds at
/// least the minimum number of susceptible samples.
pub fn placement_experiment(
    base: &ScenarioConfig,
    base_seed: u32,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    base.validate()?;
    let min_samples = options.replications.unwrap_or(PLACEMENT_MIN_SAMPLES);
    // [class][outside, inside]
    let mut samples: [[Vec<f64>; 2]; 4] = Default::default();
    let mut used = 0usize;
    let enough = |s: &[[Vec<f64>; 2]; 4]| s.iter().flatten().all(|v| v.len() >= min_samples);

    'outer: while !enough(&samples) {
        if used >= PLACEMENT_MAX_REPLICATIONS {
            return Err(Error::Experiment(format!(
                "placement cells still under {min_samples} samples after {used} replications"
            )));
        }
        let end = (used + PLACEMENT_BATCH).min(PLACEMENT_MAX_REPLICATIONS);
        let batch = replicate(base, base_seed, used..end, options.parallelism, |r| {
            r.agents
        })?;
        for agents in batch {
            for a in agents.iter().filter(|a| a.role == Role::Susceptible) {
                samples[a.weight_class.index()][usize::from(a.in_cough_zone)].push(a.dose_mq);
            }
            used += 1;
            if enough(&samples) {
                break 'outer;
            }
        }
    }

    let mut cells = Vec::with_capacity(8);
    for class in WeightClass::ALL {
        for inside in [false, true] {
            cells.push(ReportCell {
                key: CellKey::Placement { class, inside },
                stats: CellStats::from_values(&samples[class.index()][usize::from(inside)]),
                unit: Unit::Milliquanta,
            });
        }
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Placement,
        cells,
        seeds: seeds(base_seed, used),
    })
}

/// Mean dose per weight class for 10, 20 and 35 people, placement ignored.
pub fn density_experiment(
    base: &ScenarioConfig,
    base_seed: u32,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let reps = options.replications.unwrap_or(DENSITY_REPLICATIONS);
    let mut cells = Vec::with_capacity(DENSITY_AGENT_COUNTS.len() * 4);
    for n_agents in DENSITY_AGENT_COUNTS {
        let config = ScenarioConfig {
            n_agents,
            ..base.clone()
        };
        config.validate()?;
        let agents: Vec<AgentRecord> =
            replicate(&config, base_seed, 0..reps, options.parallelism, |r| {
                r.agents
            })?
            .into_iter()
            .flatten()
            .collect();
        for (class, stats) in WeightClass::ALL
            .into_iter()
            .zip(aggregate_by_class(&agents))
        {
            cells.push(ReportCell {
                key: CellKey::Density { n_agents, class },
                stats,
                unit: Unit::Milliquanta,
            });
        }
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Density,
        cells,
        seeds: seeds(base_seed, reps),
    })
}

/// Mean final room quanta over four ceiling heights and three crowd sizes.
///
/// The ventilation flow is pinned to the base room's flow in every cell, so
/// taller rooms are ventilated at fewer air changes per hour.
pub fn volume_experiment(
    base: &ScenarioConfig,
    base_seed: u32,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let reps = options.replications.unwrap_or(VOLUME_REPLICATIONS);
    let airflow = base.airflow();
    let mut cells = Vec::with_capacity(VOLUME_HEIGHTS_M.len() * VOLUME_AGENT_COUNTS.len());
    for height in VOLUME_HEIGHTS_M {
        for n_agents in VOLUME_AGENT_COUNTS {
            let config = ScenarioConfig {
                room_height_m: height,
                airflow_m3_per_s: Some(airflow),
                n_agents,
                ..base.clone()
            };
            config.validate()?;
            let totals = replicate(&config, base_seed, 0..reps, options.parallelism, |r| {
                r.final_total_mq()
            })?;
            cells.push(ReportCell {
                key: CellKey::Volume {
                    volume_m3: config.room_volume(),
                    n_agents,
                },
                stats: CellStats::from_values(&totals),
                unit: Unit::Milliquanta,
            });
        }
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Volume,
        cells,
        seeds: seeds(base_seed, reps),
    })
}

pub fn run_experiment(
    kind: ExperimentKind,
    base: &ScenarioConfig,
    base_seed: u32,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Placement => placement_experiment(base, base_seed, options),
        ExperimentKind::Density => density_experiment(base, base_seed, options),
        ExperimentKind::Volume => volume_experiment(base, base_seed, options),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{classify_weight, default_config};
    use approx::assert_relative_eq;

    fn record(class_u: f64, dose: f64, role: Role) -> AgentRecord {
        AgentRecord {
            agent_id: 0,
            role,
            weight_fraction: class_u,
            weight_class: classify_weight(class_u).unwrap(),
            seat: 0,
            seat_row: 0,
            seat_col: 0,
            in_cough_zone: false,
            breath_rate_m3ph: 0.4,
            dose_mq: dose,
        }
    }

    #[test]
    fn single_record() {
        let stats = aggregate_by_class(&[record(0.3, 120.0, Role::Susceptible)]);
        assert_eq!(
            stats[1],
            CellStats {
                n: 1,
                mean: Some(120.0),
                sd: None
            }
        );
        assert_eq!(
            stats[0],
            CellStats {
                n: 0,
                mean: None,
                sd: None
            }
        );
    }

    #[test]
    fn two_records() {
        let recs = [
            record(0.1, 100.0, Role::Susceptible),
            record(0.2, 140.0, Role::Susceptible),
        ];
        let stats = aggregate_by_class(&recs);
        assert_eq!(stats[0].n, 2);
        assert_eq!(stats[0].mean, Some(120.0));
        assert_relative_eq!(stats[0].sd.unwrap(), 28.284, max_relative = 1e-4);
    }

    #[test]
    fn infector_excluded() {
        let recs = [
            record(0.1, 100.0, Role::Susceptible),
            record(0.1, 900.0, Role::Infector),
        ];
        assert_eq!(aggregate_by_class(&recs)[0].mean, Some(100.0));
    }

    #[test]
    fn order_independent() {
        let recs: Vec<_> = (0..40)
            .map(|i| {
                record(
                    (i % 4) as f64 * 0.25 + 0.1,
                    100.0 + (i * 37 % 11) as f64 * 0.1,
                    Role::Susceptible,
                )
            })
            .collect();
        let mut reversed = recs.clone();
        reversed.reverse();
        assert_eq!(aggregate_by_class(&recs), aggregate_by_class(&reversed));
    }

    #[test]
    fn report_shapes() {
        let cfg = default_config();
        let opts = ExperimentOptions {
            replications: Some(2),
            ..Default::default()
        };
        let density = density_experiment(&cfg, 1, &opts).unwrap();
        assert_eq!(density.cells.len(), 12);
        assert_eq!(density.seeds, vec![1, 2]);
        let volume = volume_experiment(&cfg, 1, &opts).unwrap();
        assert_eq!(volume.cells.len(), 12);
        let conc = volume.concentration().unwrap();
        for (q, c) in volume.cells.iter().zip(&conc.cells) {
            let CellKey::Volume { volume_m3, .. } = q.key else {
                panic!()
            };
            assert_eq!(c.stats.mean.unwrap(), q.stats.mean.unwrap() / volume_m3);
        }
        assert!(density.concentration().is_none());
        let placement = placement_experiment(
            &cfg,
            1,
            &ExperimentOptions {
                replications: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(placement.cells.len(), 8);
        assert!(placement.cells.iter().all(|c| c.stats.n >= 3));
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = ScenarioConfig {
            duration_s: 300,
            ..default_config()
        };
        for kind in [
            ExperimentKind::Placement,
            ExperimentKind::Density,
            ExperimentKind::Volume,
        ] {
            let seq = ExperimentOptions {
                parallelism: Parallelism::Sequential,
                replications: Some(3),
            };
            let par = ExperimentOptions {
                parallelism: Parallelism::Parallel,
                replications: Some(3),
            };
            assert_eq!(
                run_experiment(kind, &cfg, 7, &seq).unwrap(),
                run_experiment(kind, &cfg, 7, &par).unwrap()
            );
        }
    }

    #[test]
    fn seeds_wrap() {
        assert_eq!(replication_seed(u32::MAX, 2), 1);
    }
}

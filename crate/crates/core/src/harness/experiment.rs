//! Variants x seeds x sweep points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{MetricsReport, RunMetrics, SuccessUnit};
use super::scenario::{Scenario, ScenarioError};
use crate::llde::{CycleRecord, DelayMode};
use crate::resilience::MechanismVariant;
use crate::sim::RunLog;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Use the first `k` flows of the scenario.
    Flows,
    /// Set every random event generator to `k` events.
    Events,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Flows => "flows",
            SweepParam::Events => "events",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<u32>,
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.values.iter().map(u32::to_string).collect();
        write!(f, "{}={}", self.param.name(), vals.join(","))
    }
}

/// `flows=2..10` (inclusive), `events=1,3,5` or `events=4`.
impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep `{s}`: expected PARAM=RANGE"))?;
        let param = match name.trim() {
            "flows" => SweepParam::Flows,
            "events" => SweepParam::Events,
            other => return Err(format!("sweep parameter `{other}`: expected flows or events")),
        };
        let num = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("sweep `{s}`: `{t}` is not a count"))
        };
        let values = if let Some((a, b)) = range.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("sweep `{s}`: empty range"));
            }
            (a..=b).collect()
        } else {
            range.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        Ok(Sweep { param, values })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Skip the halving in link-delay estimation.
    pub raw_delay: bool,
    pub success_unit: SuccessUnit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub variants: Vec<MechanismVariant>,
    pub seeds: Vec<u64>,
    pub sweep: Option<Sweep>,
    pub options: RunOptions,
}

impl ExperimentSpec {
    /// Variants and seeds as the scenario file declares them.
    pub fn from_scenario(s: &Scenario) -> Self {
        ExperimentSpec {
            variants: s.run.variants.clone(),
            seeds: s.seeds(),
            sweep: None,
            options: RunOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// One per (sweep point, variant), sweep-major.
    pub reports: Vec<MetricsReport>,
    pub runs: Vec<RunMetrics>,
    /// Cost-matrix records of the first run.
    pub first_cycles: Vec<CycleRecord>,
}

impl ExperimentResult {
    pub fn report(&self, variant: MechanismVariant, param: Option<u32>) -> Option<&MetricsReport> {
        self.reports.iter().find(|r| r.variant == variant && r.param == param)
    }

    /// Reports of one variant in sweep order.
    pub fn series(&self, variant: MechanismVariant) -> Vec<&MetricsReport> {
        self.reports.iter().filter(|r| r.variant == variant).collect()
    }
}

/// The scenario as run at one sweep point.
pub fn scenario_at(s: &Scenario, sweep: Option<&Sweep>, value: Option<u32>) -> Result<Scenario, ScenarioError> {
    match (sweep, value) {
        (Some(sw), Some(v)) => match sw.param {
            SweepParam::Flows => s.with_flow_count(v as usize),
            SweepParam::Events => s.with_event_count(v),
        },
        _ => Ok(s.clone()),
    }
}

/// One run to completion.
pub fn run_once(
    s: &Scenario,
    variant: MechanismVariant,
    seed: u64,
    options: RunOptions,
) -> Result<RunLog, ScenarioError> {
    let mode = if options.raw_delay {
        DelayMode::Raw
    } else {
        DelayMode::OneWay
    };
    let mut cfg = s.sim_config(variant, seed, mode);
    // metrics come from online counters; per-packet records are only needed for replay
    cfg.record_packets = false;
    Ok(s.kernel(cfg)?.finish())
}

pub fn run_experiment(s: &Scenario, spec: &ExperimentSpec) -> Result<ExperimentResult, ScenarioError> {
    run_experiment_with(s, spec, |_, _| {})
}

/// Like [`run_experiment`], calling `progress(done, total)` after each run.
pub fn run_experiment_with(
    s: &Scenario,
    spec: &ExperimentSpec,
    mut progress: impl FnMut(usize, usize),
) -> Result<ExperimentResult, ScenarioError> {
    let points: Vec<Option<u32>> = match &spec.sweep {
        Some(sw) => sw.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let total = points.len() * spec.variants.len() * spec.seeds.len();
    let mut runs = Vec::with_capacity(total);
    let mut reports = Vec::new();
    let mut first_cycles = None;
    for &point in &points {
        let sc = scenario_at(s, spec.sweep.as_ref(), point)?;
        for &variant in &spec.variants {
            let start = runs.len();
            for &seed in &spec.seeds {
                let log = run_once(&sc, variant, seed, spec.options)?;
                log::debug!("{variant} {point:?} seed {seed}: {:?}", log.online);
                if first_cycles.is_none() {
                    first_cycles = Some(log.cycles.clone());
                }
                runs.push(RunMetrics::from_log(&log, point));
                progress(runs.len(), total);
            }
            let group: Vec<&RunMetrics> = runs[start..].iter().collect();
            if !group.is_empty() {
                reports.push(MetricsReport::aggregate(&group, spec.options.success_unit));
            }
        }
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        reports,
        runs,
        first_cycles: first_cycles.unwrap_or_default(),
    })
}

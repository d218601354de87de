//! Per-run metrics. The `compute_*` functions work from the recorded
//! packets and contract history alone, so a saved log can be re-scored.

use serde::{Deserialize, Serialize};

use crate::model::Time;
use crate::resilience::{MechanismVariant, RestorationRecord};
use crate::sim::RunLog;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuccessUnit {
    /// Fraction of contract-covered packets delivered within the active requirement.
    #[default]
    Packet,
    /// Fraction of per-cycle contract checks that held.
    Check,
}

impl std::str::FromStr for SuccessUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "packet" => Ok(SuccessUnit::Packet),
            "check" => Ok(SuccessUnit::Check),
            _ => Err(format!("unknown success unit `{s}` (expected packet or check)")),
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn count_satisfied(log: &RunLog, strong: bool) -> (u64, u64) {
    // history is appended in step order, so per-pair lists stay sorted
    let pairs = log
        .contract_history
        .iter()
        .map(|h| h.pair.0 as usize + 1)
        .max()
        .unwrap_or(0);
    let mut per_pair: Vec<Vec<(u64, Time)>> = vec![Vec::new(); pairs];
    for h in &log.contract_history {
        per_pair[h.pair.0 as usize].push((h.step, if strong { h.strong_ped } else { h.active_ped }));
    }
    let (mut covered, mut ok) = (0, 0);
    for p in &log.packets {
        let Some(pair) = log.flow_pairs.get(p.flow.index()).copied().flatten() else {
            continue;
        };
        covered += 1;
        let Some(delay) = p.actual_delay() else { continue };
        let hist = &per_pair[pair.0 as usize];
        let i = hist.partition_point(|(s, _)| *s <= p.step);
        let ped = i.checked_sub(1).map(|i| hist[i].1);
        if ped.is_some_and(|ped| delay <= ped) {
            ok += 1;
        }
    }
    (ok, covered)
}

/// Offline success rate against the requirement active at delivery.
pub fn compute_success_rate(log: &RunLog) -> f64 {
    let (ok, n) = count_satisfied(log, false);
    ratio(ok, n)
}

/// Offline success rate against the strong requirement only.
pub fn compute_strong_success_rate(log: &RunLog) -> f64 {
    let (ok, n) = count_satisfied(log, true);
    ratio(ok, n)
}

/// Delivered bits per second of emulation time.
pub fn compute_throughput(log: &RunLog) -> f64 {
    let bits: u64 = log
        .packets
        .iter()
        .filter(|p| p.delivered_at.is_some())
        .map(|p| p.bits)
        .sum();
    throughput(bits, log.emulation_time)
}

fn throughput(bits: u64, over: Time) -> f64 {
    if over == Time::ZERO {
        0.0
    } else {
        bits as f64 / over.as_secs_f64()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestorationStats {
    /// `None` when nothing was restored.
    pub mean: Option<Time>,
    pub delays: Vec<Time>,
}

pub fn compute_restoration_stats<'a>(records: impl IntoIterator<Item = &'a RestorationRecord>) -> RestorationStats {
    let delays: Vec<Time> = records.into_iter().map(|r| r.total).collect();
    mean_of(delays)
}

pub(crate) fn mean_of(delays: Vec<Time>) -> RestorationStats {
    let mean = if delays.is_empty() {
        None
    } else {
        let sum: u128 = delays.iter().map(|t| t.as_nanos() as u128).sum();
        let n = delays.len() as u128;
        Some(Time::from_nanos(((sum + n / 2) / n) as u64))
    };
    RestorationStats { mean, delays }
}

/// Everything the reports need from one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub variant: MechanismVariant,
    /// Sweep value this run belongs to, if any.
    pub param: Option<u32>,
    pub seed: u64,
    pub success_rate: f64,
    pub strong_success_rate: f64,
    pub check_success_rate: f64,
    /// Bits per second.
    pub throughput: f64,
    pub restorations: Vec<Time>,
    pub warnings: u64,
    pub faults: u64,
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl RunMetrics {
    /// Scores a run from its online counters.
    pub fn from_log(log: &RunLog, param: Option<u32>) -> Self {
        let o = &log.online;
        RunMetrics {
            variant: log.variant,
            param,
            seed: log.seed,
            success_rate: ratio(o.satisfied, o.covered),
            strong_success_rate: ratio(o.strong_satisfied, o.covered),
            check_success_rate: ratio(log.checks.satisfied, log.checks.total),
            throughput: throughput(o.delivered_bits, log.emulation_time),
            restorations: log.restorations().map(|r| r.total).collect(),
            warnings: log.warnings().count() as u64,
            faults: log.faults().count() as u64,
            sent: o.sent,
            delivered: o.delivered,
            dropped: o.dropped,
        }
    }

    pub fn success(&self, unit: SuccessUnit) -> f64 {
        match unit {
            SuccessUnit::Packet => self.success_rate,
            SuccessUnit::Check => self.check_success_rate,
        }
    }
}

/// Seed-averaged metrics of one variant at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: MechanismVariant,
    pub param: Option<u32>,
    pub runs: usize,
    /// In the experiment's success unit.
    pub success_rate: f64,
    pub strong_success_rate: f64,
    pub throughput: f64,
    /// Pooled over all seeds.
    pub restoration: RestorationStats,
    pub warnings: f64,
    pub dropped: f64,
}

impl MetricsReport {
    pub fn aggregate(runs: &[&RunMetrics], unit: SuccessUnit) -> Self {
        assert!(!runs.is_empty(), "aggregate of no runs");
        let n = runs.len() as f64;
        let avg = |f: &dyn Fn(&RunMetrics) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
        MetricsReport {
            variant: runs[0].variant,
            param: runs[0].param,
            runs: runs.len(),
            success_rate: avg(&|r| r.success(unit)),
            strong_success_rate: avg(&|r| r.strong_success_rate),
            throughput: avg(&|r| r.throughput),
            restoration: mean_of(runs.iter().flat_map(|r| r.restorations.iter().copied()).collect()),
            warnings: avg(&|r| r.warnings as f64),
            dropped: avg(&|r| r.dropped as f64),
        }
    }
}

//! Fusion rules: how detector alarms combine into the final alarm.
//!
//! The fusion center only ever sees stopping times (one bit per detector,
//! plus the time it arrived). Ties are broken by detector index.

use std::ops::Range;

use crate::cusum::StoppingRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionKind {
    /// One CUSUM over every sensor.
    Centralized,
    /// One CUSUM per sensor; alarm at the k-th local alarm.
    KthAlarm(usize),
    /// One CUSUM per group; alarm once `quorum` groups have alarmed.
    GroupWise { num_groups: usize, quorum: usize },
}

impl FusionKind {
    /// The second-alarm rule.
    pub const SECOND_ALARM: FusionKind = FusionKind::KthAlarm(2);
    /// Two of three groups.
    pub const TWO_OF_THREE: FusionKind = FusionKind::GroupWise {
        num_groups: 3,
        quorum: 2,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionRule {
    kind: FusionKind,
    threshold: f64,
    sensors: usize,
}

impl FusionRule {
    pub fn new(kind: FusionKind, threshold: f64, sensors: usize) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::config(format!("threshold must be finite, got {threshold}")));
        }
        if sensors == 0 {
            return Err(Error::config("need at least one sensor"));
        }
        match kind {
            FusionKind::Centralized => {}
            FusionKind::KthAlarm(k) => {
                if k < 2 || k > sensors {
                    return Err(Error::config(format!(
                        "k-th alarm rule needs 2 <= k <= N, got k = {k}, N = {sensors}"
                    )));
                }
                if 2 * (k - 1) >= sensors {
                    return Err(Error::config(format!(
                        "k = {k} tolerates {} compromised sensors, which must be below N/2",
                        k - 1
                    )));
                }
            }
            FusionKind::GroupWise { num_groups, quorum } => {
                if num_groups == 0 || num_groups > sensors {
                    return Err(Error::config(format!(
                        "cannot split {sensors} sensors into {num_groups} groups"
                    )));
                }
                if quorum == 0 || quorum > num_groups {
                    return Err(Error::config(format!(
                        "quorum {quorum} out of range for {num_groups} groups"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            threshold,
            sensors,
        })
    }

    pub fn kind(&self) -> FusionKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        Self::new(self.kind, threshold, self.sensors)
    }

    /// The sensor sets feeding each detector.
    pub fn scopes(&self) -> Vec<Range<usize>> {
        match self.kind {
            FusionKind::Centralized => vec![0..self.sensors],
            FusionKind::KthAlarm(_) => (0..self.sensors).map(|n| n..n + 1).collect(),
            FusionKind::GroupWise { num_groups, .. } => assign_groups(self.sensors, num_groups),
        }
    }

    /// Number of detector alarms that trigger the final alarm.
    pub fn quorum(&self) -> usize {
        match self.kind {
            FusionKind::Centralized => 1,
            FusionKind::KthAlarm(k) => k,
            FusionKind::GroupWise { quorum, .. } => quorum,
        }
    }
}

/// The k-th smallest of a set of stopping times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatistic {
    pub value: f64,
    /// Position of the selected entry in the input.
    pub index: usize,
    /// False when fewer than `k` entries were finite.
    pub finite: bool,
}

/// Returns the `k`-th smallest time (1-based), ties broken by position.
pub fn kth_order_statistic(times: &[f64], k: usize) -> Result<OrderStatistic> {
    if k == 0 || k > times.len() {
        return Err(Error::config(format!(
            "rank {k} out of range for {} times",
            times.len()
        )));
    }
    if let Some(t) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::config(format!("invalid stopping time {t}")));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
    let index = order[k - 1];
    let value = times[index];
    Ok(OrderStatistic {
        value,
        index,
        finite: value.is_finite(),
    })
}

/// Contiguous near-even split of `0..n` into `num_groups` ranges; the first
/// `n % num_groups` groups get one extra sensor.
pub fn assign_groups(n: usize, num_groups: usize) -> Vec<Range<usize>> {
    let base = n / num_groups;
    let extra = n % num_groups;
    let mut start = 0;
    (0..num_groups)
        .map(|g| {
            let len = base + usize::from(g < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Combines per-detector records into the scheme's final record.
pub fn fuse(rule: &FusionRule, records: &[StoppingRecord]) -> Result<StoppingRecord> {
    let expected = rule.scopes().len();
    if records.len() != expected {
        return Err(Error::config(format!(
            "{:?} expects {expected} component records, got {}",
            rule.kind(),
            records.len()
        )));
    }
    let times: Vec<f64> = records.iter().map(StoppingRecord::alarm_time).collect();
    let stat = kth_order_statistic(&times, rule.quorum())?;
    // Fewer than `quorum` alarms: the scheme never stops on this path.
    Ok(if stat.finite {
        records[stat.index]
    } else {
        StoppingRecord::censored()
    })
}

//! Artifacts produced by a simulation run.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::instance::{Instance, JobId, MachineId};
use crate::interval::Interval;
use crate::time::{rational_str, Rational, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Blocking,
    Region,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Blocking => "blocking",
            Algorithm::Region => "region",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One maximal stretch of uninterrupted execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub machine: MachineId,
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admission {
    pub machine: MachineId,
    pub at: Time,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub machines: usize,
    /// Sorted by machine, then start.
    pub segments: Vec<Segment>,
    pub completions: BTreeMap<JobId, Time>,
    pub admissions: BTreeMap<JobId, Admission>,
}

impl ScheduleTrace {
    pub fn on_time(&self, instance: &Instance, job: JobId) -> bool {
        self.completions
            .get(&job)
            .is_some_and(|c| *c <= instance.jobs[job].deadline)
    }

    pub fn on_time_count(&self, instance: &Instance) -> usize {
        self.completions
            .keys()
            .filter(|&&j| self.on_time(instance, j))
            .count()
    }

    pub fn segments_on(&self, machine: MachineId) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.machine == machine)
    }

    /// Job executing on `machine` during `[t, t + dt)` for small `dt`.
    pub fn running_at(&self, machine: MachineId, t: &Time) -> Option<JobId> {
        self.segments_on(machine)
            .find(|s| s.start <= *t && *t < s.end)
            .map(|s| s.job)
    }
}

/// Per admitted job: where, when, and the interval bookkeeping the blocking
/// policy kept for it (empty for the region policy).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissionRecord {
    pub job: JobId,
    pub machine: MachineId,
    pub parent: Option<JobId>,
    pub admitted_at: Time,
    /// `e_j`; the scheduling interval is `[admitted_at, interval_end)`.
    pub interval_end: Option<Time>,
    pub blocking: Vec<Interval>,
    /// Time the policy guaranteed completion; `None` for policies without
    /// commitment.
    pub commit_time: Option<Time>,
}

impl AdmissionRecord {
    pub fn scheduling_interval(&self) -> Option<Interval> {
        self.interval_end
            .as_ref()
            .map(|e| Interval::new(self.admitted_at.clone(), e.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// ε the policy ran with (after clamping).
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    /// δ used in the availability test.
    #[serde(with = "rational_str")]
    pub delta: Rational,
    /// Admission factor: γ for blocking, ε/4 for region.
    #[serde(with = "rational_str")]
    pub admit_factor: Rational,
    /// β for blocking; absent for region.
    #[serde(with = "opt_rational", default)]
    pub beta: Option<Rational>,
}

mod opt_rational {
    use super::Rational;
    use crate::time::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissionLog {
    pub algorithm: Algorithm,
    pub params: PolicyParams,
    /// In admission order.
    pub records: Vec<AdmissionRecord>,
}

impl AdmissionLog {
    pub fn record(&self, job: JobId) -> Option<&AdmissionRecord> {
        self.records.iter().find(|r| r.job == job)
    }

    pub fn on_machine(&self, machine: MachineId) -> impl Iterator<Item = &AdmissionRecord> {
        self.records.iter().filter(move |r| r.machine == machine)
    }
}

/// Admission threshold `u ∈ (0, ∞]`: jobs at least this long are not admitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Threshold {
    Finite(Time),
    Infinite,
}

impl Threshold {
    /// `p ≥ u`
    pub fn admits_not(&self, p: &Time) -> bool {
        match self {
            Threshold::Finite(u) => p >= u,
            Threshold::Infinite => false,
        }
    }

    pub fn finite(&self) -> Option<&Time> {
        match self {
            Threshold::Finite(u) => Some(u),
            Threshold::Infinite => None,
        }
    }

    pub fn min(self, other: Threshold) -> Threshold {
        std::cmp::min(self, other)
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Threshold::Finite(a), Threshold::Finite(b)) => a.cmp(b),
            (Threshold::Finite(_), Threshold::Infinite) => Ordering::Less,
            (Threshold::Infinite, Threshold::Finite(_)) => Ordering::Greater,
            (Threshold::Infinite, Threshold::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(u) => write!(f, "{u}"),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            Ok(Threshold::Infinite)
        } else {
            text.parse()
                .map(Threshold::Finite)
                .map_err(serde::de::Error::custom)
        }
    }
}

/// Threshold a policy reported live at the end of an admission round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSample {
    pub time: Time,
    pub machine: MachineId,
    pub value: Threshold,
}

/// Everything one simulation run produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutput {
    pub trace: ScheduleTrace,
    pub log: AdmissionLog,
    pub samples: Vec<ThresholdSample>,
}

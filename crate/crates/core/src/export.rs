//! File formats for run artifacts. All times are written as "p/q" strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, JobId};
use crate::time::Time;
use crate::trace::{AdmissionLog, ScheduleTrace, ThresholdSample};

pub const TRACE_HEADER: &str = "machine,job,start,end";

pub fn trace_csv(trace: &ScheduleTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in &trace.segments {
        let _ = writeln!(out, "{},{},{},{}", s.machine, s.job, s.start, s.end);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub completions: BTreeMap<JobId, Time>,
    pub on_time: usize,
    pub admitted: usize,
}

impl Summary {
    pub fn new(instance: &Instance, trace: &ScheduleTrace) -> Self {
        Summary {
            completions: trace.completions.clone(),
            on_time: trace.on_time_count(instance),
            admitted: trace.admissions.len(),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

pub fn summary_json(instance: &Instance, trace: &ScheduleTrace) -> String {
    pretty(&Summary::new(instance, trace))
}

pub fn log_json(log: &AdmissionLog) -> String {
    pretty(log)
}

pub fn samples_json(samples: &[ThresholdSample]) -> String {
    pretty(&samples)
}

pub fn trace_json(trace: &ScheduleTrace) -> String {
    pretty(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CommitmentModel, Job, ProcessingTime};
    use crate::time::ratio;
    use crate::trace::Algorithm;

    #[test]
    fn csv_and_summary_for_one_job() {
        let inst = Instance::new(
            1,
            ratio(1, 1),
            vec![Job {
                id: 0,
                release: Time::new(1, 2),
                deadline: Time::from_int(10),
                proc: vec![ProcessingTime::Finite(Time::new(3, 2))],
            }],
        );
        let out = crate::run(&inst, Algorithm::Blocking, &CommitmentModel::UponAdmission).unwrap();
        assert_eq!(trace_csv(&out.trace), "machine,job,start,end\n0,0,1/2,2\n");
        let summary: serde_json::Value = serde_json::from_str(&summary_json(&inst, &out.trace)).unwrap();
        assert_eq!(summary["completions"]["0"], "2");
        assert_eq!(summary["on_time"], 1);
        assert_eq!(summary["admitted"], 1);
        let log: AdmissionLog = serde_json::from_str(&log_json(&out.log)).unwrap();
        assert_eq!(log, out.log);
    }
}

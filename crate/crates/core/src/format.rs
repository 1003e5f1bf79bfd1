//! Instance file format.
//!
//! ```json
//! {"machines": 2, "epsilon": "1/2",
//!  "jobs": [{"id": 0, "release": "0", "deadline": "3", "proc": {"0": "3/2"}}]}
//! ```
//!
//! Rationals are `"p/q"` or integer strings. A machine missing from `proc`
//! is not eligible for that job. `save` followed by `load` is the identity,
//! and saving a loaded file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Job, ProcessingTime, ValidationReport};
use crate::time::{rational_str, Rational, Time};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("job {job}: machine key `{key}` is not a valid machine index (machines = {machines})")]
    MachineKey {
        job: usize,
        key: usize,
        machines: usize,
    },
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    machines: usize,
    #[serde(with = "rational_str")]
    epsilon: Rational,
    jobs: Vec<JobFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobFile {
    id: usize,
    release: Time,
    deadline: Time,
    proc: BTreeMap<usize, Time>,
}

/// Serializes an instance to the canonical text form.
pub fn to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        machines: instance.machines,
        epsilon: instance.epsilon.clone(),
        jobs: instance
            .jobs
            .iter()
            .map(|job| JobFile {
                id: job.id,
                release: job.release.clone(),
                deadline: job.deadline.clone(),
                proc: job
                    .proc
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.finite().map(|p| (i, p.clone())))
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

/// Parses and validates an instance. Slack violations are rejected.
pub fn from_json(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let machines = file.machines;
    let mut jobs = Vec::with_capacity(file.jobs.len());
    for jf in file.jobs {
        if let Some((&key, _)) = jf.proc.iter().find(|(&k, _)| k >= machines) {
            return Err(FormatError::MachineKey {
                job: jf.id,
                key,
                machines,
            });
        }
        let proc = (0..machines)
            .map(|i| match jf.proc.get(&i) {
                Some(p) => ProcessingTime::Finite(p.clone()),
                None => ProcessingTime::NonEligible,
            })
            .collect();
        jobs.push(Job {
            id: jf.id,
            release: jf.release,
            deadline: jf.deadline,
            proc,
        });
    }
    let instance = Instance::new(machines, file.epsilon, jobs);
    let report = instance.validate();
    if !report.is_ok() {
        return Err(FormatError::Invalid(report));
    }
    Ok(instance)
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, to_json(instance)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Violation;

    const SAMPLE: &str = r#"{
  "machines": 3,
  "epsilon": "1/2",
  "jobs": [
    {"id": 0, "release": "0", "deadline": "3", "proc": {"0": "3/2", "2": "2"}},
    {"id": 1, "release": "1/3", "deadline": "5", "proc": {"1": "1"}}
  ]
}"#;

    #[test]
    fn parses_rationals_exactly() {
        let inst = from_json(SAMPLE).unwrap();
        assert_eq!(inst.machines, 3);
        assert_eq!(inst.processing(0, 0), Some(&Time::new(3, 2)));
        assert_eq!(inst.processing(0, 1), None);
        assert_eq!(inst.processing(0, 2), Some(&Time::from_int(2)));
        assert_eq!(inst.jobs[1].release, Time::new(1, 3));
    }

    #[test]
    fn canonical_text_is_a_fixed_point() {
        let inst = from_json(SAMPLE).unwrap();
        let text = to_json(&inst);
        let again = from_json(&text).unwrap();
        assert_eq!(again, inst);
        assert_eq!(to_json(&again), text);
    }

    #[test]
    fn deadline_before_release_is_rejected() {
        let text = r#"{"machines": 1, "epsilon": "1", "jobs": [
            {"id": 0, "release": "2", "deadline": "2", "proc": {"0": "1"}}]}"#;
        match from_json(text) {
            Err(FormatError::Invalid(report)) => assert!(report
                .violations
                .contains(&Violation::DeadlineNotAfterRelease { job: 0 })),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn slack_violation_is_rejected() {
        let text = r#"{"machines": 1, "epsilon": "1", "jobs": [
            {"id": 0, "release": "0", "deadline": "19/10", "proc": {"0": "1"}}]}"#;
        assert!(matches!(from_json(text), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "{\"machines\": 1,\n \"epsilon\": \"1/0\", \"jobs\": []}";
        match from_json(text) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_machine_key_is_rejected() {
        let text = r#"{"machines": 1, "epsilon": "1", "jobs": [
            {"id": 0, "release": "0", "deadline": "4", "proc": {"3": "1"}}]}"#;
        assert!(matches!(from_json(text), Err(FormatError::MachineKey { key: 3, .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = from_json(SAMPLE).unwrap();
        save(&inst, &path).unwrap();
        assert_eq!(load(&path).unwrap(), inst);
    }
}

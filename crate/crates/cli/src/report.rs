//! Run reports and their text and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use qtraj_core::algebra::DeformedFn;
use qtraj_core::intertwiner::RelationReport;

use crate::scenario::{Scenario, Task};

/// A computed series, optionally checked against an expected one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    /// Only required entries decide whether the task passes.
    pub required: bool,
    pub passed: bool,
    pub value: DeformedFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<DeformedFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<DeformedFn>,
}

impl Entry {
    pub fn info(label: impl Into<String>, value: DeformedFn) -> Self {
        Entry {
            label: label.into(),
            required: false,
            passed: true,
            value,
            expected: None,
            residual: None,
        }
    }

    /// A required entry whose residual must vanish.
    pub fn check(label: impl Into<String>, value: DeformedFn, expected: Option<DeformedFn>, residual: DeformedFn) -> Self {
        Entry {
            label: label.into(),
            required: true,
            passed: residual.is_zero(),
            value,
            expected,
            residual: Some(residual),
        }
    }

    /// Keeps the comparison but does not let it decide the task.
    pub fn informational(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    pub residual: DeformedFn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub relation: String,
    pub cases: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
}

impl Relation {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl From<&RelationReport> for Relation {
    fn from(r: &RelationReport) -> Self {
        Relation {
            relation: r.relation.clone(),
            cases: r.cases,
            failed: r.failed,
            failures: r
                .failures
                .iter()
                .map(|f| Failure {
                    case: f.case.clone(),
                    residual: f.residual.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub passed: bool,
    pub hbar_order: u32,
    pub t_order: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<Relation>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl TaskReport {
    pub fn new(task: Task, hbar_order: u32, t_order: u32) -> Self {
        TaskReport {
            task,
            passed: true,
            hbar_order,
            t_order,
            entries: Vec::new(),
            relations: Vec::new(),
            notes: BTreeMap::new(),
            wall_ms: None,
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.insert(key.to_string(), value.to_string());
    }

    /// Sets `passed` from the required entries and the relations.
    pub fn settle(&mut self) {
        self.passed = self.passed
            && self.entries.iter().all(|e| !e.required || e.passed)
            && self.relations.iter().all(Relation::passed);
    }

    pub fn failed(mut self, error: impl ToString) -> Self {
        self.passed = false;
        self.note("error", error);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub passed: bool,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let sc = &self.scenario;
        let mut out = String::new();
        let source = sc.builtin.map_or("literal".to_string(), |b| format!("builtin {b}"));
        let _ = writeln!(out, "scenario {} ({source}, dim {})", sc.name, sc.dim);
        let _ = writeln!(out, "H = {}", sc.hamiltonian);
        for task in &self.tasks {
            let mark = if task.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{mark}] {} (h^{}, t^{})", task.task, task.hbar_order, task.t_order);
            for e in &task.entries {
                let tag = if e.required { "" } else { "  (info)" };
                let _ = writeln!(out, "  {} = {}{tag}", e.label, e.value);
                if !e.passed {
                    if let Some(x) = &e.expected {
                        let _ = writeln!(out, "    expected: {x}");
                    }
                    if let Some(r) = &e.residual {
                        let _ = writeln!(out, "    residual: {r}");
                    }
                }
            }
            for r in &task.relations {
                let _ = writeln!(out, "  {}: {} cases, {} failed", r.relation, r.cases, r.failed);
                for f in &r.failures {
                    let _ = writeln!(out, "    {}: residual {}", f.case, f.residual);
                }
            }
            for (k, v) in &task.notes {
                let _ = writeln!(out, "  {k}: {v}");
            }
            if let Some(ms) = task.wall_ms {
                let _ = writeln!(out, "  time: {ms} ms");
            }
        }
        let passed = self.tasks.iter().filter(|t| t.passed).count();
        let _ = writeln!(out, "{passed} of {} tasks passed", self.tasks.len());
        out
    }
}

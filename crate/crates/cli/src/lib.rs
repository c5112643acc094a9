//! Scenario files, the task runner and its reports.

pub mod report;
pub mod runner;
pub mod scenario;

pub use report::{Entry, Failure, Relation, Report, TaskReport};
pub use runner::{run, RunOptions};
pub use scenario::{Scenario, ScenarioError, Task};

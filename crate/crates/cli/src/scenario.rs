//! Flat `key = value` scenario files.
//!
//! ```text
//! # comments start with '#'
//! name = coupled2
//! builtin = coupled2
//! k = 3/2
//! hbar_order = 4
//! t_order = 6
//! tasks = flow, canonicity, verify-s, group-law
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qtraj_core::algebra::text::{format_poly, infer_dim, parse_series, ParseContext};
use qtraj_core::algebra::{parse_rational, DeformedFn, Param, PhasePoly, HBAR};
use qtraj_core::flow::{HamiltonianSystem, DEFAULT_HBAR_ORDER, DEFAULT_T_ORDER, TIME};
use qtraj_core::intertwiner::{DiffOperator, DEFAULT_TEST_DEGREE};
use qtraj_core::systems::{parse_hamiltonian, Builtin, Constants};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("{at}: {msg}")]
    Syntax { at: String, msg: String },
    #[error("{at}: `{key}`: {source}")]
    Value {
        at: String,
        key: String,
        source: qtraj_core::Error,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

type Result<T> = std::result::Result<T, ScenarioError>;

/// Tasks in the order they run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Evolve,
    Flow,
    Canonicity,
    Transform,
    VerifyS,
    SolveS,
    Compose,
    GroupLaw,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Evolve,
        Task::Flow,
        Task::Canonicity,
        Task::Transform,
        Task::VerifyS,
        Task::SolveS,
        Task::Compose,
        Task::GroupLaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Evolve => "evolve",
            Task::Flow => "flow",
            Task::Canonicity => "canonicity",
            Task::Transform => "transform",
            Task::VerifyS => "verify-s",
            Task::SolveS => "solve-s",
            Task::Compose => "compose",
            Task::GroupLaw => "group-law",
        }
    }

    /// Tasks that use the intertwiner of the scenario.
    pub fn uses_operator(self) -> bool {
        matches!(self, Task::VerifyS | Task::Compose | Task::GroupLaw)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    /// Canonical text, constants already substituted.
    pub hamiltonian: String,
    pub constants: Constants,
    pub hbar_order: u32,
    pub t_order: u32,
    pub test_degree: u32,
    pub tasks: Vec<Task>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_order: Option<u32>,
    pub solve_order: u32,
    pub solve_degree: u32,
}

const KEYS: [&str; 18] = [
    "name",
    "builtin",
    "hamiltonian",
    "dim",
    "omega",
    "m1",
    "m2",
    "k",
    "hbar_order",
    "t_order",
    "test_degree",
    "tasks",
    "observables",
    "s_operator",
    "t1_order",
    "t2_order",
    "solve_order",
    "solve_degree",
];

/// One `key = value` setting and where it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setting {
    pub at: String,
    pub key: String,
    pub value: String,
}

impl Setting {
    pub fn new(at: impl Into<String>, key: impl Into<String>, value: impl Into<String>) -> Self {
        Setting {
            at: at.into(),
            key: key.into(),
            value: value.into(),
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Syntax {
            at: self.at.clone(),
            msg: msg.into(),
        }
    }

    fn value_error(&self, source: qtraj_core::Error) -> ScenarioError {
        ScenarioError::Value {
            at: self.at.clone(),
            key: self.key.clone(),
            source,
        }
    }

    fn number(&self) -> Result<u32> {
        self.value
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects a non-negative integer", self.key)))
    }
}

/// Splits a scenario file into settings, rejecting malformed lines.
pub fn settings(src: &str) -> Result<Vec<Setting>> {
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("line {}", n + 1);
        let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            at: at.clone(),
            msg: "expected `key = value`".into(),
        })?;
        out.push(Setting::new(at, key.trim(), value.trim()));
    }
    Ok(out)
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Scenario> {
        Scenario::from_settings(&settings(src)?)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let src = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Scenario::parse(&src)
    }

    pub fn from_settings(settings: &[Setting]) -> Result<Scenario> {
        let mut by_key: BTreeMap<&str, &Setting> = BTreeMap::new();
        for s in settings {
            if !KEYS.contains(&s.key.as_str()) {
                return Err(s.syntax(format!("unknown key `{}`", s.key)));
            }
            if by_key.insert(s.key.as_str(), s).is_some() {
                return Err(s.syntax(format!("duplicate key `{}`", s.key)));
            }
        }
        let number = |key: &str, default: u32| by_key.get(key).map_or(Ok(default), |s| s.number());
        let optional = |key: &str| by_key.get(key).map(|s| s.number()).transpose();

        let mut constants = Constants::default();
        for name in Constants::NAMES {
            if let Some(s) = by_key.get(name) {
                let value = parse_rational(&s.value).ok_or_else(|| s.syntax(format!("`{name}` expects a rational")))?;
                constants.set(name, value).map_err(|e| s.value_error(e))?;
            }
        }

        let builtin = by_key
            .get("builtin")
            .map(|s| s.value.parse::<Builtin>().map_err(|e| s.value_error(e)))
            .transpose()?;
        let explicit_dim = optional("dim")?;
        let (dim, hamiltonian) = match (builtin, by_key.get("hamiltonian")) {
            (Some(_), Some(s)) => return Err(s.syntax("give either `builtin` or `hamiltonian`, not both")),
            (None, None) => return Err(ScenarioError::Invalid("missing `builtin` or `hamiltonian`".into())),
            (Some(b), None) => {
                let dim = b.dim();
                if let Some(d) = explicit_dim {
                    if d as usize != dim {
                        return Err(ScenarioError::Invalid(format!("{b} has dimension {dim}, not {d}")));
                    }
                }
                let h = b.hamiltonian(&constants).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
                (dim, format_poly(&h))
            }
            (None, Some(s)) => {
                let dim = explicit_dim.map_or_else(|| infer_dim(&s.value), |d| d as usize);
                if dim == 0 {
                    return Err(ScenarioError::Invalid("dimension must be positive".into()));
                }
                let h = parse_hamiltonian(&s.value, dim, &constants).map_err(|e| s.value_error(e))?;
                (dim, format_poly(&h))
            }
        };

        let hbar_order = number("hbar_order", DEFAULT_HBAR_ORDER)?;
        let t_order = number("t_order", DEFAULT_T_ORDER)?;

        let tasks = match by_key.get("tasks") {
            None => return Err(ScenarioError::Invalid("missing `tasks`".into())),
            Some(s) => s
                .value
                .split(',')
                .map(|t| t.trim().parse::<Task>().map_err(|e| s.syntax(e)))
                .collect::<Result<BTreeSet<_>>>()?
                .into_iter()
                .collect(),
        };

        let series_ctx = constants.context(dim).with_params(&[Param::new(HBAR, hbar_order)]);
        let observables = match by_key.get("observables") {
            None => Vec::new(),
            Some(s) => s
                .value
                .split(',')
                .map(|src| parse_series(src.trim(), &series_ctx).map(|f| f.to_string()).map_err(|e| s.value_error(e)))
                .collect::<Result<Vec<_>>>()?,
        };

        let mut scenario = Scenario {
            name: by_key
                .get("name")
                .map(|s| s.value.clone())
                .unwrap_or_else(|| builtin.map_or("scenario".into(), |b| b.name().to_string())),
            dim,
            builtin,
            hamiltonian,
            constants,
            hbar_order,
            t_order,
            test_degree: number("test_degree", DEFAULT_TEST_DEGREE)?,
            tasks,
            observables,
            s_operator: None,
            t1_order: optional("t1_order")?,
            t2_order: optional("t2_order")?,
            solve_order: number("solve_order", 3)?,
            solve_degree: number("solve_degree", 2)?,
        };
        if let Some(s) = by_key.get("s_operator") {
            let op = DiffOperator::parse(&s.value, &scenario.operator_context()).map_err(|e| s.value_error(e))?;
            scenario.s_operator = Some(op.to_string());
        }
        scenario.validate()?;
        Ok(scenario)
    }

    /// Cross-field checks; rerun after changing orders.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(msg));
        if self.tasks.is_empty() {
            return invalid("no tasks requested".into());
        }
        self.system()?;
        let uses_operator = self.tasks.iter().any(|t| t.uses_operator());
        if uses_operator && self.s_operator.is_none() && self.builtin == Some(Builtin::X2p2) && self.hbar_order != 2 {
            return invalid(format!(
                "the built-in x2p2 intertwiner is known to order h^2 only; set hbar_order = 2 (got {})",
                self.hbar_order
            ));
        }
        if self.tasks.contains(&Task::Compose) || self.tasks.contains(&Task::GroupLaw) {
            let (l1, l2) = self.split();
            if l1 == 0 || l2 == 0 || l1 + l2 > self.t_order {
                return invalid(format!(
                    "t1_order + t2_order must be positive and at most t_order = {} (got {l1} + {l2})",
                    self.t_order
                ));
            }
        }
        if self.tasks.contains(&Task::SolveS) && self.test_degree < self.solve_order.max(2) {
            return invalid(format!(
                "test_degree = {} is below solve_order = {}; the solution would not be determined",
                self.test_degree, self.solve_order
            ));
        }
        Ok(())
    }

    /// Replaces the truncation orders and revalidates.
    pub fn with_orders(mut self, hbar_order: Option<u32>, t_order: Option<u32>) -> Result<Scenario> {
        self.hbar_order = hbar_order.unwrap_or(self.hbar_order);
        self.t_order = t_order.unwrap_or(self.t_order);
        self.validate()?;
        Ok(self)
    }

    /// `(t1_order, t2_order)` for the composition checks.
    pub fn split(&self) -> (u32, u32) {
        let l1 = self.t1_order.unwrap_or(self.t_order / 2);
        let l2 = self.t2_order.unwrap_or(self.t_order - l1);
        (l1, l2)
    }

    pub fn hamiltonian_poly(&self) -> Result<PhasePoly> {
        parse_hamiltonian(&self.hamiltonian, self.dim, &self.constants)
            .map_err(|e| ScenarioError::Invalid(format!("hamiltonian: {e}")))
    }

    pub fn system(&self) -> Result<HamiltonianSystem> {
        HamiltonianSystem::new(self.hamiltonian_poly()?, self.hbar_order, self.t_order)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    fn operator_context(&self) -> ParseContext {
        self.constants
            .context(self.dim)
            .with_params(&[Param::new(HBAR, self.hbar_order), Param::new(TIME, self.t_order)])
    }

    /// The provided operator, else the built-in one, else `1`.
    pub fn operator(&self) -> Result<DiffOperator> {
        let op = match (&self.s_operator, self.builtin) {
            (Some(src), _) => DiffOperator::parse(src, &self.operator_context()),
            (None, Some(b)) => b.intertwiner(&self.constants, self.hbar_order, self.t_order),
            (None, None) => Ok(DiffOperator::identity(self.dim)),
        };
        op.map_err(|e| ScenarioError::Invalid(format!("s_operator: {e}")))
    }

    /// Observables for `evolve`; the coordinates when none are given.
    pub fn observable_series(&self) -> Result<Vec<DeformedFn>> {
        if self.observables.is_empty() {
            return Ok((0..2 * self.dim)
                .map(|v| DeformedFn::from(PhasePoly::var(self.dim, v).expect("in range")))
                .collect());
        }
        let ctx = self.constants.context(self.dim).with_params(&[Param::new(HBAR, self.hbar_order)]);
        self.observables
            .iter()
            .map(|src| parse_series(src, &ctx).map_err(|e| ScenarioError::Invalid(format!("observable `{src}`: {e}"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_defaults() {
        let s = Scenario::parse("builtin = coupled2\ntasks = group-law, flow\n").unwrap();
        assert_eq!(s.name, "coupled2");
        assert_eq!(s.dim, 2);
        assert_eq!(s.tasks, vec![Task::Flow, Task::GroupLaw]);
        assert_eq!((s.hbar_order, s.t_order), (DEFAULT_HBAR_ORDER, DEFAULT_T_ORDER));
        assert_eq!(s.split(), (4, 4));
        assert_eq!(s.hamiltonian, "x1*p2^2 + 1/2*p1^2 + 1/2*p2^2");
    }

    #[test]
    fn constants_enter_the_hamiltonian() {
        let s = Scenario::parse("builtin = harmonic\nomega = 3/2\ntasks = flow").unwrap();
        assert_eq!(s.hamiltonian, "9/8*x^2 + 1/2*p^2");
    }

    #[test]
    fn literal_hamiltonian_infers_dimension() {
        let s = Scenario::parse("hamiltonian = p1*p2 + k*x2^3\nk = -2\ntasks = evolve\nobservables = x1, p2^2").unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.observables, vec!["x1".to_string(), "p2^2".to_string()]);
        assert_eq!(s.observable_series().unwrap().len(), 2);
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = Scenario::parse("builtin = harmonic\n\nbogus\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: expected `key = value`");
        let err = Scenario::parse("builtin = harmonic\ncolour = red\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2: unknown key"));
        let err = Scenario::parse("hamiltonian = x + * p\ntasks = flow").unwrap_err();
        assert!(matches!(err, ScenarioError::Value { source: qtraj_core::Error::Parse { pos: 4, .. }, .. }), "{err}");
    }

    #[test]
    fn quartic_operator_needs_second_order() {
        let err = Scenario::parse("builtin = x2p2\nhbar_order = 1\ntasks = verify-s").unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)));
        assert!(Scenario::parse("builtin = x2p2\nhbar_order = 2\ntasks = verify-s").is_ok());
        let provided = "builtin = x2p2\nhbar_order = 1\ntasks = verify-s\ns_operator = 1";
        assert!(Scenario::parse(provided).is_ok());
    }

    #[test]
    fn split_must_fit() {
        let err = Scenario::parse("builtin = harmonic\nt_order = 4\nt1_order = 3\nt2_order = 2\ntasks = compose").unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)));
    }

    #[test]
    fn complex_hamiltonian_is_rejected() {
        assert!(Scenario::parse("hamiltonian = i*x*p\ntasks = flow").is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = Scenario::parse("builtin = coupled2\nk = 3/4\ntasks = flow\ns_operator = 1 + h^2*t*dx1^2").unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&json).unwrap(), s);
    }
}

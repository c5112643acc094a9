//! Executes the tasks of a scenario.

use std::time::Instant;

use qtraj_core::algebra::text::var_name;
use qtraj_core::algebra::{DeformedFn, Monomial, PhaseMap, PhasePoly, HBAR};
use qtraj_core::flow::{
    check_classical_canonicity, check_quantum_canonicity, classical_flow, evolution_residual, evolve_observable,
    quantum_flow, HamiltonianSystem,
};
use qtraj_core::intertwiner::{
    check_group_law, solve_intertwiner, verify_intertwiner, DiffOperator, GroupLawConfig, SolveConfig, SolveOutcome,
};
use qtraj_core::systems::Builtin;
use qtraj_core::transform::{induced_derivations, verify_transport};

use crate::report::{Entry, Failure, Relation, Report, TaskReport};
use crate::scenario::{Scenario, Task};

const KEPT_FAILURES: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall time per task; reports are then no longer reproducible.
    pub timing: bool,
}

type Outcome<T> = Result<T, String>;

fn err<T, E: ToString>(r: Result<T, E>) -> Outcome<T> {
    r.map_err(|e| e.to_string())
}

fn relation(name: &str, results: Vec<(String, DeformedFn)>) -> Relation {
    let cases = results.len();
    let bad: Vec<Failure> = results
        .into_iter()
        .filter(|(_, r)| !r.is_zero())
        .map(|(case, residual)| Failure { case, residual })
        .collect();
    Relation {
        relation: name.to_string(),
        cases,
        failed: bad.len(),
        failures: bad.into_iter().take(KEPT_FAILURES).collect(),
    }
}

fn component_label(dim: usize, v: usize) -> String {
    var_name(dim, v).replace('x', "Q").replace('p', "P")
}

fn observable_label(a: &DeformedFn) -> String {
    let text = a.to_string();
    if text.chars().all(|c| c.is_ascii_alphanumeric()) {
        format!("{text}(t)")
    } else {
        format!("({text})(t)")
    }
}

struct Context<'a> {
    scenario: &'a Scenario,
    system: HamiltonianSystem,
    flow: Option<PhaseMap>,
}

impl Context<'_> {
    fn flow(&mut self) -> Outcome<PhaseMap> {
        if self.flow.is_none() {
            self.flow = Some(err(quantum_flow(&self.system))?.map);
        }
        Ok(self.flow.clone().expect("just computed"))
    }

    fn operator(&self) -> Outcome<DiffOperator> {
        err(self.scenario.operator())
    }

    /// The operator the solver output is compared with, when one is known
    /// at the scenario's order in h.
    fn reference(&self) -> Option<DiffOperator> {
        let sc = self.scenario;
        let known = sc.s_operator.is_some()
            || matches!(sc.builtin, Some(b) if b != Builtin::X2p2 || sc.hbar_order == 2);
        if known {
            sc.operator().ok()
        } else {
            None
        }
    }
}

/// Runs every task; failures of individual tasks are recorded in the report.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Report {
    let (k, l) = (scenario.hbar_order, scenario.t_order);
    let system = match scenario.system() {
        Ok(s) => s,
        Err(e) => {
            let tasks = scenario
                .tasks
                .iter()
                .map(|&t| TaskReport::new(t, k, l).failed(&e))
                .collect();
            return Report {
                scenario: scenario.clone(),
                passed: false,
                tasks,
            };
        }
    };
    let mut ctx = Context {
        scenario,
        system,
        flow: None,
    };
    let mut tasks = Vec::new();
    for &task in &scenario.tasks {
        let start = Instant::now();
        let mut report = TaskReport::new(task, k, l);
        report = match run_task(&mut ctx, task, &mut report) {
            Ok(()) => {
                report.settle();
                report
            }
            Err(e) => report.failed(e),
        };
        if options.timing {
            report.wall_ms = Some(start.elapsed().as_millis() as u64);
        }
        tasks.push(report);
    }
    Report {
        scenario: scenario.clone(),
        passed: tasks.iter().all(|t| t.passed),
        tasks,
    }
}

fn run_task(ctx: &mut Context, task: Task, report: &mut TaskReport) -> Outcome<()> {
    let sc = ctx.scenario;
    let dim = sc.dim;
    match task {
        Task::Evolve => {
            for a in err(sc.observable_series())? {
                let a_t = err(evolve_observable(&ctx.system, &a))?;
                let residual = err(evolution_residual(&ctx.system, &a_t))?;
                report.entries.push(Entry::check(observable_label(&a), a_t, None, residual));
            }
        }
        Task::Flow => {
            let map = ctx.flow()?;
            let classical = err(classical_flow(&ctx.system))?.map;
            let mut limit = Vec::new();
            for (v, c) in map.components().iter().enumerate() {
                let residual = err(evolution_residual(&ctx.system, c))?;
                report.entries.push(Entry::check(component_label(dim, v), c.clone(), None, residual));
                let diff = err(c.coefficient(HBAR, 0).checked_sub(classical.component(v)))?;
                limit.push((component_label(dim, v), diff));
            }
            report.relations.push(relation("flow at h^0 = classical flow", limit));
        }
        Task::Canonicity => {
            let map = ctx.flow()?;
            for e in err(check_quantum_canonicity(&map))?.entries {
                report.entries.push(Entry::check(e.label, e.value, Some(e.expected), e.residual));
            }
            for e in err(check_classical_canonicity(&map))?.entries {
                report
                    .entries
                    .push(Entry::check(e.label, e.value, Some(e.expected), e.residual).informational());
            }
        }
        Task::Transform => {
            let map = ctx.flow()?;
            for (v, d) in err(induced_derivations(&map))?.iter().enumerate() {
                report.note(&format!("D_{}", var_name(dim, v)), d);
            }
            let degree = sc.test_degree.min(4);
            report.note("degree", degree);
            report.relations.push((&err(verify_transport(&map, sc.hbar_order, degree))?).into());
        }
        Task::VerifyS => {
            let map = ctx.flow()?;
            let s = ctx.operator()?;
            report.note("operator", &s);
            report.note("degree", sc.test_degree);
            let v = err(verify_intertwiner(&s, &map, sc.hbar_order, sc.test_degree))?;
            if !v.s_operator {
                report.passed = false;
                report.note("error", "operator is not 1 at order h^0");
            }
            report.relations.extend([(&v.product).into(), (&v.coordinates).into(), (&v.involution).into()]);
        }
        Task::SolveS => {
            let map = ctx.flow()?;
            let config = SolveConfig::new(sc.hbar_order, sc.solve_order, sc.solve_degree).with_test_degree(sc.test_degree);
            report.note("ansatz", format!("order <= {}, coefficient degree <= {}", sc.solve_order, sc.solve_degree));
            match err(solve_intertwiner(&map, &config))? {
                SolveOutcome::Solved(s) => {
                    report.note("outcome", "solved");
                    report.note("operator", &s.operator);
                    report.note("nullity", format!("{:?}", s.nullity));
                    let v = &s.verification;
                    report.relations.extend([(&v.product).into(), (&v.coordinates).into(), (&v.involution).into()]);
                    if let Some(reference) = ctx.reference() {
                        let mut cases = Vec::new();
                        for m in Monomial::all_up_to(dim, sc.test_degree.min(4)) {
                            let a = DeformedFn::from(PhasePoly::term(dim, m, 1.into())).truncate(HBAR, sc.hbar_order);
                            let diff = err(err(s.operator.apply(&a))?.checked_sub(&err(reference.apply(&a))?))?;
                            cases.push((a.to_string(), diff));
                        }
                        report.relations.push(relation("solved S = reference S", cases));
                    }
                }
                SolveOutcome::Exhausted {
                    hbar_degree,
                    partial,
                    message,
                } => {
                    report.passed = false;
                    report.note("outcome", "exhausted");
                    report.note("hbar_degree", hbar_degree);
                    report.note("partial", &partial);
                    report.note("message", message);
                }
                SolveOutcome::Inconsistent {
                    hbar_degree,
                    case,
                    residual,
                    message,
                } => {
                    report.passed = false;
                    report.note("outcome", "inconsistent");
                    report.note("hbar_degree", hbar_degree);
                    report.relations.push(relation("obstruction is symmetric", vec![(case, residual)]));
                    report.note("message", message);
                }
            }
        }
        Task::Compose | Task::GroupLaw => {
            let map = ctx.flow()?;
            let s = ctx.operator()?;
            let (l1, l2) = sc.split();
            let degree = if task == Task::Compose { 0 } else { sc.test_degree.min(3) };
            let law = err(check_group_law(&map, &s, &GroupLawConfig::new(l1, l2, sc.hbar_order).with_degree(degree)))?;
            report.note("t1_order", l1);
            report.note("t2_order", l2);
            for c in law.composition {
                report.entries.push(Entry::check(c.label, c.composed, Some(c.expected), c.residual));
            }
            if task == Task::GroupLaw {
                report.note("degree", degree);
                report.relations.push((&law.pullback).into());
            }
        }
    }
    Ok(())
}

//! Quantum pull-back, quantum composition of flows and the group law.

use rayon::prelude::*;
use serde::Serialize;

use super::verify::{monomial_label, monomial_series, RelationReport};
use super::DiffOperator;
use crate::algebra::text::var_name;
use crate::algebra::{substitute, DeformedFn, Monomial, Param, PhaseMap, HBAR};
use crate::error::{Error, Result};

/// `Φ*A = (S A) ∘ Φ`.
pub fn quantum_pullback(map: &PhaseMap, s: &DiffOperator, a: &DeformedFn) -> Result<DeformedFn> {
    substitute(&s.apply(a)?, map)
}

fn time_names(params: &[Param]) -> impl Iterator<Item = &str> {
    params.iter().filter(|p| p.name != HBAR).map(|p| p.name.as_str())
}

/// `Φ₁ Φ₂ = (S₂ Φ₁) ∘ Φ₂`, with `S₂` applied to every component of `Φ₁`.
pub fn quantum_compose(first: &PhaseMap, second: &PhaseMap, s_second: &DiffOperator) -> Result<PhaseMap> {
    let s_params = s_second.params();
    for name in time_names(first.params()) {
        if time_names(second.params()).chain(time_names(&s_params)).any(|n| n == name) {
            return Err(Error::ParamCollision(name.to_string()));
        }
    }
    first.map_components(|c| quantum_pullback(second, s_second, c))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupLawConfig {
    /// Name of the time parameter of the flow and the intertwiner.
    pub time: String,
    pub t1_order: u32,
    pub t2_order: u32,
    /// Comparisons keep ħ up to this order.
    pub hbar_order: u32,
    /// Degree bound of the observables used for the pull-back identity.
    pub degree: u32,
}

impl GroupLawConfig {
    pub fn new(t1_order: u32, t2_order: u32, hbar_order: u32) -> Self {
        GroupLawConfig {
            time: "t".into(),
            t1_order,
            t2_order,
            hbar_order,
            degree: 3,
        }
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentCheck {
    pub label: String,
    pub composed: DeformedFn,
    pub expected: DeformedFn,
    pub residual: DeformedFn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupLawReport {
    pub config: GroupLawConfig,
    pub composition: Vec<ComponentCheck>,
    pub pullback: RelationReport,
}

impl GroupLawReport {
    pub fn passed(&self) -> bool {
        self.composition.iter().all(|c| c.residual.is_zero()) && self.pullback.passed()
    }
}

fn at_time(s: &DiffOperator, time: &str, name: &str, order: u32) -> Result<DiffOperator> {
    Ok(s.rename_param(time, name)?.truncate(name, order))
}

/// Checks `Φ_{t₁} Φ_{t₂} = Φ_{t₁+t₂}` and
/// `(Φ_{t₁}Φ_{t₂})* A = Φ_{t₂}*(Φ_{t₁}* A)` on monomials.
///
/// The flow must be known to time order at least `t1_order + t2_order`.
pub fn check_group_law(flow: &PhaseMap, s: &DiffOperator, config: &GroupLawConfig) -> Result<GroupLawReport> {
    let dim = flow.dim();
    let time = config.time.as_str();
    let (l1, l2) = (config.t1_order, config.t2_order);
    let cut = |f: DeformedFn| f.truncate(HBAR, config.hbar_order);

    let phi1 = flow.rename_param(time, "t1")?.truncate("t1", l1);
    let phi2 = flow.rename_param(time, "t2")?.truncate("t2", l2);
    let s1 = at_time(s, time, "t1", l1)?;
    let s2 = at_time(s, time, "t2", l2)?;
    let sum = &DeformedFn::param(dim, "t1", l1) + &DeformedFn::param(dim, "t2", l2);
    let phi12 = flow.map_components(|c| c.substitute_param(time, &sum))?;
    let s12 = s.substitute_param(time, &sum)?;

    let composed = quantum_compose(&phi1, &phi2, &s2)?;
    let composition = (0..2 * dim)
        .map(|v| {
            let label = var_name(dim, v).replace('x', "Q").replace('p', "P");
            let c = composed.component(v).clone();
            let e = phi12.component(v).clone();
            let residual = cut(c.checked_sub(&e)?);
            Ok(ComponentCheck {
                label,
                composed: c,
                expected: e,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let hbar = flow.params().iter().find(|p| p.name == HBAR).map_or(config.hbar_order, |p| p.order);
    let monomials: Vec<Monomial> = Monomial::all_up_to(dim, config.degree);
    let pullback = monomials
        .par_iter()
        .map(|m| {
            let a = monomial_series(dim, m, hbar);
            let lhs = quantum_pullback(&phi12, &s12, &a)?;
            let rhs = quantum_pullback(&phi2, &s2, &quantum_pullback(&phi1, &s1, &a)?)?;
            Ok((monomial_label(dim, m), cut(lhs.checked_sub(&rhs)?)))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GroupLawReport {
        config: config.clone(),
        composition,
        pullback: RelationReport::collect("(F1 F2)^* A = F2^*(F1^* A)", pullback),
    })
}

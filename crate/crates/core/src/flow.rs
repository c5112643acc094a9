//! Heisenberg evolution as a bracket exponential, quantum and classical
//! flows, and canonicity checks.
//!
//! `A(t) = Σ_k (−t)^k / k! · ⟦H, ⟦H, … ⟦H, A⟧…⟧⟧`. With this sign the series
//! satisfies `dA/dt = ⟦A(t), H⟧` term by term.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::text::var_name;
use crate::algebra::{DeformedFn, GaussianRational, Param, PhaseMap, PhasePoly, HBAR};
use crate::error::{Error, Result};
use crate::moyal::{moyal_bracket, poisson_bracket, StarProductSpec};

/// Default ħ-truncation.
pub const DEFAULT_HBAR_ORDER: u32 = 4;
/// Default time truncation.
pub const DEFAULT_T_ORDER: u32 = 8;
/// Default name of the time parameter.
pub const TIME: &str = "t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketKind {
    Moyal,
    Poisson,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianSystem {
    hamiltonian: PhasePoly,
    hbar_order: u32,
    t_order: u32,
    time: String,
}

impl HamiltonianSystem {
    pub fn new(hamiltonian: PhasePoly, hbar_order: u32, t_order: u32) -> Result<Self> {
        if !hamiltonian.is_real() {
            return Err(Error::ComplexHamiltonian);
        }
        Ok(HamiltonianSystem {
            hamiltonian,
            hbar_order,
            t_order,
            time: TIME.to_string(),
        })
    }

    /// Uses `name` instead of `t` for the time parameter.
    pub fn with_time(mut self, name: &str) -> Self {
        self.time = name.to_string();
        self
    }

    pub fn with_orders(mut self, hbar_order: u32, t_order: u32) -> Self {
        self.hbar_order = hbar_order;
        self.t_order = t_order;
        self
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &PhasePoly {
        &self.hamiltonian
    }

    pub fn hbar_order(&self) -> u32 {
        self.hbar_order
    }

    pub fn t_order(&self) -> u32 {
        self.t_order
    }

    pub fn time(&self) -> &str {
        &self.time
    }

    /// `[h: K, t: L]`.
    pub fn params(&self) -> Vec<Param> {
        crate::algebra::normalize_params(&[
            Param::new(HBAR, self.hbar_order),
            Param::new(self.time.clone(), self.t_order),
        ])
    }

    fn bracket(&self, kind: BracketKind, f: &DeformedFn, g: &DeformedFn) -> Result<DeformedFn> {
        match kind {
            BracketKind::Moyal => moyal_bracket(&StarProductSpec::Moyal, f, g),
            BracketKind::Poisson => poisson_bracket(f, g),
        }
    }

    fn hamiltonian_series(&self, kind: BracketKind) -> DeformedFn {
        let h: DeformedFn = self.hamiltonian.clone().into();
        match kind {
            BracketKind::Moyal => h.truncate(HBAR, self.hbar_order),
            BracketKind::Poisson => h,
        }
    }
}

fn evolve(system: &HamiltonianSystem, a: &DeformedFn, kind: BracketKind) -> Result<DeformedFn> {
    if a.dim() != system.dim() {
        return Err(Error::Incompatible(format!(
            "observable of dimension {} for a system of dimension {}",
            a.dim(),
            system.dim()
        )));
    }
    if a.param_order(system.time()).is_some() {
        return Err(Error::ParamCollision(system.time().to_string()));
    }
    let h = system.hamiltonian_series(kind);
    let mut term = match kind {
        BracketKind::Moyal => a.truncate(HBAR, system.hbar_order),
        BracketKind::Poisson => a.clone(),
    };
    let time = Param::new(system.time.clone(), system.t_order);
    let mut acc = term.truncate(&time.name, time.order);
    for k in 1..=system.t_order {
        term = system.bracket(kind, &h, &term)?;
        if term.is_zero() {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let c = &GaussianRational::from(sign) * &GaussianRational::inv_factorial(k);
        let tk = DeformedFn::param_monomial(a.dim(), std::slice::from_ref(&time), &[k]);
        acc = &acc + &(&term.scale(&c) * &tk);
    }
    Ok(acc)
}

/// `e^{−t⟦H,·⟧} A`, truncated to `(K, L)`.
pub fn evolve_observable(system: &HamiltonianSystem, a: &DeformedFn) -> Result<DeformedFn> {
    evolve(system, a, BracketKind::Moyal)
}

/// `e^{−t{H,·}} A`.
pub fn evolve_classical(system: &HamiltonianSystem, a: &DeformedFn) -> Result<DeformedFn> {
    evolve(system, a, BracketKind::Poisson)
}

/// `dA/dt − ⟦A, H⟧`, zero up to `(K, L − 1)` for a solution of the
/// Heisenberg equation.
pub fn evolution_residual(system: &HamiltonianSystem, a_t: &DeformedFn) -> Result<DeformedFn> {
    evolution_residual_with(system, a_t, BracketKind::Moyal)
}

pub fn evolution_residual_with(
    system: &HamiltonianSystem,
    a_t: &DeformedFn,
    kind: BracketKind,
) -> Result<DeformedFn> {
    let lhs = a_t.param_derivative(system.time())?;
    let rhs = system.bracket(kind, a_t, &system.hamiltonian_series(kind))?;
    lhs.checked_sub(&rhs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumFlow {
    pub system: HamiltonianSystem,
    pub map: PhaseMap,
}

fn flow_with(system: &HamiltonianSystem, kind: BracketKind) -> Result<QuantumFlow> {
    let dim = system.dim();
    let components = (0..2 * dim)
        .into_par_iter()
        .map(|v| evolve(system, &PhasePoly::var(dim, v)?.into(), kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantumFlow {
        system: system.clone(),
        map: PhaseMap::new(components)?,
    })
}

/// `Φ_t = (Q(t), P(t))` from evolving each coordinate function.
pub fn quantum_flow(system: &HamiltonianSystem) -> Result<QuantumFlow> {
    flow_with(system, BracketKind::Moyal)
}

/// The same with Poisson brackets; the result has no ħ dependence.
pub fn classical_flow(system: &HamiltonianSystem) -> Result<QuantumFlow> {
    flow_with(system, BracketKind::Poisson)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketEntry {
    pub label: String,
    pub value: DeformedFn,
    pub expected: DeformedFn,
    pub residual: DeformedFn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicityReport {
    pub bracket: BracketKind,
    pub entries: Vec<BracketEntry>,
}

impl CanonicityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.residual.is_zero())
    }

    pub fn entry(&self, label: &str) -> Option<&BracketEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

fn component_label(dim: usize, index: usize) -> String {
    var_name(dim, index).replace('x', "Q").replace('p', "P")
}

fn check_canonicity(map: &PhaseMap, kind: BracketKind) -> Result<CanonicityReport> {
    let dim = map.dim();
    let n = 2 * dim;
    let hbar = map.params().iter().find(|p| p.name == HBAR).map_or(0, |p| p.order);
    let components: Vec<DeformedFn> = map
        .components()
        .iter()
        .map(|c| match kind {
            BracketKind::Moyal => c.truncate(HBAR, hbar),
            BracketKind::Poisson => c.clone(),
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    let entries = pairs
        .par_iter()
        .map(|&(a, b)| {
            let value = match kind {
                BracketKind::Moyal => moyal_bracket(&StarProductSpec::Moyal, &components[a], &components[b])?,
                BracketKind::Poisson => poisson_bracket(&components[a], &components[b])?,
            };
            // ⟦xⁱ, p_j⟧ = δⁱⱼ, all other pairs vanish
            let expected = if a < dim && b == a + dim {
                DeformedFn::one(dim)
            } else {
                DeformedFn::zero(dim)
            };
            let residual = value.checked_sub(&expected)?;
            let (l, r) = (component_label(dim, a), component_label(dim, b));
            let label = match kind {
                BracketKind::Moyal => format!("[[{l},{r}]]"),
                BracketKind::Poisson => format!("{{{l},{r}}}"),
            };
            Ok(BracketEntry {
                label,
                value,
                expected,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicityReport { bracket: kind, entries })
}

/// Moyal brackets of all component pairs against the canonical values.
pub fn check_quantum_canonicity(map: &PhaseMap) -> Result<CanonicityReport> {
    check_canonicity(map, BracketKind::Moyal)
}

/// Poisson brackets of all component pairs against the canonical values.
pub fn check_classical_canonicity(map: &PhaseMap) -> Result<CanonicityReport> {
    check_canonicity(map, BracketKind::Poisson)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::text::{parse_poly, parse_series, ParseContext};

    fn harmonic() -> HamiltonianSystem {
        HamiltonianSystem::new(parse_poly("1/2*p^2 + 1/2*x^2", 1).unwrap(), 4, 3).unwrap()
    }

    #[test]
    fn energy_is_conserved() {
        let sys = harmonic();
        let h: DeformedFn = sys.hamiltonian().clone().into();
        let evolved = evolve_observable(&sys, &h).unwrap();
        assert!(evolved.agrees_with(&h));
    }

    #[test]
    fn harmonic_position_to_third_order() {
        let sys = harmonic();
        let x: DeformedFn = PhasePoly::x(1, 0).into();
        let got = evolve_observable(&sys, &x).unwrap();
        let ctx = ParseContext::new(1).with_params(&sys.params());
        let expected = parse_series("x + t*p - 1/2*t^2*x - 1/6*t^3*p", &ctx).unwrap();
        assert_eq!(got, expected);
        assert!(evolution_residual(&sys, &got).unwrap().is_zero());
    }

    #[test]
    fn complex_hamiltonian_rejected() {
        let h = parse_poly("i*x*p", 1).unwrap();
        assert_eq!(HamiltonianSystem::new(h, 2, 2), Err(Error::ComplexHamiltonian));
    }

    #[test]
    fn time_parameter_collision() {
        let sys = harmonic();
        let a = DeformedFn::param(1, "t", 2);
        assert_eq!(evolve_observable(&sys, &a), Err(Error::ParamCollision("t".into())));
    }

    #[test]
    fn identity_map_is_canonical() {
        let id = PhaseMap::identity(2);
        assert!(check_quantum_canonicity(&id).unwrap().passed());
        assert!(check_classical_canonicity(&id).unwrap().passed());
        assert_eq!(check_quantum_canonicity(&id).unwrap().entries.len(), 6);
    }
}

//! Phase-space transformations `Φ = (Q¹..Qᴺ, P₁..P_N)` as tuples of series,
//! composition with observables, and series reversion.

use super::poly::PhasePoly;
use super::series::{normalize_params, DeformedFn, Param};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseMap {
    dim: usize,
    params: Vec<Param>,
    components: Vec<DeformedFn>,
}

impl PhaseMap {
    /// Assembles a map from its 2N components, bringing them to a common
    /// parameter list (union of names, smallest truncation).
    pub fn new(components: Vec<DeformedFn>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Incompatible("a phase map needs components".into()));
        };
        let dim = first.dim();
        if components.len() != 2 * dim {
            return Err(Error::Incompatible(format!(
                "{} components for phase-space dimension {dim}",
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::Incompatible(format!(
                "component of dimension {} in a map of dimension {dim}",
                c.dim()
            )));
        }
        let all: Vec<Param> = components.iter().flat_map(|c| c.params().to_vec()).collect();
        let params = normalize_params(&all);
        let components = components
            .iter()
            .map(|c| c.align(&params))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseMap {
            dim,
            params,
            components,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::identity_with(dim, &[])
    }

    pub fn identity_with(dim: usize, params: &[Param]) -> Self {
        let components = (0..2 * dim)
            .map(|i| DeformedFn::from_poly_with(PhasePoly::var(dim, i).unwrap(), params))
            .collect();
        PhaseMap {
            dim,
            params: normalize_params(params),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn components(&self) -> &[DeformedFn] {
        &self.components
    }

    pub fn component(&self, index: usize) -> &DeformedFn {
        &self.components[index]
    }

    /// `Qⁱ` (0-based `i`).
    pub fn q(&self, i: usize) -> &DeformedFn {
        &self.components[i]
    }

    /// `P_i` (0-based `i`).
    pub fn p(&self, i: usize) -> &DeformedFn {
        &self.components[self.dim + i]
    }

    pub fn map_components(&self, f: impl Fn(&DeformedFn) -> Result<DeformedFn>) -> Result<PhaseMap> {
        PhaseMap::new(self.components.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn rename_param(&self, from: &str, to: &str) -> Result<PhaseMap> {
        self.map_components(|c| {
            if c.param_order(from).is_some() {
                c.rename_param(from, to)
            } else {
                Ok(c.clone())
            }
        })
    }

    pub fn truncate(&self, name: &str, order: u32) -> PhaseMap {
        self.map_components(|c| Ok(c.truncate(name, order)))
            .expect("truncation keeps components compatible")
    }

    /// True when the part of total parameter degree zero is the identity.
    pub fn is_flow_like(&self) -> bool {
        self.flow_like_defect().is_none()
    }

    fn flow_like_defect(&self) -> Option<String> {
        let zero = vec![0u32; self.params.len()];
        for (i, c) in self.components.iter().enumerate() {
            let lead = c.coeff(&zero);
            if lead != PhasePoly::var(self.dim, i).unwrap() {
                return Some(format!("component {i} does not start with its coordinate"));
            }
        }
        None
    }

    /// Whether `self` and `other` agree under their combined truncation.
    pub fn agrees_with(&self, other: &PhaseMap) -> bool {
        self.dim == other.dim
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.agrees_with(b))
    }

    /// `Ψ` with `Ψ ∘ Φ = Φ ∘ Ψ = id` up to truncation.
    ///
    /// Fixed-point iteration `Ψ ← id − (Φ − id) ∘ Ψ`; each pass fixes one more
    /// total parameter degree, so it stabilises after at most
    /// `Σ orders + 1` passes.
    pub fn invert(&self) -> Result<PhaseMap> {
        if let Some(why) = self.flow_like_defect() {
            return Err(Error::NotInvertible(why));
        }
        let id = PhaseMap::identity_with(self.dim, &self.params);
        let remainder = PhaseMap {
            dim: self.dim,
            params: self.params.clone(),
            components: self
                .components
                .iter()
                .zip(&id.components)
                .map(|(c, v)| c - v)
                .collect(),
        };
        let max_passes = self.params.iter().map(|p| p.order as usize).sum::<usize>() + 2;
        let mut psi = id.clone();
        for _ in 0..max_passes {
            let next = PhaseMap::new(
                remainder
                    .components
                    .iter()
                    .zip(&id.components)
                    .map(|(r, v)| Ok(v - &substitute(r, &psi)?))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            if next == psi {
                return Ok(psi);
            }
            psi = next;
        }
        Ok(psi)
    }
}

/// `f ∘ Φ`: every `xⁱ` replaced by `Qⁱ` and every `p_j` by `P_j`.
pub fn substitute(f: &DeformedFn, map: &PhaseMap) -> Result<DeformedFn> {
    if f.dim() != map.dim {
        return Err(Error::Incompatible(format!(
            "substituting a map of dimension {} into a series of dimension {}",
            map.dim,
            f.dim()
        )));
    }
    let n = 2 * map.dim;
    let max_deg = f.phase_degree().unwrap_or(0) as usize;
    // powers[v][e] = component_v^e
    let mut powers: Vec<Vec<DeformedFn>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut max_e = 0;
        for (_, poly) in f.coeffs() {
            for (m, _) in poly.terms() {
                max_e = max_e.max(m.exponents()[v] as usize);
            }
        }
        let mut row = vec![DeformedFn::one(map.dim)];
        for e in 1..=max_e.min(max_deg) {
            let next = &row[e - 1] * &map.components[v];
            row.push(next);
        }
        powers.push(row);
    }
    let mut out = DeformedFn::zero_with(map.dim, &[f.params(), map.params()].concat());
    for (degrees, poly) in f.coeffs() {
        let param_part = DeformedFn::param_monomial(map.dim, f.params(), degrees);
        let mut acc = DeformedFn::zero(map.dim);
        for (m, c) in poly.terms() {
            let mut term = DeformedFn::constant(map.dim, c.clone());
            for (v, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[v][e as usize];
                }
            }
            acc = &acc + &term;
        }
        out = &out + &(&param_part * &acc);
    }
    Ok(out)
}

/// `Φ₁ ∘ Φ₂`, i.e. each component of `outer` composed with `inner`.
pub fn compose(outer: &PhaseMap, inner: &PhaseMap) -> Result<PhaseMap> {
    outer.map_components(|c| substitute(c, inner))
}

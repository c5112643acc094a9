//! Checking a candidate intertwiner on a family of monomials.

use rayon::prelude::*;
use serde::Serialize;

use super::DiffOperator;
use crate::algebra::text::format_poly;
use crate::algebra::{DeformedFn, GaussianRational, Monomial, PhaseMap, PhasePoly, HBAR};
use crate::error::Result;
use crate::moyal::{star, StarProductSpec};
use crate::transform::transformed_star;

/// Total degree bound of the monomial pairs used by default.
pub const DEFAULT_TEST_DEGREE: u32 = 6;

const KEPT_FAILURES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub case: String,
    pub residual: DeformedFn,
}

/// One relation evaluated on many inputs; only the first few failures are kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub cases: usize,
    pub failed: usize,
    pub failures: Vec<Failure>,
}

impl RelationReport {
    pub(crate) fn collect(relation: &str, results: Vec<(String, DeformedFn)>) -> Self {
        let cases = results.len();
        let bad: Vec<Failure> = results
            .into_iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|(case, residual)| Failure { case, residual })
            .collect();
        RelationReport {
            relation: relation.to_string(),
            cases,
            failed: bad.len(),
            failures: bad.into_iter().take(KEPT_FAILURES).collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntertwinerReport {
    pub hbar_order: u32,
    pub degree: u32,
    pub s_operator: bool,
    pub product: RelationReport,
    pub coordinates: RelationReport,
    pub involution: RelationReport,
}

impl IntertwinerReport {
    pub fn passed(&self) -> bool {
        self.s_operator && self.product.passed() && self.coordinates.passed() && self.involution.passed()
    }
}

/// Ordered pairs of monomials with `deg f + deg g ≤ degree`.
pub fn monomial_family(dim: usize, degree: u32) -> Vec<(Monomial, Monomial)> {
    let all = Monomial::all_up_to(dim, degree);
    let mut out = Vec::new();
    for f in &all {
        for g in &all {
            if f.degree() + g.degree() <= degree {
                out.push((f.clone(), g.clone()));
            }
        }
    }
    out
}

pub(crate) fn monomial_series(dim: usize, m: &Monomial, hbar_order: u32) -> DeformedFn {
    DeformedFn::from(PhasePoly::term(dim, m.clone(), GaussianRational::from(1))).truncate(HBAR, hbar_order)
}

pub(crate) fn monomial_label(dim: usize, m: &Monomial) -> String {
    format_poly(&PhasePoly::term(dim, m.clone(), GaussianRational::from(1)))
}

/// Checks `S(f ★ g) = Sf ★_Φ Sg`, `S xⁱ = xⁱ`, `S pⱼ = pⱼ` and
/// `S(f*) = (Sf)*` up to ħ^`hbar_order`, over monomial pairs of total degree
/// at most `degree`.
pub fn verify_intertwiner(
    s: &DiffOperator,
    map: &PhaseMap,
    hbar_order: u32,
    degree: u32,
) -> Result<IntertwinerReport> {
    let dim = map.dim();
    let s = s.truncate(HBAR, hbar_order);
    let spec = transformed_star(map)?;
    let cut = |f: DeformedFn| f.truncate(HBAR, hbar_order);

    let monomials = Monomial::all_up_to(dim, degree);
    let images = monomials
        .par_iter()
        .map(|m| s.apply(&monomial_series(dim, m, hbar_order)))
        .collect::<Result<Vec<_>>>()?;
    let index = |m: &Monomial| monomials.binary_search(m).expect("family is closed");

    let pairs = monomial_family(dim, degree);
    let product = pairs
        .par_iter()
        .map(|(f, g)| {
            let fs = monomial_series(dim, f, hbar_order);
            let gs = monomial_series(dim, g, hbar_order);
            let lhs = s.apply(&star(&StarProductSpec::Moyal, &fs, &gs)?)?;
            let rhs = star(&spec, &images[index(f)], &images[index(g)])?;
            let case = format!("({}, {})", monomial_label(dim, f), monomial_label(dim, g));
            Ok((case, cut(lhs.checked_sub(&rhs)?)))
        })
        .collect::<Result<Vec<_>>>()?;

    let coordinates = (0..2 * dim)
        .map(|v| {
            let m = Monomial::var(dim, v);
            let residual = images[index(&m)].checked_sub(&monomial_series(dim, &m, hbar_order))?;
            Ok((monomial_label(dim, &m), cut(residual)))
        })
        .collect::<Result<Vec<_>>>()?;

    let i = GaussianRational::i();
    let involution = monomials
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, m)| [(k, m, false), (k, m, true)])
        .map(|(k, m, imaginary)| {
            let (f, sf) = if imaginary {
                (monomial_series(dim, m, hbar_order).scale(&i), images[k].scale(&i))
            } else {
                (monomial_series(dim, m, hbar_order), images[k].clone())
            };
            let residual = s.apply(&f.conj())?.checked_sub(&sf.conj())?;
            let label = monomial_label(dim, m);
            let case = if imaginary { format!("i*{label}") } else { label };
            Ok((case, cut(residual)))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IntertwinerReport {
        hbar_order,
        degree,
        s_operator: s.is_s_operator(),
        product: RelationReport::collect("S(f*g) = Sf *_t Sg", product),
        coordinates: RelationReport::collect("S x = x, S p = p", coordinates),
        involution: RelationReport::collect("S(conj f) = conj(S f)", involution),
    })
}

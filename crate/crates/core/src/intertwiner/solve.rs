//! Constructing an intertwiner order by order in ħ.
//!
//! With `S = 1 + Σ_{j<k} ħʲ Sⱼ` known, the ħᵏ part of
//! `S(f ★ g) − Sf ★_Φ Sg` is an obstruction `Eₖ(f, g)`, and the next term
//! must satisfy `Sₖ(fg) − Sₖ(f) g − f Sₖ(g) = −Eₖ(f, g)`. The left side is
//! linear in the unknown coefficients of
//! `Sₖ = Σ_{2≤|α|≤r} Σ_{deg μ≤c} c_{α,μ} μ ∂^α`, where each `c_{α,μ}` is a
//! polynomial in the non-ħ parameters. Terms with `|α| < 2` are left out:
//! the unit relation forces `S 1 = 1`, and then `S xⁱ = xⁱ`, `S pⱼ = pⱼ`
//! remove the first-order terms.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::linear::{Echelon, Row};
use super::verify::{monomial_label, monomial_series, verify_intertwiner, IntertwinerReport};
use super::DiffOperator;
use crate::algebra::{DeformedFn, GaussianRational, Monomial, Param, PhaseMap, PhasePoly, HBAR};
use crate::error::{Error, Result};
use crate::moyal::{star, StarProductSpec};
use crate::transform::transformed_star;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveConfig {
    pub hbar_order: u32,
    pub max_derivative_order: u32,
    pub max_coeff_degree: u32,
    /// Monomial pairs with `deg f + deg g` up to this bound give the equations.
    pub test_degree: u32,
}

impl SolveConfig {
    pub fn new(hbar_order: u32, max_derivative_order: u32, max_coeff_degree: u32) -> Self {
        SolveConfig {
            hbar_order,
            max_derivative_order,
            max_coeff_degree,
            test_degree: max_derivative_order + 1,
        }
    }

    pub fn with_test_degree(mut self, degree: u32) -> Self {
        self.test_degree = degree;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solved {
    pub operator: DiffOperator,
    /// Dimension of the solution space left at each order ħ¹..ħᴷ.
    pub nullity: Vec<usize>,
    pub verification: IntertwinerReport,
}

impl Solved {
    pub fn unique(&self) -> bool {
        self.nullity.iter().all(|&n| n == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SolveOutcome {
    Solved(Solved),
    /// The linear system at this order has no solution inside the ansatz.
    Exhausted {
        hbar_degree: u32,
        partial: DiffOperator,
        message: String,
    },
    /// The obstruction is not symmetric in `f, g`; no differential
    /// operator of any size can remove it.
    Inconsistent {
        hbar_degree: u32,
        case: String,
        residual: DeformedFn,
        message: String,
    },
}

impl SolveOutcome {
    pub fn solved(&self) -> Option<&Solved> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

const EXHAUSTED: &str = "no operator within the ansatz bounds satisfies the relations at this order; \
this does not decide whether an intertwiner exists with larger bounds";

/// Searches for `S` with `S₀ = 1` intertwining `★` with `★_Φ` up to
/// ħ^`hbar_order`.
pub fn solve_intertwiner(map: &PhaseMap, config: &SolveConfig) -> Result<SolveOutcome> {
    let dim = map.dim();
    let k_max = config.hbar_order;
    if config.test_degree < config.max_derivative_order.max(2) {
        return Err(Error::Incompatible(
            "the test degree must reach the derivative order of the ansatz".into(),
        ));
    }
    if let Some(p) = map.params().iter().find(|p| p.name == HBAR) {
        if p.order < k_max {
            return Err(Error::TruncationTooLow {
                param: HBAR.into(),
                reason: format!("the map is known to ħ^{} but ħ^{k_max} was requested", p.order),
            });
        }
    }
    let spec = transformed_star(map)?;
    let rest: Vec<Param> = map.params().iter().filter(|p| p.name != HBAR).cloned().collect();

    let alphas: Vec<Monomial> = Monomial::all_up_to(dim, config.max_derivative_order)
        .into_iter()
        .filter(|a| a.degree() >= 2)
        .collect();
    let mus = Monomial::all_up_to(dim, config.max_coeff_degree);
    let ncols = alphas.len() * mus.len();

    let monomials: Vec<Monomial> = Monomial::all_up_to(dim, config.test_degree)
        .into_iter()
        .filter(|m| m.degree() > 0)
        .collect();
    let mut pairs = Vec::new();
    for (i, f) in monomials.iter().enumerate() {
        for (j, g) in monomials.iter().enumerate() {
            if f.degree() + g.degree() <= config.test_degree {
                pairs.push((i, j));
            }
        }
    }
    let coboundaries: Vec<Vec<PhasePoly>> = pairs
        .par_iter()
        .map(|&(i, j)| coboundary_columns(dim, &alphas, &monomials[i], &monomials[j]))
        .collect();

    let mut s = DiffOperator::identity(dim);
    let mut nullity = Vec::new();
    for k in 1..=k_max {
        let sk = s.truncate(HBAR, k);
        let images = monomials
            .par_iter()
            .map(|m| sk.apply(&monomial_series(dim, m, k)))
            .collect::<Result<Vec<_>>>()?;
        let obstructions = pairs
            .par_iter()
            .map(|&(i, j)| {
                let f = monomial_series(dim, &monomials[i], k);
                let g = monomial_series(dim, &monomials[j], k);
                let lhs = sk.apply(&star(&StarProductSpec::Moyal, &f, &g)?)?;
                let rhs = star(&spec, &images[i], &images[j])?;
                lhs.checked_sub(&rhs)?.truncate(HBAR, k).coefficient(HBAR, k).align(&rest)
            })
            .collect::<Result<Vec<_>>>()?;

        let position: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(n, &p)| (p, n)).collect();
        for (n, &(i, j)) in pairs.iter().enumerate() {
            if i < j {
                let swapped = &obstructions[position[&(j, i)]];
                let asym = obstructions[n].checked_sub(swapped)?;
                if !asym.is_zero() {
                    let mut message = "the obstruction is antisymmetric in part, which no differential operator \
can cancel given the lower orders"
                        .to_string();
                    if nullity.iter().any(|&n| n > 0) {
                        message.push_str("; the lower orders were not unique, so another choice might remove it");
                    }
                    return Ok(SolveOutcome::Inconsistent {
                        hbar_degree: k,
                        case: format!(
                            "({}, {})",
                            monomial_label(dim, &monomials[i]),
                            monomial_label(dim, &monomials[j])
                        ),
                        residual: asym,
                        message,
                    });
                }
            }
        }

        let mut echelon = Echelon::new(ncols);
        for (n, _) in pairs.iter().enumerate() {
            for row in equations(&coboundaries[n], &obstructions[n], &mus) {
                if echelon.insert(row).is_some() {
                    return Ok(SolveOutcome::Exhausted {
                        hbar_degree: k,
                        partial: s,
                        message: EXHAUSTED.into(),
                    });
                }
            }
        }
        nullity.push(echelon.nullity());

        let hk = DeformedFn::param_monomial(dim, &[Param::new(HBAR, k_max)], &[k]);
        let mut terms = Vec::new();
        for (col, values) in echelon.solve() {
            let alpha = &alphas[col / mus.len()];
            let mu = &mus[col % mus.len()];
            let mono = PhasePoly::term(dim, mu.clone(), GaussianRational::from(1));
            for (tau, c) in values {
                let coeff = DeformedFn::param_monomial(dim, &rest, &tau).mul_poly(&mono).scale(&c);
                terms.push((alpha.clone(), &coeff * &hk));
            }
        }
        let step = DiffOperator::new(dim, terms)?;
        s = s.checked_add(&step)?;
    }

    let s = s.map_coeffs(|c| Ok(c.truncate(HBAR, k_max)))?;
    let verification = verify_intertwiner(&s, map, k_max, config.test_degree)?;
    Ok(SolveOutcome::Solved(Solved {
        operator: s,
        nullity,
        verification,
    }))
}

/// `∂^α(fg) − (∂^α f) g − f ∂^α g` for every `α` of the ansatz.
fn coboundary_columns(dim: usize, alphas: &[Monomial], f: &Monomial, g: &Monomial) -> Vec<PhasePoly> {
    let one = GaussianRational::from(1);
    let fp = PhasePoly::term(dim, f.clone(), one.clone());
    let gp = PhasePoly::term(dim, g.clone(), one.clone());
    let fg = PhasePoly::term(dim, f.mul(g), one);
    alphas
        .iter()
        .map(|a| {
            let whole = fg.partial_multi(a);
            let left = &fp.partial_multi(a) * &gp;
            let right = &fp * &gp.partial_multi(a);
            &(&whole - &left) - &right
        })
        .collect()
}

/// One equation per phase monomial `ν`: `Σ c_{α,μ} [μ Pα]_ν = −[E]_ν`.
fn equations(columns: &[PhasePoly], obstruction: &DeformedFn, mus: &[Monomial]) -> Vec<Row> {
    let mut rows: BTreeMap<Monomial, Row> = BTreeMap::new();
    for (a, poly) in columns.iter().enumerate() {
        for (m, c) in poly.terms() {
            for (u, mu) in mus.iter().enumerate() {
                let row = rows.entry(m.mul(mu)).or_default();
                let col = a * mus.len() + u;
                let entry = row.cols.entry(col).or_insert_with(|| GaussianRational::from(0));
                *entry = &*entry + c;
            }
        }
    }
    for (tau, poly) in obstruction.coeffs() {
        for (nu, c) in poly.terms() {
            let row = rows.entry(nu.clone()).or_default();
            let entry = row.rhs.entry(tau.to_vec()).or_insert_with(|| GaussianRational::from(0));
            *entry = &*entry - c;
        }
    }
    for row in rows.values_mut() {
        row.cols.retain(|_, v| !num_traits::Zero::is_zero(v));
        row.rhs.retain(|_, v| !num_traits::Zero::is_zero(v));
    }
    rows.into_values().filter(|r| !r.cols.is_empty() || !r.rhs.is_empty()).collect()
}

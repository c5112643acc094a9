//! The Moyal star product, its commutator and deformed bracket, the Poisson
//! bracket, and ★-monomials.
//!
//! For N degrees of freedom the bidifferential exponential expands to
//!
//! ```text
//! f ★ g = Σ_{a,b} (iħ/2)^{|a|+|b|} (−1)^{|b|} / (a! b!) · (∂_x^a ∂_p^b f)(∂_p^a ∂_x^b g)
//! ```
//!
//! over multi-indices `a, b ∈ ℕᴺ`. Terms with `|a| + |b| > K` vanish under
//! the ħ-truncation `K`. The transformed product replaces each partial by a
//! [`Derivation`]; those are applied in a fixed variable order so that
//! `f ★ g` and `g ★ f` are built from identical derivative expressions.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::algebra::{DeformedFn, GaussianRational, Monomial, Param, PhasePoly, HBAR};
use crate::error::{Error, Result};
use crate::transform::Derivation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarProductSpec {
    Moyal,
    /// Moyal form with `∂_{xⁱ}, ∂_{pᵢ}` replaced by `derivations[i]`,
    /// `derivations[N + i]`.
    Transformed { derivations: Vec<Derivation> },
}

impl StarProductSpec {
    pub fn transformed(derivations: Vec<Derivation>) -> Result<Self> {
        let Some(first) = derivations.first() else {
            return Err(Error::DerivationCount { expected: 2, got: 0 });
        };
        let dim = first.dim();
        if derivations.len() != 2 * dim {
            return Err(Error::DerivationCount {
                expected: 2 * dim,
                got: derivations.len(),
            });
        }
        if derivations.iter().any(|d| d.dim() != dim) {
            return Err(Error::Incompatible("derivations of mixed dimension".into()));
        }
        Ok(StarProductSpec::Transformed { derivations })
    }

    fn check(&self, dim: usize) -> Result<()> {
        if let StarProductSpec::Transformed { derivations } = self {
            if derivations.len() != 2 * dim {
                return Err(Error::DerivationCount {
                    expected: 2 * dim,
                    got: derivations.len(),
                });
            }
            if derivations.iter().any(|d| d.dim() != dim) {
                return Err(Error::Incompatible("derivation dimension".into()));
            }
        }
        Ok(())
    }

    /// Parameters the derivation coefficients depend on.
    fn params(&self) -> Vec<Param> {
        match self {
            StarProductSpec::Moyal => Vec::new(),
            StarProductSpec::Transformed { derivations } => derivations
                .iter()
                .flat_map(|d| d.coeffs().iter().flat_map(|c| c.params().to_vec()))
                .collect(),
        }
    }

    fn hbar_order(&self) -> Option<u32> {
        match self {
            StarProductSpec::Moyal => None,
            StarProductSpec::Transformed { derivations } => derivations
                .iter()
                .flat_map(|d| d.coeffs().iter().filter_map(|c| c.param_order(HBAR)))
                .min(),
        }
    }
}

fn check_pair(f: &DeformedFn, g: &DeformedFn) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::Incompatible(format!(
            "phase-space dimensions {} and {}",
            f.dim(),
            g.dim()
        )));
    }
    Ok(())
}

/// ħ-truncation shared by the operands and the product specification.
fn hbar_order(spec: &StarProductSpec, f: &DeformedFn, g: &DeformedFn) -> Result<u32> {
    [f.param_order(HBAR), g.param_order(HBAR), spec.hbar_order()]
        .into_iter()
        .flatten()
        .min()
        .ok_or(Error::MissingHbar)
}

/// `D^α f`, memoised; α is peeled from its highest variable index.
struct DerivativeTable<'a> {
    spec: &'a StarProductSpec,
    cache: HashMap<Monomial, DeformedFn>,
}

impl<'a> DerivativeTable<'a> {
    fn new(spec: &'a StarProductSpec, f: &DeformedFn) -> Self {
        let mut cache = HashMap::new();
        cache.insert(Monomial::one(f.dim()), f.clone());
        DerivativeTable { spec, cache }
    }

    fn get(&mut self, alpha: &Monomial) -> DeformedFn {
        if let Some(v) = self.cache.get(alpha) {
            return v.clone();
        }
        let value = match self.spec {
            StarProductSpec::Moyal => self.cache[&Monomial::one(alpha.len() / 2)].partial_multi(alpha),
            StarProductSpec::Transformed { derivations } => {
                let v = alpha.exponents().iter().rposition(|&e| e > 0).unwrap();
                let mut lower = alpha.exponents().to_vec();
                lower[v] -= 1;
                let inner = self.get(&Monomial::new(lower));
                if inner.is_zero() {
                    inner
                } else {
                    derivations[v].apply(&inner)
                }
            }
        };
        self.cache.insert(alpha.clone(), value.clone());
        value
    }
}

/// Right-hand multi-index `(b, a)` paired with the left-hand `(a, b)`.
fn swap_halves(alpha: &Monomial) -> Monomial {
    let e = alpha.exponents();
    let n = e.len() / 2;
    let mut out = e[n..].to_vec();
    out.extend_from_slice(&e[..n]);
    Monomial::new(out)
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// `(−1)^{|b|} / (a! b!)` for `alpha = (a, b)`.
fn pairing_weight(alpha: &Monomial) -> GaussianRational {
    let e = alpha.exponents();
    let n = e.len() / 2;
    let denom: u64 = e.iter().map(|&k| factorial(k)).product();
    let sign = if e[n..].iter().sum::<u32>() % 2 == 1 { -1 } else { 1 };
    GaussianRational::from_ratio(sign, denom as i64)
}

/// Σ over pairings of total order `k ∈ orders`:
/// `weight(k) · pairing_weight(α) · ħ^{shift(k)} · (D^α f)(D^{α'} g)`.
fn bidifferential_sum(
    spec: &StarProductSpec,
    f: &DeformedFn,
    g: &DeformedFn,
    hbar_order: u32,
    max_k: u32,
    keep: impl Fn(u32) -> Option<(GaussianRational, u32)> + Sync,
) -> DeformedFn {
    let dim = f.dim();
    let alphas: Vec<Monomial> = Monomial::all_up_to(dim, max_k)
        .into_iter()
        .filter(|a| keep(a.degree()).is_some())
        .collect();
    let mut left = DerivativeTable::new(spec, f);
    let mut right = DerivativeTable::new(spec, g);
    let pairs: Vec<(Monomial, DeformedFn, DeformedFn)> = alphas
        .into_iter()
        .map(|a| {
            let l = left.get(&a);
            let r = if l.is_zero() { l.clone() } else { right.get(&swap_halves(&a)) };
            (a, l, r)
        })
        .filter(|(_, l, r)| !l.is_zero() && !r.is_zero())
        .collect();
    let terms: Vec<DeformedFn> = pairs
        .par_iter()
        .map(|(a, l, r)| {
            let (weight, shift) = keep(a.degree()).unwrap();
            let c = &weight * &pairing_weight(a);
            let h = DeformedFn::param_monomial(dim, &[Param::new(HBAR, hbar_order)], &[shift]);
            &(l * r).scale(&c) * &h
        })
        .collect();
    let mut context = [f.params(), g.params()].concat();
    context.extend(spec.params());
    context.push(Param::new(HBAR, hbar_order));
    let mut acc = DeformedFn::zero_with(dim, &context);
    for t in &terms {
        acc = &acc + t;
    }
    acc
}

/// `f ★ g` to the ħ-truncation of the operands.
pub fn star(spec: &StarProductSpec, f: &DeformedFn, g: &DeformedFn) -> Result<DeformedFn> {
    check_pair(f, g)?;
    spec.check(f.dim())?;
    let k_max = hbar_order(spec, f, g)?;
    let half_i = half_i();
    Ok(bidifferential_sum(spec, f, g, k_max, k_max, |k| Some((half_i.pow(k), k))))
}

/// `[f, g] = f ★ g − g ★ f`.
pub fn star_commutator(spec: &StarProductSpec, f: &DeformedFn, g: &DeformedFn) -> Result<DeformedFn> {
    Ok(&star(spec, f, g)? - &star(spec, g, f)?)
}

/// `⟦f, g⟧ = [f, g] / (iħ)`.
///
/// The even-order pairings cancel in the commutator, so the bracket is
/// `Σ_{k odd} (iħ/2)^{k−1} / k! · Pᵏ(f, g)`. Evaluating that sum directly
/// keeps the full ħ-truncation of the operands: the ħ^{K+1} term of the
/// commutator only involves coefficients of `f` and `g` up to ħ^K.
pub fn moyal_bracket(spec: &StarProductSpec, f: &DeformedFn, g: &DeformedFn) -> Result<DeformedFn> {
    check_pair(f, g)?;
    spec.check(f.dim())?;
    let k_max = hbar_order(spec, f, g)?;
    let half_i = half_i();
    Ok(bidifferential_sum(spec, f, g, k_max, k_max + 1, |k| {
        (k % 2 == 1).then(|| (half_i.pow(k - 1), k - 1))
    }))
}

/// `{f, g} = Σᵢ ∂_{xⁱ}f ∂_{pᵢ}g − ∂_{pᵢ}f ∂_{xⁱ}g`.
pub fn poisson_bracket(f: &DeformedFn, g: &DeformedFn) -> Result<DeformedFn> {
    check_pair(f, g)?;
    let n = f.dim();
    let mut acc = DeformedFn::zero_with(n, &[f.params(), g.params()].concat());
    for i in 0..n {
        let a = &f.partial(i)? * &g.partial(n + i)?;
        let b = &f.partial(n + i)? * &g.partial(i)?;
        acc = &acc + &(&a - &b);
    }
    Ok(acc)
}

/// `x¹★…★x¹★p₁★…★p₁★x²★…` (left-associated, x factors before p factors
/// within each degree of freedom).
pub fn star_monomial(spec: &StarProductSpec, exponents: &Monomial, hbar_order: u32) -> Result<DeformedFn> {
    let dim = exponents.len() / 2;
    if dim == 0 || !exponents.len().is_multiple_of(2) {
        return Err(Error::Incompatible("exponent vector must have even, positive length".into()));
    }
    spec.check(dim)?;
    let mut acc = DeformedFn::one(dim).truncate(HBAR, hbar_order);
    let e = exponents.exponents();
    for i in 0..dim {
        for (v, count) in [(i, e[i]), (dim + i, e[dim + i])] {
            let factor: DeformedFn = PhasePoly::var(dim, v)?.into();
            for _ in 0..count {
                acc = star(spec, &acc, &factor)?;
            }
        }
    }
    Ok(acc)
}

fn half_i() -> GaussianRational {
    &GaussianRational::i() * &GaussianRational::from_ratio(1, 2)
}

//! Differential operators with series coefficients, intertwiners between
//! the Moyal product and a flow-transformed product, quantum pull-back and
//! the quantum composition of flows.

mod group;
mod linear;
mod solve;
pub(crate) mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::algebra::text::{format_operator, parse_operator, ParseContext};
use crate::algebra::{normalize_params, DeformedFn, GaussianRational, Monomial, Param, HBAR};
use crate::error::{Error, Result};

pub use group::{check_group_law, quantum_compose, quantum_pullback, ComponentCheck, GroupLawConfig, GroupLawReport};
pub use solve::{solve_intertwiner, SolveConfig, SolveOutcome, Solved};
pub use verify::{monomial_family, verify_intertwiner, Failure, IntertwinerReport, RelationReport, DEFAULT_TEST_DEGREE};

/// `Σ_α a_α ∂^α`, with `α` a multi-index over `x¹..xᴺ, p₁..p_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    dim: usize,
    terms: BTreeMap<Monomial, DeformedFn>,
}

impl DiffOperator {
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (Monomial, DeformedFn)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != 2 * dim || c.dim() != dim {
                return Err(Error::Incompatible(format!(
                    "operator term does not live in phase-space dimension {dim}"
                )));
            }
            if c.is_zero() {
                continue;
            }
            match out.remove(&alpha) {
                Some(prev) => {
                    let sum = c.checked_add(&prev)?;
                    if !sum.is_zero() {
                        out.insert(alpha, sum);
                    }
                }
                None => {
                    out.insert(alpha, c);
                }
            }
        }
        let all: Vec<Param> = out.values().flat_map(|c: &DeformedFn| c.params().to_vec()).collect();
        let params = normalize_params(&all);
        let mut terms = BTreeMap::new();
        for (alpha, c) in out {
            let c = c.align(&params)?;
            if !c.is_zero() {
                terms.insert(alpha, c);
            }
        }
        Ok(DiffOperator { dim, terms })
    }

    pub fn identity(dim: usize) -> Self {
        DiffOperator::new(dim, [(Monomial::one(dim), DeformedFn::one(dim))]).unwrap()
    }

    pub fn zero(dim: usize) -> Self {
        DiffOperator {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Reads `1 + (h^2*t*x)*dx^2*dp`-style text.
    pub fn parse(src: &str, ctx: &ParseContext) -> Result<Self> {
        DiffOperator::new(ctx.dim, parse_operator(src, ctx)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &DeformedFn)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &Monomial) -> Option<&DeformedFn> {
        self.terms.get(alpha)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common parameter list of the coefficients.
    pub fn params(&self) -> Vec<Param> {
        self.terms.values().next().map(|c| c.params().to_vec()).unwrap_or_default()
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn hbar0_part(c: &DeformedFn) -> DeformedFn {
        c.coefficient(HBAR, 0)
    }

    /// `S₀ = 1`: the ħ-independent part is the identity.
    pub fn is_s_operator(&self) -> bool {
        let one = Monomial::one(self.dim);
        let has_unit = self.terms.contains_key(&one);
        has_unit
            && self.terms.iter().all(|(alpha, c)| {
                let lead = Self::hbar0_part(c);
                if *alpha == one {
                    lead.agrees_with(&DeformedFn::one(self.dim))
                } else {
                    lead.is_zero()
                }
            })
    }

    /// `Σ a_α ∂^α f`.
    pub fn apply(&self, f: &DeformedFn) -> Result<DeformedFn> {
        if f.dim() != self.dim {
            return Err(Error::Incompatible(format!(
                "operator of dimension {} applied to a series of dimension {}",
                self.dim,
                f.dim()
            )));
        }
        let mut acc = DeformedFn::zero_with(self.dim, &[f.params(), &self.params()].concat());
        for (alpha, c) in &self.terms {
            let d = f.partial_multi(alpha);
            if !d.is_zero() {
                acc = acc.checked_add(&c.checked_mul(&d)?)?;
            }
        }
        Ok(acc)
    }

    pub fn checked_add(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.same_dim(other)?;
        DiffOperator::new(
            self.dim,
            self.terms.iter().chain(&other.terms).map(|(a, c)| (a.clone(), c.clone())),
        )
    }

    pub fn scale(&self, c: &GaussianRational) -> DiffOperator {
        DiffOperator::new(self.dim, self.terms.iter().map(|(a, f)| (a.clone(), f.scale(c)))).unwrap()
    }

    fn same_dim(&self, other: &DiffOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Incompatible(format!(
                "operators of dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// `self ∘ other`, by Leibniz:
    /// `a ∂^α ∘ b ∂^β = Σ_{γ≤α} C(α,γ) a (∂^γ b) ∂^{α−γ+β}`.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.same_dim(other)?;
        let mut out = Vec::new();
        for (alpha, a) in &self.terms {
            let subs = sub_indices(alpha);
            for (beta, b) in &other.terms {
                for gamma in &subs {
                    let db = b.partial_multi(gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let rest = alpha.checked_div(gamma).expect("γ ≤ α");
                    let c = multi_binomial(alpha, gamma);
                    out.push((rest.mul(beta), a.checked_mul(&db)?.scale(&c)));
                }
            }
        }
        DiffOperator::new(self.dim, out)
    }

    /// `exp(G) = Σ Gᵏ/k!`, finite because every term of `G` carries a
    /// positive power of ħ and the coefficients are ħ-truncated.
    pub fn exp(generator: &DiffOperator) -> Result<DiffOperator> {
        let dim = generator.dim;
        for c in generator.terms.values() {
            if !Self::hbar0_part(c).is_zero() {
                return Err(Error::NonNilpotent("generator has an ħ-independent part".into()));
            }
            if c.param_order(HBAR).is_none() {
                return Err(Error::NonNilpotent("generator coefficients are not ħ-truncated".into()));
            }
        }
        let mut acc = DiffOperator::identity(dim);
        let mut power = DiffOperator::identity(dim);
        let mut k = 1u32;
        loop {
            power = power.compose(generator)?.scale(&GaussianRational::from_ratio(1, k as i64));
            if power.is_zero() {
                break;
            }
            acc = acc.checked_add(&power)?;
            k += 1;
        }
        Ok(acc)
    }

    pub fn map_coeffs(&self, f: impl Fn(&DeformedFn) -> Result<DeformedFn>) -> Result<DiffOperator> {
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| Ok((a.clone(), f(c)?)))
            .collect::<Result<Vec<_>>>()?;
        DiffOperator::new(self.dim, terms)
    }

    /// Renames a parameter in every coefficient that carries it.
    pub fn rename_param(&self, from: &str, to: &str) -> Result<DiffOperator> {
        self.map_coeffs(|c| {
            if c.param_order(from).is_some() {
                c.rename_param(from, to)
            } else {
                Ok(c.clone())
            }
        })
    }

    pub fn substitute_param(&self, name: &str, replacement: &DeformedFn) -> Result<DiffOperator> {
        self.map_coeffs(|c| c.substitute_param(name, replacement))
    }

    pub fn truncate(&self, name: &str, order: u32) -> DiffOperator {
        self.map_coeffs(|c| Ok(c.truncate(name, order))).expect("truncation is total")
    }

    /// Whether both operators act identically under the combined truncation.
    pub fn agrees_with(&self, other: &DiffOperator) -> bool {
        self.dim == other.dim
            && self
                .terms
                .keys()
                .chain(other.terms.keys())
                .all(|alpha| match (self.terms.get(alpha), other.terms.get(alpha)) {
                    (Some(a), Some(b)) => a.agrees_with(b),
                    (Some(c), None) | (None, Some(c)) => c.is_zero(),
                    (None, None) => true,
                })
    }
}

/// All `γ ≤ α` componentwise.
fn sub_indices(alpha: &Monomial) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for &e in alpha.exponents() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=e).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Monomial::new).collect()
}

fn multi_binomial(alpha: &Monomial, gamma: &Monomial) -> GaussianRational {
    alpha
        .exponents()
        .iter()
        .zip(gamma.exponents())
        .fold(GaussianRational::from(1), |acc, (&a, &g)| &acc * &GaussianRational::binomial(a, g))
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_operator(self.dim, self.terms.iter()))
    }
}

impl Serialize for DiffOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

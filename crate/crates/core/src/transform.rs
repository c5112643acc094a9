//! Derivations induced by a phase map and the transformed star product.
//!
//! A map `Φ` transports the partials to derivations `D_v` defined by
//! `(∂_v f) ∘ Φ⁻¹ = D_v (f ∘ Φ⁻¹)`. By the chain rule
//! `D_v = Σⱼ ((∂_v Φʲ) ∘ Φ⁻¹) ∂ⱼ`, which is what [`induced_derivations`]
//! evaluates; the defining identity is kept as a test oracle.

use std::fmt;

use rayon::prelude::*;

use crate::algebra::text::format_operator;
use crate::algebra::{substitute, DeformedFn, Monomial, PhaseMap};
use crate::error::{Error, Result};
use crate::intertwiner::verify::{monomial_label, monomial_series};
use crate::intertwiner::{monomial_family, RelationReport};
use crate::moyal::{star, StarProductSpec};

/// First-order operator `Σⱼ aⱼ ∂ⱼ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    dim: usize,
    coeffs: Vec<DeformedFn>,
}

impl Derivation {
    pub fn new(coeffs: Vec<DeformedFn>) -> Result<Self> {
        let dim = coeffs.len() / 2;
        if dim == 0 || !coeffs.len().is_multiple_of(2) {
            return Err(Error::Incompatible("a derivation needs 2N coefficients".into()));
        }
        if coeffs.iter().any(|c| c.dim() != dim) {
            return Err(Error::Incompatible("derivation coefficient dimension".into()));
        }
        Ok(Derivation { dim, coeffs })
    }

    /// The plain partial `∂_index`.
    pub fn partial(dim: usize, index: usize) -> Self {
        let coeffs = (0..2 * dim)
            .map(|j| {
                if j == index {
                    DeformedFn::one(dim)
                } else {
                    DeformedFn::zero(dim)
                }
            })
            .collect();
        Derivation { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[DeformedFn] {
        &self.coeffs
    }

    pub fn apply(&self, f: &DeformedFn) -> DeformedFn {
        let mut acc = DeformedFn::zero_with(f.dim(), f.params());
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let d = f.partial(j).expect("index below 2N");
            if !d.is_zero() {
                acc = &acc + &(a * &d);
            }
        }
        acc
    }

    /// Whether `self` and `other` agree coefficientwise up to truncation.
    pub fn agrees_with(&self, other: &Derivation) -> bool {
        self.dim == other.dim && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a.agrees_with(b))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphas: Vec<Monomial> = (0..2 * self.dim).map(|j| Monomial::var(self.dim, j)).collect();
        f.write_str(&format_operator(self.dim, alphas.iter().zip(&self.coeffs)))
    }
}

/// `D_v = Σⱼ ((∂_v Φʲ) ∘ Φ⁻¹) ∂ⱼ` for every coordinate `v`, in the order
/// `D_{x¹}..D_{xᴺ}, D_{p₁}..D_{p_N}`.
pub fn induced_derivations(map: &PhaseMap) -> Result<Vec<Derivation>> {
    let inverse = map.invert()?;
    let n = 2 * map.dim();
    (0..n)
        .map(|v| {
            let coeffs = map
                .components()
                .iter()
                .map(|c| substitute(&c.partial(v)?, &inverse))
                .collect::<Result<Vec<_>>>()?;
            Derivation::new(coeffs)
        })
        .collect()
}

/// `★_Φ` with `(f ★ g) ∘ Φ⁻¹ = (f ∘ Φ⁻¹) ★_Φ (g ∘ Φ⁻¹)`.
pub fn transformed_star(map: &PhaseMap) -> Result<StarProductSpec> {
    StarProductSpec::transformed(induced_derivations(map)?)
}

/// Both sides of the transport identity and their difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformCheck {
    pub lhs: DeformedFn,
    pub rhs: DeformedFn,
    pub residual: DeformedFn,
}

impl TransformCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Evaluates `(f ★ g) ∘ Φ⁻¹` and `(f ∘ Φ⁻¹) ★_Φ (g ∘ Φ⁻¹)` independently.
pub fn verify_transform_identity(
    map: &PhaseMap,
    transformed: &StarProductSpec,
    f: &DeformedFn,
    g: &DeformedFn,
) -> Result<TransformCheck> {
    let inverse = map.invert()?;
    let lhs = substitute(&star(&StarProductSpec::Moyal, f, g)?, &inverse)?;
    let rhs = star(transformed, &substitute(f, &inverse)?, &substitute(g, &inverse)?)?;
    let residual = lhs.checked_sub(&rhs)?;
    Ok(TransformCheck { lhs, rhs, residual })
}

/// [`verify_transform_identity`] on every monomial pair of total degree at
/// most `degree`, inverting the map once.
pub fn verify_transport(map: &PhaseMap, hbar_order: u32, degree: u32) -> Result<RelationReport> {
    let dim = map.dim();
    let inverse = map.invert()?;
    let spec = transformed_star(map)?;
    let results = monomial_family(dim, degree)
        .par_iter()
        .map(|(f, g)| {
            let case = format!("({}, {})", monomial_label(dim, f), monomial_label(dim, g));
            let (f, g) = (monomial_series(dim, f, hbar_order), monomial_series(dim, g, hbar_order));
            let lhs = substitute(&star(&StarProductSpec::Moyal, &f, &g)?, &inverse)?;
            let rhs = star(&spec, &substitute(&f, &inverse)?, &substitute(&g, &inverse)?)?;
            Ok((case, lhs.checked_sub(&rhs)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RelationReport::collect("(f*g) o F^-1 = (f o F^-1) *_t (g o F^-1)", results))
}

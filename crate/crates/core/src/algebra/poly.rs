//! Multivariate polynomials on phase space ℝ²ᴺ.
//!
//! Variables are indexed `0..N` for positions `x¹..xᴺ` and `N..2N` for
//! momenta `p₁..p_N`. Terms live in a `BTreeMap` keyed by [`Monomial`],
//! whose `Ord` is graded lexicographic, so two equal polynomials are
//! structurally equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use crate::error::{Error, Result};

/// Exponent vector of length 2N.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; 2 * dim])
    }

    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn var(dim: usize, index: usize) -> Self {
        let mut e = vec![0; 2 * dim];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    /// All monomials in `2 * dim` variables of total degree `<= max_degree`,
    /// in ascending graded order.
    pub fn all_up_to(dim: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u32; 2 * dim];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if pos == cur.len() {
                out.push(Monomial(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[pos] = e;
                rec(pos + 1, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, max_degree, &mut current, &mut out);
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasePoly {
    dim: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl PhasePoly {
    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "phase space dimension must be positive");
        PhasePoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, GaussianRational::one())
    }

    pub fn constant(dim: usize, c: GaussianRational) -> Self {
        Self::term(dim, Monomial::one(dim), c)
    }

    pub fn term(dim: usize, monomial: Monomial, c: GaussianRational) -> Self {
        assert_eq!(monomial.len(), 2 * dim, "exponent vector length");
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(monomial, c);
        }
        p
    }

    /// Coordinate function for variable `index` (`0..N` positions, `N..2N` momenta).
    pub fn var(dim: usize, index: usize) -> Result<Self> {
        if index >= 2 * dim {
            return Err(Error::BadVariable { index, dim });
        }
        Ok(Self::term(dim, Monomial::var(dim, index), GaussianRational::one()))
    }

    /// Position `x^{i+1}` (0-based `i`).
    pub fn x(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::var(dim, i).unwrap()
    }

    /// Momentum `p_{i+1}` (0-based `i`).
    pub fn p(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        Self::var(dim, dim + i).unwrap()
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Monomial, GaussianRational)>) -> Self {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            assert_eq!(m.len(), 2 * dim, "exponent vector length");
            p.add_term(m, &c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&Monomial::one(self.dim))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(GaussianRational::is_real)
    }

    /// Returns the constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &PhasePoly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Incompatible(format!(
                "phase-space dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &PhasePoly) -> Result<PhasePoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &PhasePoly) -> Result<PhasePoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &PhasePoly) -> Result<PhasePoly> {
        self.check_dim(other)?;
        let mut out = PhasePoly::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> PhasePoly {
        if c.is_zero() {
            return PhasePoly::zero(self.dim);
        }
        PhasePoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> PhasePoly {
        PhasePoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> PhasePoly {
        let mut acc = PhasePoly::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn conj(&self) -> PhasePoly {
        PhasePoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Formal partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Result<PhasePoly> {
        if index >= 2 * self.dim {
            return Err(Error::BadVariable { index, dim: self.dim });
        }
        Ok(self.partial_unchecked(index))
    }

    pub(crate) fn partial_unchecked(&self, index: usize) -> PhasePoly {
        let mut out = PhasePoly::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut dm = m.0.clone();
            dm[index] -= 1;
            out.terms.insert(Monomial(dm), c * &GaussianRational::from(e as i64));
        }
        out
    }

    /// Mixed partial `∂^α` for a multi-index of length 2N.
    pub fn partial_multi(&self, alpha: &Monomial) -> PhasePoly {
        assert_eq!(alpha.len(), 2 * self.dim);
        let mut out = PhasePoly::zero(self.dim);
        for (m, c) in &self.terms {
            let Some(rest) = m.checked_div(alpha) else {
                continue;
            };
            // falling factorial m!/(m-α)!
            let mut factor: i64 = 1;
            for (&e, &a) in m.0.iter().zip(&alpha.0) {
                for j in 0..a {
                    factor *= (e - j) as i64;
                }
            }
            out.terms.insert(rest, c * &GaussianRational::from(factor));
        }
        out
    }
}

impl Add<&PhasePoly> for &PhasePoly {
    type Output = PhasePoly;
    fn add(self, rhs: &PhasePoly) -> PhasePoly {
        self.checked_add(rhs).expect("dimension mismatch")
    }
}

impl Sub<&PhasePoly> for &PhasePoly {
    type Output = PhasePoly;
    fn sub(self, rhs: &PhasePoly) -> PhasePoly {
        self.checked_sub(rhs).expect("dimension mismatch")
    }
}

impl Mul<&PhasePoly> for &PhasePoly {
    type Output = PhasePoly;
    fn mul(self, rhs: &PhasePoly) -> PhasePoly {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        PhasePoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

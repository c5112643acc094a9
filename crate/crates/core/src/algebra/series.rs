//! Truncated multi-parameter formal power series with [`PhasePoly`] coefficients.
//!
//! A [`DeformedFn`] carries an explicit list of formal parameters (`h` for ħ,
//! `t`, `t1`, ...) each with its own maximum retained degree. A parameter
//! that does not appear in the list is one the series does not depend on,
//! known exactly. Binary operations take the union of parameter lists with
//! the smaller truncation wherever both operands carry a parameter.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::gaussian::GaussianRational;
use super::poly::{Monomial, PhasePoly};
use crate::error::{Error, Result};

/// Name of the deformation parameter ħ.
pub const HBAR: &str = "h";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    /// Largest retained degree.
    pub order: u32,
}

impl Param {
    pub fn new(name: impl Into<String>, order: u32) -> Self {
        Param {
            name: name.into(),
            order,
        }
    }
}

/// Sorted, duplicate-free copy of `params`, keeping the smaller order on clashes.
pub fn normalize_params(params: &[Param]) -> Vec<Param> {
    let mut map: BTreeMap<&str, u32> = BTreeMap::new();
    for p in params {
        map.entry(p.name.as_str())
            .and_modify(|o| *o = (*o).min(p.order))
            .or_insert(p.order);
    }
    map.into_iter().map(|(n, o)| Param::new(n, o)).collect()
}

fn union_params(a: &[Param], b: &[Param]) -> Vec<Param> {
    if a == b {
        return a.to_vec();
    }
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    normalize_params(&all)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeformedFn {
    dim: usize,
    params: Vec<Param>,
    /// Keyed by degree in each parameter, aligned with `params`.
    coeffs: BTreeMap<Vec<u32>, PhasePoly>,
}

impl DeformedFn {
    pub fn zero(dim: usize) -> Self {
        Self::zero_with(dim, &[])
    }

    pub fn zero_with(dim: usize, params: &[Param]) -> Self {
        assert!(dim > 0, "phase space dimension must be positive");
        DeformedFn {
            dim,
            params: normalize_params(params),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        PhasePoly::one(dim).into()
    }

    pub fn constant(dim: usize, c: GaussianRational) -> Self {
        PhasePoly::constant(dim, c).into()
    }

    pub fn from_poly_with(poly: PhasePoly, params: &[Param]) -> Self {
        let mut f = Self::zero_with(poly.dim(), params);
        if !poly.is_zero() {
            f.coeffs.insert(vec![0; f.params.len()], poly);
        }
        f
    }

    /// The series consisting of the single parameter `name` to the first power.
    pub fn param(dim: usize, name: &str, order: u32) -> Self {
        Self::param_monomial(dim, &[Param::new(name, order)], &[1])
    }

    /// `Π params[i]^degrees[i]`, or zero when a degree exceeds its truncation.
    pub fn param_monomial(dim: usize, params: &[Param], degrees: &[u32]) -> Self {
        assert_eq!(params.len(), degrees.len());
        let mut pairs: Vec<(Param, u32)> = params.iter().cloned().zip(degrees.iter().copied()).collect();
        pairs.sort();
        let ps: Vec<Param> = pairs.iter().map(|(p, _)| p.clone()).collect();
        let mut f = Self::zero_with(dim, &ps);
        assert_eq!(f.params.len(), ps.len(), "duplicate parameter names");
        let ds: Vec<u32> = pairs.iter().map(|(_, d)| *d).collect();
        if ds.iter().zip(&f.params).all(|(d, p)| *d <= p.order) {
            f.coeffs.insert(ds, PhasePoly::one(dim));
        }
        f
    }

    /// Builds a series from explicit `(degrees, coefficient)` pairs aligned with `params`.
    pub fn from_coeffs(
        dim: usize,
        params: &[Param],
        coeffs: impl IntoIterator<Item = (Vec<u32>, PhasePoly)>,
    ) -> Result<Self> {
        let mut f = Self::zero_with(dim, params);
        if f.params.as_slice() != params {
            return Err(Error::Format("parameters must be sorted and unique".into()));
        }
        for (d, p) in coeffs {
            if d.len() != params.len() {
                return Err(Error::Format("degree vector length".into()));
            }
            if p.dim() != dim {
                return Err(Error::Incompatible("coefficient dimension".into()));
            }
            if d.iter().zip(params).any(|(d, p)| *d > p.order) {
                return Err(Error::Format(format!("degree {d:?} exceeds truncation")));
            }
            f.add_coeff(d, &p);
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn param_order(&self, name: &str) -> Option<u32> {
        self.params.iter().find(|p| p.name == name).map(|p| p.order)
    }

    fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&[u32], &PhasePoly)> {
        self.coeffs.iter().map(|(d, p)| (d.as_slice(), p))
    }

    pub fn coeff(&self, degrees: &[u32]) -> PhasePoly {
        self.coeffs
            .get(degrees)
            .cloned()
            .unwrap_or_else(|| PhasePoly::zero(self.dim))
    }

    pub fn num_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(PhasePoly::is_real)
    }

    /// Returns the phase-space polynomial if the series has no parameter dependence.
    pub fn as_poly(&self) -> Option<PhasePoly> {
        match self.coeffs.len() {
            0 => Some(PhasePoly::zero(self.dim)),
            1 => {
                let (d, p) = self.coeffs.iter().next().unwrap();
                d.iter().all(|&e| e == 0).then(|| p.clone())
            }
            _ => None,
        }
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    /// Largest degree in `name` among stored coefficients.
    pub fn max_degree_in(&self, name: &str) -> u32 {
        match self.param_index(name) {
            Some(i) => self.coeffs.keys().map(|d| d[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Smallest total parameter degree among stored coefficients.
    pub fn min_param_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|d| d.iter().sum()).min()
    }

    /// Largest total polynomial degree among coefficients.
    pub fn phase_degree(&self) -> Option<u32> {
        self.coeffs.values().filter_map(PhasePoly::degree).max()
    }

    fn add_coeff(&mut self, degrees: Vec<u32>, poly: &PhasePoly) {
        if poly.is_zero() {
            return;
        }
        match self.coeffs.entry(degrees) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(poly.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + poly;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Re-expresses the series over `target`, which must contain every
    /// parameter of `self` with an order no larger than the current one.
    pub fn align(&self, target: &[Param]) -> Result<Self> {
        if self.params.as_slice() == target {
            return Ok(self.clone());
        }
        let target = normalize_params(target);
        let mut map = Vec::with_capacity(self.params.len());
        for p in &self.params {
            let j = target
                .iter()
                .position(|q| q.name == p.name)
                .ok_or_else(|| Error::Incompatible(format!("parameter `{}` missing from target", p.name)))?;
            if target[j].order > p.order {
                return Err(Error::TruncationTooLow {
                    param: p.name.clone(),
                    reason: format!("known to degree {}, requested {}", p.order, target[j].order),
                });
            }
            map.push(j);
        }
        let mut out = DeformedFn::zero_with(self.dim, &target);
        for (d, poly) in &self.coeffs {
            let mut nd = vec![0; target.len()];
            for (i, &j) in map.iter().enumerate() {
                nd[j] = d[i];
            }
            if nd.iter().zip(&target).all(|(e, p)| *e <= p.order) {
                out.coeffs.insert(nd, poly.clone());
            }
        }
        Ok(out)
    }

    /// Lowers (or introduces) the truncation of `name` to `order`.
    pub fn truncate(&self, name: &str, order: u32) -> Self {
        let mut target = self.params.clone();
        match target.iter_mut().find(|p| p.name == name) {
            Some(p) => p.order = p.order.min(order),
            None => target.push(Param::new(name, order)),
        }
        self.align(&normalize_params(&target))
            .expect("lowering a truncation is always valid")
    }

    /// Applies every truncation in `params`, introducing missing parameters.
    pub fn truncate_all(&self, params: &[Param]) -> Self {
        params
            .iter()
            .fold(self.clone(), |acc, p| acc.truncate(&p.name, p.order))
    }

    fn aligned_pair(&self, other: &DeformedFn) -> Result<(Vec<Param>, DeformedFn, DeformedFn)> {
        if self.dim != other.dim {
            return Err(Error::Incompatible(format!(
                "phase-space dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let params = union_params(&self.params, &other.params);
        Ok((params.clone(), self.align(&params)?, other.align(&params)?))
    }

    pub fn checked_add(&self, other: &DeformedFn) -> Result<DeformedFn> {
        let (_, mut a, b) = self.aligned_pair(other)?;
        for (d, p) in b.coeffs {
            a.add_coeff(d, &p);
        }
        Ok(a)
    }

    pub fn checked_sub(&self, other: &DeformedFn) -> Result<DeformedFn> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &DeformedFn) -> Result<DeformedFn> {
        let (params, a, b) = self.aligned_pair(other)?;
        let mut out = DeformedFn::zero_with(self.dim, &params);
        for (da, pa) in &a.coeffs {
            for (db, pb) in &b.coeffs {
                let d: Vec<u32> = da.iter().zip(db).map(|(x, y)| x + y).collect();
                if d.iter().zip(&params).any(|(e, p)| *e > p.order) {
                    continue;
                }
                out.add_coeff(d, &(pa * pb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> DeformedFn {
        if c.is_zero() {
            return DeformedFn::zero_with(self.dim, &self.params);
        }
        self.map_coeffs(|p| p.scale(c))
    }

    pub fn mul_poly(&self, poly: &PhasePoly) -> DeformedFn {
        self.map_coeffs(|p| p * poly)
    }

    pub fn pow(&self, n: u32) -> DeformedFn {
        let mut acc = DeformedFn::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Complex conjugation with every formal parameter treated as real.
    pub fn conj(&self) -> DeformedFn {
        self.map_coeffs(PhasePoly::conj)
    }

    /// Applies `f` to each coefficient, dropping zero results.
    pub fn map_coeffs(&self, f: impl Fn(&PhasePoly) -> PhasePoly) -> DeformedFn {
        let mut out = DeformedFn::zero_with(self.dim, &self.params);
        for (d, p) in &self.coeffs {
            let q = f(p);
            if !q.is_zero() {
                out.coeffs.insert(d.clone(), q);
            }
        }
        out
    }

    pub fn partial(&self, index: usize) -> Result<DeformedFn> {
        if index >= 2 * self.dim {
            return Err(Error::BadVariable { index, dim: self.dim });
        }
        Ok(self.map_coeffs(|p| p.partial_unchecked(index)))
    }

    pub fn partial_multi(&self, alpha: &Monomial) -> DeformedFn {
        self.map_coeffs(|p| p.partial_multi(alpha))
    }

    /// Formal derivative in a parameter; its truncation drops by one.
    pub fn param_derivative(&self, name: &str) -> Result<DeformedFn> {
        let i = self
            .param_index(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))?;
        let order = self.params[i].order;
        if order == 0 {
            return Err(Error::TruncationTooLow {
                param: name.to_string(),
                reason: "cannot differentiate a series known only to degree 0".into(),
            });
        }
        let mut params = self.params.clone();
        params[i].order = order - 1;
        let mut out = DeformedFn::zero_with(self.dim, &params);
        for (d, p) in &self.coeffs {
            if d[i] == 0 {
                continue;
            }
            let mut nd = d.clone();
            nd[i] -= 1;
            out.coeffs.insert(nd, p.scale(&GaussianRational::from(d[i] as i64)));
        }
        Ok(out)
    }

    /// Coefficient of `name^degree`, as a series in the remaining parameters.
    pub fn coefficient(&self, name: &str, degree: u32) -> DeformedFn {
        let Some(i) = self.param_index(name) else {
            return if degree == 0 {
                self.clone()
            } else {
                DeformedFn::zero_with(self.dim, &self.params)
            };
        };
        let mut params = self.params.clone();
        params.remove(i);
        let mut out = DeformedFn::zero_with(self.dim, &params);
        for (d, p) in &self.coeffs {
            if d[i] == degree {
                let mut nd = d.clone();
                nd.remove(i);
                out.coeffs.insert(nd, p.clone());
            }
        }
        out
    }

    /// Sets the parameter `name` to zero and removes it.
    pub fn at_zero(&self, name: &str) -> DeformedFn {
        self.coefficient(name, 0)
    }

    pub fn rename_param(&self, from: &str, to: &str) -> Result<DeformedFn> {
        let Some(i) = self.param_index(from) else {
            return Err(Error::UnknownParam(from.to_string()));
        };
        if from == to {
            return Ok(self.clone());
        }
        if self.param_index(to).is_some() {
            return Err(Error::ParamCollision(to.to_string()));
        }
        let order = self.params[i].order;
        let mut params = self.params.clone();
        params[i].name = to.to_string();
        let new_params = normalize_params(&params);
        let j = new_params.iter().position(|p| p.name == to).unwrap();
        let mut out = DeformedFn::zero_with(self.dim, &new_params);
        for (d, p) in &self.coeffs {
            let mut rest = d.clone();
            let e = rest.remove(i);
            rest.insert(j, e);
            out.coeffs.insert(rest, p.clone());
        }
        debug_assert_eq!(out.params[j].order, order);
        Ok(out)
    }

    /// Replaces the parameter `name` by the series `replacement`.
    ///
    /// Fails when `replacement^(order+1)` survives the result truncation,
    /// since those terms would depend on coefficients `self` does not know.
    pub fn substitute_param(&self, name: &str, replacement: &DeformedFn) -> Result<DeformedFn> {
        let Some(i) = self.param_index(name) else {
            return Ok(self.clone());
        };
        let order = self.params[i].order;
        let unknown = replacement.pow(order + 1);
        if !unknown.is_zero() {
            return Err(Error::TruncationTooLow {
                param: name.to_string(),
                reason: format!("degree {} terms of the substitution are not determined", order + 1),
            });
        }
        let rest = {
            let mut params = self.params.clone();
            params.remove(i);
            params
        };
        let mut powers = vec![DeformedFn::one(self.dim)];
        for k in 1..=order as usize {
            let next = &powers[k - 1] * replacement;
            powers.push(next);
        }
        let mut out = DeformedFn::zero_with(self.dim, &[rest.as_slice(), replacement.params()].concat());
        for (d, p) in &self.coeffs {
            let mut nd = d.clone();
            let e = nd.remove(i) as usize;
            let term = DeformedFn::from_coeffs(self.dim, &rest, [(nd, p.clone())])?;
            out = &out + &(&term * &powers[e]);
        }
        Ok(out)
    }

    /// `self - other` is zero under the combined truncation.
    pub fn agrees_with(&self, other: &DeformedFn) -> bool {
        self.checked_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl From<PhasePoly> for DeformedFn {
    fn from(poly: PhasePoly) -> Self {
        DeformedFn::from_poly_with(poly, &[])
    }
}

impl Add<&DeformedFn> for &DeformedFn {
    type Output = DeformedFn;
    fn add(self, rhs: &DeformedFn) -> DeformedFn {
        self.checked_add(rhs).expect("incompatible series")
    }
}

impl Sub<&DeformedFn> for &DeformedFn {
    type Output = DeformedFn;
    fn sub(self, rhs: &DeformedFn) -> DeformedFn {
        self.checked_sub(rhs).expect("incompatible series")
    }
}

impl Mul<&DeformedFn> for &DeformedFn {
    type Output = DeformedFn;
    fn mul(self, rhs: &DeformedFn) -> DeformedFn {
        self.checked_mul(rhs).expect("incompatible series")
    }
}

impl Neg for &DeformedFn {
    type Output = DeformedFn;
    fn neg(self) -> DeformedFn {
        self.map_coeffs(|p| -p)
    }
}

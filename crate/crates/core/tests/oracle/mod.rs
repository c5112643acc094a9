//! Test-side reference computations, kept independent of the engine's
//! evaluation paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qtraj_core::algebra::{DeformedFn, GaussianRational, Monomial, Param, PhasePoly, HBAR};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Truncated univariate power series with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Taylor(pub Vec<BigRational>);

impl Taylor {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn coeff(&self, n: usize) -> BigRational {
        self.0.get(n).cloned().unwrap_or_else(BigRational::zero)
    }

    fn factorial(n: usize) -> BigRational {
        (1..=n).fold(BigRational::one(), |acc, k| acc * q(k as i64, 1))
    }

    pub fn exp(n: usize) -> Taylor {
        Taylor((0..n).map(|k| Self::factorial(k).recip()).collect())
    }

    pub fn sin(n: usize) -> Taylor {
        Taylor(
            (0..n)
                .map(|k| match k % 4 {
                    1 => Self::factorial(k).recip(),
                    3 => -Self::factorial(k).recip(),
                    _ => BigRational::zero(),
                })
                .collect(),
        )
    }

    pub fn cos(n: usize) -> Taylor {
        Taylor(
            (0..n)
                .map(|k| match k % 4 {
                    0 => Self::factorial(k).recip(),
                    2 => -Self::factorial(k).recip(),
                    _ => BigRational::zero(),
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Taylor) -> Taylor {
        let n = self.len().min(other.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, a) in self.0.iter().enumerate().take(n) {
            for (j, b) in other.0.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Taylor(out)
    }

    /// `1/self` by the recurrence `Σ a_i b_{n−i} = δ_{n0}`.
    pub fn recip(&self) -> Taylor {
        let n = self.len();
        let a0 = self.coeff(0);
        assert!(!a0.is_zero(), "constant term must be nonzero");
        let mut b = vec![a0.recip()];
        for k in 1..n {
            let s: BigRational = (1..=k).map(|i| self.coeff(i) * &b[k - i]).sum();
            b.push(-s / &a0);
        }
        Taylor(b)
    }

    pub fn pow(&self, e: u32) -> Taylor {
        let mut out = Taylor(std::iter::once(BigRational::one()).chain(std::iter::repeat(BigRational::zero())).take(self.len()).collect());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn scale_arg(&self, c: &BigRational) -> Taylor {
        let mut pow = BigRational::one();
        Taylor(
            self.0
                .iter()
                .map(|a| {
                    let v = a * &pow;
                    pow *= c;
                    v
                })
                .collect(),
        )
    }

    /// `self(u)/u` for a series without constant term.
    pub fn div_by_arg(&self) -> Taylor {
        assert!(self.coeff(0).is_zero());
        Taylor(self.0[1..].to_vec())
    }
}

pub fn gr(r: BigRational) -> GaussianRational {
    GaussianRational::from_real(r)
}

/// `Σ cₙ (ħt)ⁿ` as a series in `[h: k, t: l]`.
pub fn in_hbar_t(f: &Taylor, k: u32, l: u32, dim: usize) -> DeformedFn {
    let params = [Param::new(HBAR, k), Param::new("t", l)];
    let mut acc = DeformedFn::zero_with(dim, &params);
    for (n, c) in f.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = DeformedFn::param_monomial(dim, &params, &[n as u32, n as u32]).scale(&gr(c.clone()));
        acc = &acc + &term;
    }
    acc
}

/// `Σ cₙ tⁿ` as a series in `[t: l]`.
pub fn in_t(f: &Taylor, l: u32, dim: usize) -> DeformedFn {
    let params = [Param::new("t", l)];
    let mut acc = DeformedFn::zero_with(dim, &params);
    for (n, c) in f.0.iter().enumerate().take(l as usize + 1) {
        if !c.is_zero() {
            acc = &acc + &DeformedFn::param_monomial(dim, &params, &[n as u32]).scale(&gr(c.clone()));
        }
    }
    acc
}

/// `exp(e)` for a series whose every term has positive degree in some
/// truncated parameter; `terms` bounds the number of powers needed.
pub fn exp_series(e: &DeformedFn, terms: u32) -> DeformedFn {
    let mut acc = DeformedFn::one(e.dim());
    let mut power = DeformedFn::one(e.dim());
    for n in 1..=terms {
        power = (&power * e).scale(&gr(q(1, n as i64)));
        acc = &acc + &power;
    }
    acc
}

/// Moyal product evaluated by expanding `Πⁿ` as an explicit bidifferential
/// operator, `Π = Σᵢ ∂_{xⁱ} ⊗ ∂_{pᵢ} − ∂_{pᵢ} ⊗ ∂_{xⁱ}`.
pub fn brute_star(f: &PhasePoly, g: &PhasePoly, hbar_order: u32) -> DeformedFn {
    let dim = f.dim();
    type Bi = BTreeMap<(Vec<u32>, Vec<u32>), BigRational>;
    let mut pi: Bi = BTreeMap::new();
    for i in 0..dim {
        let mut xi = vec![0u32; 2 * dim];
        xi[i] = 1;
        let mut pj = vec![0u32; 2 * dim];
        pj[dim + i] = 1;
        pi.insert((xi.clone(), pj.clone()), BigRational::one());
        pi.insert((pj, xi), -BigRational::one());
    }
    let params = [Param::new(HBAR, hbar_order)];
    let mut acc = DeformedFn::zero_with(dim, &params);
    let mut power: Bi = [((vec![0; 2 * dim], vec![0; 2 * dim]), BigRational::one())].into();
    let half_i = GaussianRational::new(BigRational::zero(), q(1, 2));
    for n in 0..=hbar_order {
        let mut sum = PhasePoly::zero(dim);
        for ((a, b), c) in &power {
            let left = f.partial_multi(&Monomial::new(a.clone()));
            let right = g.partial_multi(&Monomial::new(b.clone()));
            sum = &sum + &(&left * &right).scale(&gr(c.clone()));
        }
        let weight = &half_i.pow(n) * &GaussianRational::inv_factorial(n);
        let h = DeformedFn::param_monomial(dim, &params, &[n]);
        acc = &acc + &(&DeformedFn::from(sum.scale(&weight)) * &h);
        let mut next: Bi = BTreeMap::new();
        for ((a, b), c) in &power {
            for ((pa, pb), d) in &pi {
                let key = (
                    a.iter().zip(pa).map(|(u, v)| u + v).collect(),
                    b.iter().zip(pb).map(|(u, v)| u + v).collect(),
                );
                *next.entry(key).or_insert_with(BigRational::zero) += c * d;
            }
        }
        next.retain(|_, v| !v.is_zero());
        power = next;
    }
    acc
}

/// Random polynomial with small integer (optionally complex) coefficients.
pub fn random_poly(rng: &mut ChaCha8Rng, dim: usize, max_degree: u32, terms: usize, complex: bool) -> PhasePoly {
    let all = Monomial::all_up_to(dim, max_degree);
    let mut p = PhasePoly::zero(dim);
    for _ in 0..terms {
        let m = all[rng.gen_range(0..all.len())].clone();
        let re = rng.gen_range(-5i64..=5);
        let im = if complex { rng.gen_range(-3i64..=3) } else { 0 };
        let c = GaussianRational::new(q(re, rng.gen_range(1i64..=3)), q(im, 1));
        p = &p + &PhasePoly::term(dim, m, c);
    }
    p
}

pub fn arb_monomial(dim: usize, max_degree: u32) -> impl Strategy<Value = Monomial> {
    let all = Monomial::all_up_to(dim, max_degree);
    (0..all.len()).prop_map(move |i| all[i].clone())
}

pub fn arb_coeff(complex: bool) -> impl Strategy<Value = GaussianRational> {
    let im = if complex { -3i64..=3 } else { 0i64..=0 };
    (-6i64..=6, 1i64..=4, im).prop_map(|(n, d, i)| GaussianRational::new(q(n, d), q(i, 1)))
}

pub fn arb_poly(dim: usize, max_degree: u32, max_terms: usize, complex: bool) -> impl Strategy<Value = PhasePoly> {
    prop::collection::vec((arb_monomial(dim, max_degree), arb_coeff(complex)), 0..=max_terms)
        .prop_map(move |terms| PhasePoly::from_terms(dim, terms))
}

/// Series in `params` with random polynomial coefficients.
pub fn arb_series(dim: usize, params: Vec<Param>, max_degree: u32, max_terms: usize) -> impl Strategy<Value = DeformedFn> {
    let orders: Vec<u32> = params.iter().map(|p| p.order).collect();
    let degrees = orders.iter().map(|&o| 0..=o).collect::<Vec<_>>();
    prop::collection::vec((degrees, arb_poly(dim, max_degree, 3, true)), 0..=max_terms).prop_map(move |parts| {
        let mut acc = DeformedFn::zero_with(dim, &params);
        for (d, p) in parts {
            let m = DeformedFn::param_monomial(dim, &params, &d);
            acc = &acc + &(&m * &DeformedFn::from(p));
        }
        acc
    })
}

pub mod closed_form;

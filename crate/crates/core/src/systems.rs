//! The built-in Hamiltonians and their known intertwiners.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::text::{parse_series, ParseContext};
use crate::algebra::{fmt_rational, parse_rational, GaussianRational, Param, PhasePoly, HBAR};
use crate::error::{Error, Result};
use crate::flow::{HamiltonianSystem, TIME};
use crate::intertwiner::DiffOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// `½(p² + ω²x²)`
    Harmonic,
    /// `p₁²/2m₁ + p₂²/2m₂ + k x¹ p₂²`
    Coupled2,
    /// `x²p²`
    X2p2,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Harmonic, Builtin::Coupled2, Builtin::X2p2];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Harmonic => "harmonic",
            Builtin::Coupled2 => "coupled2",
            Builtin::X2p2 => "x2p2",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Builtin::Coupled2 => 2,
            _ => 1,
        }
    }

    fn hamiltonian_text(self) -> &'static str {
        match self {
            Builtin::Harmonic => "1/2*p^2 + 1/2*omega^2*x^2",
            Builtin::Coupled2 => "p1^2/(2*m1) + p2^2/(2*m2) + k*x1*p2^2",
            Builtin::X2p2 => "x^2*p^2",
        }
    }

    pub fn hamiltonian(self, constants: &Constants) -> Result<PhasePoly> {
        parse_hamiltonian(self.hamiltonian_text(), self.dim(), constants)
    }

    pub fn system(self, constants: &Constants, hbar_order: u32, t_order: u32) -> Result<HamiltonianSystem> {
        HamiltonianSystem::new(self.hamiltonian(constants)?, hbar_order, t_order)
    }

    /// The intertwiner of the flow in time `t`, with coefficients carrying
    /// `[h: hbar_order, t: t_order]`. For `x2p2` only the ħ² part is known.
    pub fn intertwiner(self, constants: &Constants, hbar_order: u32, t_order: u32) -> Result<DiffOperator> {
        let params = [Param::new(HBAR, hbar_order), Param::new(TIME, t_order)];
        let ctx = constants.context(self.dim()).with_params(&params);
        match self {
            Builtin::Harmonic => DiffOperator::parse("1", &ctx),
            Builtin::Coupled2 => DiffOperator::exp(&DiffOperator::parse(COUPLED2_GENERATOR, &ctx)?),
            Builtin::X2p2 => DiffOperator::parse(X2P2_INTERTWINER, &ctx),
        }
    }
}

const COUPLED2_GENERATOR: &str = "1/8*h^2*k/m1*t^2*dx1*dx2^2 + 1/4*h^2*k*t*dp1*dx2^2 \
    + 1/12*h^2*k^2/m1*t^3*p2*dx2^3";

const X2P2_INTERTWINER: &str = "1 + h^2*(1/6*(3*t^2*x^3 + 4*t^3*x^4*p)*dx^3 \
    + 1/6*(3*t^2*p^3 - 4*t^3*x*p^4)*dp^3 \
    + 1/2*(-t*p - t^2*x*p^2 + 4*t^3*x^2*p^3)*dx*dp^2 \
    + 1/2*(t*x - t^2*x^2*p - 4*t^3*x^3*p^2)*dx^2*dp \
    + (2*t^2*x^2 + 2*t^3*x^3*p)*dx^2 + (2*t^2*p^2 - 2*t^3*x*p^3)*dp^2 - 2*t^2*x*p*dx*dp)";

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown builtin system `{s}`")))
    }
}

/// Physical constants, all exact rationals defaulting to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(with = "rational_text")]
    pub omega: BigRational,
    #[serde(with = "rational_text")]
    pub m1: BigRational,
    #[serde(with = "rational_text")]
    pub m2: BigRational,
    #[serde(with = "rational_text")]
    pub k: BigRational,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            omega: BigRational::one(),
            m1: BigRational::one(),
            m2: BigRational::one(),
            k: BigRational::one(),
        }
    }
}

impl Constants {
    pub const NAMES: [&'static str; 4] = ["omega", "m1", "m2", "k"];

    /// Sets one constant by name; masses must be nonzero.
    pub fn set(&mut self, name: &str, value: BigRational) -> Result<()> {
        if (name == "m1" || name == "m2") && value.is_zero() {
            return Err(Error::Format(format!("{name} must be nonzero")));
        }
        match name {
            "omega" => self.omega = value,
            "m1" => self.m1 = value,
            "m2" => self.m2 = value,
            "k" => self.k = value,
            _ => return Err(Error::Format(format!("unknown constant `{name}`"))),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&BigRational> {
        match name {
            "omega" => Some(&self.omega),
            "m1" => Some(&self.m1),
            "m2" => Some(&self.m2),
            "k" => Some(&self.k),
            _ => None,
        }
    }

    /// A parse context in which the constants can be named.
    pub fn context(&self, dim: usize) -> ParseContext {
        Self::NAMES.iter().fold(ParseContext::new(dim), |ctx, name| {
            ctx.with_constant(name, GaussianRational::from_real(self.get(name).unwrap().clone()))
        })
    }
}

/// Parses a polynomial literal with the constants in scope.
pub fn parse_hamiltonian(src: &str, dim: usize, constants: &Constants) -> Result<PhasePoly> {
    let f = parse_series(src, &constants.context(dim))?;
    Ok(f.as_poly().expect("no parameters in scope"))
}

mod rational_text {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{text}`")))
    }
}

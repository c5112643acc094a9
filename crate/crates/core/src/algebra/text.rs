//! Canonical text form of polynomials and series, and the literal parser.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*        // '/' only by a nonzero constant
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Identifiers are `i`, the coordinates (`x`, `p` in one dimension, `x1`,
//! `p2`, ... otherwise), formal parameters such as `h` and `t`, named
//! constants supplied by the caller, and, for operator literals only, the
//! derivative symbols `dx`, `dp1`, ... Derivative symbols are formal and
//! commute with everything; an operator literal is read in the normal form
//! `Σ a_α ∂^α`.
//!
//! Printing sorts series terms by ascending parameter degree, then by
//! descending graded monomial order, and writes each term as
//! `coefficient*parameters*variables`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gaussian::GaussianRational;
use super::poly::{Monomial, PhasePoly};
use super::series::{DeformedFn, Param};
use crate::error::{Error, Result};

pub fn var_name(dim: usize, index: usize) -> String {
    let (letter, i) = if index < dim { ('x', index) } else { ('p', index - dim) };
    if dim == 1 {
        letter.to_string()
    } else {
        format!("{letter}{}", i + 1)
    }
}

fn power_str(base: &str, e: u32) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

fn monomial_str(dim: usize, m: &Monomial) -> Vec<String> {
    m.exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| power_str(&var_name(dim, v), e))
        .collect()
}

/// Same as [`monomial_str`] but for derivative symbols.
pub fn derivative_str(dim: usize, alpha: &Monomial) -> String {
    let parts: Vec<String> = alpha
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| power_str(&format!("d{}", var_name(dim, v)), e))
        .collect();
    parts.join("*")
}

/// `Σ a_α ∂^α` as text: terms by ascending derivative order, and within one
/// order `dx¹` before `dx²` before `dp₁`; coefficients are parenthesised
/// unless equal to one.
pub fn format_operator<'a>(dim: usize, terms: impl IntoIterator<Item = (&'a Monomial, &'a DeformedFn)>) -> String {
    let mut terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    terms.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| b.0.exponents().cmp(a.0.exponents()))
    });
    join_terms(terms.into_iter().map(|(alpha, c)| {
        let d = derivative_str(dim, alpha);
        let is_one = c.as_constant().is_some_and(|v| v.is_one());
        match (d.is_empty(), is_one) {
            (true, _) => {
                let text = format_series(c);
                if c.num_coeffs() == 1 && ordered_terms(c).len() == 1 {
                    text
                } else {
                    format!("({text})")
                }
            }
            (false, true) => d,
            (false, false) => format!("({})*{d}", format_series(c)),
        }
    }))
}

fn term_str(c: &GaussianRational, factors: &[String]) -> String {
    if factors.is_empty() {
        return c.to_string();
    }
    let rest = factors.join("*");
    if c.is_one() {
        rest
    } else if (-c).is_one() {
        format!("-{rest}")
    } else {
        format!("{c}*{rest}")
    }
}

fn join_terms(terms: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for (k, t) in terms.into_iter().enumerate() {
        if k == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Series term order: ascending total parameter degree, then lexicographic.
fn param_degree_order(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let sa: u32 = a.iter().sum();
    let sb: u32 = b.iter().sum();
    sa.cmp(&sb).then_with(|| a.cmp(b))
}

/// Terms in canonical print order.
pub fn ordered_terms(f: &DeformedFn) -> Vec<(Vec<u32>, Monomial, GaussianRational)> {
    let mut keys: Vec<(&[u32], &PhasePoly)> = f.coeffs().collect();
    keys.sort_by(|a, b| param_degree_order(a.0, b.0));
    let mut out = Vec::new();
    for (d, poly) in keys {
        for (m, c) in poly.terms().rev() {
            out.push((d.to_vec(), m.clone(), c.clone()));
        }
    }
    out
}

pub fn format_series(f: &DeformedFn) -> String {
    let dim = f.dim();
    join_terms(ordered_terms(f).into_iter().map(|(d, m, c)| {
        let mut factors: Vec<String> = f
            .params()
            .iter()
            .zip(&d)
            .filter(|(_, &e)| e > 0)
            .map(|(p, &e)| power_str(&p.name, e))
            .collect();
        factors.extend(monomial_str(dim, &m));
        term_str(&c, &factors)
    }))
}

pub fn format_poly(p: &PhasePoly) -> String {
    let dim = p.dim();
    join_terms(p.terms().rev().map(|(m, c)| term_str(c, &monomial_str(dim, m))))
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

impl fmt::Display for DeformedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_series(self))
    }
}

/// Names and truncations in scope while reading a literal.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub dim: usize,
    pub params: Vec<Param>,
    pub constants: BTreeMap<String, GaussianRational>,
}

impl ParseContext {
    pub fn new(dim: usize) -> Self {
        ParseContext {
            dim,
            ..Default::default()
        }
    }

    pub fn with_params(mut self, params: &[Param]) -> Self {
        self.params = params.to_vec();
        self
    }

    pub fn with_constant(mut self, name: &str, value: GaussianRational) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }
}

/// Sum of `coefficient * ∂^α` keyed by α; plain series use only α = 0.
pub type OperatorTerms = BTreeMap<Monomial, DeformedFn>;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(String),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Token::Int(bytes[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    ctx: &'a ParseContext,
    allow_derivatives: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn scalar(&self, c: GaussianRational) -> OperatorTerms {
        let mut m = OperatorTerms::new();
        m.insert(Monomial::one(self.ctx.dim), DeformedFn::constant(self.ctx.dim, c));
        m
    }

    fn expr(&mut self) -> Result<OperatorTerms> {
        let mut acc = self.term()?;
        while let Some(Token::Sym(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { add(&acc, &rhs) } else { add(&acc, &negate(&rhs)) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<OperatorTerms> {
        let mut acc = self.unary()?;
        while let Some(Token::Sym(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let at = self.offset();
            let rhs = self.unary()?;
            if op == '*' {
                acc = mul(&acc, &rhs);
            } else {
                let c = as_scalar(&rhs, self.ctx.dim).ok_or(Error::Parse {
                    pos: at,
                    msg: "division only by a constant".into(),
                })?;
                let inv = c.inv().ok_or(Error::Parse {
                    pos: at,
                    msg: "division by zero".into(),
                })?;
                acc = acc.into_iter().map(|(a, f)| (a, f.scale(&inv))).collect();
                acc.retain(|_, f| !f.is_zero());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<OperatorTerms> {
        if let Some(Token::Sym('-')) = self.peek() {
            self.pos += 1;
            return Ok(negate(&self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<OperatorTerms> {
        let base = self.atom()?;
        if let Some(Token::Sym('^')) = self.peek() {
            self.pos += 1;
            let Some(Token::Int(n)) = self.peek().cloned() else {
                return self.err("expected a non-negative integer exponent");
            };
            let e: u32 = match n.parse() {
                Ok(e) => e,
                Err(_) => return self.err("exponent too large"),
            };
            self.pos += 1;
            let mut acc = self.scalar(GaussianRational::one());
            for _ in 0..e {
                acc = mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<OperatorTerms> {
        let dim = self.ctx.dim;
        match self.peek().cloned() {
            Some(Token::Int(n)) => {
                self.pos += 1;
                let c: GaussianRational = n.parse().map_err(|_| Error::Parse {
                    pos: self.offset(),
                    msg: format!("bad integer `{n}`"),
                })?;
                Ok(self.scalar(c))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Sym(')')) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(Token::Ident(name)) => {
                let value = self.resolve(&name, dim)?;
                self.pos += 1;
                Ok(value)
            }
            Some(Token::Sym(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }

    fn resolve(&self, name: &str, dim: usize) -> Result<OperatorTerms> {
        if name == "i" {
            return Ok(self.scalar(GaussianRational::i()));
        }
        for v in 0..2 * dim {
            if name == var_name(dim, v) {
                let mut m = OperatorTerms::new();
                m.insert(Monomial::one(dim), PhasePoly::var(dim, v).unwrap().into());
                return Ok(m);
            }
            if self.allow_derivatives && name.strip_prefix('d') == Some(var_name(dim, v).as_str()) {
                let mut m = OperatorTerms::new();
                m.insert(Monomial::var(dim, v), DeformedFn::one(dim));
                return Ok(m);
            }
        }
        if let Some(p) = self.ctx.params.iter().find(|p| p.name == name) {
            let mut m = OperatorTerms::new();
            m.insert(Monomial::one(dim), DeformedFn::param(dim, &p.name, p.order));
            return Ok(m);
        }
        if let Some(c) = self.ctx.constants.get(name) {
            return Ok(self.scalar(c.clone()));
        }
        self.err(format!("unknown identifier `{name}`"))
    }
}

fn add(a: &OperatorTerms, b: &OperatorTerms) -> OperatorTerms {
    let mut out = a.clone();
    for (alpha, f) in b {
        let sum = match out.get(alpha) {
            Some(g) => g + f,
            None => f.clone(),
        };
        out.insert(alpha.clone(), sum);
    }
    out.retain(|_, f| !f.is_zero());
    out
}

fn negate(a: &OperatorTerms) -> OperatorTerms {
    a.iter().map(|(k, f)| (k.clone(), -f)).collect()
}

fn mul(a: &OperatorTerms, b: &OperatorTerms) -> OperatorTerms {
    let mut out = OperatorTerms::new();
    for (ka, fa) in a {
        for (kb, fb) in b {
            let k = ka.mul(kb);
            let prod = fa * fb;
            let sum = match out.get(&k) {
                Some(g) => g + &prod,
                None => prod,
            };
            out.insert(k, sum);
        }
    }
    out.retain(|_, f| !f.is_zero());
    out
}

fn as_scalar(v: &OperatorTerms, dim: usize) -> Option<GaussianRational> {
    match v.len() {
        0 => Some(GaussianRational::zero()),
        1 => {
            let (k, f) = v.iter().next().unwrap();
            if *k != Monomial::one(dim) {
                return None;
            }
            f.as_constant()
        }
        _ => None,
    }
}

fn run(src: &str, ctx: &ParseContext, allow_derivatives: bool) -> Result<OperatorTerms> {
    if ctx.dim == 0 {
        return Err(Error::Parse {
            pos: 0,
            msg: "phase-space dimension must be positive".into(),
        });
    }
    let mut parser = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        end: src.chars().count(),
        ctx,
        allow_derivatives,
    };
    let value = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.err("unexpected trailing input");
    }
    value
        .into_iter()
        .map(|(k, f)| Ok((k, f.align(&ctx.params)?)))
        .collect()
}

/// Parses a series literal; the result carries exactly `ctx.params`.
pub fn parse_series(src: &str, ctx: &ParseContext) -> Result<DeformedFn> {
    let terms = run(src, ctx, false)?;
    Ok(terms
        .into_values()
        .next()
        .unwrap_or_else(|| DeformedFn::zero_with(ctx.dim, &ctx.params)))
}

/// Parses an operator literal `Σ a_α ∂^α` written with `dx`, `dp1`, ... symbols.
pub fn parse_operator(src: &str, ctx: &ParseContext) -> Result<OperatorTerms> {
    run(src, ctx, true)
}

/// Parses a parameter-free polynomial literal.
pub fn parse_poly(src: &str, dim: usize) -> Result<PhasePoly> {
    let f = parse_series(src, &ParseContext::new(dim))?;
    Ok(f.as_poly().expect("no parameters in scope"))
}

/// Smallest dimension in which every coordinate named in `src` exists.
pub fn infer_dim(src: &str) -> usize {
    let mut dim = 1;
    if let Ok(tokens) = tokenize(src) {
        for (_, t) in tokens {
            if let Token::Ident(name) = t {
                let name = name.strip_prefix('d').unwrap_or(&name);
                if let Some(rest) = name.strip_prefix('x').or_else(|| name.strip_prefix('p')) {
                    if let Ok(n) = rest.parse::<usize>() {
                        dim = dim.max(n);
                    }
                }
            }
        }
    }
    dim
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    params: Vec<u32>,
    exponents: Vec<u32>,
    coeff: GaussianRational,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    dim: usize,
    params: Vec<Param>,
    text: String,
    terms: Vec<TermJson>,
}

impl Serialize for DeformedFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            dim: self.dim(),
            params: self.params().to_vec(),
            text: format_series(self),
            terms: ordered_terms(self)
                .into_iter()
                .map(|(d, m, c)| TermJson {
                    params: d,
                    exponents: m.exponents().to_vec(),
                    coeff: c,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DeformedFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SeriesJson::deserialize(deserializer)?;
        if raw.dim == 0 {
            return Err(D::Error::custom("dimension must be positive"));
        }
        let mut coeffs: BTreeMap<Vec<u32>, PhasePoly> = BTreeMap::new();
        for t in raw.terms {
            if t.exponents.len() != 2 * raw.dim {
                return Err(D::Error::custom("exponent vector length"));
            }
            if t.coeff.is_zero() {
                return Err(D::Error::custom("stored coefficient is zero"));
            }
            let entry = coeffs
                .entry(t.params)
                .or_insert_with(|| PhasePoly::zero(raw.dim));
            *entry = &*entry + &PhasePoly::term(raw.dim, Monomial::new(t.exponents), t.coeff);
        }
        let f = DeformedFn::from_coeffs(raw.dim, &raw.params, coeffs).map_err(D::Error::custom)?;
        if format_series(&f) != raw.text {
            return Err(D::Error::custom("text does not match terms"));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::series::HBAR;

    fn ctx1() -> ParseContext {
        ParseContext::new(1).with_params(&[Param::new(HBAR, 4), Param::new("t", 3)])
    }

    #[test]
    fn prints_canonical_form() {
        let f = parse_series("1/2*i*h + p*x", &ctx1()).unwrap();
        assert_eq!(f.to_string(), "x*p + 1/2*i*h");
        let g = parse_series("-(x^2*p) + 3 - 2/4*t^2*x - i*h*t*p", &ctx1()).unwrap();
        assert_eq!(g.to_string(), "-x^2*p + 3 - 1/2*t^2*x - i*h*t*p");
    }

    #[test]
    fn zero_prints_as_zero() {
        assert_eq!(DeformedFn::zero(2).to_string(), "0");
        assert_eq!(PhasePoly::zero(2).to_string(), "0");
    }

    #[test]
    fn multidimensional_names() {
        let ctx = ParseContext::new(2);
        let f = parse_series("x1*x2^2 + p2", &ctx).unwrap();
        assert_eq!(f.to_string(), "x1*x2^2 + p2");
        assert!(parse_series("x", &ctx).is_err());
    }

    #[test]
    fn complex_coefficients_round_trip() {
        let f = parse_series("(1 - 3*i)*x + (-1/2 + i)*h^2*t", &ctx1()).unwrap();
        let text = f.to_string();
        assert_eq!(text, "(1 - 3*i)*x + (-1/2 + i)*h^2*t");
        assert_eq!(parse_series(&text, &ctx1()).unwrap(), f);
    }

    #[test]
    fn truncation_applies_while_parsing() {
        let f = parse_series("t^4*x + t^3", &ctx1()).unwrap();
        assert_eq!(f.to_string(), "t^3");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_series("x + y", &ctx1()).unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                pos: 4,
                msg: "unknown identifier `y`".into()
            }
        );
        assert!(matches!(parse_series("x/p", &ctx1()), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_series("(x", &ctx1()), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_series("x $", &ctx1()), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn operator_literal() {
        let ctx = ParseContext::new(1).with_params(&[Param::new(HBAR, 2), Param::new("t", 3)]);
        let op = parse_operator("1 + h^2*(t*x*dx^2*dp - 2*t^2*x*p*dx*dp)", &ctx).unwrap();
        assert_eq!(op.len(), 3);
        let key = Monomial::new(vec![2, 1]);
        assert_eq!(op[&key].to_string(), "h^2*t*x");
        assert!(parse_series("dx", &ctx).is_err());
    }

    #[test]
    fn constants_resolve() {
        let ctx = ParseContext::new(1).with_constant("omega", GaussianRational::from(3));
        let f = parse_series("omega^2*x^2/2", &ctx).unwrap();
        assert_eq!(f.to_string(), "9/2*x^2");
    }

    #[test]
    fn dimension_inference() {
        assert_eq!(infer_dim("x*p"), 1);
        assert_eq!(infer_dim("x1*p3 + h"), 3);
        assert_eq!(infer_dim("dx2"), 2);
    }

    #[test]
    fn json_round_trip() {
        let f = parse_series("(1 - 3*i)*x + 1/2*i*h*p^2 - t^3", &ctx1()).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: DeformedFn = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}

//! Closed forms of the worked examples, written out as literals or built
//! from univariate Taylor series.

use num_rational::BigRational;
use qtraj_core::algebra::text::{parse_series, ParseContext};
use qtraj_core::algebra::{DeformedFn, Param, PhasePoly, HBAR};
use qtraj_core::intertwiner::DiffOperator;
use qtraj_core::systems::Constants;
use qtraj_core::transform::Derivation;

use super::{exp_series, gr, in_hbar_t, in_t, q, Taylor};

pub fn ctx(c: &Constants, dim: usize, k: u32, l: u32) -> ParseContext {
    c.context(dim).with_params(&[Param::new(HBAR, k), Param::new("t", l)])
}

pub fn series(src: &str, ctx: &ParseContext) -> DeformedFn {
    parse_series(src, ctx).unwrap_or_else(|e| panic!("{src}: {e}"))
}

/// Constant sets used to guard against coincidences at value 1.
pub fn constant_sets() -> Vec<Constants> {
    let mut out = vec![Constants::default()];
    let mut c = Constants::default();
    c.set("omega", q(3, 2)).unwrap();
    c.set("m1", q(2, 1)).unwrap();
    c.set("m2", q(5, 3)).unwrap();
    c.set("k", q(-3, 4)).unwrap();
    out.push(c);
    let mut c = Constants::default();
    c.set("omega", q(2, 1)).unwrap();
    c.set("m1", q(1, 3)).unwrap();
    c.set("m2", q(7, 1)).unwrap();
    c.set("k", q(5, 2)).unwrap();
    out.push(c);
    out
}

/// `x cos ωt + ω⁻¹ p sin ωt` and `p cos ωt − ω x sin ωt`, to order `l` in t.
pub fn harmonic_trajectory(omega: &BigRational, l: u32) -> (DeformedFn, DeformedFn) {
    let n = l as usize + 1;
    let cos = in_t(&Taylor::cos(n).scale_arg(omega), l, 1);
    let sin = in_t(&Taylor::sin(n).scale_arg(omega), l, 1);
    let x: DeformedFn = PhasePoly::x(1, 0).into();
    let p: DeformedFn = PhasePoly::p(1, 0).into();
    let w = gr(omega.clone());
    let w_inv = gr(omega.recip());
    let qt = &(&x * &cos) + &(&p * &sin).scale(&w_inv);
    let pt = &(&p * &cos) - &(&x * &sin).scale(&w);
    (qt, pt)
}

/// `(Q¹, Q², P₁, P₂)` of the coupled two-particle system.
pub fn coupled2_trajectory(c: &Constants, k: u32, l: u32) -> Vec<DeformedFn> {
    let cx = ctx(c, 2, k, l);
    [
        "x1 + 1/m1*p1*t - k/(2*m1)*p2^2*t^2",
        "x2 + (1/m2*p2 + 2*k*x1*p2)*t + k/m1*p1*p2*t^2 - k^2/(3*m1)*p2^3*t^3",
        "p1 - k*p2^2*t",
        "p2",
    ]
    .iter()
    .map(|s| series(s, &cx))
    .collect()
}

/// `D_{x¹}, D_{x²}, D_{p₁}, D_{p₂}`, coefficients listed in the order
/// `∂_{x¹}, ∂_{x²}, ∂_{p₁}, ∂_{p₂}`.
pub fn coupled2_derivations(c: &Constants, k: u32, l: u32) -> Vec<Derivation> {
    let cx = ctx(c, 2, k, l);
    let rows: [[&str; 4]; 4] = [
        ["1", "2*k*t*p2", "0", "0"],
        ["0", "1", "0", "0"],
        ["1/m1*t", "k/m1*t^2*p2", "1", "0"],
        [
            "-k/m1*t^2*p2",
            "1/m2*t + 2*k*t*x1 - k/m1*t^2*p1 - k^2/m1*t^3*p2^2",
            "-2*k*t*p2",
            "1",
        ],
    ];
    rows.iter()
        .map(|r| Derivation::new(r.iter().map(|s| series(s, &cx)).collect()).unwrap())
        .collect()
}

pub const COUPLED2_GENERATOR: &str =
    "1/8*h^2*k/m1*t^2*dx1*dx2^2 + 1/4*h^2*k*t*dp1*dx2^2 + 1/12*h^2*k^2/m1*t^3*p2*dx2^3";

pub fn coupled2_s(c: &Constants, k: u32, l: u32) -> DiffOperator {
    DiffOperator::exp(&DiffOperator::parse(COUPLED2_GENERATOR, &ctx(c, 2, k, l)).unwrap()).unwrap()
}

pub const X2P2_S: &str = "1 + h^2*(1/6*(3*t^2*x^3 + 4*t^3*x^4*p)*dx^3 + 1/6*(3*t^2*p^3 - 4*t^3*x*p^4)*dp^3 \
    + 1/2*(-t*p - t^2*x*p^2 + 4*t^3*x^2*p^3)*dx*dp^2 + 1/2*(t*x - t^2*x^2*p - 4*t^3*x^3*p^2)*dx^2*dp \
    + (2*t^2*x^2 + 2*t^3*x^3*p)*dx^2 + (2*t^2*p^2 - 2*t^3*x*p^3)*dp^2 + (-2*t^2*x*p)*dx*dp)";

pub fn x2p2_s(k: u32, l: u32) -> DiffOperator {
    DiffOperator::parse(X2P2_S, &ctx(&Constants::default(), 1, k, l)).unwrap()
}

fn xp(dim_params: &[Param]) -> DeformedFn {
    DeformedFn::from_poly_with(&PhasePoly::x(1, 0) * &PhasePoly::p(1, 0), dim_params)
}

/// `Q_C = x e^{2txp}`, `P_C = p e^{−2txp}` to order `l` in t.
pub fn x2p2_classical(l: u32) -> (DeformedFn, DeformedFn) {
    let t = DeformedFn::param(1, "t", l);
    let e = (&t * &xp(&[])).scale(&2.into());
    let x: DeformedFn = PhasePoly::x(1, 0).into();
    let p: DeformedFn = PhasePoly::p(1, 0).into();
    (&x * &exp_series(&e, l), &p * &exp_series(&-&e, l))
}

/// `Q_C(1 + ħ²(t² + ⅔t³xp))`, `P_C(1 + ħ²(t² − ⅔t³xp))`.
pub fn x2p2_hbar2_expansion(l: u32) -> (DeformedFn, DeformedFn) {
    let cx = ctx(&Constants::default(), 1, 2, l);
    let (qc, pc) = x2p2_classical(l);
    (
        &qc * &series("1 + h^2*(t^2 + 2/3*t^3*x*p)", &cx),
        &pc * &series("1 + h^2*(t^2 - 2/3*t^3*x*p)", &cx),
    )
}

/// `sec²(ħt) x exp(±(2/ħ) tan(ħt) xp)` expanded in `[h: k, t: l]`.
pub fn x2p2_exact(k: u32, l: u32) -> (DeformedFn, DeformedFn) {
    let n = (k.max(l) + 2) as usize;
    let sec2 = Taylor::cos(n).recip().pow(2);
    let tan_over_u = Taylor::sin(n + 1).mul(&Taylor::cos(n + 1).recip()).div_by_arg();
    let params = [Param::new(HBAR, k), Param::new("t", l)];
    let t = DeformedFn::param(1, "t", l);
    let e = (&(&t * &in_hbar_t(&tan_over_u, k, l, 1)) * &xp(&params)).scale(&2.into());
    let sec2 = in_hbar_t(&sec2, k, l, 1);
    let x: DeformedFn = PhasePoly::x(1, 0).into();
    let p: DeformedFn = PhasePoly::p(1, 0).into();
    (
        &(&sec2 * &x) * &exp_series(&e, l),
        &(&sec2 * &p) * &exp_series(&-&e, l),
    )
}

/// `sec⁴(ħt)` in `[h: k, t: l]`.
pub fn sec4(k: u32, l: u32) -> DeformedFn {
    let n = (k.max(l) + 1) as usize;
    in_hbar_t(&Taylor::cos(n).recip().pow(4), k, l, 1)
}

/// `D_x`, `D_p` with `a(u) = tan(u) cos⁴(u) / u`.
pub fn x2p2_derivations(k: u32, l: u32) -> Vec<Derivation> {
    let n = (k.max(l) + 2) as usize;
    let cos = Taylor::cos(n + 1);
    let a = Taylor::sin(n + 1).mul(&cos.recip()).div_by_arg().mul(&cos.pow(4));
    let params = [Param::new(HBAR, k), Param::new("t", l)];
    let sec2 = in_hbar_t(&Taylor::cos(n).recip().pow(2), k, l, 1);
    let t = DeformedFn::param(1, "t", l);
    let ta = &t * &in_hbar_t(&a, k, l, 1);
    let xp = xp(&params);
    let x: DeformedFn = PhasePoly::x(1, 0).into();
    let p: DeformedFn = PhasePoly::p(1, 0).into();
    let two = |f: &DeformedFn| f.scale(&2.into());
    let ex_plus = exp_series(&two(&(&ta * &xp)), l);
    let ex_minus = exp_series(&-&two(&(&ta * &xp)), l);
    let one = DeformedFn::one(1);
    let dx = vec![
        &(&sec2 * &(&one + &two(&(&ta * &xp)))) * &ex_plus,
        -&(&(&two(&(&ta * &sec2)) * &(&p * &p)) * &ex_plus),
    ];
    let dp = vec![
        &(&two(&(&ta * &sec2)) * &(&x * &x)) * &ex_minus,
        &(&sec2 * &(&one - &two(&(&ta * &xp)))) * &ex_minus,
    ];
    vec![Derivation::new(dx).unwrap(), Derivation::new(dp).unwrap()]
}

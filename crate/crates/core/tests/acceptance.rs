mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use oracle::closed_form::{self as known, constant_sets};
use oracle::random_poly;
use qtraj_core::algebra::text::format_series;
use qtraj_core::algebra::{DeformedFn, Monomial, PhasePoly, HBAR};
use qtraj_core::flow::{
    check_classical_canonicity, check_quantum_canonicity, classical_flow, evolution_residual, evolve_observable,
    quantum_flow, HamiltonianSystem,
};
use qtraj_core::intertwiner::{
    check_group_law, quantum_pullback, solve_intertwiner, verify_intertwiner, DiffOperator, GroupLawConfig,
    SolveConfig, DEFAULT_TEST_DEGREE,
};
use qtraj_core::moyal::{moyal_bracket, star, StarProductSpec};
use qtraj_core::systems::{Builtin, Constants};
use qtraj_core::transform::induced_derivations;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

const M: StarProductSpec = StarProductSpec::Moyal;

fn ensure(cond: bool, what: impl Into<String>) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn monomial(dim: usize, m: &Monomial, k: u32) -> DeformedFn {
    DeformedFn::from(PhasePoly::term(dim, m.clone(), 1.into())).truncate(HBAR, k)
}

fn moyal_kernel() -> Outcome {
    let x = DeformedFn::from(PhasePoly::x(1, 0)).truncate(HBAR, 4);
    let p = DeformedFn::from(PhasePoly::p(1, 0)).truncate(HBAR, 4);
    let xp = ok(star(&M, &x, &p))?;
    ensure(format_series(&xp) == "x*p + 1/2*i*h", format!("x*p gave {xp}"))?;
    let b = ok(moyal_bracket(&M, &x, &p))?;
    ensure(b == DeformedFn::one(1).truncate(HBAR, 4), format!("[[x,p]] gave {b}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 0..200 {
        let dim = 1 + n % 2;
        let mut draw = || DeformedFn::from(random_poly(&mut rng, dim, 4, 3, true)).truncate(HBAR, 4);
        let (f, g, h) = (draw(), draw(), draw());
        let l = ok(star(&M, &ok(star(&M, &f, &g))?, &h))?;
        let r = ok(star(&M, &f, &ok(star(&M, &g, &h))?))?;
        ensure(l == r, format!("associativity failed on triple {n}"))?;
    }
    Ok(())
}

fn evolution_oracle() -> Outcome {
    let c = Constants::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for b in Builtin::ALL {
        let sys = ok(b.system(&c, 4, 6))?;
        let dim = b.dim();
        let mut obs: Vec<DeformedFn> = (0..2 * dim).map(|v| PhasePoly::var(dim, v).unwrap().into()).collect();
        obs.push(sys.hamiltonian().clone().into());
        for _ in 0..3 {
            obs.push(random_poly(&mut rng, dim, 3, 4, true).into());
        }
        for (n, a) in obs.iter().enumerate() {
            let r = ok(evolution_residual(&sys, &ok(evolve_observable(&sys, a))?))?;
            ensure(r.is_zero(), format!("{b} observable {n}: residual {r}"))?;
        }
    }
    Ok(())
}

fn harmonic() -> Outcome {
    for c in constant_sets() {
        let sys = ok(Builtin::Harmonic.system(&c, 4, 8))?;
        let q = ok(quantum_flow(&sys))?.map;
        let cl = ok(classical_flow(&sys))?.map;
        ensure(q.agrees_with(&cl), "quantum and classical flows differ")?;
        let (qt, pt) = known::harmonic_trajectory(&c.omega, 8);
        ensure(q.q(0).agrees_with(&qt) && q.p(0).agrees_with(&pt), "trajectory differs from Taylor series")?;
        let report = ok(verify_intertwiner(&DiffOperator::identity(1), &q, 4, DEFAULT_TEST_DEGREE))?;
        ensure(report.passed(), "S = 1 does not intertwine")?;
    }
    Ok(())
}

fn coupled() -> Outcome {
    for (n, c) in constant_sets().into_iter().enumerate() {
        let sys = ok(Builtin::Coupled2.system(&c, 4, 6))?;
        let flow = ok(quantum_flow(&sys))?.map;
        for (v, (got, want)) in flow.components().iter().zip(known::coupled2_trajectory(&c, 4, 6)).enumerate() {
            ensure(got == &want, format!("constants {n}: component {v} differs"))?;
            ensure(got.max_degree_in("t") <= 3, "trajectory does not terminate at t^3")?;
        }
        let ds = ok(induced_derivations(&flow))?;
        for (v, (got, want)) in ds.iter().zip(known::coupled2_derivations(&c, 4, 6)).enumerate() {
            ensure(got.agrees_with(&want), format!("constants {n}: derivation {v} differs"))?;
        }
        let s = known::coupled2_s(&c, 4, 6);
        let degree = if n == 0 { DEFAULT_TEST_DEGREE } else { 4 };
        let report = ok(verify_intertwiner(&s, &flow, 4, degree))?;
        ensure(report.passed(), format!("constants {n}: S does not intertwine"))?;
        let ctx = known::ctx(&c, 2, 4, 6);
        let a = known::series("x1*x2^2", &ctx);
        let sa = ok(s.apply(&a))?;
        ensure(sa.agrees_with(&known::series("x1*x2^2 + 1/4*h^2*k/m1*t^2", &ctx)), format!("S(x1*x2^2) = {sa}"))?;
        for m in Monomial::all_up_to(2, 3) {
            let pulled = ok(quantum_pullback(&flow, &s, &monomial(2, &m, 4)))?;
            ensure(ok(evolution_residual(&sys, &pulled))?.is_zero(), "pull-back violates the evolution equation")?;
        }
        let law = ok(check_group_law(&flow, &s, &GroupLawConfig::new(3, 3, 4)))?;
        ensure(law.passed(), format!("constants {n}: group law fails"))?;
    }
    Ok(())
}

fn quartic() -> Outcome {
    let sys = ok(Builtin::X2p2.system(&Constants::default(), 2, 6))?;
    let flow = ok(quantum_flow(&sys))?.map;
    let (qe, pe) = known::x2p2_hbar2_expansion(6);
    ensure(flow.q(0) == &qe && flow.p(0) == &pe, "Q, P differ from the second-order expansion")?;
    ensure(ok(check_quantum_canonicity(&flow))?.passed(), "[[Q,P]] != 1")?;
    let cl = ok(check_classical_canonicity(&flow))?;
    let qp = cl.entry("{Q,P}").ok_or("missing {Q,P}")?;
    ensure(format_series(&qp.value) == "1 + 2*h^2*t^2", format!("{{Q,P}} = {}", qp.value))?;
    ensure(qp.value.agrees_with(&known::sec4(2, 6)), "{Q,P} differs from sec^4 series")?;
    let s = known::x2p2_s(2, 6);
    ensure(ok(verify_intertwiner(&s, &flow, 2, DEFAULT_TEST_DEGREE))?.passed(), "operator does not intertwine")?;
    ensure(ok(check_group_law(&flow, &s, &GroupLawConfig::new(3, 3, 2)))?.passed(), "group law fails")
}

fn solver() -> Outcome {
    let c = Constants::default();
    for (b, r, deg) in [(Builtin::Harmonic, 3, 2), (Builtin::Coupled2, 3, 1), (Builtin::X2p2, 3, 5)] {
        let flow = ok(quantum_flow(&ok(b.system(&c, 2, 6))?))?.map;
        let outcome = ok(solve_intertwiner(&flow, &SolveConfig::new(2, r, deg).with_test_degree(4)))?;
        let solved = outcome.solved().ok_or_else(|| format!("{b}: {outcome:?}"))?;
        let want = ok(b.intertwiner(&c, 2, 6))?;
        if b == Builtin::Harmonic {
            ensure(solved.operator.agrees_with(&DiffOperator::identity(1)), "harmonic solution is not 1")?;
        }
        for m in Monomial::all_up_to(b.dim(), 4) {
            let a = monomial(b.dim(), &m, 2);
            ensure(ok(solved.operator.apply(&a))?.agrees_with(&ok(want.apply(&a))?), format!("{b}: differs on {m:?}"))?;
        }
    }
    Ok(())
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..5 {
        let dim = 1 + n % 2;
        let h = random_poly(&mut rng, dim, 3, 4, false);
        let sys = ok(HamiltonianSystem::new(h, 2, 4))?;
        let q = ok(quantum_flow(&sys))?.map;
        let c = ok(classical_flow(&sys))?.map;
        for (a, b) in q.components().iter().zip(c.components()) {
            ensure(&a.coefficient(HBAR, 0) == b, format!("hamiltonian {n}: classical limit differs"))?;
        }
    }
    let sys = ok(Builtin::X2p2.system(&Constants::default(), 2, 5))?;
    let flow = ok(quantum_flow(&sys))?.map;
    let s = known::x2p2_s(2, 5);
    let mons = Monomial::all_up_to(1, 2);
    for f in &mons {
        for g in &mons {
            let (f, g) = (monomial(1, f, 2), monomial(1, g, 2));
            let lhs = ok(quantum_pullback(&flow, &s, &ok(star(&M, &f, &g))?))?;
            let pf = ok(quantum_pullback(&flow, &s, &f))?;
            let pg = ok(quantum_pullback(&flow, &s, &g))?;
            ensure(lhs.agrees_with(&ok(star(&M, &pf, &pg))?), "pull-back is not a star automorphism")?;
        }
    }
    let c = Constants::default();
    for (b, k, l) in [(Builtin::Harmonic, 4, 6), (Builtin::Coupled2, 4, 5), (Builtin::X2p2, 2, 6)] {
        let sys = ok(b.system(&c, k, l))?;
        let flow = ok(quantum_flow(&sys))?.map;
        let s = ok(b.intertwiner(&c, k, l))?;
        for m in Monomial::all_up_to(b.dim(), 4) {
            let a = monomial(b.dim(), &m, k);
            let pulled = ok(quantum_pullback(&flow, &s, &a))?;
            ensure(pulled.agrees_with(&ok(evolve_observable(&sys, &a))?), format!("{b}: pull-back differs on {m:?}"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("Moyal kernel", moyal_kernel),
        ("evolution oracle", evolution_oracle),
        ("harmonic oscillator", harmonic),
        ("coupled system", coupled),
        ("x^2 p^2 system", quartic),
        ("solver consistency", solver),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({secs:.1}s)", n + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {e}", n + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite: the end-to-end guarantees of the crate, one test per
//! criterion. Every identity asserted here is exact (normal-form equality
//! of expressions with rational coefficients); the only tolerances appear
//! in the finite-difference cross-checks of criterion 6.

use std::time::Instant;

use jetvar::dedonder::{hamiltonian, hdwe, recover_lagrangian, HamiltonianData, HdweEquation};
use jetvar::error::Error;
use jetvar::expr::{parse, Atom, Expr, ParseContext, VarId};
use jetvar::hamjac::{
    classical_hj_residual, curvature, equivalence_check, generalized_hj_residual, Flatness,
    SectionT,
};
use jetvar::jetcalc::{self, HorizontalForm, JetContext};
use jetvar::multiindex::MultiIndex;
use jetvar::numcheck::{
    self, biharmonic_ansatz, biharmonic_candidate, biharmonic_gauge_for_zero_f,
    biharmonic_problem, fd_partial_check, hdwe_solution_check, is_biharmonic, random_polynomial,
    random_rational, OracleConfig, PhiSource,
};
use jetvar::variational::{
    add_divergence, constraint_equations, hessian, is_hyperregular, variational_derivative,
    Hyperregularity, LagrangianProblem,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mi(n: u8, e: &[u8]) -> MultiIndex {
    MultiIndex::new(n, e).unwrap()
}

fn verdict(criterion: &str, pass: bool) {
    println!("acceptance {criterion}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance {criterion} failed");
}

fn first_order_problem() -> LagrangianProblem {
    let ctx = ParseContext::lagrangian(1, 1, 1);
    LagrangianProblem::new(1, 1, 1, parse("1/2*u[1]^2", &ctx).unwrap()).unwrap()
}

fn third_order_problem() -> LagrangianProblem {
    let ctx = ParseContext::lagrangian(1, 1, 3);
    LagrangianProblem::new(1, 1, 3, parse("1/2*u[1,1,1]^2", &ctx).unwrap()).unwrap()
}

/// Criterion 1: the golden second-order pipeline on a 2d base, exact and
/// fast: Euler-Lagrange expression, constraints, Hamiltonian, and the four
/// families of the first-order system.
#[test]
fn criterion_1_golden_pipeline() {
    let start = Instant::now();
    let p = biharmonic_problem();
    let ctx = ParseContext::with_momenta(2, 1, 4, 1);

    let vd = variational_derivative(&p).unwrap();
    assert_eq!(
        vd[0],
        parse("u[1,1,1,1] + 2*u[1,1,2,2] + u[2,2,2,2]", &ctx).unwrap(),
        "Euler-Lagrange expression"
    );

    let cons = constraint_equations(&p);
    assert_eq!(cons.equations.len(), 3);
    for eq in &cons.equations {
        let e = eq.index.entries();
        let (i, j) = (e[0], e[1]);
        let want = if i == j {
            parse(&format!("u[{i},{j}] - p[{i};{j}]"), &ctx).unwrap()
        } else {
            parse(&format!("2*u[{i},{j}] - p[{i};{j}] - p[{j};{i}]"), &ctx).unwrap()
        };
        assert_eq!(eq.lhs, want, "constraint {}", eq.label);
    }

    assert!(matches!(
        is_hyperregular(&p).unwrap(),
        Hyperregularity::Yes { det } if det == Expr::from_int(2)
    ));

    let hd = hamiltonian(&p).unwrap();
    let h_expect = parse(
        "p[;1]*u[1] + p[;2]*u[2] + 1/2*p[1;1]^2 + 1/2*p[2;2]^2 \
         + 1/4*p[1;2]^2 + 1/4*p[2;1]^2 + 1/2*p[1;2]*p[2;1]",
        &ctx,
    )
    .unwrap();
    assert_eq!(hd.hamiltonian, h_expect, "Hamiltonian");

    // the four families: p^{.i},_i = 0; p^{j.i},_i = -p^{.j}; u,_i = u_i;
    // u_i,_j = p_{(i.j)}
    let sys = hdwe(&hd);
    assert_eq!(sys.equations.len(), 9);
    for eq in &sys.equations {
        match eq {
            HdweEquation::MomentumDivergence { index, rhs, .. } => {
                if index.is_empty() {
                    assert!(rhs.is_zero());
                } else {
                    let j = index.entries()[0];
                    assert_eq!(*rhs, -&Expr::momentum(1, mi(2, &[]), j));
                }
            }
            HdweEquation::JetGradient { index, dir, rhs, .. } => {
                if index.is_empty() {
                    assert_eq!(*rhs, Expr::jet(1, mi(2, &[*dir])));
                } else {
                    let i = index.entries()[0];
                    let want = parse(&format!("1/2*p[{i};{dir}] + 1/2*p[{dir};{i}]"), &ctx).unwrap();
                    assert_eq!(*rhs, want);
                }
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    verdict("criterion 1 (golden pipeline)", true);
}

/// Criterion 2: with a symbolic biharmonic function, the classical HJ
/// residual system is exactly zero, the scalar f reduces to base variables
/// only (and to zero under the distinguished gauge), and the induced
/// connection has exactly vanishing curvature.
#[test]
fn criterion_2_symbolic_hj_solution() {
    let start = Instant::now();
    let p = biharmonic_problem();
    let hd = hamiltonian(&p).unwrap();
    let phi = PhiSource::Opaque("phi".into());

    let g = [Expr::opaque("G1", 2), Expr::opaque("G2", 2)];
    let s = biharmonic_ansatz(&phi, &g);
    let (residuals, f) = classical_hj_residual(&hd, &s).unwrap();
    for eq in &residuals.equations {
        assert!(
            eq.lhs.assume_biharmonic("phi").is_zero(),
            "HJ residual {} = {}",
            eq.label,
            eq.lhs
        );
    }
    let f_red = f.assume_biharmonic("phi");
    assert!(
        f_red.free_vars().iter().all(|v| matches!(v, VarId::Base(_))),
        "f must be base-only, got {f_red}"
    );

    let g0 = biharmonic_gauge_for_zero_f(&phi);
    let s0 = biharmonic_ansatz(&phi, &g0);
    let (_, f0) = classical_hj_residual(&hd, &s0).unwrap();
    assert!(f0.assume_biharmonic("phi").is_zero(), "gauge-fixed f = {f0}");

    let t = jetcalc::vertical_differential(&s);
    let curv = curvature(&hd, &t).unwrap();
    assert_eq!(curv.verdict, Flatness::Flat);
    for ((alpha, index, i, j), c) in &curv.components {
        assert!(c.is_zero(), "R[{alpha}; {index}; {i},{j}] = {c}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    verdict("criterion 2 (symbolic HJ solution)", true);
}

/// Criterion 3: the covering property. For phi = x1^3 x2 and random
/// rational affine shifts, the induced candidate satisfies every equation
/// of the first-order system with exact zero residual, and the covered
/// field is exactly biharmonic.
#[test]
fn criterion_3_covering_property() {
    let p = biharmonic_problem();
    let hd = hamiltonian(&p).unwrap();
    let sys = hdwe(&hd);
    let ctx = ParseContext::lagrangian(2, 1, 0);
    let phi_poly = parse("x1^3*x2", &ctx).unwrap();
    assert!(is_biharmonic(&phi_poly, 2));
    let phi = PhiSource::Polynomial(phi_poly);
    let cfg = OracleConfig::default();
    let mut rng = cfg.rng();
    for round in 0..10 {
        let a = [
            Expr::from_rational(random_rational(&mut rng, 20, 9)),
            Expr::from_rational(random_rational(&mut rng, 20, 9)),
        ];
        let b = Expr::from_rational(random_rational(&mut rng, 20, 9));
        let candidate = biharmonic_candidate(&phi, &a, &b);
        let report = hdwe_solution_check(&sys, &candidate, &cfg).unwrap();
        assert!(report.pass(), "round {round}:\n{}", report.render());
        let u = &candidate[&VarId::Jet(1, mi(2, &[]))];
        assert!(is_biharmonic(u, 2), "round {round}: covered field not biharmonic");
    }
    verdict("criterion 3 (covering property)", true);
}

/// Criterion 4: equivalence under total divergences, on the plate theory
/// and on the free first-order theory. For random polynomial divergence
/// forms: identical variational derivatives and Hessians, the Hamiltonian
/// shift identity, and exact equality of the HJ residual systems of `T`
/// and `T + d^V rho`, for a solution and a non-solution section.
#[test]
fn criterion_4_divergence_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    struct Case {
        problem: LagrangianProblem,
        atoms: Vec<Atom>,
        solution: SectionT,
        non_solution: SectionT,
    }

    let biharmonic_solution = {
        let phi = PhiSource::Polynomial(parse("x1^3*x2", &ParseContext::lagrangian(2, 1, 0)).unwrap());
        jetcalc::vertical_differential(&biharmonic_ansatz(&phi, &[Expr::zero(), Expr::zero()]))
    };
    let biharmonic_bad = {
        let mut t = SectionT::zero(2, 1, 1);
        t.set(1, mi(2, &[]), 1, Expr::jet(1, mi(2, &[]))).unwrap();
        t.set(1, mi(2, &[1]), 2, parse("u[2]^2", &ParseContext::on_jets(2, 1, 1)).unwrap())
            .unwrap();
        t
    };
    let line_solution = {
        let mut t = SectionT::zero(1, 1, 0);
        t.set(1, mi(1, &[]), 1, Expr::one()).unwrap();
        t
    };
    let line_bad = {
        let mut t = SectionT::zero(1, 1, 0);
        t.set(1, mi(1, &[]), 1, Expr::jet(1, mi(1, &[]))).unwrap();
        t
    };

    let cases = [
        Case {
            problem: biharmonic_problem(),
            atoms: vec![
                Atom::Var(VarId::Base(1)),
                Atom::Var(VarId::Base(2)),
                Atom::Var(VarId::Jet(1, mi(2, &[]))),
                Atom::Var(VarId::Jet(1, mi(2, &[1]))),
                Atom::Var(VarId::Jet(1, mi(2, &[2]))),
            ],
            solution: biharmonic_solution,
            non_solution: biharmonic_bad,
        },
        Case {
            problem: first_order_problem(),
            atoms: vec![Atom::Var(VarId::Base(1)), Atom::Var(VarId::Jet(1, mi(1, &[])))],
            solution: line_solution,
            non_solution: line_bad,
        },
    ];

    for case in &cases {
        let p = &case.problem;
        let hd = hamiltonian(p).unwrap();
        // sanity: the designated sections behave as advertised
        assert!(generalized_hj_residual(&hd, &case.solution).unwrap().all_zero());
        assert!(!generalized_hj_residual(&hd, &case.non_solution).unwrap().all_zero());

        for _ in 0..25 {
            let comps: Vec<Expr> = (0..p.n)
                .map(|_| random_polynomial(&case.atoms, 3, 5, &mut rng))
                .collect();
            let rho = HorizontalForm::new(p.n, p.m, p.l(), comps).unwrap();
            let q = add_divergence(p, &rho).unwrap();

            let vd_p = variational_derivative(p).unwrap();
            let vd_q = variational_derivative(&q).unwrap();
            assert_eq!(vd_p, vd_q, "variational derivatives differ");

            let (_, hp) = hessian(p);
            let (_, hq) = hessian(&q);
            for r in 0..hp.nrows {
                for c in 0..hp.ncols {
                    assert_eq!(hp.at(r, c), hq.at(r, c), "Hessians differ");
                }
            }

            let psi = jetvar::dedonder::psi_covariance(p, &rho).unwrap();
            assert!(psi.pass(), "{:?}", psi.failures().collect::<Vec<_>>());

            for t in [&case.solution, &case.non_solution] {
                let eq = equivalence_check(p, &rho, t).unwrap();
                assert!(eq.pass(), "{:?}", eq.failures().collect::<Vec<_>>());
            }
        }
    }
    verdict("criterion 4 (divergence equivalence)", true);
}

/// Criterion 5: the Lagrangian recovery round trip on three theories, and
/// rejection (with a witness) of a Hamiltonian that has no Lagrangian
/// counterpart.
#[test]
fn criterion_5_recovery_round_trip() {
    for p in [biharmonic_problem(), first_order_problem(), third_order_problem()] {
        let hd = hamiltonian(&p).unwrap();
        let bare =
            HamiltonianData::from_hamiltonian(hd.n, hd.m, hd.l, hd.hamiltonian.clone()).unwrap();
        let rec = recover_lagrangian(&bare).unwrap();
        assert_eq!(rec.problem.lagrangian, p.lagrangian, "round trip (order {})", p.order);
        assert_eq!(rec.problem.order, p.order);
    }

    let ctx = ParseContext::with_momenta(2, 1, 1, 1);
    let bad = HamiltonianData::from_hamiltonian(2, 1, 1, parse("p[;1]*p[;2]", &ctx).unwrap())
        .unwrap();
    match recover_lagrangian(&bad) {
        Err(Error::NotLagrangian { condition: 'a', witness }) => {
            assert!(!witness.is_empty());
        }
        other => panic!("expected a witnessed rejection, got {other:?}"),
    }
    verdict("criterion 5 (recovery round trip)", true);
}

/// Criterion 6: the oracle suites. All symbolic identities are exact; the
/// finite-difference comparison uses the default tolerance 1e-6 at 20
/// sampled points per expression.
#[test]
fn criterion_6_oracle_suites() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    // delta/delta u of a total divergence vanishes, 50 random forms
    let atoms = vec![
        Atom::Var(VarId::Base(1)),
        Atom::Var(VarId::Base(2)),
        Atom::Var(VarId::Jet(1, mi(2, &[]))),
        Atom::Var(VarId::Jet(1, mi(2, &[1]))),
        Atom::Var(VarId::Jet(1, mi(2, &[2]))),
    ];
    let ctx2 = JetContext::new(2, 1, 4);
    for _ in 0..50 {
        let comps: Vec<Expr> = (0..2).map(|_| random_polynomial(&atoms, 3, 5, &mut rng)).collect();
        let rho = HorizontalForm::new(2, 1, 1, comps).unwrap();
        let div = jetcalc::total_divergence(&rho, &ctx2).unwrap();
        let p = LagrangianProblem::new(2, 1, 2, div).unwrap();
        for vd in variational_derivative(&p).unwrap() {
            assert!(vd.is_zero(), "Euler-Lagrange operator must kill divergences");
        }
    }

    // total derivatives commute, 50 random expressions
    let jet_atoms = {
        let mut v = atoms.clone();
        v.push(Atom::Var(VarId::Jet(1, mi(2, &[1, 1]))));
        v.push(Atom::Var(VarId::Jet(1, mi(2, &[1, 2]))));
        v
    };
    let ctx_d = JetContext::new(2, 1, 6);
    for _ in 0..50 {
        let e = random_polynomial(&jet_atoms, 3, 6, &mut rng);
        let d12 = jetcalc::total_derivative(&jetcalc::total_derivative(&e, 1, &ctx_d).unwrap(), 2, &ctx_d)
            .unwrap();
        let d21 = jetcalc::total_derivative(&jetcalc::total_derivative(&e, 2, &ctx_d).unwrap(), 1, &ctx_d)
            .unwrap();
        assert_eq!(d12, d21, "total derivatives must commute");
    }

    // symbolic partials match central finite differences on a 50-expression
    // corpus (default config: 20 points, relative tolerance 1e-6)
    let cfg = OracleConfig::default();
    assert_eq!(cfg.samples, 20);
    assert_eq!(cfg.tol_rel, 1e-6);
    let fd_atoms = vec![
        Atom::Var(VarId::Base(1)),
        Atom::Var(VarId::Base(2)),
        Atom::Var(VarId::Jet(1, mi(2, &[]))),
        Atom::Var(VarId::Jet(1, mi(2, &[1]))),
        Atom::Var(VarId::Momentum(1, mi(2, &[]), 1)),
    ];
    for k in 0..50 {
        let e = random_polynomial(&fd_atoms, 4, 6, &mut rng);
        let Atom::Var(v) = &fd_atoms[k % fd_atoms.len()] else { unreachable!() };
        let r = fd_partial_check(&e, v, &cfg).unwrap();
        assert!(r.pass, "{}: {}", r.name, r.detail);
    }

    // M H = identity exactly for constant Hessians
    for p in [biharmonic_problem(), third_order_problem()] {
        let (_, h) = hessian(&p);
        let m = h.inverse().unwrap().expect("invertible Hessian");
        let prod = m.mul(&h);
        for r in 0..prod.nrows {
            for c in 0..prod.ncols {
                let want = if r == c { Expr::one() } else { Expr::zero() };
                assert_eq!(prod.at(r, c), &want, "M*H != identity at ({r},{c})");
            }
        }
    }

    // the M-contracted flatness family agrees with the direct curvature on
    // the golden theory
    let p = biharmonic_problem();
    let hd = hamiltonian(&p).unwrap();
    let phi = PhiSource::Opaque("phi".into());
    let t = jetcalc::vertical_differential(&biharmonic_ansatz(&phi, &[Expr::zero(), Expr::zero()]));
    let direct = curvature(&hd, &t).unwrap();
    let contracted = jetvar::hamjac::flatness_m_contracted(&hd, &t).unwrap();
    for eq in &contracted.equations {
        let (i, j) = eq.dirs.unwrap();
        assert_eq!(
            eq.lhs,
            direct.components[&(eq.alpha, eq.index.clone(), i, j)],
            "{}",
            eq.label
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "oracle suites took {elapsed:?}, budget 60 s");
    verdict("criterion 6 (oracle suites)", true);
}

/// The full built-in verification harness, as exposed by the CLI.
#[test]
fn builtin_suite_is_green() {
    let report = numcheck::biharmonic_suite(&OracleConfig::default()).unwrap();
    assert!(report.pass(), "{}", report.render());
}

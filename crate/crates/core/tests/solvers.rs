mod common;

use common::*;
use qbd::problems::{
    make_delta_example, make_scalar_problem, random_problem, scalar_minimal_root, DeltaExampleSpec,
};
use qbd::solvers::{
    fixed_point_solve, mmatrix_certificate, newton_shamanskii_solve, newton_solve,
    zmatrix_certificate, MONOTONE_SLACK,
};
use qbd::{DenseMatrix, Error, Method, QbdProblem, SolverOptions};

fn delta(n: usize, d: f64) -> QbdProblem {
    make_delta_example(DeltaExampleSpec::new(n, d).unwrap())
}

const DELTAS: [f64; 3] = [0.5, 0.1, 1e-3];

#[test]
fn table_iteration_counts_n20() {
    for (d, newton, ns) in [(0.5, 5, 3), (0.1, 7, 5), (1e-3, 13, 9)] {
        let p = delta(20, d);
        let (_, rn) = newton_solve(&p, &SolverOptions::newton()).unwrap();
        let (_, rs) = newton_shamanskii_solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(rn.outer_steps, newton, "Newton delta={d}");
        assert_eq!(rs.outer_steps, ns, "Newton-Shamanskii delta={d}");
        assert!(rn.converged && rn.final_nres() <= 1e-13);
        assert!(rs.converged && rs.final_nres() <= 1e-13);
        assert!(rn.monotone_ok && rn.mmatrix_ok && rs.monotone_ok && rs.mmatrix_ok);
    }
}

#[test]
fn table_iteration_counts_n100() {
    let p = delta(100, 1e-3);
    assert_eq!(
        newton_solve(&p, &SolverOptions::newton())
            .unwrap()
            .1
            .outer_steps,
        13
    );
    assert_eq!(
        newton_shamanskii_solve(&p, &SolverOptions::default())
            .unwrap()
            .1
            .outer_steps,
        9
    );
}

#[test]
fn iterate_chains_are_monotone() {
    let mut problems: Vec<QbdProblem> = DELTAS.iter().map(|&d| delta(20, d)).collect();
    problems
        .extend((0..10).map(|seed| random_problem(3 + seed as usize, seed, Some(0.8)).unwrap()));
    for p in problems {
        for method in [Method::Newton, Method::NewtonShamanskii] {
            let opts = SolverOptions::default().recording();
            let (s, report) = method.solve(&p, &opts).unwrap();
            assert_eq!(report.iterates.len(), report.inner_steps + 1);
            let (dec, exc, neg) = chain_violations(&p, &report.iterates, &s);
            assert!(
                dec <= MONOTONE_SLACK && exc <= MONOTONE_SLACK && neg <= MONOTONE_SLACK,
                "{method}: {dec:e} {exc:e} {neg:e}"
            );
        }
    }
}

#[test]
fn fixed_point_chain_is_monotone() {
    let p = delta(20, 0.5);
    let (s, report) = fixed_point_solve(&p, &SolverOptions::default().recording()).unwrap();
    let (dec, exc, neg) = chain_violations(&p, &report.iterates, &s);
    assert!(dec <= MONOTONE_SLACK && exc <= MONOTONE_SLACK && neg <= MONOTONE_SLACK);
}

#[test]
fn residual_history_tracks_every_update() {
    let p = delta(20, 0.1);
    let (_, r) =
        newton_shamanskii_solve(&p, &SolverOptions::default().with_inner_steps(3)).unwrap();
    assert_eq!(r.residual_history.len(), r.inner_steps + 1);
    for (k, &(idx, _)) in r.residual_history.iter().enumerate() {
        assert_eq!(idx, k);
    }
    assert!(r.inner_steps <= 3 * r.outer_steps);
}

#[test]
fn methods_agree_and_find_the_minimal_solution() {
    let mut problems: Vec<QbdProblem> = vec![delta(20, 0.5), delta(10, 0.1)];
    for seed in 0..8u64 {
        problems
            .push(random_problem(2 + seed as usize, seed, Some(0.5 + 0.05 * seed as f64)).unwrap());
        problems.push(random_problem(5, 100 + seed, None).unwrap());
    }
    for p in problems {
        if p.drift_rate().unwrap() > 0.9 {
            continue;
        }
        let (sn, _) = newton_solve(&p, &SolverOptions::newton()).unwrap();
        let (ss, _) = newton_shamanskii_solve(&p, &SolverOptions::default()).unwrap();
        let (sf, _) = fixed_point_solve(&p, &SolverOptions::default()).unwrap();
        assert!(sn.max_abs_diff(&ss).unwrap() <= 1e-9);
        assert!(sn.max_abs_diff(&sf).unwrap() <= 1e-9);
        assert!(unit_row_sum_error(&sn) <= 1e-9);
    }
}

#[test]
fn fixed_point_matches_newton_on_delta_example() {
    let p = delta(20, 0.5);
    let (sn, _) = newton_solve(&p, &SolverOptions::newton()).unwrap();
    let (sf, rf) = fixed_point_solve(&p, &SolverOptions::default()).unwrap();
    assert!(rf.converged);
    assert!(sn.max_abs_diff(&sf).unwrap() <= 1e-10);
}

#[test]
fn single_inner_step_reproduces_newton() {
    for n in [20, 100] {
        for d in DELTAS {
            let p = delta(n, d);
            let opts = SolverOptions::newton().recording();
            let (sn, rn) = newton_solve(&p, &opts).unwrap();
            let (ss, rs) = newton_shamanskii_solve(&p, &opts).unwrap();
            assert_eq!(sn, ss);
            assert_eq!(rn, rs);
        }
    }
}

#[test]
fn scalar_closed_form() {
    for (a, c) in [(0.2, 0.5), (0.5, 0.2), (0.1, 0.6), (0.45, 0.05)] {
        let p = make_scalar_problem(a, c).unwrap();
        let expected = scalar_minimal_root(a, c);
        for method in [Method::Newton, Method::NewtonShamanskii, Method::FixedPoint] {
            let (s, _) = method.solve(&p, &SolverOptions::default()).unwrap();
            assert!(
                (s[(0, 0)] - expected).abs() <= 1e-12,
                "{method} a={a} c={c}: {}",
                s[(0, 0)]
            );
        }
    }
}

#[test]
fn linear_problem_takes_one_newton_step() {
    let p = make_scalar_problem(0.0, 1.0).unwrap();
    let (s, r) = newton_solve(&p, &SolverOptions::newton()).unwrap();
    assert_eq!(r.outer_steps, 1);
    assert!((s[(0, 0)] - 1.0).abs() <= 1e-15);
}

#[test]
fn zero_c_is_solved_immediately() {
    let p = make_scalar_problem(0.5, 0.0).unwrap();
    for method in [Method::Newton, Method::NewtonShamanskii, Method::FixedPoint] {
        let (s, r) = method.solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s[(0, 0)], 0.0);
        assert_eq!(r.outer_steps, 0);
    }
}

#[test]
fn certificates_at_start_and_solution() {
    for (n, deltas) in [(5, &DELTAS[..]), (20, &DELTAS[..]), (40, &DELTAS[..1])] {
        for &d in deltas {
            let p = delta(n, d);
            let zero = DenseMatrix::zeros(n, n);
            assert!(mmatrix_certificate(&p, &zero).unwrap().is_certified());
            let opts = SolverOptions {
                check_mmatrix: false,
                ..SolverOptions::newton()
            };
            let (s, _) = newton_solve(&p, &opts).unwrap();
            assert!(
                mmatrix_certificate(&p, &s).unwrap().is_certified(),
                "n={n} delta={d}"
            );
        }
    }
    let k = DenseMatrix::from_rows(&[[1.0, -2.0], [-2.0, 1.0]]).unwrap();
    assert!(!zmatrix_certificate(&k).unwrap().is_certified());
}

#[test]
fn certificate_rejects_too_large_kronecker_form() {
    let p = delta(41, 0.5);
    let err = mmatrix_certificate(&p, &DenseMatrix::zeros(41, 41)).unwrap_err();
    assert!(matches!(err, Error::OracleCapExceeded { n: 41, .. }));
}

#[test]
fn bad_start_is_rejected() {
    let p = delta(5, 0.5);
    // Far above S the step operator loses the M-matrix property.
    let opts = SolverOptions {
        x0: Some(DenseMatrix::filled(5, 5, 3.0)),
        ..SolverOptions::newton()
    };
    assert!(matches!(
        newton_solve(&p, &opts),
        Err(Error::CertificateFailed)
    ));
}

#[test]
fn iteration_budget_is_reported() {
    let p = delta(20, 1e-3);
    let opts = SolverOptions {
        max_outer: 3,
        ..SolverOptions::newton()
    };
    assert!(matches!(
        newton_solve(&p, &opts),
        Err(Error::MaxIterations { iterations: 3, .. })
    ));
}

#[test]
fn invalid_options_are_rejected() {
    let p = delta(5, 0.5);
    assert!(matches!(
        newton_shamanskii_solve(&p, &SolverOptions::default().with_inner_steps(0)),
        Err(Error::InvalidOptions(_))
    ));
    assert!(matches!(
        newton_solve(&p, &SolverOptions::newton().with_tol(0.0)),
        Err(Error::InvalidOptions(_))
    ));
}

//! End-to-end use of the library: files in, norms and certificates out.

use ncmax_core::domsolve::{brute_force_oracle, solve_dominant};
use ncmax_core::harness::{maximal_dominant, run_suite, Suite};
use ncmax_core::io::{read_grid, read_sequence, write_grid, write_sequence};
use ncmax_core::opcore::schatten_norm;
use ncmax_core::random::random_positive_sequence;
use ncmax_core::vvnorms::{
    dominant_from_factorization, dual_witness_linf, factorization_value, factorize_from_dominant, l1_pos_norm,
    linf_pos_norm, pairing,
};
use ncmax_core::{Exponent, GeneralOperator, GridFunction, HermitianOperator, OperatorSequence, SolverConfig, SuiteConfig};

fn projections_45() -> OperatorSequence {
    let p1 = HermitianOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
    let p2 = HermitianOperator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
    OperatorSequence::positive(vec![p1, p2]).unwrap()
}

#[test]
fn sequence_file_to_certified_norm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    write_sequence(&path, &projections_45()).unwrap();
    let seq = read_sequence(&path).unwrap();
    assert_eq!(seq, projections_45());

    let two = Exponent::Finite(2.0);
    let res = linf_pos_norm(&seq, two, &SolverConfig::default()).unwrap();
    assert!(res.converged);
    assert!(res.lower_bound <= res.value && res.value - res.lower_bound <= 1e-6 * (1.0 + res.value));
    let oracle = brute_force_oracle(&seq, two, 1e-4).unwrap();
    assert!((res.value - oracle).abs() <= 1e-3 * oracle);

    let inf = linf_pos_norm(&seq, Exponent::Infinity, &SolverConfig::default()).unwrap();
    assert!((inf.value - 1.0).abs() < 1e-12);
}

#[test]
fn dominant_factorization_round_trip() {
    let cfg = SolverConfig::default();
    for seed in 0..5 {
        let seq = random_positive_sequence(seed, 3, 4, 1.0 / 3.0);
        for p in [1.0, 2.0, 3.0] {
            let p = Exponent::Finite(p);
            let sol = solve_dominant(&seq, p, &cfg).unwrap();
            let fac = factorize_from_dominant(&seq, &sol.dominant).unwrap();
            assert!(fac.reconstruction_error(&seq) <= 1e-8);
            let v = factorization_value(&fac, p);
            assert!((v - sol.primal_value).abs() <= 1e-6 * sol.primal_value);
            // the constructed dominant is feasible and within the factor 4
            let d = dominant_from_factorization(&fac).unwrap();
            for x in seq.items() {
                assert!(d.sub(x).unwrap().min_eigenvalue().unwrap() >= -1e-9);
            }
            // the middles reach norm one only up to the solver tolerance
            assert!(schatten_norm(&d, p) <= 4.0 * v * (1.0 + 1e-6));
        }
    }
}

#[test]
fn witness_attains_l1_norm() {
    let y = random_positive_sequence(4, 2, 3, 1.0);
    for p in [1.5, 2.0, 4.0] {
        let p = Exponent::Finite(p);
        let x = dual_witness_linf(&y, p).unwrap();
        let norm = schatten_norm(&x.items()[0], p.conjugate());
        let attained = pairing(&x, &y).unwrap() / norm;
        let l1 = l1_pos_norm(&y, p).unwrap();
        assert!((attained - l1).abs() <= 1e-9 * l1);
    }
}

#[test]
fn grid_file_to_maximal_function() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let values: Vec<GeneralOperator> = (0..32)
        .map(|j| GeneralOperator::from_real_rows(&[&[(j % 5) as f64, 1.0], &[0.0, -((j % 3) as f64)]]).unwrap())
        .collect();
    write_grid(&path, &GridFunction::new(values).unwrap()).unwrap();
    let f = read_grid(&path).unwrap();
    let r = maximal_dominant(&f, Exponent::Finite(2.0), 3, &SolverConfig::default()).unwrap();
    assert!(r.summary.all_converged);
    assert!(r.summary.feasibility_min_eig >= -1e-6);
    assert!(r.summary.ratio > 0.0 && r.summary.ratio <= r.summary.bound);
    assert_eq!(r.averages.len(), 4);
}

#[test]
fn suites_through_the_public_api() {
    let cfg = SuiteConfig { trials: 3, probes: 10, perturbations: 5, grid_size: 32, ..Default::default() };
    for suite in [Suite::Lemma21, Suite::CauchySchwarz, Suite::Theorem] {
        for r in run_suite(suite, &cfg).unwrap() {
            assert!(r.pass, "{}: {:?}", r.suite, r.violations);
        }
    }
}

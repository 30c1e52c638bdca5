mod common;

use altproj::iteration::{kakutani_gaps, reference_limit, run, sakai_constant, RunConfig, StopReason};
use altproj::linalg::{orthonormalize, DEFAULT_TOL};
use altproj::random::rng;
use altproj::schedule::Schedule;
use altproj::{Subspace, Vector};
use common::*;
use proptest::prelude::*;
use rand::Rng as _;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

fn coords(n: usize, idx: &[usize]) -> Subspace {
    orthonormalize(&idx.iter().map(|&i| unit(n, i)).collect::<Vec<_>>(), n, DEFAULT_TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_fall_and_increments_obey_pythagoras(seed in any::<u64>(), n in 2usize..=8, j in 1usize..=4) {
        let spaces = random_family(seed, n, j, 0..=n);
        let mut r = rng(seed ^ 1);
        let seq: Vec<usize> = (0..200).map(|_| r.random_range(1..=j)).collect();
        let s = Schedule::explicit(seq, j).unwrap();
        let x0 = random_vector(seed ^ 2, n);
        let cfg = RunConfig { max_steps: 200, stop_tol: 1e-300, ..RunConfig::default() };
        let t = run(&spaces, &s, &x0, &cfg).unwrap();
        for k in 0..t.steps() {
            let (a, b) = (t.iterate_norms[k], t.iterate_norms[k + 1]);
            prop_assert!(b <= a + 1e-12);
            let drop = a * a - b * b;
            prop_assert!((drop - t.increments[k].powi(2)).abs() <= 1e-9 * a.max(1.0).powi(2));
        }
    }

    #[test]
    fn random_schedules_settle_in_finite_dimension(seed in any::<u64>(), n in 2usize..=12, j in 2usize..=4) {
        let spaces = random_family(seed, n, j, 1..=n);
        let mut r = rng(seed ^ 3);
        let seq: Vec<usize> = (0..100_000).map(|_| r.random_range(1..=j)).collect();
        let s = Schedule::explicit(seq, j).unwrap();
        let cfg = RunConfig { max_steps: 100_000, stop_tol: 1e-8, window_len: 1, store_iterates: false, track_residual: false };
        let t = run(&spaces, &s, &random_vector(seed ^ 4, n), &cfg).unwrap();
        prop_assert!(t.increments.iter().any(|&i| i < 1e-8));
    }

    #[test]
    fn reference_limit_lies_in_every_space(seed in any::<u64>(), n in 2usize..=8) {
        let spaces = random_family(seed, n, 3, 1..=n);
        let x0 = random_vector(seed ^ 5, n);
        let l = reference_limit(&spaces, &x0).unwrap();
        let oracle = oracle_intersection_projector(&spaces) * &x0;
        prop_assert!((&l - oracle).norm() < 1e-8);
        for s in &spaces {
            prop_assert!(s.distance(&l).unwrap() < 1e-8);
        }
    }
}

#[test]
fn figure_lines_kakutani_gaps_halve() {
    let spaces = vec![
        orthonormalize(&[v(&[1.0, 1.0])], 2, DEFAULT_TOL).unwrap(),
        orthonormalize(&[v(&[1.0, 0.0])], 2, DEFAULT_TOL).unwrap(),
    ];
    let g = kakutani_gaps(&spaces, &v(&[1.0, 0.0]), 3).unwrap();
    assert_eq!(g.len(), 4);
    for w in g[1..].windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
    }
    let g = kakutani_gaps(&spaces, &Vector::zeros(2), 3).unwrap();
    assert!(g.iter().all(|&x| x == 0.0));
    let one = kakutani_gaps(&spaces[..1], &v(&[3.0, 1.0]), 3).unwrap();
    assert!(one[1..].iter().all(|&x| x < 1e-15));
}

#[test]
fn decreasing_chain_has_constant_one() {
    let spaces = vec![coords(4, &[0, 1, 2]), coords(4, &[0, 1]), coords(4, &[0])];
    let s = Schedule::periodic(vec![1, 2, 3], 3).unwrap();
    let cfg = RunConfig {
        store_iterates: true,
        ..RunConfig::default()
    };
    let t = run(&spaces, &s, &v(&[1.0, 2.0, 3.0, 4.0]), &cfg).unwrap();
    let a = sakai_constant(&t).unwrap();
    assert!(a <= 1.0 + 1e-9, "{a}");
}

#[test]
fn ruler_run_respects_sakai_bound() {
    let spaces = random_family(11, 6, 3, 3..=5);
    let s = Schedule::ruler(3).unwrap();
    let cfg = RunConfig {
        store_iterates: true,
        ..RunConfig::default()
    };
    let t = run(&spaces, &s, &random_vector(12, 6), &cfg).unwrap();
    let i = s.quasiperiod_bound().unwrap();
    let a = sakai_constant(&t).unwrap();
    assert!(a <= (i - 1.0) * (i - 2.0) + 3.0, "{a}");
}

#[test]
fn single_space_trace_has_zero_constant() {
    let spaces = vec![coords(3, &[0, 1])];
    let s = Schedule::periodic(vec![1], 1).unwrap();
    let cfg = RunConfig {
        store_iterates: true,
        ..RunConfig::default()
    };
    let t = run(&spaces, &s, &v(&[1.0, 1.0, 1.0]), &cfg).unwrap();
    assert_eq!(t.stop, StopReason::Converged);
    assert_eq!(sakai_constant(&t).unwrap(), 0.0);
}

#[test]
fn bad_configurations_are_rejected() {
    let spaces = vec![coords(2, &[0])];
    let s = Schedule::periodic(vec![1], 1).unwrap();
    let x0 = v(&[1.0, 1.0]);
    for cfg in [
        RunConfig { max_steps: 0, ..RunConfig::default() },
        RunConfig { window_len: 0, ..RunConfig::default() },
        RunConfig { stop_tol: 0.0, ..RunConfig::default() },
    ] {
        assert!(run(&spaces, &s, &x0, &cfg).is_err());
    }
    assert!(run(&[], &s, &x0, &RunConfig::default()).is_err());
    assert!(run(&spaces, &s, &v(&[f64::INFINITY, 0.0]), &RunConfig::default()).is_err());
}

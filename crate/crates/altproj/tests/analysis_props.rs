mod common;

use altproj::analysis::{friedrichs_cosine, rate_curve};
use altproj::linalg::{orthonormalize, DEFAULT_TOL};
use altproj::{Matrix, Subspace, Vector};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cosine_below_one_and_symmetric(seed in any::<u64>(), n in 2usize..=9) {
        let s = random_family(seed, n, 2, 0..=n);
        let a = friedrichs_cosine(&s[0], &s[1]).unwrap();
        let b = friedrichs_cosine(&s[1], &s[0]).unwrap();
        prop_assert!((0.0..1.0).contains(&a));
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rate_identity_against_dense_powers(seed in any::<u64>(), n in 2usize..=8) {
        let s = random_family(seed, n, 2, 1..=n);
        let curve = rate_curve(&s[0], &s[1], 6).unwrap();
        let t = oracle_projector(s[1].basis()) * oracle_projector(s[0].basis());
        let pm = oracle_intersection_projector(&s);
        let mut power = Matrix::identity(n, n);
        for k in 1..=6 {
            power = &t * power;
            let measured = spectral_norm(&(&power - &pm));
            prop_assert!((measured - curve.c.powi(2 * k - 1)).abs() < 1e-8);
            prop_assert!((measured - curve.measured[k as usize - 1]).abs() < 1e-10);
        }
        prop_assert!(curve.flagged.is_empty());
    }

    #[test]
    fn identical_and_orthogonal_spaces_give_zero(seed in any::<u64>(), n in 2usize..=8) {
        let s = random_family(seed, n, 1, 1..=n - 1).remove(0);
        prop_assert!(friedrichs_cosine(&s, &s).unwrap() < 1e-10);
        prop_assert!(friedrichs_cosine(&s, &s.complement()).unwrap() < 1e-10);
    }
}

#[test]
fn figure_lines_cosine() {
    let a = Subspace::line(&Vector::from_column_slice(&[1.0, 1.0])).unwrap();
    let b = Subspace::line(&Vector::from_column_slice(&[1.0, 0.0])).unwrap();
    let c = friedrichs_cosine(&a, &b).unwrap();
    assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    let curve = rate_curve(&a, &b, 8).unwrap();
    assert!(curve.flagged.is_empty());
    assert_eq!(curve.predicted.len(), 8);
}

#[test]
fn shared_direction_is_factored_out() {
    let e = |i: usize| {
        let mut v = Vector::zeros(3);
        v[i] = 1.0;
        v
    };
    let a = orthonormalize(&[e(0), e(1)], 3, DEFAULT_TOL).unwrap();
    let b = orthonormalize(&[e(0), e(1) + e(2)], 3, DEFAULT_TOL).unwrap();
    let c = friedrichs_cosine(&a, &b).unwrap();
    assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    let brute = brute_force_line_plane(&e(1), &(e(1) + e(2)), &e(0));
    assert!((brute - c).abs() < 1e-4);
    let top = oracle_cosines(&a, &b).into_iter().fold(0.0, f64::max);
    assert!((top - 1.0).abs() < 1e-12);
}

#[test]
fn trivial_space_gives_zero() {
    let z = Subspace::zero(4);
    let f = Subspace::full(4);
    assert_eq!(friedrichs_cosine(&z, &f).unwrap(), 0.0);
    assert!(rate_curve(&z, &Subspace::full(3), 2).is_err());
}

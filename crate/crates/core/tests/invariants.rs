use preserver::canonical::verify_preserver_sampled;
use preserver::classify::{
    check_partial_isometry_preserver, check_triple_homomorphism, check_zero_triple_preserver,
};
use preserver::genfuzz::{
    canonical_with_q, random_canonical, random_gaussian, random_partial_isometry, random_unitary,
    Seed,
};
use preserver::linmap::max_image_difference;
use preserver::matcore::{is_partial_isometry, singular_values};
use preserver::{build, decompose, Field, LinMap, Mat, Tolerances, Verdict};
use proptest::prelude::*;

fn field(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Φ(A) has the singular values of A times each Q entry.
    #[test]
    fn singular_values_scale_by_q(seed in any::<u64>(), m in 2usize..4, n in 2usize..4,
                                  q1 in 0usize..3, q2 in 0usize..2, complex in any::<bool>()) {
        let f = field(complex);
        let mut rng = Seed::new(seed).rng(0);
        let (r, s) = ((q1 * m + q2 * n).max(1), (q1 * n + q2 * m).max(1));
        let c = random_canonical(m, n, r, s, f, q1, q2, &mut rng).unwrap();
        let a = random_gaussian(m, n, f, &mut rng);
        let image = build(&c).apply(&a).unwrap();
        let sa = singular_values(&a);
        let mut expect: Vec<f64> = c.q_multiset().iter().flat_map(|q| sa.iter().map(move |x| x * q)).collect();
        expect.sort_by(|x, y| y.total_cmp(x));
        let got: Vec<f64> = singular_values(&image).into_iter().take(expect.len()).collect();
        prop_assert!(close(&got, &expect, 1e-9 * expect.first().copied().unwrap_or(1.0).max(1.0)));
    }

    // Left and right unitary changes of the codomain keep Q and the preserver property.
    #[test]
    fn decompose_is_unitarily_invariant(seed in any::<u64>(), m in 2usize..4, n in 2usize..4,
                                        q1 in 0usize..2, q2 in 0usize..2, complex in any::<bool>()) {
        let f = field(complex);
        let mut rng = Seed::new(seed).rng(0);
        let (r, s) = ((q1 * m + q2 * n).max(1) + 1, (q1 * n + q2 * m).max(1));
        let c = random_canonical(m, n, r, s, f, q1, q2, &mut rng).unwrap();
        let w1 = random_unitary(r, f, &mut rng);
        let w2 = random_unitary(s, f, &mut rng);
        let phi = build(&c).conjugate(&w1, &w2).unwrap();
        let tol = Tolerances::default();
        let d = decompose(&phi, &tol).unwrap();
        prop_assert!(close(d.q1(), c.q1(), 1e-9));
        prop_assert!(close(d.q2(), c.q2(), 1e-9));
        prop_assert!(max_image_difference(&build(&d), &phi).unwrap() <= 1e-8);
    }

    // Triple homomorphisms send partial isometries to partial isometries.
    #[test]
    fn triple_homomorphisms_keep_partial_isometries(seed in any::<u64>(), q1 in 0usize..3, q2 in 0usize..2,
                                                    rank in 0usize..3, complex in any::<bool>()) {
        let f = field(complex);
        let (m, n) = (2, 3);
        let mut rng = Seed::new(seed).rng(0);
        let (r, s) = ((q1 * m + q2 * n).max(1), (q1 * n + q2 * m).max(1));
        let c = canonical_with_q(m, n, r, s, f, vec![1.0; q1], vec![1.0; q2], &mut rng).unwrap();
        let phi = build(&c);
        let a = random_partial_isometry(m, n, rank, f, &mut rng).unwrap();
        let tol = Tolerances::default();
        prop_assert!(is_partial_isometry(&phi.apply(&a).unwrap(), &tol));
    }
}

#[test]
fn canonical_maps_pass_every_structural_check() {
    let tol = Tolerances::default().with_trials(50).unwrap();
    let mut rng = Seed::new(3).rng(0);
    for i in 0..20 {
        let f = field(i % 2 == 1);
        let c = random_canonical(3, 2, 8, 8, f, 1, 1, &mut rng).unwrap();
        let phi = build(&c);
        assert_eq!(
            check_zero_triple_preserver(&phi, &tol, i).unwrap().verdict,
            Verdict::Yes
        );
        let th = check_triple_homomorphism(&phi, &tol, i).unwrap().verdict;
        let pi = check_partial_isometry_preserver(&phi, &tol, i)
            .unwrap()
            .verdict;
        assert_eq!(th, pi);
        assert_eq!(verify_preserver_sampled(&phi, 200, i, &tol), (true, None));
    }
}

#[test]
fn trace_is_rejected_with_a_witness() {
    let trace = LinMap::from_fn(2, 2, 1, 1, Field::Real, |e| {
        Mat::real(1, 1, &[(e.get(0, 0) + e.get(1, 1)).re])
    })
    .unwrap();
    let tol = Tolerances::default();
    let v = check_zero_triple_preserver(&trace, &tol, 0).unwrap();
    assert_eq!(v.verdict, Verdict::No);
    assert!(v.witness.is_some());
}

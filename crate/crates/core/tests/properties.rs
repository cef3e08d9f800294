use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_lift::clifford::build_clifford;
use spectral_lift::dirac_lift::check_compression_bound;
use spectral_lift::free_systems::AlgebraElement;
use spectral_lift::linalg::random;
use spectral_lift::models::crossed_product::{diagonal_base, Automorphism, CrossedProduct, CrossedProductSpec, ShiftGroup};
use spectral_lift::models::quantum_torus::{QuantumTorus, QuantumTorusSpec};

/// ℂ⁴ ⋊ ℤ₄: products never leave the window, so the algebra laws hold exactly.
fn cyclic() -> CrossedProduct {
    CrossedProduct::new(CrossedProductSpec {
        base: diagonal_base(4),
        automorphism: Automorphism::Permutation(vec![2, 0, 3, 1]),
        group: ShiftGroup::Cyclic { order: 4 },
    })
    .unwrap()
}

fn elements(cp: &CrossedProduct, seed: u64, n: usize) -> Vec<AlgebraElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| AlgebraElement::random(&cp.factor, &cp.spec.base, &mut rng, 3).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clifford_relations_are_exact(n in 1usize..=8, graded in any::<bool>()) {
        let c = build_clifford(n, graded);
        prop_assert_eq!(c.relation_deviation(), 0.0);
        prop_assert_eq!(c.skew_deviation(), 0.0);
        if graded {
            prop_assert_eq!(c.grading_deviation(), Some(0.0));
        }
    }

    #[test]
    fn compression_identity_and_weyl_bound(seed in any::<u64>(), n in 2usize..=16, frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = 1 + ((n - 1) as f64 * frac) as usize;
        let d = random::hermitian(&mut rng, n);
        let p = random::projection(&mut rng, n, rank.min(n));
        let r = check_compression_bound(&d, &p).unwrap();
        prop_assert!(r.identity_residual < 1e-12, "{}", r.identity_residual);
        prop_assert_eq!(r.violations, 0);
        prop_assert!(r.max_shift <= r.bound + 1e-12);
    }

    #[test]
    fn multiplication_is_associative(seed in any::<u64>()) {
        let cp = cyclic();
        let e = elements(&cp, seed, 3);
        let fs = &cp.factor;
        let left = e[0].multiply(&e[1], fs).unwrap().multiply(&e[2], fs).unwrap();
        let right = e[0].multiply(&e[1].multiply(&e[2], fs).unwrap(), fs).unwrap();
        prop_assert!(left.distance(&right, fs).unwrap() < 1e-10);
    }

    #[test]
    fn representation_is_multiplicative(seed in any::<u64>()) {
        let cp = cyclic();
        let e = elements(&cp, seed, 2);
        let product = cp.rep.represent(&e[0].multiply(&e[1], &cp.factor).unwrap()).unwrap();
        let composed = cp.rep.represent(&e[0]).unwrap().mul(&cp.rep.represent(&e[1]).unwrap());
        prop_assert!(product.sub(&composed).max_abs() < 1e-10);
    }

    #[test]
    fn involution_is_an_involution_and_represents_the_adjoint(seed in any::<u64>()) {
        let cp = cyclic();
        let a = &elements(&cp, seed, 1)[0];
        let star = cp.rep.involution(a).unwrap();
        prop_assert!(cp.rep.involution(&star).unwrap().distance(a, &cp.factor).unwrap() < 1e-12);
        let lhs = cp.rep.represent(&star).unwrap();
        let rhs = cp.rep.represent(a).unwrap().adjoint();
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn cocycles_are_covariant(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let qt = QuantumTorus::new(QuantumTorusSpec::mixed(0.175, 1)).unwrap();
        let pairs = qt.factor.window_pairs();
        let (s, t) = &pairs[pick.index(pairs.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = qt.base.random_element(&mut rng, 4);
        prop_assert!(qt.factor.covariance_deviation(s, t, &b).unwrap() < 1e-10);
    }
}

//! Cross-module invariants over random small parameters.

use frobenius::filtration::{canonical_filtration, graded_map, nabla_power_direct, nabla_power_matrix};
use frobenius::local_algebra::filtration_closed_form;
use frobenius::slope::{enumerate_profiles, gap_lower_bound, weighted_sum, CurveContext};
use frobenius::tensor_rep::{dim_bounded_compositions, rep_subspace_basis, v_vector_closed};
use frobenius::{Caps, PrimeChar};
use proptest::prelude::*;

fn small_point() -> impl Strategy<Value = (u64, usize, usize)> {
    prop_oneof![
        (Just(2u64), 1usize..=3, 1usize..=3),
        (Just(3u64), 1usize..=2, 1usize..=2),
        (Just(5u64), 1usize..=2, 1usize..=2),
        (Just(7u64), Just(1usize), 1usize..=2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn levels_are_monomial_spans((pp, n, r) in small_point()) {
        let p = PrimeChar::new(pp).unwrap();
        let filt = canonical_filtration(p, n, r, &Caps::default()).unwrap();
        for i in 0..=filt.max_degree() + 1 {
            prop_assert_eq!(filt.level(i), filtration_closed_form(p, n, i).unwrap().direct_sum_power(r));
        }
    }

    #[test]
    fn graded_pieces_count_bounded_compositions((pp, n, r) in small_point()) {
        let p = PrimeChar::new(pp).unwrap();
        let filt = canonical_filtration(p, n, r, &Caps::default()).unwrap();
        let graded = filt.graded_dims();
        for (i, d) in graded.iter().enumerate() {
            prop_assert_eq!(*d as u128, r as u128 * dim_bounded_compositions(p, n, i).unwrap());
        }
        prop_assert_eq!(graded.iter().sum::<usize>(), r * (pp as usize).pow(n as u32));
        for i in 1..=filt.max_degree() {
            prop_assert!(graded_map(&filt, i).unwrap().injective);
        }
    }

    #[test]
    fn nabla_power_routes_agree((pp, n, r) in small_point(), pick in 0usize..64) {
        let p = PrimeChar::new(pp).unwrap();
        let filt = canonical_filtration(p, n, r, &Caps::default()).unwrap();
        let l = pick % (filt.max_degree() + 1);
        let m = nabla_power_matrix(&filt, l).unwrap();
        prop_assert_eq!(&m, &nabla_power_direct(&filt, l).unwrap());
        prop_assert_eq!(m.rank(), filt.graded_dims()[l]);
        if r == 1 {
            prop_assert_eq!(m.image(), rep_subspace_basis(p, n, l, &Caps::default()).unwrap());
        }
    }

    #[test]
    fn v_vectors_vanish_iff_large_entry(pi in 0usize..3, k in proptest::collection::vec(0u32..5, 1..4)) {
        let pp = [2u64, 3, 5][pi];
        prop_assume!(k.iter().sum::<u32>() <= 8);
        let p = PrimeChar::new(pp).unwrap();
        let v = v_vector_closed(p, &k, &Caps::default()).unwrap();
        prop_assert_eq!(v.is_zero(), k.iter().any(|&x| x as u64 >= pp));
    }

    #[test]
    fn gap_bound_nonnegative_and_strict_below_rank(g in 2u64..6, pi in 0usize..4, rank_w in 1u64..=4, pick in 0usize..1000) {
        let pp = [2u64, 3, 5, 7][pi];
        let p = PrimeChar::new(pp).unwrap();
        let ctx = CurveContext::new(g, p, rank_w, 0).unwrap();
        let profiles: Vec<_> = (1..=pp * rank_w).flat_map(|t| enumerate_profiles(t, p, rank_w)).collect();
        let profile = &profiles[pick % profiles.len()];
        let c = gap_lower_bound(&ctx, profile).unwrap();
        prop_assert!(!c.gap_lower_bound.is_negative());
        prop_assert_eq!(&c.weighted_sum, &weighted_sum(profile, p).unwrap());
        prop_assert!(c.certifies_positive() || (c.forces_pushforward && profile.total() == pp * rank_w));
    }
}

use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use apportion_core::apportion::induce_apportionment;
use apportion_core::audit::{check_selection_monotonicity, construct_shift, full_support_of};
use apportion_core::quota::{compute_quotas, VoteProfile};
use apportion_core::residue::ResidueProfile;
use apportion_core::rules::{Order, Rule};
use apportion_core::scalar::{rational_to_f64, Scalar};
use apportion_core::scenarios::gen;
use apportion_core::subset::{k_subsets, Subset};

const DEN: i64 = 840;

/// Numerators on the 1/840 grid in `[0, 840)` with an integral sum.
fn profile_strategy(max_n: usize) -> impl Strategy<Value = ResidueProfile> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), 1..n, any::<u64>()))
        .prop_map(|(n, k, seed)| {
            let mut rng = apportion_core::rules::seeded_rng(seed);
            gen::profile(&gen::random_numerators(&mut rng, n, k, DEN), DEN)
        })
}

fn exact_rules() -> Vec<Rule> {
    vec![
        Rule::Systematic(Order::Numeric),
        Rule::Systematic(Order::Random),
        Rule::Pipage(Order::Numeric),
        Rule::Sampford,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_rules_normalize_and_hit_marginals(p in profile_strategy(6)) {
        for rule in exact_rules() {
            let d = rule.distribution(&p).unwrap();
            prop_assert_eq!(d.total(), Scalar::one());
            for (s, m) in &d.masses {
                prop_assert_eq!(s.len(), p.k());
                prop_assert!(!m.is_negative());
            }
            for (i, m) in d.marginals().into_iter().enumerate() {
                prop_assert_eq!(m.to_exact(), p.get(i).clone(), "{} party {}", rule, i + 1);
            }
        }
    }

    #[test]
    fn cp_marginals_within_residual(p in profile_strategy(6)) {
        let rule = Rule::conditional_poisson();
        let d = rule.distribution(&p).unwrap();
        for (i, m) in d.marginals().into_iter().enumerate() {
            prop_assert!((m.to_f64() - rational_to_f64(p.get(i))).abs() < 1e-9);
        }
    }

    #[test]
    fn subset_display_roundtrip(bits in any::<u64>()) {
        let s = Subset::from_bits(bits);
        let back: Subset = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn scalar_display_roundtrip(num in -10_000i64..10_000, den in 1i64..10_000) {
        let s = Scalar::ratio(num, den);
        let back: Scalar = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn quotas_sum_to_house(votes in prop::collection::vec(0i64..100_000, 2..8), h in 1u64..200) {
        prop_assume!(votes.iter().any(|&v| v > 0));
        let q = compute_quotas(&VoteProfile::from_integers(&votes, h).unwrap());
        let total: BigRational = q.quotas.iter().sum();
        prop_assert_eq!(total, BigRational::from_integer(h.into()));
        prop_assert_eq!(q.house_size(), h);
        for (quota, &lower) in q.quotas.iter().zip(&q.lower_quotas) {
            prop_assert_eq!(quota.floor(), BigRational::from_integer(lower.into()));
        }
    }

    #[test]
    fn seat_vectors_stay_within_quota(votes in prop::collection::vec(1i64..10_000, 2..7), h in 1u64..40) {
        let dist = induce_apportionment(&Rule::Sampford, &VoteProfile::from_integers(&votes, h).unwrap()).unwrap();
        for (seats, _) in dist.masses() {
            prop_assert_eq!(seats.iter().sum::<u64>(), h);
            for (s, q) in seats.iter().zip(&dist.quota.quotas) {
                let s = BigRational::from_integer((*s).into());
                prop_assert!(s >= q.floor() && s <= q.ceil());
            }
        }
    }

    #[test]
    fn shift_exists_under_preconditions(
        a in -50i64..=0, b in 0i64..50, c in -50i64..=0, e in -50i64..=0,
    ) {
        let r = |x: i64| BigRational::from_integer(x.into());
        let d = -(a + b + c + e);
        prop_assume!(d >= 0);
        let w = construct_shift(r(a), r(b), r(c), r(d), r(e));
        match w {
            Ok(w) => prop_assert!(w.verify()),
            Err(_) => prop_assert!(false, "no shift for {a},{b},{c},{d},{e}"),
        }
    }

    #[test]
    fn sampford_has_full_support(p in profile_strategy(7)) {
        prop_assert!(full_support_of(&Rule::Sampford, &p).unwrap().is_satisfied());
        let d = Rule::Sampford.distribution(&p).unwrap();
        let positive = p.positive();
        let ones = Subset::from_indices((0..p.n()).filter(|&i| p.get(i).is_one()));
        for s in k_subsets(p.n(), p.k()) {
            let feasible = s.is_subset_of(positive) && ones.is_subset_of(s);
            prop_assert_eq!(d.prob(s).is_zero(), !feasible);
        }
    }

    #[test]
    fn sampford_selection_monotone(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = apportion_core::rules::seeded_rng(seed);
        let k = 1 + (seed as usize) % (n - 1);
        let (p, q, t) = gen::selection_pair(&mut rng, n, k);
        let v = check_selection_monotonicity(&Rule::Sampford, &p, &q, t).unwrap();
        prop_assert!(!v.is_violated(), "{:?}", v.evidence);
    }

    #[test]
    fn coalition_tails_non_increasing(votes in prop::collection::vec(1i64..5_000, 3..7), h in 2u64..30, mask in 1u64..64) {
        let votes = VoteProfile::from_integers(&votes, h).unwrap();
        let dist = induce_apportionment(&Rule::Pipage(Order::Numeric), &votes).unwrap();
        let coalition = Subset::from_bits(mask).intersection(Subset::full(votes.n()));
        let tails = dist.coalition_tails(coalition);
        prop_assert_eq!(tails[0].clone(), Scalar::one());
        prop_assert!(tails.last().unwrap().is_zero());
        for w in tails.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }
}

use std::cmp::Ordering;

use multreward::exactnum::{csri_compare, ratio};
use multreward::{weighted_log_sign, Rational, Sign, SuccinctProduct};
use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use proptest::prelude::*;

fn product() -> impl Strategy<Value = Vec<(u64, i64)>> {
    prop::collection::vec((1u64..=50, -40i64..=40), 1..=6)
}

/// Numerator and denominator of the product, evaluated directly.
fn evaluate(pairs: &[(u64, i64)]) -> (BigUint, BigUint) {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for &(b, e) in pairs {
        let p = Pow::pow(&BigUint::from(b), e.unsigned_abs());
        if e > 0 {
            num *= p;
        } else {
            den *= p;
        }
    }
    (num, den)
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-20i64..=-1, 1i64..=20], 1i64..=20).prop_map(|(n, d)| ratio(n, d))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=30, 1i64..=30).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #[test]
    fn csri_matches_big_integers(a in product(), b in product()) {
        let (an, ad) = evaluate(&a);
        let (bn, bd) = evaluate(&b);
        let truth = (an * &bd).cmp(&(bn * &ad));
        let got = csri_compare(&SuccinctProduct::from_pairs(a), &SuccinctProduct::from_pairs(b)).unwrap();
        prop_assert_eq!(got, truth);
    }

    #[test]
    fn csri_is_antisymmetric(a in product(), b in product()) {
        let (a, b) = (SuccinctProduct::from_pairs(a), SuccinctProduct::from_pairs(b));
        let ab = csri_compare(&a, &b).unwrap();
        let ba = csri_compare(&b, &a).unwrap();
        prop_assert_eq!(ab, ba.reverse());
        prop_assert_eq!(csri_compare(&a, &a).unwrap(), Ordering::Equal);
    }

    #[test]
    fn weighted_sign_scales(
        terms in prop::collection::vec((nonzero_rational(), positive_rational()), 1..=5),
        k in nonzero_rational(),
    ) {
        let base = weighted_log_sign(&terms).unwrap();
        let scaled: Vec<_> = terms.iter().map(|(w, v)| (w * &k, v.clone())).collect();
        let expect = if k > Rational::zero() { base } else { base.negate() };
        prop_assert_eq!(weighted_log_sign(&scaled).unwrap(), expect);
    }

    #[test]
    fn single_term_is_zero_only_when_trivial(w in -5i64..=5, v in positive_rational()) {
        let sign = weighted_log_sign(&[(Rational::from_integer(w.into()), v.clone())]).unwrap();
        prop_assert_eq!(sign == Sign::Zero, w == 0 || v.is_one());
    }
}

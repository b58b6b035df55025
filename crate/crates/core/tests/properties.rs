use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use rotn_core::circle::{birkhoff, rotate, CirclePoint};
use rotn_core::exactreal::{
    certified_compare, convergent, expand_cf, CertifiedFloat, RotationShadow, Threshold,
};
use rotn_core::words::{self, Sign, SignWord};
use rotn_core::{CFNumber, SurdReal};

#[derive(Clone, Debug)]
enum Recipe {
    Empty,
    Atom(bool),
    Concat(Box<Recipe>, Box<Recipe>),
    Power(Box<Recipe>, u64),
}

fn recipe() -> impl Strategy<Value = Recipe> {
    let leaf = prop_oneof![Just(Recipe::Empty), any::<bool>().prop_map(Recipe::Atom)];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Recipe::Concat(Box::new(a), Box::new(b))),
            (inner, 1u64..5).prop_map(|(a, n)| Recipe::Power(Box::new(a), n)),
        ]
    })
}

fn build(r: &Recipe) -> SignWord {
    match r {
        Recipe::Empty => words::empty(),
        Recipe::Atom(p) => words::atom(if *p { Sign::Plus } else { Sign::Minus }),
        Recipe::Concat(a, b) => words::concat(&build(a), &build(b)),
        Recipe::Power(a, n) => words::power(&build(a), *n).unwrap(),
    }
}

fn spell(r: &Recipe) -> Vec<i64> {
    match r {
        Recipe::Empty => vec![],
        Recipe::Atom(p) => vec![if *p { 1 } else { -1 }],
        Recipe::Concat(a, b) => [spell(a), spell(b)].concat(),
        Recipe::Power(a, n) => spell(a).repeat(*n as usize),
    }
}

fn cf_strategy() -> impl Strategy<Value = CFNumber> {
    (
        prop::collection::vec(1u64..9, 0..3),
        prop::collection::vec(1u64..9, 1..4),
    )
        .prop_map(|(pre, per)| CFNumber::new(pre, per).unwrap())
}

fn surd() -> impl Strategy<Value = SurdReal> {
    (
        -50i64..50,
        -20i64..20,
        1i64..40,
        prop::sample::select(vec![2u64, 3, 5, 10, 13, 21]),
    )
        .prop_map(|(p, q, r, d)| SurdReal::new(p.into(), q.into(), r.into(), d).unwrap())
}

proptest! {
    #[test]
    fn word_stats_match_spelling(r in recipe()) {
        let w = build(&r);
        let letters = spell(&r);
        let prefix: Vec<i64> = letters.iter().scan(0, |s, l| { *s += l; Some(*s) }).collect();
        prop_assert_eq!(w.length(), &BigUint::from(letters.len()));
        prop_assert_eq!(w.total(), &BigInt::from(letters.iter().sum::<i64>()));
        match (prefix.iter().min(), prefix.iter().max()) {
            (Some(&lo), Some(&hi)) => {
                prop_assert_eq!(w.min_prefix().unwrap(), &BigInt::from(lo));
                prop_assert_eq!(w.max_prefix().unwrap(), &BigInt::from(hi));
            }
            _ => prop_assert!(w.max_prefix().is_err()),
        }
        for (k, s) in prefix.iter().enumerate() {
            prop_assert_eq!(w.prefix_sum_at_u64(k as u64 + 1).unwrap(), BigInt::from(*s));
        }
    }

    #[test]
    fn stats_are_associative(a in recipe(), b in recipe(), c in recipe(), n in 1u64..5, m in 1u64..5) {
        let (a, b, c) = (build(&a), build(&b), build(&c));
        let left = words::concat(&words::concat(&a, &b), &c);
        let right = words::concat(&a, &words::concat(&b, &c));
        prop_assert_eq!(left.stats(), right.stats());
        let split = words::concat(&words::power(&a, n).unwrap(), &words::power(&a, m).unwrap());
        let whole = words::power(&a, n + m).unwrap();
        prop_assert_eq!(whole.stats(), split.stats());
    }

    #[test]
    fn certified_compare_is_sound(x in surd(), t in -30i64..30, widen in 0f64..1e-3) {
        let mut c = CertifiedFloat::from_surd(&x);
        c = CertifiedFloat::new(c.approx, c.radius + widen);
        let threshold = Threshold::new(SurdReal::from_ratio(t, 7).unwrap());
        let exact = x.cmp(threshold.exact());
        match certified_compare(c, &threshold, || x.clone()) {
            Ok(v) => prop_assert_eq!(v.ordering, exact),
            Err(_) => prop_assert_eq!(exact, Ordering::Equal),
        }
    }

    #[test]
    fn rotation_shadow_is_sound(alpha in cf_strategy(), k in 0i64..97, n in -5000i64..5000, t in 1i64..97) {
        let x = CirclePoint::from_ratio(k, 97).unwrap();
        let shadow = RotationShadow::new(x.position(), alpha.value());
        let exact = rotate(&x, &alpha, n).into_position();
        let threshold = Threshold::new(SurdReal::from_ratio(t, 97).unwrap());
        if exact != *threshold.exact() {
            let v = certified_compare(shadow.position(n), &threshold, || exact.clone()).unwrap();
            prop_assert_eq!(v.ordering, exact.cmp(threshold.exact()));
        }
    }

    #[test]
    fn cf_round_trips(alpha in cf_strategy()) {
        let printed = alpha.to_string();
        prop_assert_eq!(printed.parse::<CFNumber>().unwrap(), alpha.clone());
        let (pre, per) = expand_cf(alpha.value(), 200).unwrap();
        let again = CFNumber::new(pre, per).unwrap();
        prop_assert_eq!(again.value(), alpha.value());
        let a: Vec<u64> = alpha.coefficients().take(30).collect();
        let b: Vec<u64> = again.coefficients().take(30).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn convergents_sandwich(alpha in cf_strategy(), k in 1usize..25) {
        let x = alpha.value();
        let c0 = convergent(&alpha, k).unwrap();
        let c1 = convergent(&alpha, k + 1).unwrap();
        let (d0, d1) = (c0.to_surd() - x.clone(), c1.to_surd() - x.clone());
        prop_assert!(d0.signum() * d1.signum() == -1);
        prop_assert_eq!(d0.signum(), if k % 2 == 1 { 1 } else { -1 });
        let q2 = SurdReal::from_integer(&c0.q * &c0.q);
        prop_assert!(d0.abs() * q2 < SurdReal::one());
    }

    #[test]
    fn skew_cocycle(alpha in cf_strategy(), k in 0i64..101, n in -300i64..300, m in -300i64..300) {
        let x = CirclePoint::from_ratio(k, 101).unwrap();
        let y = rotate(&x, &alpha, n);
        prop_assert_eq!(birkhoff(&x, &alpha, n + m), birkhoff(&x, &alpha, n) + birkhoff(&y, &alpha, m));
    }
}

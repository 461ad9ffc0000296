//! Property tests for the arithmetic core, the engine and the formats.

use proptest::prelude::*;
use rug::integer::Order;
use somos::certificate::check_cancellation;
use somos::coprimality::{check_lemma_pairwise, check_lemma_product, check_lemma_shift, gcd};
use somos::engine::{
    find_recurrence_violation, generate, generate_rational, IntegerBuffer, SequenceBuffer, SequenceSpec,
};
use somos::io::json::decimal;
use somos::io::{emit_bfile, parse_bfile};
use somos::scanner::{scan_family, scan_integrality, somos_k_spec};
use somos::{Integer, Rational};

/// Textbook Euclid, used only as a reference for the library gcd.
fn euclid(a: &Integer, b: &Integer) -> Integer {
    let (mut a, mut b) = (Integer::from(a.abs_ref()), Integer::from(b.abs_ref()));
    while b != 0 {
        let r = Integer::from(&a % &b);
        a = b;
        b = r;
    }
    a
}

fn big(limbs: Vec<u64>, negative: bool) -> Integer {
    let magnitude = Integer::from_digits(&limbs, Order::Lsf);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

fn any_big() -> impl Strategy<Value = Integer> {
    (prop::collection::vec(any::<u64>(), 0..12), any::<bool>()).prop_map(|(l, n)| big(l, n))
}

fn small() -> impl Strategy<Value = Integer> {
    (1u64..=5_000).prop_map(Integer::from)
}

proptest! {
    #[test]
    fn gcd_matches_euclid(a in any_big(), b in any_big()) {
        prop_assert_eq!(gcd(&a, &b), euclid(&a, &b));
    }

    #[test]
    fn gcd_commutes_and_divides(a in any_big(), b in any_big()) {
        let g = gcd(&a, &b);
        prop_assert_eq!(&g, &gcd(&b, &a));
        prop_assert!(g >= 0);
        if g != 0 {
            prop_assert!(a.is_divisible(&g) && b.is_divisible(&g));
        } else {
            prop_assert!(a == 0 && b == 0);
        }
    }

    #[test]
    fn gcd_associates(a in any_big(), b in any_big(), c in any_big()) {
        prop_assert_eq!(gcd(&gcd(&a, &b), &c), gcd(&a, &gcd(&b, &c)));
    }

    #[test]
    fn gcd_of_common_factor(a in any_big(), b in any_big(), m in any_big()) {
        let scaled = gcd(&Integer::from(&a * &m), &Integer::from(&b * &m));
        prop_assert_eq!(scaled, gcd(&a, &b) * Integer::from(m.abs_ref()));
    }

    #[test]
    fn product_lemma(a in small(), x in small(), y in small()) {
        prop_assert!(check_lemma_product(&a, &x, &y));
    }

    #[test]
    fn pairwise_lemma(a in small(), b in small(), x in small(), y in small()) {
        prop_assert!(check_lemma_pairwise(&a, &b, &x, &y));
    }

    #[test]
    fn shift_lemma(x in any_big(), y in any_big()) {
        prop_assert!(check_lemma_shift(&x, &y));
    }

    #[test]
    fn cancellation_lemma(y in small(), z in small(), b in small(), k in small()) {
        prop_assert!(check_cancellation(&y, &z, &b));
        prop_assert!(check_cancellation(&Integer::from(&y * &z), &z, &b));
        prop_assert!(check_cancellation(&y, &z, &Integer::from(&b * &k)));
    }

    #[test]
    fn decimal_round_trip(a in any_big()) {
        prop_assert_eq!(decimal::parse(&a.to_string()), Some(a));
    }

    #[test]
    fn bfile_round_trip(
        start in 0usize..1_000,
        terms in prop::collection::vec(any_big(), 0..40),
    ) {
        let buffer = SequenceBuffer::from_terms(start, terms);
        let text = emit_bfile(&buffer);
        let parsed = parse_bfile(&text).unwrap();
        prop_assert_eq!(parsed.len(), buffer.len());
        let again: IntegerBuffer = parsed.to_buffer();
        if !buffer.is_empty() {
            prop_assert_eq!(again.start_index(), start);
        }
        prop_assert_eq!(emit_bfile(&again), text);
    }

    #[test]
    fn modes_agree_for_positive_initials(initials in prop::collection::vec(1u64..=50, 5), count in 5usize..40) {
        let spec = SequenceSpec::somos5().with_initials(initials.into_iter().map(Integer::from).collect()).unwrap();
        let integer = generate(&spec, count).unwrap();
        let rational = generate_rational(&spec, count).unwrap();
        let stop = integer.halted.as_ref().map_or(count, |e| e.index);
        for (n, term) in integer.buffer.indexed() {
            prop_assert!(n < stop);
            prop_assert_eq!(rational.get(n).unwrap(), &Rational::from(term.clone()));
        }
        if let Some(event) = &integer.halted {
            prop_assert!(event.reverify());
            prop_assert!(rational.get(event.index).unwrap().denom() != &1);
        }
        prop_assert_eq!(find_recurrence_violation(&integer.buffer, &spec), None);
    }

    #[test]
    fn generation_is_deterministic(count in 5usize..120) {
        let spec = SequenceSpec::somos5();
        prop_assert_eq!(generate(&spec, count).unwrap().buffer, generate(&spec, count).unwrap().buffer);
    }

    #[test]
    fn prefixes_are_stable(short in 5usize..80, extra in 0usize..80) {
        let spec = SequenceSpec::somos5();
        let a = generate(&spec, short).unwrap().buffer;
        let b = generate(&spec, short + extra).unwrap().buffer;
        prop_assert!(a.indexed().all(|(n, t)| b.get(n) == Some(t)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ten_thousand_digit_integers_survive_text(digits in "[1-9][0-9]{9999}", negative in any::<bool>()) {
        let text = if negative { format!("-{digits}") } else { digits };
        let value = decimal::parse(&text).unwrap();
        prop_assert_eq!(value.to_string(), text.clone());
        let json = serde_json::to_string(&text).unwrap();
        let back: String = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(decimal::parse(&back), Some(value));
    }
}

#[test]
fn decimal_parse_is_strict() {
    for bad in ["", "-", "+1", " 1", "1 ", "1e3", "0x10", "١٢"] {
        assert_eq!(decimal::parse(bad), None, "{bad:?}");
    }
    assert_eq!(decimal::parse("-0"), Some(Integer::new()));
}

#[test]
fn family_scan_matches_individual_scans() {
    let specs: Vec<_> = (4..=8).map(|k| somos_k_spec(k).unwrap()).collect();
    let family = scan_family(&specs, 60);
    for (spec, report) in specs.iter().zip(family) {
        assert_eq!(report.unwrap(), scan_integrality(spec, 60).unwrap());
    }
}

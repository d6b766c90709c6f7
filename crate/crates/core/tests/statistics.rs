use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayclass_core::analysis::{student_t_two_sided_p, welch};
use rayclass_core::masks::{otsu_threshold, Histogram};
use rayclass_oracles::{otsu_exhaustive, WELCH_CASES};

#[test]
fn welch_matches_high_precision_reference() {
    assert_eq!(WELCH_CASES.len(), 20);
    for (a, b, t, df, p) in WELCH_CASES {
        let r = welch(a, b).unwrap();
        assert!((r.t - t).abs() < 1e-9, "t {} vs {t}", r.t);
        assert!((r.df - df).abs() < 1e-9 * df.max(1.0), "df {} vs {df}", r.df);
        assert!((r.p - p).abs() < 1e-7, "p {} vs {p}", r.p);
    }
}

#[test]
fn otsu_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    while tested < 200 {
        let bins = rng.gen_range(2..=256);
        let lo = rng.gen_range(-100.0..100.0);
        let width = rng.gen_range(1e-3..10.0);
        let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
        let counts: Vec<u64> = (0..bins)
            .map(|_| if rng.gen_bool(0.4) { 0 } else { rng.gen_range(1..5000) })
            .collect();
        let Some(expected) = otsu_exhaustive(&edges, &counts) else {
            continue;
        };
        let h = Histogram::new(edges, counts).unwrap();
        assert_eq!(otsu_threshold(&h).unwrap(), expected);
        tested += 1;
    }
}

proptest! {
    #[test]
    fn welch_is_symmetric(
        a in prop::collection::vec(0.0f64..=1.0, 2..30),
        b in prop::collection::vec(0.0f64..=1.0, 2..30),
    ) {
        let ab = welch(&a, &b).unwrap();
        let ba = welch(&b, &a).unwrap();
        prop_assert!((ab.t + ba.t).abs() < 1e-12 || (ab.t.is_infinite() && ab.t == -ba.t));
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p));
    }

    #[test]
    fn p_value_decreases_with_abs_t(df in 1.0f64..200.0, t in 0.0f64..20.0, step in 1e-3f64..5.0) {
        let p0 = student_t_two_sided_p(t, df);
        let p1 = student_t_two_sided_p(t + step, df);
        prop_assert!(p1 <= p0);
        prop_assert_eq!(student_t_two_sided_p(-t, df), p0);
    }
}

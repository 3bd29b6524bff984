use causaldp::brp::{
    brp_bound, check_composition, compose_sequential, kernel_stages, BrpError, Interface,
};
use causaldp::random::random_table;
use causaldp::sem::{FiniteDomain, KernelTable};
use causaldp::RatioBound;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iface() -> Interface {
    Interface {
        x: "X".into(),
        y1: "Y1".into(),
        y2: "Y2".into(),
    }
}

fn domain(size: usize) -> FiniteDomain {
    FiniteDomain::new((0..size).map(|k| k.to_string())).unwrap()
}

fn finite(b: &RatioBound) -> causaldp::Rational {
    b.as_rational()
        .cloned()
        .expect("full-support stages have finite bounds")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composed_bound_is_at_most_the_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sx, sy1, sy2) = (3, rng.gen_range(2..=3), 2);
        let k1 = random_table(&mut rng, sx, sy1, true);
        let k2 = random_table(&mut rng, sx * sy1, sy2, true);
        let (m1, m2) = kernel_stages(&iface(), [&domain(sx), &domain(sy1), &domain(sy2)], k1, k2).unwrap();
        let c = compose_sequential(&m1, &m2, &iface()).unwrap();
        let r1 = finite(&brp_bound(&m1, &["Y1"], "X").unwrap().bound);
        let r2 = finite(&brp_bound(&m2, &["Y2"], "X").unwrap().bound);
        let report = check_composition(&c, &r1, &r2).unwrap();
        prop_assert!(report.pass);
        prop_assert!(report.composed.bound.within(&(r1 * r2)));
    }

    #[test]
    fn postprocessing_never_adds_effect(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = rng.gen_bool(0.5);
        let k1 = random_table(&mut rng, 3, 2, full);
        // Stage two reads only Y1: rows for (x, y1) depend on y1 alone.
        let post = random_table(&mut rng, 2, 3, false);
        let k2 = KernelTable::from_dense((0..6).map(|r| post.dense_row(r % 2)).collect()).unwrap();
        let (m1, m2) = kernel_stages(&iface(), [&domain(3), &domain(2), &domain(3)], k1, k2).unwrap();
        let c = compose_sequential(&m1, &m2, &iface()).unwrap();
        let stage1 = brp_bound(&m1, &["Y1"], "X").unwrap().bound;
        prop_assert_eq!(brp_bound(&m2, &["Y2"], "X").unwrap().bound, RatioBound::one());
        prop_assert_eq!(&brp_bound(&c.composed, &["Y1", "Y2"], "X").unwrap().bound, &stage1);
        prop_assert!(brp_bound(&c.composed, &["Y2"], "X").unwrap().bound <= stage1);
    }
}

#[test]
fn premise_failures_do_not_report_a_composed_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k1 = random_table(&mut rng, 3, 2, true);
    let k2 = random_table(&mut rng, 6, 2, true);
    let (m1, m2) = kernel_stages(&iface(), [&domain(3), &domain(2), &domain(2)], k1, k2).unwrap();
    let c = compose_sequential(&m1, &m2, &iface()).unwrap();
    let tiny = causaldp::rat(1, 1);
    match check_composition(&c, &tiny, &tiny) {
        Err(BrpError::PremiseViolated { stage, .. }) => assert_eq!(stage, 1),
        other => panic!("expected a premise violation, got {other:?}"),
    }
}

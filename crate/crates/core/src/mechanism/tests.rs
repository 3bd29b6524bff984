use super::*;
use crate::sem::Event;

fn brute_force_classic(kernel: &MechanismKernel) -> RatioBound {
    // Independent of classic_epsilon: all ordered pairs at Hamming distance
    // exactly one, compared entrywise.
    let dbs = kernel.databases();
    let mut best = RatioBound::one();
    for a in &dbs {
        for b in &dbs {
            if a.iter().zip(b).filter(|(x, y)| x != y).count() != 1 {
                continue;
            }
            for o in 0..kernel.output_domain().len() {
                if let Some(r) = RatioBound::of(kernel.prob(a, o), kernel.prob(b, o)) {
                    best = best.max(r);
                }
            }
        }
    }
    best
}

#[test]
fn randomized_response_single_respondent() {
    let k = randomized_response_kernel(1, rat(2, 3)).unwrap();
    assert_eq!(k.row(&[0]), &[rat(2, 3), rat(1, 3)]);
    assert_eq!(k.row(&[1]), &[rat(1, 3), rat(2, 3)]);
    assert_eq!(classic_epsilon(&k).bound, RatioBound::Finite(rat(2, 1)));
}

#[test]
fn randomized_response_is_a_product() {
    let k = randomized_response_kernel(2, rat(2, 3)).unwrap();
    let o = k.output_domain().index_of("pos,neg").unwrap();
    assert_eq!(k.prob(&[0, 0], o), &(rat(2, 3) * rat(1, 3)));
}

#[test]
fn randomized_response_rejects_bias_outside_open_interval() {
    for q in [rat(1, 2), rat(1, 3), rat(1, 1)] {
        assert!(matches!(
            randomized_response_kernel(1, q),
            Err(MechanismError::BiasOutOfRange(_))
        ));
    }
}

#[test]
fn randomized_response_ratio_is_odds_for_small_n() {
    for q in [rat(2, 3), rat(3, 4), rat(5, 9)] {
        let odds = &q / (Rational::one() - &q);
        for n in 1..=3 {
            let k = randomized_response_kernel(n, q.clone()).unwrap();
            assert_eq!(
                brute_force_classic(&k),
                RatioBound::Finite(odds.clone()),
                "n={n} q={q}"
            );
            assert_eq!(classic_epsilon(&k).bound, RatioBound::Finite(odds.clone()));
        }
    }
}

#[test]
fn geometric_ratio_matches_brute_force() {
    for r in [rat(1, 2), rat(1, 3), rat(2, 3)] {
        for n in 1..=4 {
            let k = geometric_count_kernel(n, r.clone()).unwrap();
            let expected = RatioBound::Finite(Rational::one() / &r);
            assert_eq!(brute_force_classic(&k), expected, "n={n} r={r}");
            assert_eq!(classic_epsilon(&k).bound, expected);
        }
    }
}

#[test]
fn geometric_n3_half_has_ratio_two() {
    let k = geometric_count_kernel(3, rat(1, 2)).unwrap();
    assert_eq!(classic_epsilon(&k).bound, RatioBound::Finite(rat(2, 1)));
    assert!(matches!(
        geometric_count_kernel(3, rat(1, 1)),
        Err(MechanismError::RatioOutOfRange(_))
    ));
    assert!(matches!(
        geometric_count_kernel(3, rat(0, 1)),
        Err(MechanismError::RatioOutOfRange(_))
    ));
}

#[test]
fn geometric_rows_depend_only_on_count() {
    let k = geometric_count_kernel(3, rat(1, 2)).unwrap();
    assert_eq!(k.row(&[0, 1, 2]), k.row(&[2, 2, 0]));
    assert_eq!(k.row(&[1, 1, 1]), k.row(&[2, 1, 2]));
}

#[test]
fn constant_kernel_has_ratio_one() {
    let k = MechanismKernel::constant(
        2,
        FiniteDomain::new(["a", "b"]).unwrap(),
        "a",
        FiniteDomain::new(["x", "y"]).unwrap(),
        vec![rat(1, 3), rat(2, 3)],
    )
    .unwrap();
    let c = classic_epsilon(&k);
    assert_eq!(c.bound, RatioBound::one());
    assert!(c.witness.is_none());
}

#[test]
fn prop7_kernel_rows_and_ratio() {
    let k = prop7_counterexample_kernel();
    assert_eq!(k.prob(&[2, 2], 1), &rat(0, 1));
    assert_eq!(k.row(&[0, 2]), &[rat(1, 2), rat(1, 2)]);
    let c = classic_epsilon(&k);
    assert_eq!(c.bound, RatioBound::Infinite);
    let w = c.witness.unwrap();
    assert_eq!(w.neighbor(), vec![2, 2]);
    assert_eq!(w.output, 1);
    // First maximizer in lexicographic order.
    assert_eq!((w.index, w.database.clone()), (0, vec![0, 2]));
}

#[test]
fn appendix_a_kernel_rows_and_ratio() {
    let k = appendix_a_counterexample_kernel();
    assert_eq!(k.row(&[1]), &[rat(1, 2), rat(1, 2)]);
    let c = classic_epsilon(&k);
    assert_eq!(c.bound, RatioBound::Infinite);
    let w = c.witness.unwrap();
    assert_eq!((w.database, w.alternative, w.output), (vec![0], 2, 1));
}

#[test]
fn kernel_validation() {
    let bad = MechanismKernel::new(
        1,
        FiniteDomain::new(["a", "b"]).unwrap(),
        "a",
        FiniteDomain::new(["x"]).unwrap(),
        vec![vec![rat(1, 1)], vec![rat(99, 100)]],
    );
    assert!(matches!(bad, Err(MechanismError::InvalidKernel(_))));
    let no_null = MechanismKernel::new(
        1,
        FiniteDomain::new(["a"]).unwrap(),
        "zzz",
        FiniteDomain::new(["x"]).unwrap(),
        vec![vec![rat(1, 1)]],
    );
    assert!(no_null.is_err());
}

#[test]
fn canonical_order_is_the_chain() {
    let m = CanonicalModel::new(geometric_count_kernel(2, rat(1, 2)).unwrap(), vec![]).unwrap();
    assert_eq!(
        m.sem().order_names(),
        vec!["R_1", "R_2", "D_1", "D_2", "D", "O"]
    );
}

#[test]
fn attribute_copy_orders_source_first() {
    let k = geometric_count_kernel(3, rat(1, 2)).unwrap();
    let m = CanonicalModel::new(k, vec![EquationSpec::copy("R_2", "R_1", 3)]).unwrap();
    let order = m.sem().order_names();
    let pos = |n: &str| order.iter().position(|x| *x == n).unwrap();
    assert!(pos("R_1") < pos("R_2"));
    assert_eq!(
        m.exogenous_names(),
        vec!["R_1".to_string(), "R_3".to_string()]
    );
}

#[test]
fn data_points_copy_attributes() {
    let m = CanonicalModel::new(geometric_count_kernel(2, rat(1, 2)).unwrap(), vec![]).unwrap();
    let s = m.sem().semantics_given_exogenous(&[0, 2]).unwrap();
    // Endogenous order: D_1, D_2, D, O.
    let d = s.marginal(&[0, 1]);
    assert_eq!(d.weight(&[0, 2]), rat(1, 1));
    let o = s.marginal(&[3]);
    let k = m.kernel();
    for v in 0..3 {
        assert_eq!(o.weight(&[v]), k.prob(&[0, 2], v).clone());
    }
}

#[test]
fn ada_byron_data_points_are_equal() {
    let k = geometric_count_kernel(2, rat(1, 2)).unwrap();
    let p = as_sem(
        &k,
        vec![EquationSpec::copy("R_2", "R_1", 3)],
        Dist::new(
            vec!["R_1".into()],
            vec![(vec![0], rat(1, 2)), (vec![1], rat(1, 2))],
        )
        .unwrap(),
    )
    .unwrap();
    let d = data_point_distribution(&p, 2);
    assert!(d.iter().all(|(a, _)| a[0] == a[1]));
    let given = p
        .query_named(&[("D_2", "pos")], &[], &[("D_1", "pos")])
        .unwrap();
    assert_eq!(given, rat(1, 1));
    // Intervening on one data point leaves the other untouched.
    let forced = p
        .query_named(&[("D_2", "pos")], &[("D_1", "neg")], &[])
        .unwrap();
    assert_eq!(forced, rat(1, 2));
}

#[test]
fn iid_population_gives_product_marginal() {
    let k = geometric_count_kernel(2, rat(1, 2)).unwrap();
    let m = CanonicalModel::new(k, vec![]).unwrap();
    let marg = vec![rat(1, 2), rat(1, 3), rat(1, 6)];
    let p = Dist::product(m.exogenous_names(), &[marg.clone(), marg]).unwrap();
    let d = data_point_distribution(&m.with_population(p.clone()).unwrap(), 2);
    assert!(d.is_product());
    assert_eq!(d.renamed(m.exogenous_names()), p);
}

#[test]
fn point_mass_population_outputs_kernel_row() {
    let k = prop7_counterexample_kernel();
    let m = CanonicalModel::new(k.clone(), vec![]).unwrap();
    let p = m
        .with_population(Dist::point(m.exogenous_names(), vec![2, 2]))
        .unwrap();
    for o in 0..2 {
        let e = Event::from_indices(vec![(m.output_index(), o)]);
        assert_eq!(&p.probability(&e), k.prob(&[2, 2], o));
    }
}

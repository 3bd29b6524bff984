use causaldp::random::{random_distribution, random_table};
use causaldp::sem::{
    Dist, EquationSpec, Event, FiniteDomain, ProbabilisticSem, Sem, VarKind, Variable,
};
use causaldp::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two exogenous roots and two endogenous variables with random parents
/// among the earlier ones.
fn random_model(seed: u64) -> ProbabilisticSem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = (0..4).map(|_| rng.gen_range(2..=3)).collect();
    let names = ["U", "W", "X", "Y"];
    let variables: Vec<Variable> = names
        .iter()
        .zip(&sizes)
        .enumerate()
        .map(|(k, (name, &size))| Variable {
            name: name.to_string(),
            kind: if k < 2 {
                VarKind::Exogenous
            } else {
                VarKind::Endogenous
            },
            domain: FiniteDomain::new((0..size).map(|v| v.to_string())).unwrap(),
        })
        .collect();
    let mut equations = Vec::new();
    for k in 2..4 {
        let parents: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.6)).collect();
        let rows: usize = parents.iter().map(|&p| sizes[p]).product();
        equations.push(EquationSpec::new(
            names[k],
            parents.iter().map(|&p| names[p].to_string()).collect(),
            random_table(&mut rng, rows, sizes[k], false),
        ));
    }
    let model = Sem::new(variables, equations).unwrap();
    let exo = random_distribution(&mut rng, vec!["U".into(), "W".into()], &sizes[..2], false);
    ProbabilisticSem::new(model, exo).unwrap()
}

fn sizes(p: &ProbabilisticSem) -> Vec<usize> {
    p.model()
        .variables()
        .iter()
        .map(|v| v.domain.len())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifted_joints_are_normalized(seed in any::<u64>()) {
        let p = random_model(seed);
        let total: Rational = p.lift().iter().map(|(_, w)| w.clone()).sum();
        prop_assert_eq!(total, Rational::one());
        for y in 0..sizes(&p)[3] {
            let sub = p.with_model(p.model().intervene_index(2, 0).unwrap()).unwrap();
            prop_assert!(sub.probability(&Event::from_indices(vec![(3, y)])) <= Rational::one());
        }
    }

    #[test]
    fn interventions_do_not_reach_upstream(seed in any::<u64>()) {
        let p = random_model(seed);
        let sizes = sizes(&p);
        let model = p.model();
        for target in 2..4 {
            for value in 0..sizes[target] {
                for z in 0..4 {
                    if z == target || model.is_ancestor(target, z) {
                        continue;
                    }
                    let before = p.interventional_marginal(z, &[]).unwrap();
                    let after = p.interventional_marginal(z, &[(target, value)]).unwrap();
                    prop_assert_eq!(before, after);
                }
            }
        }
    }

    #[test]
    fn conditioning_on_all_parents_is_intervening(seed in any::<u64>()) {
        let p = random_model(seed);
        let sizes = sizes(&p);
        let model = p.model().clone();
        let y = 3;
        let parents = model.parents(y).to_vec();
        let endogenous_parents: Vec<usize> = parents.iter().copied().filter(|&k| k >= 2).collect();
        let parent_sizes: Vec<usize> = parents.iter().map(|&k| sizes[k]).collect();
        for values in causaldp::sem::product_assignments(&parent_sizes) {
            let cond = Event::from_indices(parents.iter().copied().zip(values.iter().copied()).collect());
            if p.probability(&cond).is_zero() {
                continue;
            }
            // Exogenous parents cannot be intervened on; condition on them
            // in both computations.
            let exo_terms: Vec<(usize, usize)> = parents.iter().copied().zip(values.iter().copied())
                .filter(|&(k, _)| k < 2).collect();
            let interventions: Vec<(usize, usize)> = parents.iter().copied().zip(values.iter().copied())
                .filter(|(k, _)| endogenous_parents.contains(k)).collect();
            for v in 0..sizes[y] {
                let target = Event::from_indices(vec![(y, v)]);
                let conditioned = p.query(&target, &[], &cond).unwrap();
                let intervened = p.query(&target, &interventions, &Event::from_indices(exo_terms.clone())).unwrap();
                prop_assert_eq!(conditioned, intervened);
            }
        }
    }

    #[test]
    fn semantics_are_deterministic(seed in any::<u64>()) {
        let a = random_model(seed);
        let b = random_model(seed);
        prop_assert_eq!(a.lift(), b.lift());
        for x in causaldp::sem::product_assignments(&sizes(&a)[..2]) {
            prop_assert_eq!(
                a.model().semantics_given_exogenous(&x).unwrap(),
                b.model().semantics_given_exogenous(&x).unwrap()
            );
        }
    }
}

#[test]
fn conditioning_on_a_null_event_is_an_error_but_intervening_is_not() {
    let p = random_model(3);
    let exo = Dist::point(vec!["U".into(), "W".into()], vec![0, 0]);
    let p = p.with_exogenous(exo).unwrap();
    let never = Event::from_indices(vec![(0, 1)]);
    let target = Event::from_indices(vec![(3, 0)]);
    assert!(p.query(&target, &[], &never).is_err());
    assert!(p.query(&target, &[(2, 1)], &Event::any()).is_ok());
}

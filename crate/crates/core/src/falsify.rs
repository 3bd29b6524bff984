//! Budgeted counterexample search for Bayesian₀.
//!
//! Bayesian₀ quantifies over every population and has no finite reduction,
//! so it is searched, not decided. The candidate populations over
//! `D_1..D_n` use rational weights `k/m` with `m` up to the budget. For each
//! denominator `m` in increasing order the families are tried as follows:
//!
//! 1. mixtures of perfectly correlated databases `(v, v, ..., v)`;
//! 2. two-database mixtures `k/m · δ_a + (m-k)/m · δ_b`;
//! 3. i.i.d. products with a common grid marginal.
//!
//! `NotFound` only says that no candidate in these families failed.

use crate::checkers::{check_associative, check_classic, CheckError, CheckReport, DefinitionId};
use crate::mechanism::{data_point_name, MechanismKernel};
use crate::ratio::{rat, Rational};
use crate::sem::{product_assignments, Dist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FalsifyOutcome {
    Found {
        population: Dist,
        report: CheckReport,
    },
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FalsifyResult {
    pub outcome: FalsifyOutcome,
    /// The classic check at the same target, for context: a failure under
    /// a passing classic check is a genuine separation.
    pub classic: CheckReport,
    pub candidates_tried: usize,
}

impl FalsifyResult {
    pub fn found(&self) -> bool {
        matches!(self.outcome, FalsifyOutcome::Found { .. })
    }
}

/// Weak compositions of `total` into `parts` parts, lexicographic.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn weight(k: usize, m: usize) -> Rational {
    rat(k as i64, m as i64)
}

fn candidates(kernel: &MechanismKernel, m: usize) -> Vec<Dist> {
    let n = kernel.n();
    let size = kernel.data_domain().len();
    let vars: Vec<String> = (0..n).map(data_point_name).collect();
    let mut out = Vec::new();

    for c in compositions(m, size) {
        if c.iter().filter(|&&k| k > 0).count() < 2 {
            continue;
        }
        let entries = c
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(v, &k)| (vec![v; n], weight(k, m)));
        out.push(Dist::new(vars.clone(), entries).expect("grid weights sum to one"));
    }

    let dbs = kernel.databases();
    for (ai, a) in dbs.iter().enumerate() {
        for b in &dbs[ai + 1..] {
            for k in 1..m {
                let entries = vec![(a.clone(), weight(k, m)), (b.clone(), weight(m - k, m))];
                out.push(Dist::new(vars.clone(), entries).expect("grid weights sum to one"));
            }
        }
    }

    for c in compositions(m, size) {
        if c.iter().filter(|&&k| k > 0).count() < 2 {
            continue;
        }
        let marginal: Vec<Rational> = c.iter().map(|&k| weight(k, m)).collect();
        let entries = product_assignments(&vec![size; n]).into_iter().map(|a| {
            let w = a.iter().map(|&v| marginal[v].clone()).product();
            (a, w)
        });
        out.push(Dist::new(vars.clone(), entries).expect("product of grid marginals"));
    }
    out
}

/// Searches for a population under which Bayesian₀ fails at `target_ratio`.
///
/// Returns the first failing candidate in search order, or `NotFound` once
/// every candidate with denominator at most `budget` passed.
pub fn falsify_bayesian0(
    kernel: &MechanismKernel,
    target_ratio: &Rational,
    budget: usize,
) -> Result<FalsifyResult, CheckError> {
    let classic = check_classic(kernel, target_ratio);
    let mut tried = 0;
    for m in 2..=budget {
        for p in candidates(kernel, m) {
            tried += 1;
            let report = check_associative(DefinitionId::Bayesian0, kernel, &p, target_ratio)?;
            if !report.pass {
                return Ok(FalsifyResult {
                    outcome: FalsifyOutcome::Found {
                        population: p,
                        report,
                    },
                    classic,
                    candidates_tried: tried,
                });
            }
        }
    }
    Ok(FalsifyResult {
        outcome: FalsifyOutcome::NotFound,
        classic,
        candidates_tried: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkers::replay_witness;
    use crate::mechanism::{geometric_count_kernel, randomized_response_kernel};
    use crate::RatioBound;

    #[test]
    fn compositions_are_exhaustive_and_ordered() {
        let c = compositions(2, 3);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0, 0, 2]);
        assert_eq!(c[5], vec![2, 0, 0]);
        assert!(c.iter().all(|v| v.iter().sum::<usize>() == 2));
    }

    #[test]
    fn correlation_breaks_geometric() {
        let k = geometric_count_kernel(2, rat(1, 2)).unwrap();
        let r = falsify_bayesian0(&k, &rat(2, 1), 3).unwrap();
        assert!(r.classic.pass);
        let FalsifyOutcome::Found { population, report } = &r.outcome else {
            panic!("expected a witness")
        };
        assert_eq!(report.achieved, RatioBound::Finite(rat(4, 1)));
        // The witness population keeps both data points equal.
        assert!(population.iter().all(|(a, _)| a[0] == a[1]));
        let replayed = replay_witness(&k, &[], Some(population), report).unwrap();
        assert_eq!(replayed, Some(report.achieved.clone()));
    }

    #[test]
    fn constant_kernel_is_never_falsified() {
        let g = geometric_count_kernel(1, rat(1, 2)).unwrap();
        let k = MechanismKernel::constant(
            2,
            g.data_domain().clone(),
            "null",
            g.output_domain().clone(),
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let r = falsify_bayesian0(&k, &rat(1, 1), 3).unwrap();
        assert_eq!(r.outcome, FalsifyOutcome::NotFound);
        assert!(r.candidates_tried > 0);
    }

    #[test]
    fn budget_one_tries_nothing() {
        let k = geometric_count_kernel(2, rat(1, 2)).unwrap();
        let r = falsify_bayesian0(&k, &rat(2, 1), 1).unwrap();
        assert_eq!(r.outcome, FalsifyOutcome::NotFound);
        assert_eq!(r.candidates_tried, 0);
    }

    #[test]
    fn randomized_response_outcome_is_recorded() {
        // Correlated truths let one report speak for both respondents, so
        // the searched family does reach a failing population here. The
        // first candidate is the even mix of (neg,neg) and (null,null).
        let k = randomized_response_kernel(2, rat(2, 3)).unwrap();
        let r = falsify_bayesian0(&k, &rat(2, 1), 2).unwrap();
        assert!(r.classic.pass);
        assert_eq!(r.candidates_tried, 1);
        let FalsifyOutcome::Found { population, report } = &r.outcome else {
            panic!("expected a witness")
        };
        assert_eq!(report.achieved, RatioBound::Finite(rat(9, 4)));
        assert_eq!(population.weight(&[1, 1]), rat(1, 2));
        assert_eq!(population.weight(&[2, 2]), rat(1, 2));
    }
}

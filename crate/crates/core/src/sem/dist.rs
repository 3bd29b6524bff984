use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::SemError;
use crate::ratio::Rational;

/// Value indices for a fixed, ordered list of variables.
pub type Assignment = Vec<usize>;

/// An exact probability distribution over assignments to `vars`.
///
/// Values are indices into each variable's domain. Weights are strictly
/// positive and sum to exactly one; iteration is lexicographic in variable
/// order, then domain order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    vars: Vec<String>,
    weights: BTreeMap<Assignment, Rational>,
}

impl Dist {
    /// Builds a distribution, merging repeated assignments and dropping zeros.
    pub fn new<I>(vars: Vec<String>, entries: I) -> Result<Self, SemError>
    where
        I: IntoIterator<Item = (Assignment, Rational)>,
    {
        let mut weights: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (a, w) in entries {
            if a.len() != vars.len() {
                return Err(SemError::InvalidDistribution(format!(
                    "assignment of length {} for {} variables",
                    a.len(),
                    vars.len()
                )));
            }
            if w.is_negative() {
                return Err(SemError::InvalidDistribution(format!(
                    "negative weight {w}"
                )));
            }
            *weights.entry(a).or_insert_with(Rational::zero) += w;
        }
        weights.retain(|_, w| !w.is_zero());
        let total: Rational = weights.values().sum();
        if !total.is_one() {
            return Err(SemError::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Dist { vars, weights })
    }

    /// Builds from weights already known to be a distribution (internal use).
    pub(crate) fn from_normalized(
        vars: Vec<String>,
        weights: BTreeMap<Assignment, Rational>,
    ) -> Self {
        debug_assert!(weights.values().sum::<Rational>().is_one());
        debug_assert!(weights.values().all(|w| w.is_positive()));
        Dist { vars, weights }
    }

    pub fn point(vars: Vec<String>, values: Assignment) -> Self {
        assert_eq!(vars.len(), values.len(), "point mass arity");
        let mut weights = BTreeMap::new();
        weights.insert(values, Rational::one());
        Dist { vars, weights }
    }

    /// Uniform over the full product of domains with the given sizes.
    pub fn uniform(vars: Vec<String>, sizes: &[usize]) -> Self {
        assert_eq!(vars.len(), sizes.len());
        let all = product_assignments(sizes);
        let w = Rational::new(1.into(), all.len().into());
        Dist {
            vars,
            weights: all.into_iter().map(|a| (a, w.clone())).collect(),
        }
    }

    /// Product of independent per-variable marginals (dense over each domain).
    pub fn product(vars: Vec<String>, marginals: &[Vec<Rational>]) -> Result<Self, SemError> {
        let sizes: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let entries = product_assignments(&sizes).into_iter().map(|a| {
            let w = a
                .iter()
                .zip(marginals)
                .map(|(&v, m)| m[v].clone())
                .product();
            (a, w)
        });
        Dist::new(vars, entries)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Assignment, &Rational)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, a: &[usize]) -> Rational {
        self.weights.get(a).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn probability(&self, event: impl Fn(&[usize]) -> bool) -> Rational {
        self.weights
            .iter()
            .filter(|(a, _)| event(a))
            .map(|(_, w)| w)
            .sum()
    }

    /// Restricts to `event` and renormalizes.
    pub fn condition(&self, event: impl Fn(&[usize]) -> bool) -> Result<Dist, SemError> {
        let kept: BTreeMap<Assignment, Rational> = self
            .weights
            .iter()
            .filter(|(a, _)| event(a))
            .map(|(a, w)| (a.clone(), w.clone()))
            .collect();
        let mass: Rational = kept.values().sum();
        if mass.is_zero() {
            return Err(SemError::ZeroProbabilityEvent);
        }
        let weights = kept.into_iter().map(|(a, w)| (a, w / &mass)).collect();
        Ok(Dist {
            vars: self.vars.clone(),
            weights,
        })
    }

    /// Marginal onto the variables at `positions`, in that order.
    pub fn marginal(&self, positions: &[usize]) -> Dist {
        let mut weights: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (a, w) in &self.weights {
            let key: Assignment = positions.iter().map(|&p| a[p]).collect();
            *weights.entry(key).or_insert_with(Rational::zero) += w;
        }
        let vars = positions.iter().map(|&p| self.vars[p].clone()).collect();
        Dist { vars, weights }
    }

    pub fn marginal_by_name(&self, names: &[&str]) -> Result<Dist, SemError> {
        let positions = names
            .iter()
            .map(|n| {
                self.position(n)
                    .ok_or_else(|| SemError::UnknownVariable(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.marginal(&positions))
    }

    /// Dense single-variable marginal over a domain of `size` values.
    pub fn marginal_vector(&self, position: usize, size: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); size];
        for (a, w) in &self.weights {
            out[a[position]] += w;
        }
        out
    }

    /// Same weights under new variable names.
    pub fn renamed(&self, vars: Vec<String>) -> Dist {
        assert_eq!(vars.len(), self.vars.len());
        Dist {
            vars,
            weights: self.weights.clone(),
        }
    }

    /// Exact check that the distribution equals the product of its marginals.
    pub fn is_product(&self) -> bool {
        let k = self.vars.len();
        let marginals: Vec<BTreeMap<usize, Rational>> = (0..k)
            .map(|p| {
                let mut m = BTreeMap::new();
                for (a, w) in &self.weights {
                    *m.entry(a[p]).or_insert_with(Rational::zero) += w;
                }
                m
            })
            .collect();
        let support: usize = marginals.iter().map(BTreeMap::len).product();
        if support != self.weights.len() {
            return false;
        }
        self.weights.iter().all(|(a, w)| {
            a.iter()
                .enumerate()
                .map(|(p, v)| marginals[p][v].clone())
                .product::<Rational>()
                == *w
        })
    }
}

/// All assignments over domains of the given sizes, lexicographic.
pub fn product_assignments(sizes: &[usize]) -> Vec<Assignment> {
    let mut out = vec![Vec::with_capacity(sizes.len())];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..s).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Row-major (first variable most significant) index of an assignment.
pub fn mixed_radix_index(values: &[usize], sizes: &[usize]) -> usize {
    values
        .iter()
        .zip(sizes)
        .fold(0, |acc, (&v, &s)| acc * s + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn condition_uniform_on_first_coordinate() {
        let d = Dist::uniform(names(&["a", "b"]), &[2, 2]);
        let c = d.condition(|a| a[0] == 0).unwrap();
        assert_eq!(c.support_len(), 2);
        assert_eq!(c.weight(&[0, 0]), rat(1, 2));
        assert_eq!(c.weight(&[0, 1]), rat(1, 2));
        assert!(matches!(
            d.condition(|a| a[0] == 7),
            Err(SemError::ZeroProbabilityEvent)
        ));
    }

    #[test]
    fn rejects_bad_weights_and_drops_zeros() {
        assert!(Dist::new(names(&["a"]), vec![(vec![0], rat(99, 100))]).is_err());
        assert!(Dist::new(
            names(&["a"]),
            vec![(vec![0], rat(3, 2)), (vec![1], rat(-1, 2))]
        )
        .is_err());
        let d = Dist::new(
            names(&["a"]),
            vec![(vec![0], rat(1, 1)), (vec![1], rat(0, 1))],
        )
        .unwrap();
        assert_eq!(d.support_len(), 1);
    }

    #[test]
    fn product_detection() {
        let p = Dist::product(
            names(&["a", "b"]),
            &[vec![rat(1, 3), rat(2, 3)], vec![rat(1, 4), rat(3, 4)]],
        )
        .unwrap();
        assert!(p.is_product());
        let corr = Dist::new(
            names(&["a", "b"]),
            vec![(vec![0, 0], rat(1, 2)), (vec![1, 1], rat(1, 2))],
        )
        .unwrap();
        assert!(!corr.is_product());
        assert!(Dist::point(names(&["a", "b"]), vec![1, 0]).is_product());
    }

    #[test]
    fn mixed_radix_matches_enumeration_order() {
        let sizes = [3, 2, 3];
        for (k, a) in product_assignments(&sizes).iter().enumerate() {
            assert_eq!(mixed_radix_index(a, &sizes), k);
        }
    }
}

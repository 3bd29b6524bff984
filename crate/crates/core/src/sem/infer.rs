use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::dist::{Assignment, Dist};
use super::model::{ProbabilisticSem, Sem};
use super::SemError;
use crate::ratio::Rational;

/// A conjunction of `variable = value` terms, resolved to indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Event {
    terms: Vec<(usize, usize)>,
}

impl Event {
    /// The always-true event.
    pub fn any() -> Self {
        Event::default()
    }

    pub fn from_indices(terms: Vec<(usize, usize)>) -> Self {
        Event { terms }
    }

    /// Resolves named terms against `model`.
    pub fn parse(model: &Sem, terms: &[(&str, &str)]) -> Result<Self, SemError> {
        let terms = terms
            .iter()
            .map(|(n, v)| model.resolve(n, v))
            .collect::<Result<_, _>>()?;
        Ok(Event { terms })
    }

    pub fn terms(&self) -> &[(usize, usize)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn matches(&self, assignment: &[usize]) -> bool {
        self.terms.iter().all(|&(k, v)| assignment[k] == v)
    }
}

impl Sem {
    /// Walks the equations in topological order from a full exogenous
    /// assignment, returning weighted full assignments (declared order).
    fn propagate(&self, exogenous: &[usize]) -> Vec<(Assignment, Rational)> {
        let exo = self.exogenous();
        assert_eq!(exo.len(), exogenous.len(), "exogenous assignment arity");
        let mut start = vec![usize::MAX; self.variables().len()];
        for (&k, &v) in exo.iter().zip(exogenous) {
            start[k] = v;
        }
        let mut frontier = vec![(start, Rational::one())];
        for &var in self.order() {
            let Some(eq) = self.equation(var) else {
                continue;
            };
            let mut next = Vec::with_capacity(frontier.len());
            for (assignment, weight) in frontier {
                let row = eq.table.row(self.row_index(eq, &assignment));
                match row {
                    [(v, p)] if p.is_one() => {
                        let mut a = assignment;
                        a[var] = *v;
                        next.push((a, weight));
                    }
                    _ => {
                        for (v, p) in row {
                            let mut a = assignment.clone();
                            a[var] = *v;
                            next.push((a, &weight * p));
                        }
                    }
                }
            }
            frontier = next;
        }
        frontier
    }

    /// Joint distribution of the endogenous variables (declared order) when
    /// the exogenous variables take the values `exogenous`.
    pub fn semantics_given_exogenous(&self, exogenous: &[usize]) -> Result<Dist, SemError> {
        let sizes = self.exogenous_sizes();
        if exogenous.len() != sizes.len() || exogenous.iter().zip(&sizes).any(|(&v, &s)| v >= s) {
            return Err(SemError::DomainMismatch(format!(
                "bad exogenous assignment {exogenous:?}"
            )));
        }
        let endo = self.endogenous();
        let mut weights: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (a, w) in self.propagate(exogenous) {
            let key = endo.iter().map(|&k| a[k]).collect();
            *weights.entry(key).or_insert_with(Rational::zero) += w;
        }
        let vars = endo
            .iter()
            .map(|&k| self.variable(k).name.clone())
            .collect();
        Ok(Dist::from_normalized(vars, weights))
    }
}

impl ProbabilisticSem {
    /// Full joint over every variable, in declared order.
    pub fn lift(&self) -> Dist {
        let model = self.model();
        let mut weights: BTreeMap<Assignment, Rational> = BTreeMap::new();
        for (x, px) in self.exogenous().iter() {
            for (a, w) in model.propagate(x) {
                *weights.entry(a).or_insert_with(Rational::zero) += px * w;
            }
        }
        Dist::from_normalized(model.names(), weights)
    }

    /// Marginal probability of `target` without building the full joint map.
    pub fn probability(&self, target: &Event) -> Rational {
        let model = self.model();
        let mut total = Rational::zero();
        for (x, px) in self.exogenous().iter() {
            for (a, w) in model.propagate(x) {
                if target.matches(&a) {
                    total += px * w;
                }
            }
        }
        total
    }

    /// Fr[target | do(interventions), conditions].
    ///
    /// Interventions are applied first; the conditioning event is evaluated in
    /// the intervened model and must have positive probability there.
    pub fn query(
        &self,
        target: &Event,
        interventions: &[(usize, usize)],
        conditions: &Event,
    ) -> Result<Rational, SemError> {
        let sub = if interventions.is_empty() {
            self.clone()
        } else {
            self.with_model(self.model().intervene_all(interventions)?)?
        };
        if conditions.is_empty() {
            return Ok(sub.probability(target));
        }
        let both = Event::from_indices(
            conditions
                .terms()
                .iter()
                .chain(target.terms())
                .copied()
                .collect(),
        );
        let denom = sub.probability(conditions);
        if denom.is_zero() {
            return Err(SemError::ZeroProbabilityEvent);
        }
        Ok(sub.probability(&both) / denom)
    }

    /// Named convenience wrapper around [`ProbabilisticSem::query`].
    pub fn query_named(
        &self,
        target: &[(&str, &str)],
        interventions: &[(&str, &str)],
        conditions: &[(&str, &str)],
    ) -> Result<Rational, SemError> {
        let model = self.model();
        let target = Event::parse(model, target)?;
        let conditions = Event::parse(model, conditions)?;
        let interventions = interventions
            .iter()
            .map(|(n, v)| model.resolve(n, v))
            .collect::<Result<Vec<_>, _>>()?;
        self.query(&target, &interventions, &conditions)
    }

    /// Distribution of a single variable under `do(interventions)`, dense
    /// over its domain.
    pub fn interventional_marginal(
        &self,
        var: usize,
        interventions: &[(usize, usize)],
    ) -> Result<Vec<Rational>, SemError> {
        let sub = self.with_model(self.model().intervene_all(interventions)?)?;
        let size = sub.model().variable(var).domain.len();
        let mut out = vec![Rational::zero(); size];
        for (x, px) in sub.exogenous().iter() {
            for (a, w) in sub.model().propagate(x) {
                out[a[var]] += px * w;
            }
        }
        Ok(out)
    }
}

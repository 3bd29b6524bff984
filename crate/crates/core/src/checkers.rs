//! Executable privacy definitions with exact pass/fail reports.
//!
//! Each checker takes the intended `e^ε` as an exact target ratio and
//! reports the largest ratio it found, together with the first comparison
//! (in enumeration order) that attains it. Definitions quantified over every
//! population are discharged by a finite reduction, named in the report:
//!
//! * strong adversary, universal: a single full-support (uniform)
//!   population, under which every comparison reduces to kernel rows;
//! * whole-database intervention, universal: point-mass populations;
//! * single-point intervention, universal: point masses on the other
//!   `n - 1` data points, which isolate every kernel row.
//!
//! Bayesian₀ has no such reduction; it is checked per population and
//! searched for counterexamples in [`crate::falsify`].

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::mechanism::{
    classic_epsilon, data_point_name, CanonicalModel, MechanismError, MechanismKernel,
};
use crate::ratio::{RatioBound, RatioMax, Rational};
use crate::sem::{product_assignments, Dist, EquationSpec, Event, ProbabilisticSem, SemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DefinitionId {
    Classic,
    StrongAdversaryUniversal,
    StrongAdversaryOneDist,
    Bayesian0,
    IndependentBayesian0,
    WholeDbIntervention,
    WholeDbUniversal,
    SinglePointIntervention,
    SinglePointUniversal,
}

impl DefinitionId {
    pub const ALL: [DefinitionId; 9] = [
        DefinitionId::Classic,
        DefinitionId::StrongAdversaryUniversal,
        DefinitionId::StrongAdversaryOneDist,
        DefinitionId::Bayesian0,
        DefinitionId::IndependentBayesian0,
        DefinitionId::WholeDbIntervention,
        DefinitionId::WholeDbUniversal,
        DefinitionId::SinglePointIntervention,
        DefinitionId::SinglePointUniversal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DefinitionId::Classic => "classic",
            DefinitionId::StrongAdversaryUniversal => "strong_adversary_universal",
            DefinitionId::StrongAdversaryOneDist => "strong_adversary_one_dist",
            DefinitionId::Bayesian0 => "bayesian0",
            DefinitionId::IndependentBayesian0 => "independent_bayesian0",
            DefinitionId::WholeDbIntervention => "whole_db_intervention",
            DefinitionId::WholeDbUniversal => "whole_db_universal",
            DefinitionId::SinglePointIntervention => "single_point_intervention",
            DefinitionId::SinglePointUniversal => "single_point_universal",
        }
    }

    /// Definitions that take a population distribution as input.
    pub fn needs_population(self) -> bool {
        matches!(
            self,
            DefinitionId::StrongAdversaryOneDist
                | DefinitionId::Bayesian0
                | DefinitionId::IndependentBayesian0
                | DefinitionId::WholeDbIntervention
                | DefinitionId::SinglePointIntervention
        )
    }

    /// Conditioning-based definitions; their population is over `D_1..D_n`.
    pub fn is_associative(self) -> bool {
        matches!(
            self,
            DefinitionId::StrongAdversaryUniversal
                | DefinitionId::StrongAdversaryOneDist
                | DefinitionId::Bayesian0
                | DefinitionId::IndependentBayesian0
        )
    }
}

impl fmt::Display for DefinitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DefinitionId {
    type Err = CheckError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DefinitionId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CheckError::UnknownDefinition(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown definition {0}")]
    UnknownDefinition(String),
    #[error("{0} is not applicable here")]
    WrongDefinition(DefinitionId),
    #[error("population is not a product of its marginals")]
    NotAProductDistribution,
    #[error("population mismatch: {0}")]
    PopulationMismatch(String),
    #[error("closed form and enumeration disagree for {0}")]
    FastPathMismatch(String),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// Which population a witness was found under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PopulationTag {
    /// The comparison involves kernel rows only.
    None,
    /// The population supplied by the caller.
    Given,
    /// Uniform over all exogenous assignments.
    Uniform,
    /// Point mass at the given exogenous assignment.
    PointMass(Vec<usize>),
}

impl fmt::Display for PopulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PopulationTag::None => f.write_str("none"),
            PopulationTag::Given => f.write_str("given"),
            PopulationTag::Uniform => f.write_str("uniform"),
            PopulationTag::PointMass(a) => {
                let parts: Vec<String> = a.iter().map(usize::to_string).collect();
                write!(f, "point_mass({})", parts.join(","))
            }
        }
    }
}

/// The comparison `(i, d, d'_i, o, P)` that attained a report's ratio.
///
/// `database` is present for definitions that fix every data point; the
/// single-point definitions compare only `value` against `alternative` at
/// coordinate `index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub index: usize,
    pub database: Option<Vec<usize>>,
    pub value: usize,
    pub alternative: usize,
    pub output: usize,
    pub population: PopulationTag,
}

impl Witness {
    pub fn neighbor(&self) -> Option<Vec<usize>> {
        self.database.as_ref().map(|d| {
            let mut e = d.clone();
            e[self.index] = self.alternative;
            e
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub definition: DefinitionId,
    /// How the definition's quantifiers were discharged.
    pub reduction: String,
    pub target_ratio: Rational,
    pub achieved: RatioBound,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub skipped_comparisons: usize,
    /// Interventional queries answered by a closed form and re-derived by
    /// enumerating the intervened sub-model.
    pub cross_checked_queries: usize,
}

impl CheckReport {
    fn new(
        definition: DefinitionId,
        reduction: &str,
        target_ratio: &Rational,
        max: RatioMax<Witness>,
        skipped_comparisons: usize,
        cross_checked_queries: usize,
    ) -> Self {
        let pass = max.best.within(target_ratio);
        CheckReport {
            definition,
            reduction: reduction.to_string(),
            target_ratio: target_ratio.clone(),
            achieved: max.best,
            pass,
            witness: max.witness,
            skipped_comparisons,
            cross_checked_queries,
        }
    }
}

/// The classic definition: neighbouring databases, compared row by row.
pub fn check_classic(kernel: &MechanismKernel, target_ratio: &Rational) -> CheckReport {
    let c = classic_epsilon(kernel);
    let mut max = RatioMax::new();
    max.best = c.bound;
    max.witness = c.witness.map(|w| Witness {
        index: w.index,
        value: w.database[w.index],
        database: Some(w.database),
        alternative: w.alternative,
        output: w.output,
        population: PopulationTag::None,
    });
    CheckReport::new(
        DefinitionId::Classic,
        "kernel rows",
        target_ratio,
        max,
        0,
        0,
    )
}

fn data_point_vars(n: usize) -> Vec<String> {
    (0..n).map(data_point_name).collect()
}

fn validate_data_population(kernel: &MechanismKernel, p: &Dist) -> Result<(), CheckError> {
    let expected = data_point_vars(kernel.n());
    if p.vars() != expected.as_slice() {
        return Err(CheckError::PopulationMismatch(format!(
            "expected a distribution over {expected:?}, got {:?}",
            p.vars()
        )));
    }
    let m = kernel.data_domain().len();
    if p.iter().any(|(a, _)| a.iter().any(|&v| v >= m)) {
        return Err(CheckError::PopulationMismatch(
            "value outside the data domain".into(),
        ));
    }
    Ok(())
}

/// Lifts the canonical model with `D_i := R_i` and `R ~ p`.
fn lifted_joint(kernel: &MechanismKernel, p: &Dist) -> Result<(CanonicalModel, Dist), CheckError> {
    let model = CanonicalModel::new(kernel.clone(), vec![])?;
    let psem = model.with_population(model.population_from_data_points(p)?)?;
    let joint = psem.lift();
    Ok((model, joint))
}

/// Output distribution given an event on the lifted joint, or `None` when
/// the event has probability zero.
fn conditional_output(
    model: &CanonicalModel,
    joint: &Dist,
    event: impl Fn(&[usize]) -> bool,
) -> Option<Vec<Rational>> {
    match joint.condition(event) {
        Ok(c) => {
            Some(c.marginal_vector(model.output_index(), model.kernel().output_domain().len()))
        }
        Err(_) => None,
    }
}

fn strong_adversary(
    kernel: &MechanismKernel,
    p: &Dist,
    tag: PopulationTag,
) -> Result<(RatioMax<Witness>, usize), CheckError> {
    let (model, joint) = lifted_joint(kernel, p)?;
    let n = kernel.n();
    let m = kernel.data_domain().len();
    let dbs = kernel.databases();
    let conditionals: Vec<Option<Vec<Rational>>> = dbs
        .iter()
        .map(|d| {
            conditional_output(&model, &joint, |a| {
                (0..n).all(|i| a[model.data_point_index(i)] == d[i])
            })
        })
        .collect();
    let mut max = RatioMax::new();
    let mut skipped = 0;
    for d in &dbs {
        for i in 0..n {
            for v in (0..m).filter(|&v| v != d[i]) {
                let mut e = d.clone();
                e[i] = v;
                let (Some(lhs), Some(rhs)) = (
                    &conditionals[kernel.database_index(d)],
                    &conditionals[kernel.database_index(&e)],
                ) else {
                    skipped += 1;
                    continue;
                };
                for (o, (a, b)) in lhs.iter().zip(rhs).enumerate() {
                    max.observe(a, b, || Witness {
                        index: i,
                        database: Some(d.clone()),
                        value: d[i],
                        alternative: v,
                        output: o,
                        population: tag.clone(),
                    });
                }
            }
        }
    }
    Ok((max, skipped))
}

fn bayesian0(kernel: &MechanismKernel, p: &Dist) -> Result<(RatioMax<Witness>, usize), CheckError> {
    let (model, joint) = lifted_joint(kernel, p)?;
    let n = kernel.n();
    let m = kernel.data_domain().len();
    let mut max = RatioMax::new();
    let mut skipped = 0;
    for i in 0..n {
        let pos = model.data_point_index(i);
        let conditionals: Vec<Option<Vec<Rational>>> = (0..m)
            .map(|v| conditional_output(&model, &joint, |a| a[pos] == v))
            .collect();
        for v in 0..m {
            for w in (0..m).filter(|&w| w != v) {
                let (Some(lhs), Some(rhs)) = (&conditionals[v], &conditionals[w]) else {
                    skipped += 1;
                    continue;
                };
                for (o, (a, b)) in lhs.iter().zip(rhs).enumerate() {
                    max.observe(a, b, || Witness {
                        index: i,
                        database: None,
                        value: v,
                        alternative: w,
                        output: o,
                        population: PopulationTag::Given,
                    });
                }
            }
        }
    }
    Ok((max, skipped))
}

/// Conditioning-based definitions under a population `p` over `D_1..D_n`.
///
/// Comparisons whose conditioning event has probability zero are skipped
/// and counted. `independent_bayesian0` requires `p` to be exactly the
/// product of its marginals (full mutual independence of the data points).
pub fn check_associative(
    definition: DefinitionId,
    kernel: &MechanismKernel,
    p: &Dist,
    target_ratio: &Rational,
) -> Result<CheckReport, CheckError> {
    validate_data_population(kernel, p)?;
    let (max, skipped, reduction) = match definition {
        DefinitionId::StrongAdversaryOneDist => {
            let (max, skipped) = strong_adversary(kernel, p, PopulationTag::Given)?;
            (
                max,
                skipped,
                "conditioning on every data point under the given population",
            )
        }
        DefinitionId::Bayesian0 => {
            let (max, skipped) = bayesian0(kernel, p)?;
            (
                max,
                skipped,
                "conditioning on one data point under the given population",
            )
        }
        DefinitionId::IndependentBayesian0 => {
            if !p.is_product() {
                return Err(CheckError::NotAProductDistribution);
            }
            let (max, skipped) = bayesian0(kernel, p)?;
            (max, skipped, "conditioning on one data point under a product population (full mutual independence)")
        }
        other => return Err(CheckError::WrongDefinition(other)),
    };
    Ok(CheckReport::new(
        definition,
        reduction,
        target_ratio,
        max,
        skipped,
        0,
    ))
}

/// Strong adversary over all populations, via one full-support population.
pub fn check_strong_adversary_universal(
    kernel: &MechanismKernel,
    target_ratio: &Rational,
) -> Result<CheckReport, CheckError> {
    let n = kernel.n();
    let p = Dist::uniform(data_point_vars(n), &vec![kernel.data_domain().len(); n]);
    let (max, skipped) = strong_adversary(kernel, &p, PopulationTag::Uniform)?;
    Ok(CheckReport::new(
        DefinitionId::StrongAdversaryUniversal,
        "single full-support (uniform) population",
        target_ratio,
        max,
        skipped,
        0,
    ))
}

fn mismatch(what: String) -> CheckError {
    CheckError::FastPathMismatch(what)
}

/// Fr[O | do(D = d)] for every database, via the kernel row and re-derived
/// on the intervened sub-model.
fn whole_db(
    model: &CanonicalModel,
    psem: &ProbabilisticSem,
    tag: PopulationTag,
) -> Result<(RatioMax<Witness>, usize), CheckError> {
    let kernel = model.kernel();
    let n = kernel.n();
    let m = kernel.data_domain().len();
    let dbs = kernel.databases();
    for d in &dbs {
        let interventions: Vec<(usize, usize)> =
            (0..n).map(|i| (model.data_point_index(i), d[i])).collect();
        let enumerated = psem.interventional_marginal(model.output_index(), &interventions)?;
        if enumerated.as_slice() != kernel.row(d) {
            return Err(mismatch(format!("do(D = {})", kernel.database_label(d))));
        }
    }
    let mut max = RatioMax::new();
    for d in &dbs {
        for i in 0..n {
            for v in (0..m).filter(|&v| v != d[i]) {
                let mut e = d.clone();
                e[i] = v;
                for (o, (a, b)) in kernel.row(d).iter().zip(kernel.row(&e)).enumerate() {
                    max.observe(a, b, || Witness {
                        index: i,
                        database: Some(d.clone()),
                        value: d[i],
                        alternative: v,
                        output: o,
                        population: tag.clone(),
                    });
                }
            }
        }
    }
    Ok((max, dbs.len()))
}

/// Closed form for Fr[O | do(D_i = v)]: the kernel averaged over the
/// marginal of the other data points.
pub fn single_point_closed_form(
    kernel: &MechanismKernel,
    others: &Dist,
    i: usize,
    v: usize,
) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); kernel.output_domain().len()];
    for (rest, w) in others.iter() {
        let mut d = rest.clone();
        d.insert(i, v);
        for (acc, p) in out.iter_mut().zip(kernel.row(&d)) {
            *acc += w * p;
        }
    }
    out
}

fn single_point(
    model: &CanonicalModel,
    psem: &ProbabilisticSem,
    coordinates: &[usize],
    tag: PopulationTag,
) -> Result<(RatioMax<Witness>, usize), CheckError> {
    let kernel = model.kernel();
    let n = kernel.n();
    let m = kernel.data_domain().len();
    let joint = psem.lift();
    let mut max = RatioMax::new();
    let mut queries = 0;
    for &i in coordinates {
        let rest: Vec<usize> = (0..n)
            .filter(|&j| j != i)
            .map(|j| model.data_point_index(j))
            .collect();
        let others = joint.marginal(&rest);
        let mut rows = Vec::with_capacity(m);
        for v in 0..m {
            let closed = single_point_closed_form(kernel, &others, i, v);
            let enumerated = psem
                .interventional_marginal(model.output_index(), &[(model.data_point_index(i), v)])?;
            if closed != enumerated {
                return Err(mismatch(format!(
                    "do({} = {})",
                    data_point_name(i),
                    kernel.data_domain().value(v)
                )));
            }
            queries += 1;
            rows.push(closed);
        }
        for v in 0..m {
            for w in (0..m).filter(|&w| w != v) {
                for (o, (a, b)) in rows[v].iter().zip(&rows[w]).enumerate() {
                    max.observe(a, b, || Witness {
                        index: i,
                        database: None,
                        value: v,
                        alternative: w,
                        output: o,
                        population: tag.clone(),
                    });
                }
            }
        }
    }
    Ok((max, queries))
}

/// Intervention-based definitions under a population over the model's
/// exogenous attributes.
pub fn check_causal(
    definition: DefinitionId,
    kernel: &MechanismKernel,
    attribute_equations: &[EquationSpec],
    population: &Dist,
    target_ratio: &Rational,
) -> Result<CheckReport, CheckError> {
    let model = CanonicalModel::new(kernel.clone(), attribute_equations.to_vec())?;
    let psem = model.with_population(population.clone())?;
    let (max, queries, reduction) = match definition {
        DefinitionId::WholeDbIntervention => {
            let (max, q) = whole_db(&model, &psem, PopulationTag::Given)?;
            (
                max,
                q,
                "intervention on every data point under the given population",
            )
        }
        DefinitionId::SinglePointIntervention => {
            let coords: Vec<usize> = (0..kernel.n()).collect();
            let (max, q) = single_point(&model, &psem, &coords, PopulationTag::Given)?;
            (
                max,
                q,
                "intervention on one data point under the given population",
            )
        }
        other => return Err(CheckError::WrongDefinition(other)),
    };
    Ok(CheckReport::new(
        definition,
        reduction,
        target_ratio,
        max,
        0,
        queries,
    ))
}

/// Intervention-based definitions over all populations, by point masses.
pub fn check_universal_causal(
    definition: DefinitionId,
    kernel: &MechanismKernel,
    target_ratio: &Rational,
) -> Result<CheckReport, CheckError> {
    let model = CanonicalModel::new(kernel.clone(), vec![])?;
    let n = kernel.n();
    let m = kernel.data_domain().len();
    let names = model.exogenous_names();
    let mut max = RatioMax::new();
    let mut queries = 0;
    let reduction = match definition {
        DefinitionId::WholeDbUniversal => {
            for r in product_assignments(&vec![m; n]) {
                let psem = model.with_population(Dist::point(names.clone(), r.clone()))?;
                let (found, q) = whole_db(&model, &psem, PopulationTag::PointMass(r))?;
                max.merge(found);
                queries += q;
            }
            "point-mass populations over all databases"
        }
        DefinitionId::SinglePointUniversal => {
            for i in 0..n {
                for rest in product_assignments(&vec![m; n - 1]) {
                    // R_i's own value is irrelevant once D_i is intervened on.
                    let mut r = rest;
                    r.insert(i, kernel.null());
                    let psem = model.with_population(Dist::point(names.clone(), r.clone()))?;
                    let (found, q) =
                        single_point(&model, &psem, &[i], PopulationTag::PointMass(r))?;
                    max.merge(found);
                    queries += q;
                }
            }
            "point masses on the other data points"
        }
        other => return Err(CheckError::WrongDefinition(other)),
    };
    Ok(CheckReport::new(
        definition,
        reduction,
        target_ratio,
        max,
        0,
        queries,
    ))
}

/// Recomputes a witness's ratio through generic SEM queries.
///
/// `population` is the caller-supplied distribution for definitions that
/// take one: over `D_1..D_n` for the associative definitions, over the
/// exogenous attributes for the causal ones. Returns `None` for reports
/// without a witness or for vacuous (0/0) replays.
pub fn replay_witness(
    kernel: &MechanismKernel,
    attribute_equations: &[EquationSpec],
    population: Option<&Dist>,
    report: &CheckReport,
) -> Result<Option<RatioBound>, CheckError> {
    let Some(w) = &report.witness else {
        return Ok(None);
    };
    let def = report.definition;
    let attrs = if def.is_associative() || !def.needs_population() {
        &[][..]
    } else {
        attribute_equations
    };
    let model = CanonicalModel::new(kernel.clone(), attrs.to_vec())?;
    let exogenous = match &w.population {
        PopulationTag::PointMass(r) => Dist::point(model.exogenous_names(), r.clone()),
        PopulationTag::Given => {
            let p = population.ok_or_else(|| {
                CheckError::PopulationMismatch("witness needs the given population".into())
            })?;
            if def.is_associative() {
                model.population_from_data_points(p)?
            } else {
                p.clone()
            }
        }
        PopulationTag::Uniform | PopulationTag::None => model.uniform_population(),
    };
    let psem = model.with_population(exogenous)?;
    let target = Event::from_indices(vec![(model.output_index(), w.output)]);
    let n = kernel.n();
    let all = |d: &[usize]| -> Vec<(usize, usize)> {
        (0..n).map(|i| (model.data_point_index(i), d[i])).collect()
    };
    let one = |v: usize| vec![(model.data_point_index(w.index), v)];
    let none = Event::any();
    let (num, den) = match def {
        DefinitionId::Classic
        | DefinitionId::WholeDbIntervention
        | DefinitionId::WholeDbUniversal => {
            let d = w
                .database
                .clone()
                .ok_or_else(|| mismatch("witness without database".into()))?;
            let e = w.neighbor().expect("database present");
            (
                psem.query(&target, &all(&d), &none)?,
                psem.query(&target, &all(&e), &none)?,
            )
        }
        DefinitionId::StrongAdversaryUniversal | DefinitionId::StrongAdversaryOneDist => {
            let d = w
                .database
                .clone()
                .ok_or_else(|| mismatch("witness without database".into()))?;
            let e = w.neighbor().expect("database present");
            (
                psem.query(&target, &[], &Event::from_indices(all(&d)))?,
                psem.query(&target, &[], &Event::from_indices(all(&e)))?,
            )
        }
        DefinitionId::Bayesian0 | DefinitionId::IndependentBayesian0 => (
            psem.query(&target, &[], &Event::from_indices(one(w.value)))?,
            psem.query(&target, &[], &Event::from_indices(one(w.alternative)))?,
        ),
        DefinitionId::SinglePointIntervention | DefinitionId::SinglePointUniversal => (
            psem.query(&target, &one(w.value), &none)?,
            psem.query(&target, &one(w.alternative), &none)?,
        ),
    };
    Ok(RatioBound::of(&num, &den))
}

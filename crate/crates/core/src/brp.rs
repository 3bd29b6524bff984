//! Relative-probability effect sizes and their composition.
//!
//! `rp(ρ, do(X=x1), do(X=x2))` compares the probability of an event under
//! two interventions on the same variable. Its maximum over sink values and
//! source pairs is the effect size of `X` on `Y` under one population;
//! maximizing again over populations gives the bounded-relative-probability
//! (brp) bound.
//!
//! The maximum over populations is computed on point masses. Under any
//! population `P`, `Fr[ρ | do(φ)]` is the `P`-weighted average of the same
//! probability at each exogenous assignment, so a ratio of two such
//! averages is a ratio of affine functions on the simplex and never exceeds
//! the largest ratio at a vertex.
//!
//! Interventions on exogenous variables are realized by substituting the
//! value into every exogenous assignment, which leaves the distribution of
//! the other exogenous variables untouched.

use num_traits::Zero;
use thiserror::Error;

use crate::ratio::{RatioBound, RatioMax, Rational};
use crate::sem::{
    mixed_radix_index, product_assignments, Dist, Event, ProbabilisticSem, Sem, SemError, VarKind,
    Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BrpError {
    #[error("interventions must target the same variable, got {0} and {1}")]
    MixedInterventions(String, String),
    #[error("{sink} is not downstream of {cause}")]
    SinkUpstream { sink: String, cause: String },
    #[error("models are not in sequence: {0}")]
    NotInSequence(String),
    #[error("stage {stage} has bound {bound}, above its declared ratio {ratio}")]
    PremiseViolated {
        stage: u8,
        bound: RatioBound,
        ratio: String,
    },
    #[error(transparent)]
    Sem(#[from] SemError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeProbability {
    pub ratio: RatioBound,
    /// Both probabilities were zero; `ratio` is then the neutral 1.
    pub degenerate: bool,
}

/// The maximizing `(y, x1, x2)` of an effect bound; `exogenous` is the
/// point-mass population for brp bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectWitness {
    pub sink_values: Vec<usize>,
    pub value: usize,
    pub alternative: usize,
    pub exogenous: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectBound {
    pub bound: RatioBound,
    pub witness: Option<EffectWitness>,
    /// `(y, x1, x2)` triples where both probabilities were zero.
    pub degenerate: usize,
}

/// The population after `do(var = value)`.
fn intervened(
    psem: &ProbabilisticSem,
    var: usize,
    value: usize,
) -> Result<ProbabilisticSem, SemError> {
    let model = psem.model();
    if model.variable(var).kind == VarKind::Endogenous {
        return psem.with_model(model.intervene_index(var, value)?);
    }
    let size = model.variable(var).domain.len();
    if value >= size {
        return Err(SemError::ValueOutOfDomain {
            variable: model.variable(var).name.clone(),
            value: value.to_string(),
        });
    }
    let pos = model
        .exogenous()
        .iter()
        .position(|&k| k == var)
        .expect("exogenous variable");
    let exo = psem.exogenous();
    let moved = exo.iter().map(|(a, w)| {
        let mut a = a.clone();
        a[pos] = value;
        (a, w.clone())
    });
    psem.with_exogenous(Dist::new(exo.vars().to_vec(), moved)?)
}

/// `Fr[ρ | do(φ)] / Fr[ρ | do(ψ)]` for two interventions `(variable, value)`
/// on the same variable.
pub fn relative_probability(
    psem: &ProbabilisticSem,
    rho: &Event,
    phi: (usize, usize),
    psi: (usize, usize),
) -> Result<RelativeProbability, BrpError> {
    if phi.0 != psi.0 {
        let name = |k: usize| psem.model().variable(k).name.clone();
        return Err(BrpError::MixedInterventions(name(phi.0), name(psi.0)));
    }
    let a = intervened(psem, phi.0, phi.1)?.probability(rho);
    let b = intervened(psem, psi.0, psi.1)?.probability(rho);
    Ok(match RatioBound::of(&a, &b) {
        Some(ratio) => RelativeProbability {
            ratio,
            degenerate: false,
        },
        None => RelativeProbability {
            ratio: RatioBound::one(),
            degenerate: true,
        },
    })
}

fn resolve_query(
    model: &Sem,
    sinks: &[&str],
    source: &str,
) -> Result<(Vec<usize>, usize), BrpError> {
    let x = model.index_of(source)?;
    let ys = sinks
        .iter()
        .map(|s| model.index_of(s))
        .collect::<Result<Vec<_>, _>>()?;
    for &y in &ys {
        if y == x || model.is_ancestor(y, x) {
            return Err(BrpError::SinkUpstream {
                sink: model.variable(y).name.clone(),
                cause: source.to_string(),
            });
        }
    }
    Ok((ys, x))
}

/// Distribution of the sink tuple under `do(X = x)`, indexed in mixed radix.
fn sink_distribution(
    psem: &ProbabilisticSem,
    sinks: &[usize],
    source: usize,
    x: usize,
) -> Result<Vec<Rational>, SemError> {
    let sub = intervened(psem, source, x)?;
    let sizes: Vec<usize> = sinks
        .iter()
        .map(|&k| psem.model().variable(k).domain.len())
        .collect();
    let mut out = vec![Rational::zero(); sizes.iter().product()];
    for (a, w) in sub.lift().iter() {
        let y: Vec<usize> = sinks.iter().map(|&k| a[k]).collect();
        out[mixed_radix_index(&y, &sizes)] += w;
    }
    Ok(out)
}

fn effect(
    psem: &ProbabilisticSem,
    sinks: &[usize],
    source: usize,
    exogenous: Option<&[usize]>,
) -> Result<(RatioMax<EffectWitness>, usize), SemError> {
    let model = psem.model();
    let size = model.variable(source).domain.len();
    let sizes: Vec<usize> = sinks
        .iter()
        .map(|&k| model.variable(k).domain.len())
        .collect();
    let tuples = product_assignments(&sizes);
    let dists = (0..size)
        .map(|x| sink_distribution(psem, sinks, source, x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut max = RatioMax::new();
    let mut degenerate = 0;
    for (yi, y) in tuples.iter().enumerate() {
        for x1 in 0..size {
            for x2 in (0..size).filter(|&x2| x2 != x1) {
                let seen = max.observe(&dists[x1][yi], &dists[x2][yi], || EffectWitness {
                    sink_values: y.clone(),
                    value: x1,
                    alternative: x2,
                    exogenous: exogenous.map(<[usize]>::to_vec),
                });
                if !seen {
                    degenerate += 1;
                }
            }
        }
    }
    Ok((max, degenerate))
}

/// `R̄P(Y, X)`: the largest relative probability of any sink tuple value
/// between two interventions on `source`, under the given population.
pub fn max_relative_probability(
    psem: &ProbabilisticSem,
    sinks: &[&str],
    source: &str,
) -> Result<EffectBound, BrpError> {
    let (ys, x) = resolve_query(psem.model(), sinks, source)?;
    let (max, degenerate) = effect(psem, &ys, x, None)?;
    Ok(EffectBound {
        bound: max.best,
        witness: max.witness,
        degenerate,
    })
}

/// The brp bound: `R̄P(Y, X)` maximized over every exogenous distribution,
/// evaluated at point masses.
pub fn brp_bound(model: &Sem, sinks: &[&str], source: &str) -> Result<EffectBound, BrpError> {
    let (ys, x) = resolve_query(model, sinks, source)?;
    let names = model.exogenous_names();
    let mut best = RatioMax::new();
    let mut degenerate = 0;
    for a in product_assignments(&model.exogenous_sizes()) {
        let psem = ProbabilisticSem::new(model.clone(), Dist::point(names.clone(), a.clone()))?;
        let (found, d) = effect(&psem, &ys, x, Some(&a))?;
        best.merge(found);
        degenerate += d;
    }
    Ok(EffectBound {
        bound: best.best,
        witness: best.witness,
        degenerate,
    })
}

/// Names of the shared variables between two sequential stages.
///
/// Stage one computes `y1` from `x`; stage two reads `x` and `y1` as
/// exogenous inputs and computes `y2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interface {
    pub x: String,
    pub y1: String,
    pub y2: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialComposition {
    pub m1: Sem,
    pub m2: Sem,
    pub interface: Interface,
    /// Stage one's variables followed by stage two's own variables.
    pub composed: Sem,
}

fn not_in_sequence(msg: impl Into<String>) -> BrpError {
    BrpError::NotInSequence(msg.into())
}

/// Feeds stage one's `y1` into stage two.
pub fn compose_sequential(
    m1: &Sem,
    m2: &Sem,
    interface: &Interface,
) -> Result<SequentialComposition, BrpError> {
    let Interface { x, y1, y2 } = interface;
    if x == y1 || x == y2 || y1 == y2 {
        return Err(not_in_sequence("x, y1 and y2 must be distinct"));
    }
    let lookup = |m: &Sem, name: &str, stage: u8| -> Result<usize, BrpError> {
        m.index_of(name)
            .map_err(|_| not_in_sequence(format!("stage {stage} has no variable {name}")))
    };
    let (x1, y11) = (lookup(m1, x, 1)?, lookup(m1, y1, 1)?);
    let (x2, y12) = (lookup(m2, x, 2)?, lookup(m2, y1, 2)?);
    lookup(m2, y2, 2)?;
    for (k, name) in [(x2, x), (y12, y1)] {
        if m2.variable(k).kind != VarKind::Exogenous {
            return Err(not_in_sequence(format!(
                "stage 2 must read {name} as an input"
            )));
        }
    }
    if m1.variable(x1).domain != m2.variable(x2).domain
        || m1.variable(y11).domain != m2.variable(y12).domain
    {
        return Err(not_in_sequence(
            "interface domains differ between the stages",
        ));
    }
    if m1.is_ancestor(y11, x1) {
        return Err(not_in_sequence(format!("{y1} affects {x}")));
    }

    let mut variables: Vec<Variable> = m1.variables().to_vec();
    for v in m2.variables() {
        if v.name == *x || v.name == *y1 {
            continue;
        }
        if variables.iter().any(|w| w.name == v.name) {
            return Err(not_in_sequence(format!(
                "{} is defined by both stages",
                v.name
            )));
        }
        variables.push(v.clone());
    }
    let mut equations = m1.equation_specs();
    equations.extend(m2.equation_specs());
    let composed = Sem::new(variables, equations)?;
    Ok(SequentialComposition {
        m1: m1.clone(),
        m2: m2.clone(),
        interface: interface.clone(),
        composed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionReport {
    pub stage1: EffectBound,
    pub stage2: EffectBound,
    pub composed: EffectBound,
    /// `ratio1 · ratio2`.
    pub target_ratio: Rational,
    pub pass: bool,
}

/// Verifies both stage premises, then the composed bound against the
/// product of the stage ratios.
pub fn check_composition(
    composition: &SequentialComposition,
    ratio1: &Rational,
    ratio2: &Rational,
) -> Result<CompositionReport, BrpError> {
    let Interface { x, y1, y2 } = &composition.interface;
    let stage1 = brp_bound(&composition.m1, &[y1], x)?;
    if !stage1.bound.within(ratio1) {
        return Err(BrpError::PremiseViolated {
            stage: 1,
            bound: stage1.bound,
            ratio: crate::format_rational(ratio1),
        });
    }
    let stage2 = brp_bound(&composition.m2, &[y2], x)?;
    if !stage2.bound.within(ratio2) {
        return Err(BrpError::PremiseViolated {
            stage: 2,
            bound: stage2.bound,
            ratio: crate::format_rational(ratio2),
        });
    }
    let composed = brp_bound(&composition.composed, &[y1, y2], x)?;
    let target_ratio = ratio1 * ratio2;
    let pass = composed.bound.within(&target_ratio);
    Ok(CompositionReport {
        stage1,
        stage2,
        composed,
        target_ratio,
        pass,
    })
}

/// The two stages of a kernel pipeline: `Y1 := k1(X)` and
/// `Y2 := k2(X, Y1)`, with `k2`'s rows indexed by `(x, y1)` row-major.
pub fn kernel_stages(
    interface: &Interface,
    domains: [&crate::sem::FiniteDomain; 3],
    k1: crate::sem::KernelTable,
    k2: crate::sem::KernelTable,
) -> Result<(Sem, Sem), BrpError> {
    use crate::sem::EquationSpec;
    let Interface { x, y1, y2 } = interface;
    let var = |name: &str, kind, domain: &crate::sem::FiniteDomain| Variable {
        name: name.to_string(),
        kind,
        domain: domain.clone(),
    };
    let m1 = Sem::new(
        vec![
            var(x, VarKind::Exogenous, domains[0]),
            var(y1, VarKind::Endogenous, domains[1]),
        ],
        vec![EquationSpec::new(y1.as_str(), vec![x.clone()], k1)],
    )?;
    let m2 = Sem::new(
        vec![
            var(x, VarKind::Exogenous, domains[0]),
            var(y1, VarKind::Exogenous, domains[1]),
            var(y2, VarKind::Endogenous, domains[2]),
        ],
        vec![EquationSpec::new(
            y2.as_str(),
            vec![x.clone(), y1.clone()],
            k2,
        )],
    )?;
    Ok((m1, m2))
}

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::dist::{mixed_radix_index, Dist};
use super::SemError;
use crate::ratio::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

/// An ordered, nonempty list of distinct symbolic values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDomain {
    values: Vec<String>,
}

impl FiniteDomain {
    pub fn new<I, S>(values: I) -> Result<Self, SemError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(SemError::DomainMismatch("empty domain".into()));
        }
        let distinct: BTreeSet<&String> = values.iter().collect();
        if distinct.len() != values.len() {
            return Err(SemError::DomainMismatch(format!(
                "repeated value in domain {values:?}"
            )));
        }
        Ok(FiniteDomain { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> &str {
        &self.values[index]
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: FiniteDomain,
}

/// Extensional stochastic equation: one output distribution per parent tuple.
///
/// Rows are indexed by the parent tuple in lexicographic order (first parent
/// most significant). Each row stores its nonzero entries sorted by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTable {
    width: usize,
    rows: Vec<Vec<(usize, Rational)>>,
}

impl KernelTable {
    /// Builds from dense rows, each of length `width` and summing to one.
    pub fn from_dense(rows: Vec<Vec<Rational>>) -> Result<Self, SemError> {
        let width = rows.first().map_or(0, Vec::len);
        let mut sparse = Vec::with_capacity(rows.len());
        for (k, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(SemError::DomainMismatch(format!(
                    "row {k} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| w.is_negative()) {
                return Err(SemError::DomainMismatch(format!(
                    "row {k} has negative entry {w}"
                )));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(SemError::DomainMismatch(format!(
                    "row {k} sums to {sum}, not 1"
                )));
            }
            sparse.push(
                row.into_iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .collect(),
            );
        }
        Ok(KernelTable {
            width,
            rows: sparse,
        })
    }

    /// A single row putting all mass on `value`.
    pub fn constant(width: usize, value: usize) -> Self {
        assert!(value < width);
        KernelTable {
            width,
            rows: vec![vec![(value, Rational::one())]],
        }
    }

    /// Deterministic table: row `k` is a point mass at `f(k)`.
    pub fn deterministic(width: usize, rows: usize, f: impl Fn(usize) -> usize) -> Self {
        let rows = (0..rows)
            .map(|k| {
                let v = f(k);
                assert!(v < width);
                vec![(v, Rational::one())]
            })
            .collect();
        KernelTable { width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, index: usize) -> &[(usize, Rational)] {
        &self.rows[index]
    }

    pub fn dense_row(&self, index: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.width];
        for (v, w) in &self.rows[index] {
            out[*v] = w.clone();
        }
        out
    }

    pub fn dense_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows.len()).map(|k| self.dense_row(k)).collect()
    }
}

/// A structural equation written against variable names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSpec {
    pub target: String,
    pub parents: Vec<String>,
    pub table: KernelTable,
}

impl EquationSpec {
    pub fn new(target: impl Into<String>, parents: Vec<String>, table: KernelTable) -> Self {
        EquationSpec {
            target: target.into(),
            parents,
            table,
        }
    }

    /// `target := source`, for two variables over a domain of `size` values.
    pub fn copy(target: impl Into<String>, source: impl Into<String>, size: usize) -> Self {
        EquationSpec::new(
            target,
            vec![source.into()],
            KernelTable::deterministic(size, size, |k| k),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Equation {
    pub parents: Vec<usize>,
    pub parent_sizes: Vec<usize>,
    pub table: Arc<KernelTable>,
}

/// A validated recursive SEM over finite domains.
///
/// Construction checks every structural invariant, so a `Sem` value always
/// has a topological order. Variables keep their declared order, which is
/// also the coordinate order of lifted joint distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sem {
    variables: Arc<[Variable]>,
    equations: Vec<Option<Equation>>,
    order: Vec<usize>,
}

impl Sem {
    /// Validates the model and computes its topological order.
    ///
    /// A variable is endogenous exactly when it has an equation; the `kind`
    /// declared on each variable must agree.
    pub fn new(variables: Vec<Variable>, equations: Vec<EquationSpec>) -> Result<Self, SemError> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (k, v) in variables.iter().enumerate() {
            if index.insert(v.name.as_str(), k).is_some() {
                return Err(SemError::DuplicateVariable(v.name.clone()));
            }
        }
        let mut slots: Vec<Option<Equation>> = vec![None; variables.len()];
        for eq in &equations {
            let target = *index
                .get(eq.target.as_str())
                .ok_or_else(|| SemError::UnknownVariable(eq.target.clone()))?;
            if variables[target].kind == VarKind::Exogenous {
                return Err(SemError::DomainMismatch(format!(
                    "exogenous variable {} cannot have an equation",
                    eq.target
                )));
            }
            if slots[target].is_some() {
                return Err(SemError::DomainMismatch(format!(
                    "two equations for {}",
                    eq.target
                )));
            }
            let parents = eq
                .parents
                .iter()
                .map(|p| {
                    index
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| SemError::UnknownVariable(p.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if parents.contains(&target) {
                return Err(SemError::CyclicModel(eq.target.clone()));
            }
            let parent_sizes: Vec<usize> =
                parents.iter().map(|&p| variables[p].domain.len()).collect();
            let rows: usize = parent_sizes.iter().product();
            if eq.table.len() != rows {
                return Err(SemError::DomainMismatch(format!(
                    "equation for {} has {} rows, expected {rows}",
                    eq.target,
                    eq.table.len()
                )));
            }
            if eq.table.width() != variables[target].domain.len() {
                return Err(SemError::DomainMismatch(format!(
                    "equation for {} has rows over {} values, domain has {}",
                    eq.target,
                    eq.table.width(),
                    variables[target].domain.len()
                )));
            }
            slots[target] = Some(Equation {
                parents,
                parent_sizes,
                table: Arc::new(eq.table.clone()),
            });
        }
        for (k, v) in variables.iter().enumerate() {
            if v.kind == VarKind::Endogenous && slots[k].is_none() {
                return Err(SemError::MissingEquation(v.name.clone()));
            }
        }
        let order = topological_order(&variables, &slots)?;
        Ok(Sem {
            variables: variables.into(),
            equations: slots,
            order,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.variables[index]
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, SemError> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| SemError::UnknownVariable(name.to_string()))
    }

    /// Index of `name` and of `value` within its domain.
    pub fn resolve(&self, name: &str, value: &str) -> Result<(usize, usize), SemError> {
        let var = self.index_of(name)?;
        let val = self.variables[var].domain.index_of(value).ok_or_else(|| {
            SemError::ValueOutOfDomain {
                variable: name.to_string(),
                value: value.to_string(),
            }
        })?;
        Ok((var, val))
    }

    /// Topological order: exogenous variables first, parents before children.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn order_names(&self) -> Vec<&str> {
        self.order
            .iter()
            .map(|&k| self.variables[k].name.as_str())
            .collect()
    }

    /// Exogenous variable indices in declared order.
    pub fn exogenous(&self) -> Vec<usize> {
        (0..self.variables.len())
            .filter(|&k| self.variables[k].kind == VarKind::Exogenous)
            .collect()
    }

    pub fn endogenous(&self) -> Vec<usize> {
        (0..self.variables.len())
            .filter(|&k| self.variables[k].kind == VarKind::Endogenous)
            .collect()
    }

    pub fn exogenous_names(&self) -> Vec<String> {
        self.exogenous()
            .into_iter()
            .map(|k| self.variables[k].name.clone())
            .collect()
    }

    pub fn exogenous_sizes(&self) -> Vec<usize> {
        self.exogenous()
            .into_iter()
            .map(|k| self.variables[k].domain.len())
            .collect()
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        self.equations[var].as_ref().map_or(&[], |e| &e.parents)
    }

    pub fn table(&self, var: usize) -> Option<&KernelTable> {
        self.equations[var].as_ref().map(|e| e.table.as_ref())
    }

    pub(crate) fn equation(&self, var: usize) -> Option<&Equation> {
        self.equations[var].as_ref()
    }

    /// The equations in declared variable order, in name form.
    pub fn equation_specs(&self) -> Vec<EquationSpec> {
        self.equations
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                e.as_ref().map(|e| EquationSpec {
                    target: self.variables[k].name.clone(),
                    parents: e
                        .parents
                        .iter()
                        .map(|&p| self.variables[p].name.clone())
                        .collect(),
                    table: e.table.as_ref().clone(),
                })
            })
            .collect()
    }

    /// True when `ancestor` reaches `var` along parent edges (strictly).
    pub fn is_ancestor(&self, ancestor: usize, var: usize) -> bool {
        let mut stack: Vec<usize> = self.parents(var).to_vec();
        let mut seen = vec![false; self.variables.len()];
        while let Some(p) = stack.pop() {
            if p == ancestor {
                return true;
            }
            if !std::mem::replace(&mut seen[p], true) {
                stack.extend_from_slice(self.parents(p));
            }
        }
        false
    }

    /// The sub-model with `var`'s equation replaced by the constant `value`.
    ///
    /// Defined for every domain value, including ones of probability zero
    /// in the original model. Only endogenous variables can be intervened on.
    pub fn intervene(&self, var: &str, value: &str) -> Result<Sem, SemError> {
        let (k, v) = self.resolve(var, value)?;
        self.intervene_index(k, v)
    }

    pub fn intervene_index(&self, var: usize, value: usize) -> Result<Sem, SemError> {
        if self.variables[var].kind == VarKind::Exogenous {
            return Err(SemError::ExogenousTarget(self.variables[var].name.clone()));
        }
        let width = self.variables[var].domain.len();
        if value >= width {
            return Err(SemError::ValueOutOfDomain {
                variable: self.variables[var].name.clone(),
                value: value.to_string(),
            });
        }
        let mut next = self.clone();
        next.equations[var] = Some(Equation {
            parents: Vec::new(),
            parent_sizes: Vec::new(),
            table: Arc::new(KernelTable::constant(width, value)),
        });
        // Dropping parents cannot invalidate the existing order.
        Ok(next)
    }

    /// Applies several interventions in sequence; later ones win on repeats.
    pub fn intervene_all(&self, interventions: &[(usize, usize)]) -> Result<Sem, SemError> {
        interventions
            .iter()
            .try_fold(self.clone(), |m, &(k, v)| m.intervene_index(k, v))
    }

    pub(crate) fn row_index(&self, eq: &Equation, assignment: &[usize]) -> usize {
        let values: Vec<usize> = eq.parents.iter().map(|&p| assignment[p]).collect();
        mixed_radix_index(&values, &eq.parent_sizes)
    }
}

fn topological_order(
    variables: &[Variable],
    equations: &[Option<Equation>],
) -> Result<Vec<usize>, SemError> {
    let n = variables.len();
    let mut placed = vec![false; n];
    let mut order: Vec<usize> = (0..n)
        .filter(|&k| variables[k].kind == VarKind::Exogenous)
        .collect();
    for &k in &order {
        placed[k] = true;
    }
    while order.len() < n {
        // Smallest declared index whose parents are all placed.
        let next = (0..n).find(|&k| {
            !placed[k]
                && equations[k]
                    .as_ref()
                    .is_some_and(|e| e.parents.iter().all(|&p| placed[p]))
        });
        match next {
            Some(k) => {
                placed[k] = true;
                order.push(k);
            }
            None => {
                let stuck = (0..n).find(|&k| !placed[k]).expect("unplaced variable");
                return Err(SemError::CyclicModel(variables[stuck].name.clone()));
            }
        }
    }
    Ok(order)
}

/// A SEM together with a distribution over its exogenous variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilisticSem {
    model: Sem,
    exogenous: Dist,
}

impl ProbabilisticSem {
    pub fn new(model: Sem, exogenous: Dist) -> Result<Self, SemError> {
        let expected = model.exogenous_names();
        if exogenous.vars() != expected.as_slice() {
            return Err(SemError::DomainMismatch(format!(
                "exogenous distribution is over {:?}, model's exogenous variables are {expected:?}",
                exogenous.vars()
            )));
        }
        let sizes = model.exogenous_sizes();
        if let Some((a, _)) = exogenous
            .iter()
            .find(|(a, _)| a.iter().zip(&sizes).any(|(&v, &s)| v >= s))
        {
            return Err(SemError::DomainMismatch(format!(
                "exogenous assignment {a:?} outside the domains"
            )));
        }
        Ok(ProbabilisticSem { model, exogenous })
    }

    pub fn model(&self) -> &Sem {
        &self.model
    }

    pub fn exogenous(&self) -> &Dist {
        &self.exogenous
    }

    /// Same exogenous distribution over a different model with identical
    /// exogenous variables (used for sub-models).
    pub fn with_model(&self, model: Sem) -> Result<Self, SemError> {
        ProbabilisticSem::new(model, self.exogenous.clone())
    }

    pub fn with_exogenous(&self, exogenous: Dist) -> Result<Self, SemError> {
        ProbabilisticSem::new(self.model.clone(), exogenous)
    }
}

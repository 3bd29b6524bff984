//! Mechanism kernels, the canonical `R_i -> D_i -> D -> O` model, and the
//! classic neighbouring-database ratio.

use num_traits::{One, Signed};
use thiserror::Error;

use crate::ratio::{rat, RatioBound, RatioMax, Rational};
use crate::sem::{
    mixed_radix_index, product_assignments, Dist, EquationSpec, FiniteDomain, KernelTable,
    ProbabilisticSem, Sem, SemError, VarKind, Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("truth bias {0} must satisfy 1/2 < q < 1")]
    BiasOutOfRange(Rational),
    #[error("decay ratio {0} must satisfy 0 < r < 1")]
    RatioOutOfRange(Rational),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// A randomized algorithm as an exact table from databases in `D^n` to
/// distributions over a finite output set.
///
/// Databases are indexed lexicographically with the first data point most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismKernel {
    n: usize,
    data_domain: FiniteDomain,
    null: usize,
    output_domain: FiniteDomain,
    rows: Vec<Vec<Rational>>,
}

impl MechanismKernel {
    pub fn new(
        n: usize,
        data_domain: FiniteDomain,
        null: &str,
        output_domain: FiniteDomain,
        rows: Vec<Vec<Rational>>,
    ) -> Result<Self, MechanismError> {
        if n == 0 {
            return Err(MechanismError::InvalidKernel(
                "a kernel needs at least one data point".into(),
            ));
        }
        let null = data_domain.index_of(null).ok_or_else(|| {
            MechanismError::InvalidKernel(format!("null value {null} is not in the data domain"))
        })?;
        let expected = data_domain.len().pow(n as u32);
        if rows.len() != expected {
            return Err(MechanismError::InvalidKernel(format!(
                "{} rows for {expected} databases",
                rows.len()
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != output_domain.len() {
                return Err(MechanismError::InvalidKernel(format!(
                    "row {k} has {} entries for {} outputs",
                    row.len(),
                    output_domain.len()
                )));
            }
            if row.iter().any(Signed::is_negative) {
                return Err(MechanismError::InvalidKernel(format!(
                    "row {k} has a negative entry"
                )));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(MechanismError::InvalidKernel(format!(
                    "row {k} sums to {sum}, not 1"
                )));
            }
        }
        Ok(MechanismKernel {
            n,
            data_domain,
            null,
            output_domain,
            rows,
        })
    }

    /// Builds a kernel by evaluating `row` on every database.
    pub fn from_fn(
        n: usize,
        data_domain: FiniteDomain,
        null: &str,
        output_domain: FiniteDomain,
        row: impl Fn(&[usize]) -> Vec<Rational>,
    ) -> Result<Self, MechanismError> {
        let sizes = vec![data_domain.len(); n];
        let rows = product_assignments(&sizes).iter().map(|d| row(d)).collect();
        MechanismKernel::new(n, data_domain, null, output_domain, rows)
    }

    /// Every database gets the same output distribution.
    pub fn constant(
        n: usize,
        data_domain: FiniteDomain,
        null: &str,
        output_domain: FiniteDomain,
        row: Vec<Rational>,
    ) -> Result<Self, MechanismError> {
        MechanismKernel::from_fn(n, data_domain, null, output_domain, |_| row.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data_domain(&self) -> &FiniteDomain {
        &self.data_domain
    }

    pub fn output_domain(&self) -> &FiniteDomain {
        &self.output_domain
    }

    pub fn null(&self) -> usize {
        self.null
    }

    pub fn null_value(&self) -> &str {
        self.data_domain.value(self.null)
    }

    pub fn database_count(&self) -> usize {
        self.rows.len()
    }

    /// All databases in enumeration order.
    pub fn databases(&self) -> Vec<Vec<usize>> {
        product_assignments(&vec![self.data_domain.len(); self.n])
    }

    pub fn database_index(&self, database: &[usize]) -> usize {
        mixed_radix_index(database, &vec![self.data_domain.len(); self.n])
    }

    pub fn row(&self, database: &[usize]) -> &[Rational] {
        &self.rows[self.database_index(database)]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn prob(&self, database: &[usize], output: usize) -> &Rational {
        &self.row(database)[output]
    }

    /// `(v_1,...,v_n)` rendering of a database.
    pub fn database_label(&self, database: &[usize]) -> String {
        let parts: Vec<&str> = database
            .iter()
            .map(|&v| self.data_domain.value(v))
            .collect();
        format!("({})", parts.join(","))
    }
}

fn pos_neg_null() -> FiniteDomain {
    FiniteDomain::new(["pos", "neg", "null"]).expect("static domain")
}

/// Per-respondent randomized response over `{pos, neg, null}^n`.
///
/// A respondent holding `pos` or `neg` reports the truth with probability
/// `q` and the opposite answer otherwise. A `null` respondent carries no
/// information and answers with a fair coin. Reports are independent
/// across respondents, so rows are products of the per-respondent rows and
/// the output set is `{pos, neg}^n`.
pub fn randomized_response_kernel(
    n: usize,
    q: Rational,
) -> Result<MechanismKernel, MechanismError> {
    if q <= rat(1, 2) || q >= Rational::one() {
        return Err(MechanismError::BiasOutOfRange(q));
    }
    let reports = product_assignments(&vec![2; n]);
    let labels: Vec<String> = reports
        .iter()
        .map(|r| {
            r.iter()
                .map(|&b| if b == 0 { "pos" } else { "neg" })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let output = FiniteDomain::new(labels)?;
    let one_minus_q = Rational::one() - &q;
    let single = |truth: usize, report: usize| -> Rational {
        match truth {
            2 => rat(1, 2),
            t if t == report => q.clone(),
            _ => one_minus_q.clone(),
        }
    };
    MechanismKernel::from_fn(n, pos_neg_null(), "null", output, |db| {
        reports
            .iter()
            .map(|r| db.iter().zip(r).map(|(&t, &o)| single(t, o)).product())
            .collect()
    })
}

/// Count of `pos` entries plus two-sided geometric noise, truncated to
/// `{0..n}`.
///
/// Interior outputs get `(1-r)/(1+r) * r^|o-c|`; the tail mass beyond each
/// end is folded onto the boundary, giving `r^c/(1+r)` at 0 and
/// `r^(n-c)/(1+r)` at `n`. Neighbouring counts then differ by a factor of at
/// most `1/r` at every output.
pub fn geometric_count_kernel(n: usize, r: Rational) -> Result<MechanismKernel, MechanismError> {
    if !r.is_positive() || r >= Rational::one() {
        return Err(MechanismError::RatioOutOfRange(r));
    }
    let output = FiniteDomain::new((0..=n).map(|o| o.to_string()))?;
    let one = Rational::one();
    let interior = (&one - &r) / (&one + &r);
    let pow = |k: usize| -> Rational { (0..k).fold(Rational::one(), |acc, _| acc * &r) };
    MechanismKernel::from_fn(n, pos_neg_null(), "null", output, |db| {
        let c = db.iter().filter(|&&v| v == 0).count();
        (0..=n)
            .map(|o| {
                if o == 0 {
                    pow(c) / (&one + &r)
                } else if o == n {
                    pow(n - c) / (&one + &r)
                } else {
                    &interior * pow(o.abs_diff(c))
                }
            })
            .collect()
    })
}

fn zero_one_two() -> FiniteDomain {
    FiniteDomain::new(["0", "1", "2"]).expect("static domain")
}

fn zero_one() -> FiniteDomain {
    FiniteDomain::new(["0", "1"]).expect("static domain")
}

/// Two data points over `{0,1,2}`: `(2,2)` always outputs 0, every other
/// database outputs a fair coin. Violates the classic definition only at a
/// database where both points are 2.
pub fn prop7_counterexample_kernel() -> MechanismKernel {
    MechanismKernel::from_fn(2, zero_one_two(), "0", zero_one(), |db| {
        if db == [2, 2] {
            vec![rat(1, 1), rat(0, 1)]
        } else {
            vec![rat(1, 2), rat(1, 2)]
        }
    })
    .expect("static kernel")
}

/// One data point over `{0,1,2}`: inputs 0 and 1 output a fair coin,
/// input 2 always outputs 0.
pub fn appendix_a_counterexample_kernel() -> MechanismKernel {
    MechanismKernel::from_fn(1, zero_one_two(), "0", zero_one(), |db| {
        if db[0] == 2 {
            vec![rat(1, 1), rat(0, 1)]
        } else {
            vec![rat(1, 2), rat(1, 2)]
        }
    })
    .expect("static kernel")
}

/// A neighbouring pair `(d, d with coordinate index set to alternative)` and
/// an output at which their probabilities were compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborWitness {
    pub index: usize,
    pub database: Vec<usize>,
    pub alternative: usize,
    pub output: usize,
}

impl NeighborWitness {
    pub fn neighbor(&self) -> Vec<usize> {
        let mut d = self.database.clone();
        d[self.index] = self.alternative;
        d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicBound {
    pub bound: RatioBound,
    pub witness: Option<NeighborWitness>,
}

/// Supremum of `Fr[A(d)=o] / Fr[A(d')=o]` over databases `d, d'` differing
/// in one coordinate and all outputs `o`.
///
/// `0/0` comparisons are vacuous and `p/0` is infinite. The witness is the
/// first maximizer in enumeration order: databases lexicographically, then
/// coordinate, then replacement value, then output.
pub fn classic_epsilon(kernel: &MechanismKernel) -> ClassicBound {
    let mut best = RatioMax::new();
    let m = kernel.data_domain().len();
    for d in kernel.databases() {
        let row = kernel.row(&d);
        for i in 0..kernel.n() {
            for v in (0..m).filter(|&v| v != d[i]) {
                let mut other = d.clone();
                other[i] = v;
                let alt = kernel.row(&other);
                for (o, (p, q)) in row.iter().zip(alt).enumerate() {
                    best.observe(p, q, || NeighborWitness {
                        index: i,
                        database: d.clone(),
                        alternative: v,
                        output: o,
                    });
                }
            }
        }
    }
    ClassicBound {
        bound: best.best,
        witness: best.witness,
    }
}

pub fn attribute_name(i: usize) -> String {
    format!("R_{}", i + 1)
}

pub fn data_point_name(i: usize) -> String {
    format!("D_{}", i + 1)
}

pub const DATABASE: &str = "D";
pub const OUTPUT: &str = "O";

/// The kernel wrapped into the SEM `R_i -> D_i -> D -> O`.
///
/// Attributes `R_i` are exogenous unless an attribute equation assigns them
/// (for example `R_2 := R_1`). Each `D_i := R_i`, `D := (D_1..D_n)` and
/// `O := A(D)`. No `D_i` is a parent of another `D_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    kernel: MechanismKernel,
    attribute_equations: Vec<EquationSpec>,
    sem: Sem,
}

impl CanonicalModel {
    pub fn new(
        kernel: MechanismKernel,
        attribute_equations: Vec<EquationSpec>,
    ) -> Result<Self, MechanismError> {
        let n = kernel.n();
        let data = kernel.data_domain().clone();
        let m = data.len();
        let r_names: Vec<String> = (0..n).map(attribute_name).collect();
        for eq in &attribute_equations {
            for name in std::iter::once(&eq.target).chain(&eq.parents) {
                if !r_names.contains(name) {
                    return Err(MechanismError::InvalidKernel(format!(
                        "attribute equations may only mention R_1..R_{n}, found {name}"
                    )));
                }
            }
        }
        let assigned = |name: &String| attribute_equations.iter().any(|e| &e.target == name);
        let mut variables = Vec::with_capacity(2 * n + 2);
        for name in &r_names {
            let kind = if assigned(name) {
                VarKind::Endogenous
            } else {
                VarKind::Exogenous
            };
            variables.push(Variable {
                name: name.clone(),
                kind,
                domain: data.clone(),
            });
        }
        for i in 0..n {
            variables.push(Variable {
                name: data_point_name(i),
                kind: VarKind::Endogenous,
                domain: data.clone(),
            });
        }
        let db_labels: Vec<String> = kernel
            .databases()
            .iter()
            .map(|d| kernel.database_label(d))
            .collect();
        variables.push(Variable {
            name: DATABASE.into(),
            kind: VarKind::Endogenous,
            domain: FiniteDomain::new(db_labels)?,
        });
        variables.push(Variable {
            name: OUTPUT.into(),
            kind: VarKind::Endogenous,
            domain: kernel.output_domain().clone(),
        });

        let mut equations = attribute_equations.clone();
        for i in 0..n {
            equations.push(EquationSpec::copy(data_point_name(i), attribute_name(i), m));
        }
        let rows = kernel.database_count();
        equations.push(EquationSpec::new(
            DATABASE,
            (0..n).map(data_point_name).collect(),
            KernelTable::deterministic(rows, rows, |k| k),
        ));
        equations.push(EquationSpec::new(
            OUTPUT,
            vec![DATABASE.to_string()],
            KernelTable::from_dense(kernel.rows().to_vec())?,
        ));
        let sem = Sem::new(variables, equations)?;
        Ok(CanonicalModel {
            kernel,
            attribute_equations,
            sem,
        })
    }

    pub fn kernel(&self) -> &MechanismKernel {
        &self.kernel
    }

    pub fn attribute_equations(&self) -> &[EquationSpec] {
        &self.attribute_equations
    }

    pub fn sem(&self) -> &Sem {
        &self.sem
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn attribute_index(&self, i: usize) -> usize {
        i
    }

    pub fn data_point_index(&self, i: usize) -> usize {
        self.n() + i
    }

    pub fn database_index(&self) -> usize {
        2 * self.n()
    }

    pub fn output_index(&self) -> usize {
        2 * self.n() + 1
    }

    pub fn exogenous_names(&self) -> Vec<String> {
        self.sem.exogenous_names()
    }

    /// Pairs the model with a distribution over its exogenous attributes.
    pub fn with_population(&self, exogenous: Dist) -> Result<ProbabilisticSem, MechanismError> {
        Ok(ProbabilisticSem::new(self.sem.clone(), exogenous)?)
    }

    /// Uniform distribution over the exogenous attributes.
    pub fn uniform_population(&self) -> Dist {
        let names = self.exogenous_names();
        let sizes = vec![self.kernel.data_domain().len(); names.len()];
        Dist::uniform(names, &sizes)
    }

    /// Reads a distribution over the data points `D_1..D_n` as one over the
    /// attributes; only valid without attribute equations.
    pub fn population_from_data_points(&self, p: &Dist) -> Result<Dist, MechanismError> {
        if !self.attribute_equations.is_empty() {
            return Err(MechanismError::InvalidKernel(
                "data-point populations need a model without attribute equations".into(),
            ));
        }
        let expected: Vec<String> = (0..self.n()).map(data_point_name).collect();
        if p.vars() != expected.as_slice() {
            return Err(MechanismError::InvalidKernel(format!(
                "population must be over {expected:?}"
            )));
        }
        Ok(p.renamed(self.exogenous_names()))
    }
}

/// Realizes the canonical model for `kernel` with the given attribute
/// equations and exogenous distribution.
pub fn as_sem(
    kernel: &MechanismKernel,
    attribute_equations: Vec<EquationSpec>,
    exogenous: Dist,
) -> Result<ProbabilisticSem, MechanismError> {
    CanonicalModel::new(kernel.clone(), attribute_equations)?.with_population(exogenous)
}

/// Marginal of the lifted canonical model over `D_1..D_n`.
pub fn data_point_distribution(psem: &ProbabilisticSem, n: usize) -> Dist {
    let positions: Vec<usize> = (n..2 * n).collect();
    psem.lift().marginal(&positions)
}

#[cfg(test)]
mod tests;

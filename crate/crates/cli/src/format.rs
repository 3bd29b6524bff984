//! The input file format: JSON with exact rationals written as strings.
//!
//! ```text
//! file        := { "kind": "mechanism" | "sem" | "distribution" | "composition", ... }
//!                (the "kind" of a file and the "type" of a kernel must come first)
//! rational    := "p/q"                      (a JSON string; numbers are rejected)
//! mechanism   := kernel, [target_ratio], [attribute_equations], [population], [description]
//! kernel      := { "type": "table", n, data_domain, null, output_domain, rows }
//!              | { "type": "constant", n, data_domain, null, output_domain, row }
//!              | { "type": "randomized_response", n, q }
//!              | { "type": "geometric_count", n, r }
//!              | { "type": "prop7_counterexample" }
//!              | { "type": "appendix_a_counterexample" }
//! sem         := variables, equations, [exogenous], [description]
//! variable    := { name, kind: "exogenous" | "endogenous", domain: [label] }
//! equation    := { target, parents: [name], table: [[rational]] }
//! distribution:= vars: [name], entries: [{ values: [label], p: rational }]
//! composition := interface: { x, y1, y2 }, stage1: sem, stage2: sem, ratio1, ratio2
//! ```
//!
//! Equation tables have one row per parent assignment, row-major with the
//! first parent most significant, and one column per target value.

use std::fmt;

use causaldp::mechanism::{
    appendix_a_counterexample_kernel, attribute_name, data_point_name, geometric_count_kernel,
    prop7_counterexample_kernel, randomized_response_kernel, CanonicalModel, MechanismKernel,
};
use causaldp::sem::{
    Dist, EquationSpec, FiniteDomain, KernelTable, ProbabilisticSem, Sem, VarKind, Variable,
};
use causaldp::{format_rational, parse_rational, Rational};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// An exact rational in `"p/q"` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

struct RatVisitor;

impl<'de> Visitor<'de> for RatVisitor {
    type Value = Rat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational string such as \"1/2\"")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
        parse_rational(v).map(Rat).map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
        Err(E::custom(format!(
            "number {v} is not a rational; write \"{v}/1\""
        )))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
        Err(E::custom(format!(
            "number {v} is not a rational; write \"{v}/1\""
        )))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
        Err(E::custom(format!(
            "number {v} is not allowed; write rationals as strings such as \"1/2\""
        )))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

fn rats(v: &[Rat]) -> Vec<Rational> {
    v.iter().map(|r| r.0.clone()).collect()
}

fn to_rats(v: &[Rational]) -> Vec<Rat> {
    v.iter().cloned().map(Rat).collect()
}

/// Any input file. The `kind` tag must be the first field so that errors
/// inside the body keep their line and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputFile {
    Mechanism(MechanismFile),
    Sem(SemFile),
    Distribution(DistributionFile),
    Composition(CompositionFile),
}

/// Reads the first key of a map, which must be `tag`, and its value.
fn read_tag<'de, A: MapAccess<'de>>(map: &mut A, tag: &'static str) -> Result<String, A::Error> {
    match map.next_key::<String>()? {
        Some(k) if k == tag => map.next_value(),
        Some(k) => Err(de::Error::custom(format!(
            "`{tag}` must be the first field, found `{k}`"
        ))),
        None => Err(de::Error::missing_field(tag)),
    }
}

/// Deserializes the rest of a map, after its tag, as `T`.
fn rest<'de, T: Deserialize<'de>, A: MapAccess<'de>>(map: A) -> Result<T, A::Error> {
    T::deserialize(de::value::MapAccessDeserializer::new(map))
}

fn no_rest<'de, A: MapAccess<'de>>(mut map: A) -> Result<(), A::Error> {
    match map.next_key::<String>()? {
        Some(k) => Err(de::Error::unknown_field(&k, &[])),
        None => Ok(()),
    }
}

struct InputFileVisitor;

impl<'de> Visitor<'de> for InputFileVisitor {
    type Value = InputFile;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object starting with \"kind\"")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<InputFile, A::Error> {
        const KINDS: &[&str] = &["mechanism", "sem", "distribution", "composition"];
        match read_tag(&mut map, "kind")?.as_str() {
            "mechanism" => rest(map).map(InputFile::Mechanism),
            "sem" => rest(map).map(InputFile::Sem),
            "distribution" => rest(map).map(InputFile::Distribution),
            "composition" => rest(map).map(InputFile::Composition),
            other => Err(de::Error::unknown_variant(other, KINDS)),
        }
    }
}

impl<'de> Deserialize<'de> for InputFile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<InputFile, D::Error> {
        d.deserialize_map(InputFileVisitor)
    }
}

impl InputFile {
    pub fn kind(&self) -> &'static str {
        match self {
            InputFile::Mechanism(_) => "mechanism",
            InputFile::Sem(_) => "sem",
            InputFile::Distribution(_) => "distribution",
            InputFile::Composition(_) => "composition",
        }
    }

    pub fn description(&self) -> Option<&str> {
        match self {
            InputFile::Mechanism(f) => f.description.as_deref(),
            InputFile::Sem(f) => f.description.as_deref(),
            InputFile::Distribution(f) => f.description.as_deref(),
            InputFile::Composition(f) => f.description.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ratio: Option<Rat>,
    pub kernel: KernelFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attribute_equations: Vec<EquationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<DistributionFile>,
}

/// A kernel, tagged by `type`, which must be its first field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelFile {
    Table(TableKernel),
    Constant(ConstantKernel),
    RandomizedResponse(RandomizedResponseKernel),
    GeometricCount(GeometricKernel),
    Prop7Counterexample,
    AppendixACounterexample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableKernel {
    pub n: usize,
    pub data_domain: Vec<String>,
    pub null: String,
    pub output_domain: Vec<String>,
    pub rows: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantKernel {
    pub n: usize,
    pub data_domain: Vec<String>,
    pub null: String,
    pub output_domain: Vec<String>,
    pub row: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizedResponseKernel {
    pub n: usize,
    pub q: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricKernel {
    pub n: usize,
    pub r: Rat,
}

struct KernelFileVisitor;

impl<'de> Visitor<'de> for KernelFileVisitor {
    type Value = KernelFile;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object starting with \"type\"")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<KernelFile, A::Error> {
        const TYPES: &[&str] = &[
            "table",
            "constant",
            "randomized_response",
            "geometric_count",
            "prop7_counterexample",
            "appendix_a_counterexample",
        ];
        match read_tag(&mut map, "type")?.as_str() {
            "table" => rest(map).map(KernelFile::Table),
            "constant" => rest(map).map(KernelFile::Constant),
            "randomized_response" => rest(map).map(KernelFile::RandomizedResponse),
            "geometric_count" => rest(map).map(KernelFile::GeometricCount),
            "prop7_counterexample" => no_rest(map).map(|_| KernelFile::Prop7Counterexample),
            "appendix_a_counterexample" => {
                no_rest(map).map(|_| KernelFile::AppendixACounterexample)
            }
            other => Err(de::Error::unknown_variant(other, TYPES)),
        }
    }
}

impl<'de> Deserialize<'de> for KernelFile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<KernelFile, D::Error> {
        d.deserialize_map(KernelFileVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindFile {
    Exogenous,
    Endogenous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableFile {
    pub name: String,
    pub kind: KindFile,
    pub domain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationFile {
    pub target: String,
    pub parents: Vec<String>,
    pub table: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub variables: Vec<VariableFile>,
    pub equations: Vec<EquationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exogenous: Option<DistributionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub values: Vec<String>,
    pub p: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub vars: Vec<String>,
    pub entries: Vec<EntryFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceFile {
    pub x: String,
    pub y1: String,
    pub y2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub interface: InterfaceFile,
    pub stage1: SemFile,
    pub stage2: SemFile,
    pub ratio1: Rat,
    pub ratio2: Rat,
}

pub fn parse_input(input: &str, text: &str) -> Result<InputFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        input: input.to_string(),
        message: e.to_string(),
    })
}

/// Pretty JSON with a trailing newline; field order follows the structs.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn invalid(input: &str, path: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Validation {
        input: input.to_string(),
        path: path.into(),
        message: message.to_string(),
    }
}

fn domain(values: &[String]) -> Result<FiniteDomain, causaldp::sem::SemError> {
    FiniteDomain::new(values.iter().cloned())
}

impl KernelFile {
    pub fn build(&self) -> Result<MechanismKernel, String> {
        let kernel = match self {
            KernelFile::Table(TableKernel {
                n,
                data_domain,
                null,
                output_domain,
                rows,
            }) => MechanismKernel::new(
                *n,
                domain(data_domain).map_err(|e| e.to_string())?,
                null,
                domain(output_domain).map_err(|e| e.to_string())?,
                rows.iter().map(|r| rats(r)).collect(),
            ),
            KernelFile::Constant(ConstantKernel {
                n,
                data_domain,
                null,
                output_domain,
                row,
            }) => MechanismKernel::constant(
                *n,
                domain(data_domain).map_err(|e| e.to_string())?,
                null,
                domain(output_domain).map_err(|e| e.to_string())?,
                rats(row),
            ),
            KernelFile::RandomizedResponse(RandomizedResponseKernel { n, q }) => {
                randomized_response_kernel(*n, q.0.clone())
            }
            KernelFile::GeometricCount(GeometricKernel { n, r }) => {
                geometric_count_kernel(*n, r.0.clone())
            }
            KernelFile::Prop7Counterexample => Ok(prop7_counterexample_kernel()),
            KernelFile::AppendixACounterexample => Ok(appendix_a_counterexample_kernel()),
        };
        kernel.map_err(|e| e.to_string())
    }

    /// The kernel written out as an explicit table.
    pub fn table(kernel: &MechanismKernel) -> KernelFile {
        KernelFile::Table(TableKernel {
            n: kernel.n(),
            data_domain: kernel.data_domain().values().to_vec(),
            null: kernel.null_value().to_string(),
            output_domain: kernel.output_domain().values().to_vec(),
            rows: kernel.rows().iter().map(|r| to_rats(r)).collect(),
        })
    }
}

impl EquationFile {
    pub fn build(&self) -> Result<EquationSpec, String> {
        let rows = self.table.iter().map(|r| rats(r)).collect();
        let table = KernelTable::from_dense(rows).map_err(|e| e.to_string())?;
        Ok(EquationSpec::new(
            self.target.clone(),
            self.parents.clone(),
            table,
        ))
    }

    pub fn from_spec(spec: &EquationSpec) -> EquationFile {
        EquationFile {
            target: spec.target.clone(),
            parents: spec.parents.clone(),
            table: spec.table.dense_rows().iter().map(|r| to_rats(r)).collect(),
        }
    }
}

impl DistributionFile {
    /// Resolves labels to indices using each variable's domain.
    pub fn build(&self, domain_of: impl Fn(&str) -> Option<FiniteDomain>) -> Result<Dist, String> {
        let domains = self
            .vars
            .iter()
            .map(|v| domain_of(v).ok_or_else(|| format!("unknown variable {v}")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            if e.values.len() != domains.len() {
                return Err(format!(
                    "entry {k} has {} values for {} variables",
                    e.values.len(),
                    domains.len()
                ));
            }
            let idx = e
                .values
                .iter()
                .zip(&domains)
                .zip(&self.vars)
                .map(|((label, d), var)| {
                    d.index_of(label)
                        .ok_or_else(|| format!("entry {k}: `{label}` is not a value of {var}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            entries.push((idx, e.p.0.clone()));
        }
        Dist::new(self.vars.clone(), entries).map_err(|e| e.to_string())
    }

    pub fn from_dist(dist: &Dist, domains: &[&FiniteDomain]) -> DistributionFile {
        DistributionFile {
            description: None,
            vars: dist.vars().to_vec(),
            entries: dist
                .iter()
                .map(|(a, w)| EntryFile {
                    values: a
                        .iter()
                        .zip(domains)
                        .map(|(&v, d)| d.value(v).to_string())
                        .collect(),
                    p: Rat(w.clone()),
                })
                .collect(),
        }
    }
}

fn sem_domain(sem: &Sem) -> impl Fn(&str) -> Option<FiniteDomain> + '_ {
    move |name| {
        sem.index_of(name)
            .ok()
            .map(|k| sem.variable(k).domain.clone())
    }
}

impl SemFile {
    pub fn build(&self, input: &str) -> Result<(Sem, Option<Dist>), CliError> {
        let variables = self
            .variables
            .iter()
            .enumerate()
            .map(|(k, v)| {
                Ok(Variable {
                    name: v.name.clone(),
                    kind: match v.kind {
                        KindFile::Exogenous => VarKind::Exogenous,
                        KindFile::Endogenous => VarKind::Endogenous,
                    },
                    domain: domain(&v.domain)
                        .map_err(|e| invalid(input, format!("variables[{k}]"), e))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let equations = self
            .equations
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.build()
                    .map_err(|m| invalid(input, format!("equations[{k}]"), m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sem = Sem::new(variables, equations).map_err(|e| invalid(input, "equations", e))?;
        let exogenous = match &self.exogenous {
            None => None,
            Some(d) => {
                let dist = d
                    .build(sem_domain(&sem))
                    .map_err(|m| invalid(input, "exogenous", m))?;
                ProbabilisticSem::new(sem.clone(), dist.clone())
                    .map_err(|e| invalid(input, "exogenous", e))?;
                Some(dist)
            }
        };
        Ok((sem, exogenous))
    }

    pub fn from_sem(sem: &Sem, exogenous: Option<&Dist>) -> SemFile {
        SemFile {
            description: None,
            variables: sem
                .variables()
                .iter()
                .map(|v| VariableFile {
                    name: v.name.clone(),
                    kind: match v.kind {
                        VarKind::Exogenous => KindFile::Exogenous,
                        VarKind::Endogenous => KindFile::Endogenous,
                    },
                    domain: v.domain.values().to_vec(),
                })
                .collect(),
            equations: sem
                .equation_specs()
                .iter()
                .map(EquationFile::from_spec)
                .collect(),
            exogenous: exogenous.map(|d| {
                let domains: Vec<FiniteDomain> = d
                    .vars()
                    .iter()
                    .map(|v| sem_domain(sem)(v).expect("exogenous variable"))
                    .collect();
                DistributionFile::from_dist(d, &domains.iter().collect::<Vec<_>>())
            }),
        }
    }
}

/// A parsed mechanism file with its canonical model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    pub description: Option<String>,
    pub target_ratio: Option<Rational>,
    pub model: CanonicalModel,
    /// Over the model's exogenous attributes.
    pub population: Option<Dist>,
}

impl Mechanism {
    pub fn kernel(&self) -> &MechanismKernel {
        self.model.kernel()
    }

    pub fn attribute_equations(&self) -> &[EquationSpec] {
        self.model.attribute_equations()
    }

    /// Domain of the attribute or data point named `name`, if any.
    pub fn data_domain_of(&self, name: &str) -> Option<FiniteDomain> {
        let n = self.kernel().n();
        (0..n)
            .any(|i| name == attribute_name(i) || name == data_point_name(i))
            .then(|| self.kernel().data_domain().clone())
    }

    pub fn to_file(&self) -> MechanismFile {
        let data = self.kernel().data_domain();
        MechanismFile {
            description: self.description.clone(),
            target_ratio: self.target_ratio.clone().map(Rat),
            kernel: KernelFile::table(self.kernel()),
            attribute_equations: self
                .attribute_equations()
                .iter()
                .map(EquationFile::from_spec)
                .collect(),
            population: self.population.as_ref().map(|p| {
                let domains = vec![data; p.vars().len()];
                DistributionFile::from_dist(p, &domains)
            }),
        }
    }
}

impl MechanismFile {
    pub fn build(&self, input: &str) -> Result<Mechanism, CliError> {
        let kernel = self
            .kernel
            .build()
            .map_err(|m| invalid(input, "kernel", m))?;
        let equations = self
            .attribute_equations
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.build()
                    .map_err(|m| invalid(input, format!("attribute_equations[{k}]"), m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = CanonicalModel::new(kernel, equations)
            .map_err(|e| invalid(input, "attribute_equations", e))?;
        let mut mechanism = Mechanism {
            description: self.description.clone(),
            target_ratio: self.target_ratio.as_ref().map(|r| r.0.clone()),
            model,
            population: None,
        };
        if let Some(p) = &self.population {
            let dist = p
                .build(|v| mechanism.data_domain_of(v))
                .map_err(|m| invalid(input, "population", m))?;
            mechanism
                .model
                .with_population(dist.clone())
                .map_err(|e| invalid(input, "population", e))?;
            mechanism.population = Some(dist);
        }
        Ok(mechanism)
    }
}

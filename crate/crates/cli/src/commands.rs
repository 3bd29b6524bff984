//! Subcommand implementations. Each returns the report and its exit code;
//! printing is left to the caller.

use std::path::Path;

use causaldp::adversary::{posterior, posterior_under_intervention, Prior};
use causaldp::brp::{brp_bound, check_composition, compose_sequential, BrpError, Interface};
use causaldp::checkers::{
    check_associative, check_causal, check_classic, check_strong_adversary_universal,
    check_universal_causal, CheckReport, DefinitionId,
};
use causaldp::falsify::{falsify_bayesian0, FalsifyOutcome};
use causaldp::mechanism::{classic_epsilon, data_point_distribution, data_point_name};
use causaldp::sem::Dist;
use causaldp::{format_rational, Rational};

use crate::error::CliError;
use crate::format::{
    parse_input, to_json, CompositionFile, DistributionFile, EntryFile, InputFile, Mechanism, Rat,
};
use crate::report::{
    check_entry, composition_entry, effect_entry, render_text, CompositionEntry, Entry,
    EpsilonEntry, FalsifyEntry, InputDigest, PosteriorEntry, ReportFile,
};
use crate::scenarios;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    #[default]
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: ReportFile,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(&self.report),
            Format::Text => render_text(&self.report),
        }
    }
}

pub const PASS: i32 = 0;
pub const FAIL: i32 = 1;
pub const NOT_FOUND: i32 = 2;

const OUTPUT: &str = "O";

/// A loaded input: its display name, raw text and parsed contents.
struct Loaded {
    name: String,
    text: String,
    file: InputFile,
}

fn load(arg: &str) -> Result<Loaded, CliError> {
    let text = scenarios::load(arg)?;
    let file = parse_input(arg, &text)?;
    Ok(Loaded {
        name: arg.to_string(),
        text,
        file,
    })
}

impl Loaded {
    fn digest(&self) -> InputDigest {
        InputDigest::of(&self.name, &self.text)
    }

    fn mechanism(&self) -> Result<Mechanism, CliError> {
        match &self.file {
            InputFile::Mechanism(m) => m.build(&self.name),
            other => Err(CliError::NotApplicable(format!(
                "{} is a {} file; this command needs a mechanism",
                self.name,
                other.kind()
            ))),
        }
    }

    fn distribution(&self) -> Result<&DistributionFile, CliError> {
        match &self.file {
            InputFile::Distribution(d) => Ok(d),
            other => Err(CliError::NotApplicable(format!(
                "{} is a {} file; expected a distribution",
                self.name,
                other.kind()
            ))),
        }
    }
}

fn validation(input: &str, path: &str, message: impl ToString) -> CliError {
    CliError::Validation {
        input: input.to_string(),
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn exit_for(pass: bool) -> i32 {
    if pass {
        PASS
    } else {
        FAIL
    }
}

fn data_point_vars(n: usize) -> Vec<String> {
    (0..n).map(data_point_name).collect()
}

pub fn epsilon(input: &str) -> Result<Outcome, CliError> {
    let loaded = load(input)?;
    let mechanism = loaded.mechanism()?;
    let mut report = ReportFile::new("epsilon");
    report.inputs.push(loaded.digest());
    report.reports.push(epsilon_entry(input, &mechanism));
    Ok(Outcome {
        report,
        exit_code: PASS,
    })
}

fn epsilon_entry(input: &str, mechanism: &Mechanism) -> Entry {
    let kernel = mechanism.kernel();
    let bound = classic_epsilon(kernel);
    Entry::Epsilon(EpsilonEntry {
        input: input.to_string(),
        ratio: bound.bound.to_string(),
        epsilon: bound.bound.epsilon_display(),
        witness: bound.witness.map(|w| {
            let data = kernel.data_domain();
            let neighbor = w.neighbor();
            crate::report::WitnessEntry {
                data_point: data_point_name(w.index),
                database: Some(
                    w.database
                        .iter()
                        .map(|&v| data.value(v).to_string())
                        .collect(),
                ),
                neighbor: Some(
                    neighbor
                        .iter()
                        .map(|&v| data.value(v).to_string())
                        .collect(),
                ),
                value: data.value(w.database[w.index]).to_string(),
                alternative: data.value(w.alternative).to_string(),
                output: kernel.output_domain().value(w.output).to_string(),
                population: "none".to_string(),
            }
        }),
    })
}

/// Where a definition's population came from.
enum PopulationSource<'a> {
    Flag(&'a Loaded),
    Embedded,
}

/// Reads a population file over either the data points or the exogenous
/// attributes of `mechanism`.
fn read_population(mechanism: &Mechanism, loaded: &Loaded) -> Result<Dist, CliError> {
    loaded
        .distribution()?
        .build(|v| mechanism.data_domain_of(v))
        .map_err(|m| validation(&loaded.name, "entries", m))
}

fn is_over_data_points(mechanism: &Mechanism, p: &Dist) -> bool {
    p.vars() == data_point_vars(mechanism.kernel().n()).as_slice()
}

/// The population a definition runs under, over `D_1..D_n` for the
/// associative definitions and over the exogenous attributes otherwise.
fn population_for(
    definition: DefinitionId,
    mechanism: &Mechanism,
    source: &PopulationSource,
) -> Result<Dist, CliError> {
    let (name, raw) = match source {
        PopulationSource::Flag(loaded) => {
            (loaded.name.as_str(), read_population(mechanism, loaded)?)
        }
        PopulationSource::Embedded => (
            "population",
            mechanism
                .population
                .clone()
                .ok_or_else(|| CliError::MissingPopulation(definition.to_string()))?,
        ),
    };
    let model = &mechanism.model;
    if definition.is_associative() {
        if is_over_data_points(mechanism, &raw) {
            return Ok(raw);
        }
        let psem = model
            .with_population(raw)
            .map_err(|e| validation(name, "vars", e))?;
        Ok(data_point_distribution(&psem, mechanism.kernel().n()))
    } else if is_over_data_points(mechanism, &raw) {
        model
            .population_from_data_points(&raw)
            .map_err(|e| validation(name, "vars", e))
    } else {
        model
            .with_population(raw.clone())
            .map_err(|e| validation(name, "vars", e))?;
        Ok(raw)
    }
}

fn run_check(
    definition: DefinitionId,
    mechanism: &Mechanism,
    population: Option<&Dist>,
    target: &Rational,
) -> Result<CheckReport, CliError> {
    let kernel = mechanism.kernel();
    let report = match definition {
        DefinitionId::Classic => check_classic(kernel, target),
        DefinitionId::StrongAdversaryUniversal => check_strong_adversary_universal(kernel, target)?,
        DefinitionId::WholeDbUniversal | DefinitionId::SinglePointUniversal => {
            check_universal_causal(definition, kernel, target)?
        }
        d if d.is_associative() => {
            check_associative(d, kernel, population.expect("population"), target)?
        }
        d => check_causal(
            d,
            kernel,
            mechanism.attribute_equations(),
            population.expect("population"),
            target,
        )?,
    };
    Ok(report)
}

fn target_for(
    what: &str,
    mechanism: &Mechanism,
    flag: Option<&Rational>,
) -> Result<Rational, CliError> {
    flag.cloned()
        .or_else(|| mechanism.target_ratio.clone())
        .ok_or_else(|| CliError::MissingTarget(what.to_string()))
}

pub fn check(
    definition: DefinitionId,
    input: &str,
    target: Option<&Rational>,
    pop: Option<&str>,
) -> Result<Outcome, CliError> {
    let loaded = load(input)?;
    let mechanism = loaded.mechanism()?;
    let target = target_for(definition.as_str(), &mechanism, target)?;
    let mut report = ReportFile::new("check");
    report.inputs.push(loaded.digest());
    let pop_file = pop.map(load).transpose()?;
    let population = if definition.needs_population() {
        let source = match &pop_file {
            Some(l) => PopulationSource::Flag(l),
            None => PopulationSource::Embedded,
        };
        Some(population_for(definition, &mechanism, &source)?)
    } else {
        if pop_file.is_some() {
            return Err(CliError::UnexpectedPopulation(definition.to_string()));
        }
        None
    };
    if let Some(l) = &pop_file {
        report.inputs.push(l.digest());
    }
    let result = run_check(definition, &mechanism, population.as_ref(), &target)?;
    report.reports.push(Entry::Check(check_entry(
        input,
        mechanism.kernel(),
        &result,
    )));
    Ok(Outcome {
        report,
        exit_code: exit_for(result.pass),
    })
}

/// Searches for a population breaking Bayesian₀. When `emit_pop` is given
/// and a population is found, it is also written there as a distribution
/// file that `check bayesian0 --pop` accepts.
pub fn falsify(
    definition: DefinitionId,
    input: &str,
    target: Option<&Rational>,
    budget: usize,
    emit_pop: Option<&Path>,
) -> Result<Outcome, CliError> {
    if definition != DefinitionId::Bayesian0 {
        return Err(CliError::NotApplicable(format!(
            "falsify supports bayesian0 only, not {definition}"
        )));
    }
    if budget == 0 {
        return Err(CliError::NotApplicable(
            "--budget must be at least 1".into(),
        ));
    }
    let loaded = load(input)?;
    let mechanism = loaded.mechanism()?;
    let target = target_for("falsify", &mechanism, target)?;
    let kernel = mechanism.kernel();
    let result = falsify_bayesian0(kernel, &target, budget)?;
    let domains = vec![kernel.data_domain(); kernel.n()];
    let (outcome, population, found_check) = match &result.outcome {
        FalsifyOutcome::Found { population, report } => (
            "found",
            Some(DistributionFile::from_dist(population, &domains)),
            Some(check_entry(input, kernel, report)),
        ),
        FalsifyOutcome::NotFound => ("not_found", None, None),
    };
    if let (Some(path), Some(p)) = (emit_pop, &population) {
        let text = to_json(&InputFile::Distribution(p.clone()));
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let mut report = ReportFile::new("falsify");
    report.inputs.push(loaded.digest());
    report.reports.push(Entry::Falsify(FalsifyEntry {
        input: input.to_string(),
        target_ratio: format_rational(&target),
        budget,
        outcome: outcome.to_string(),
        candidates_tried: result.candidates_tried,
        classic: check_entry(input, kernel, &result.classic),
        population,
        check: found_check,
    }));
    Ok(Outcome {
        report,
        exit_code: if result.found() { PASS } else { NOT_FOUND },
    })
}

/// Parses `D_i=label` or `i=label` (1-based) into a coordinate and value.
fn parse_intervention(mechanism: &Mechanism, spec: &str) -> Result<(usize, usize), CliError> {
    let bad = |m: String| validation(spec, "--intervene", m);
    let (lhs, rhs) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected i=value".into()))?;
    let lhs = lhs.trim();
    let digits = lhs.strip_prefix("D_").unwrap_or(lhs);
    let n = mechanism.kernel().n();
    let i: usize = digits
        .parse()
        .ok()
        .filter(|i| (1..=n).contains(i))
        .ok_or_else(|| bad(format!("data point must be 1..{n}, got {lhs}")))?;
    let value = mechanism
        .kernel()
        .data_domain()
        .index_of(rhs.trim())
        .ok_or_else(|| bad(format!("unknown value {}", rhs.trim())))?;
    Ok((i - 1, value))
}

pub fn posterior_cmd(
    input: &str,
    prior: &str,
    output: &str,
    intervene: Option<&str>,
) -> Result<Outcome, CliError> {
    let loaded = load(input)?;
    let mechanism = loaded.mechanism()?;
    let kernel = mechanism.kernel();
    let prior_file = load(prior)?;
    let credence = read_population(&mechanism, &prior_file)?;
    if !is_over_data_points(&mechanism, &credence) {
        return Err(validation(
            prior,
            "vars",
            format!("a prior must be over {:?}", data_point_vars(kernel.n())),
        ));
    }
    let belief = Prior::new(kernel, credence)?;
    let o = kernel
        .output_domain()
        .index_of(output)
        .ok_or_else(|| validation(output, "--output", "not an output of the mechanism"))?;
    let (dist, intervention) = match intervene {
        Some(spec) => {
            let (i, v) = parse_intervention(&mechanism, spec)?;
            let label = format!("{}={}", data_point_name(i), kernel.data_domain().value(v));
            (
                posterior_under_intervention(kernel, &belief, o, i, v)?,
                Some(label),
            )
        }
        None => (posterior(kernel, &belief, o)?, None),
    };
    let data = kernel.data_domain();
    let table = dist
        .iter()
        .map(|(a, p)| EntryFile {
            values: a.iter().map(|&v| data.value(v).to_string()).collect(),
            p: Rat(p.clone()),
        })
        .collect();
    let mut report = ReportFile::new("posterior");
    report.inputs.push(loaded.digest());
    report.inputs.push(prior_file.digest());
    report.reports.push(Entry::Posterior(PosteriorEntry {
        input: input.to_string(),
        prior: prior.to_string(),
        output: output.to_string(),
        intervention,
        posterior: table,
    }));
    Ok(Outcome {
        report,
        exit_code: PASS,
    })
}

fn composition_report(input: &str, file: &CompositionFile) -> Result<(Entry, bool), CliError> {
    let (m1, _) = file.stage1.build(&format!("{input}: stage1"))?;
    let (m2, _) = file.stage2.build(&format!("{input}: stage2"))?;
    let interface = Interface {
        x: file.interface.x.clone(),
        y1: file.interface.y1.clone(),
        y2: file.interface.y2.clone(),
    };
    let composition = compose_sequential(&m1, &m2, &interface)?;
    let (r1, r2) = (&file.ratio1.0, &file.ratio2.0);
    match check_composition(&composition, r1, r2) {
        Ok(r) => {
            let pass = r.pass;
            Ok((
                Entry::Composition(composition_entry(input, r1, r2, &r)),
                pass,
            ))
        }
        Err(BrpError::PremiseViolated { stage, bound, .. }) => {
            let bound = Some(bound.to_string());
            let (stage1_bound, stage2_bound) = if stage == 1 {
                (bound, None)
            } else {
                (None, bound)
            };
            let entry = CompositionEntry {
                input: input.to_string(),
                ratio1: format_rational(r1),
                ratio2: format_rational(r2),
                target_ratio: format_rational(&(r1 * r2)),
                stage1_bound,
                stage2_bound,
                composed_bound: None,
                premise_violated: Some(stage),
                pass: false,
            };
            Ok((Entry::Composition(entry), false))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn compose(input: &str) -> Result<Outcome, CliError> {
    let loaded = load(input)?;
    let InputFile::Composition(file) = &loaded.file else {
        return Err(CliError::NotApplicable(format!(
            "{input} is a {} file; compose needs a composition",
            loaded.file.kind()
        )));
    };
    let (entry, pass) = composition_report(input, file)?;
    let mut report = ReportFile::new("compose");
    report.inputs.push(loaded.digest());
    report.reports.push(entry);
    Ok(Outcome {
        report,
        exit_code: exit_for(pass),
    })
}

/// One line per bundled file: name, kind and description.
pub fn list_scenarios() -> Result<Vec<(String, String, String)>, CliError> {
    scenarios::BUNDLED
        .iter()
        .map(|(name, text)| {
            let file = parse_input(name, text)?;
            Ok((
                name.to_string(),
                file.kind().to_string(),
                file.description().unwrap_or("").to_string(),
            ))
        })
        .collect()
}

/// Every applicable report for one bundled mechanism: its ratio, every
/// definition that can run (population definitions under the embedded
/// population, when there is one), and the effect bound of the output on
/// each exogenous attribute.
fn mechanism_entries(name: &str, mechanism: &Mechanism) -> Result<Vec<Entry>, CliError> {
    let mut entries = vec![epsilon_entry(name, mechanism)];
    let kernel = mechanism.kernel();
    // Without a declared target, check against the mechanism's own ratio
    // (or 1 when that ratio is infinite).
    let target = mechanism.target_ratio.clone().unwrap_or_else(|| {
        let bound = classic_epsilon(kernel).bound;
        bound
            .as_rational()
            .cloned()
            .unwrap_or_else(|| Rational::from_integer(1.into()))
    });
    for definition in DefinitionId::ALL {
        let population = if definition.needs_population() {
            if mechanism.population.is_none() {
                continue;
            }
            Some(population_for(
                definition,
                mechanism,
                &PopulationSource::Embedded,
            )?)
        } else {
            None
        };
        if definition == DefinitionId::IndependentBayesian0
            && !population.as_ref().is_some_and(Dist::is_product)
        {
            continue;
        }
        let report = run_check(definition, mechanism, population.as_ref(), &target)?;
        entries.push(Entry::Check(check_entry(name, kernel, &report)));
    }
    let sem = mechanism.model.sem();
    let output = OUTPUT;
    for source in mechanism.model.exogenous_names() {
        let bound = brp_bound(sem, &[output], &source)?;
        entries.push(Entry::Effect(effect_entry(
            name,
            sem,
            &[output],
            &source,
            &bound,
        )));
    }
    Ok(entries)
}

/// Runs every bundled mechanism and composition. Distribution files are
/// inputs to other commands and produce no report of their own.
pub fn run_all() -> Result<Outcome, CliError> {
    let mut report = ReportFile::new("scenarios run-all");
    for (name, text) in scenarios::BUNDLED {
        let file = parse_input(name, text)?;
        let entries = match &file {
            InputFile::Mechanism(m) => mechanism_entries(name, &m.build(name)?)?,
            InputFile::Composition(c) => vec![composition_report(name, c)?.0],
            InputFile::Sem(_) | InputFile::Distribution(_) => continue,
        };
        report.inputs.push(InputDigest::of(name, text));
        report.reports.extend(entries);
    }
    Ok(Outcome {
        report,
        exit_code: PASS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use causaldp::rat;

    #[test]
    fn intervention_specs_accept_both_spellings() {
        let loaded = load("ada_byron").unwrap();
        let m = loaded.mechanism().unwrap();
        let null = m.kernel().null_value().to_string();
        assert_eq!(parse_intervention(&m, &format!("D_2={null}")).unwrap().0, 1);
        assert_eq!(parse_intervention(&m, &format!("1={null}")).unwrap().0, 0);
        assert!(parse_intervention(&m, "3=pos").is_err());
        assert!(parse_intervention(&m, "1=maybe").is_err());
    }

    #[test]
    fn universal_definitions_reject_populations() {
        let err = check(
            DefinitionId::Classic,
            "prop7",
            Some(&rat(1, 1)),
            Some("hide2"),
        )
        .unwrap_err();
        assert!(matches!(err, CliError::UnexpectedPopulation(_)));
    }

    #[test]
    fn population_definitions_need_one() {
        let err = check(DefinitionId::Bayesian0, "geometric_n3_r1-2", None, None).unwrap_err();
        assert!(matches!(err, CliError::MissingPopulation(_)));
    }
}

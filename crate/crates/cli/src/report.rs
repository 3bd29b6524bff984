//! Report files: what every command writes, as JSON or text.

use std::fmt::Write as _;

use causaldp::brp::{CompositionReport, EffectBound};
use causaldp::checkers::{CheckReport, PopulationTag, Witness};
use causaldp::mechanism::{data_point_name, MechanismKernel};
use causaldp::sem::Sem;
use causaldp::{format_rational, RatioBound};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::{DistributionFile, EntryFile};

pub const TOOL: &str = "causaldp";

/// Describes the enumeration order that fixes which witness is reported.
pub const ENUMERATION_ORDER: &str = "v1: databases lexicographic in declared value order, then coordinate, then replacement value, then output";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(name: &str, text: &str) -> Self {
        InputDigest {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub enumeration_order: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub reports: Vec<Entry>,
}

impl ReportFile {
    pub fn new(command: impl Into<String>) -> Self {
        ReportFile {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            enumeration_order: ENUMERATION_ORDER.to_string(),
            command: command.into(),
            inputs: Vec::new(),
            reports: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Entry {
    Epsilon(EpsilonEntry),
    Check(CheckEntry),
    Falsify(FalsifyEntry),
    Posterior(PosteriorEntry),
    Effect(EffectEntry),
    Composition(CompositionEntry),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub data_point: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub database: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor: Option<Vec<String>>,
    pub value: String,
    pub alternative: String,
    pub output: String,
    pub population: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonEntry {
    pub input: String,
    pub ratio: String,
    pub epsilon: String,
    pub witness: Option<WitnessEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub input: String,
    pub definition: String,
    pub reduction: String,
    pub target_ratio: String,
    pub achieved: String,
    pub epsilon: String,
    pub pass: bool,
    pub witness: Option<WitnessEntry>,
    pub skipped_comparisons: usize,
    pub cross_checked_queries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsifyEntry {
    pub input: String,
    pub target_ratio: String,
    pub budget: usize,
    pub outcome: String,
    pub candidates_tried: usize,
    pub classic: CheckEntry,
    /// The failing population, in the distribution file format.
    pub population: Option<DistributionFile>,
    pub check: Option<CheckEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosteriorEntry {
    pub input: String,
    pub prior: String,
    pub output: String,
    pub intervention: Option<String>,
    pub posterior: Vec<EntryFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectWitnessEntry {
    pub sink_values: Vec<String>,
    pub value: String,
    pub alternative: String,
    pub exogenous: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectEntry {
    pub input: String,
    pub sinks: Vec<String>,
    pub source: String,
    pub bound: String,
    pub epsilon: String,
    pub witness: Option<EffectWitnessEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionEntry {
    pub input: String,
    pub ratio1: String,
    pub ratio2: String,
    pub target_ratio: String,
    pub stage1_bound: Option<String>,
    pub stage2_bound: Option<String>,
    pub composed_bound: Option<String>,
    pub premise_violated: Option<u8>,
    pub pass: bool,
}

fn labels(kernel: &MechanismKernel, values: &[usize]) -> Vec<String> {
    values
        .iter()
        .map(|&v| kernel.data_domain().value(v).to_string())
        .collect()
}

pub fn population_label(kernel: &MechanismKernel, tag: &PopulationTag) -> String {
    match tag {
        PopulationTag::PointMass(a) => format!("point_mass({})", labels(kernel, a).join(",")),
        other => other.to_string(),
    }
}

pub fn witness_entry(kernel: &MechanismKernel, w: &Witness) -> WitnessEntry {
    let data = kernel.data_domain();
    WitnessEntry {
        data_point: data_point_name(w.index),
        database: w.database.as_ref().map(|d| labels(kernel, d)),
        neighbor: w.neighbor().map(|d| labels(kernel, &d)),
        value: data.value(w.value).to_string(),
        alternative: data.value(w.alternative).to_string(),
        output: kernel.output_domain().value(w.output).to_string(),
        population: population_label(kernel, &w.population),
    }
}

pub fn check_entry(input: &str, kernel: &MechanismKernel, r: &CheckReport) -> CheckEntry {
    CheckEntry {
        input: input.to_string(),
        definition: r.definition.to_string(),
        reduction: r.reduction.clone(),
        target_ratio: format_rational(&r.target_ratio),
        achieved: r.achieved.to_string(),
        epsilon: r.achieved.epsilon_display(),
        pass: r.pass,
        witness: r.witness.as_ref().map(|w| witness_entry(kernel, w)),
        skipped_comparisons: r.skipped_comparisons,
        cross_checked_queries: r.cross_checked_queries,
    }
}

pub fn effect_entry(
    input: &str,
    sem: &Sem,
    sinks: &[&str],
    source: &str,
    e: &EffectBound,
) -> EffectEntry {
    let value_of = |name: &str, v: usize| {
        let k = sem.index_of(name).expect("resolved variable");
        sem.variable(k).domain.value(v).to_string()
    };
    EffectEntry {
        input: input.to_string(),
        sinks: sinks.iter().map(|s| s.to_string()).collect(),
        source: source.to_string(),
        bound: e.bound.to_string(),
        epsilon: e.bound.epsilon_display(),
        witness: e.witness.as_ref().map(|w| EffectWitnessEntry {
            sink_values: sinks
                .iter()
                .zip(&w.sink_values)
                .map(|(s, &v)| value_of(s, v))
                .collect(),
            value: value_of(source, w.value),
            alternative: value_of(source, w.alternative),
            exogenous: w.exogenous.as_ref().map(|a| {
                sem.exogenous_names()
                    .iter()
                    .zip(a)
                    .map(|(name, &v)| value_of(name, v))
                    .collect()
            }),
        }),
    }
}

pub fn composition_entry(
    input: &str,
    ratio1: &causaldp::Rational,
    ratio2: &causaldp::Rational,
    r: &CompositionReport,
) -> CompositionEntry {
    CompositionEntry {
        input: input.to_string(),
        ratio1: format_rational(ratio1),
        ratio2: format_rational(ratio2),
        target_ratio: format_rational(&r.target_ratio),
        stage1_bound: Some(r.stage1.bound.to_string()),
        stage2_bound: Some(r.stage2.bound.to_string()),
        composed_bound: Some(r.composed.bound.to_string()),
        premise_violated: None,
        pass: r.pass,
    }
}

pub fn ratio_string(r: &RatioBound) -> String {
    r.to_string()
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_witness(out: &mut String, w: &WitnessEntry) {
    match (&w.database, &w.neighbor) {
        (Some(d), Some(e)) => {
            let _ = writeln!(
                out,
                "  witness: ({}) vs ({}) at {}, output {}",
                d.join(","),
                e.join(","),
                w.data_point,
                w.output
            );
        }
        _ => {
            let _ = writeln!(
                out,
                "  witness: {}={} vs {}={}, output {}",
                w.data_point, w.value, w.data_point, w.alternative, w.output
            );
        }
    }
    if w.population != "none" {
        let _ = writeln!(out, "  population: {}", w.population);
    }
}

fn render_check(out: &mut String, c: &CheckEntry) {
    let _ = writeln!(
        out,
        "{} {} [{}]: ratio {} (epsilon {}) against target {}",
        pass_word(c.pass),
        c.definition,
        c.input,
        c.achieved,
        c.epsilon,
        c.target_ratio
    );
    let _ = writeln!(out, "  reduction: {}", c.reduction);
    if let Some(w) = &c.witness {
        render_witness(out, w);
    }
    if c.skipped_comparisons > 0 {
        let _ = writeln!(out, "  skipped comparisons: {}", c.skipped_comparisons);
    }
}

/// Human-readable rendering; JSON is the canonical form.
pub fn render_text(report: &ReportFile) -> String {
    let mut out = String::new();
    for e in &report.reports {
        match e {
            Entry::Epsilon(x) => {
                let _ = writeln!(
                    out,
                    "{}: ratio {} (epsilon {})",
                    x.input, x.ratio, x.epsilon
                );
                if let Some(w) = &x.witness {
                    render_witness(&mut out, w);
                }
            }
            Entry::Check(c) => render_check(&mut out, c),
            Entry::Falsify(f) => {
                let _ = writeln!(
                    out,
                    "bayesian0 [{}] at target {}: {} after {} candidates",
                    f.input, f.target_ratio, f.outcome, f.candidates_tried
                );
                if let (Some(p), Some(c)) = (&f.population, &f.check) {
                    let weights: Vec<String> = p
                        .entries
                        .iter()
                        .map(|e| format!("({}): {}", e.values.join(","), format_rational(&e.p.0)))
                        .collect();
                    let _ = writeln!(
                        out,
                        "  population over {}: {}",
                        p.vars.join(","),
                        weights.join("; ")
                    );
                    render_check(&mut out, c);
                }
                render_check(&mut out, &f.classic);
            }
            Entry::Posterior(p) => {
                let given = p
                    .intervention
                    .as_ref()
                    .map_or(String::new(), |i| format!(", do({i})"));
                let _ = writeln!(
                    out,
                    "posterior [{}] given O={}{}:",
                    p.input, p.output, given
                );
                for e in &p.posterior {
                    let _ = writeln!(
                        out,
                        "  ({}): {}",
                        e.values.join(","),
                        format_rational(&e.p.0)
                    );
                }
            }
            Entry::Effect(x) => {
                let _ = writeln!(
                    out,
                    "brp [{}] {} -> <{}>: bound {} (epsilon {})",
                    x.input,
                    x.source,
                    x.sinks.join(","),
                    x.bound,
                    x.epsilon
                );
            }
            Entry::Composition(c) => {
                let _ = writeln!(
                    out,
                    "{} composition [{}]: composed bound {} against {} = {} * {}",
                    pass_word(c.pass),
                    c.input,
                    c.composed_bound.as_deref().unwrap_or("-"),
                    c.target_ratio,
                    c.ratio1,
                    c.ratio2
                );
                if let Some(stage) = c.premise_violated {
                    let _ = writeln!(out, "  stage {stage} exceeds its declared ratio");
                }
            }
        }
    }
    out
}

//! Argument parsing and dispatch.

use std::path::PathBuf;

use causaldp::checkers::DefinitionId;
use causaldp::{parse_rational, Rational};
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{self, Format, Outcome};
use crate::error::CliError;
use crate::format::to_json;

#[derive(Debug, Parser)]
#[command(
    name = "causaldp",
    version,
    about = "Exact checks of privacy definitions on finite mechanisms and causal models"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn definition_arg(s: &str) -> Result<DefinitionId, String> {
    s.parse()
        .map_err(|e: causaldp::checkers::CheckError| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The mechanism's classic ratio e^ε.
    Epsilon { input: String },
    /// Checks one definition at a target ratio.
    Check {
        #[arg(value_parser = definition_arg)]
        definition: DefinitionId,
        input: String,
        /// Target ratio p/q; defaults to the file's target_ratio.
        #[arg(long, value_parser = rational_arg)]
        target_ratio: Option<Rational>,
        /// Population file, over D_1..D_n or the exogenous attributes.
        #[arg(long)]
        pop: Option<String>,
    },
    /// Searches for a population under which the definition fails.
    Falsify {
        #[arg(value_parser = definition_arg)]
        definition: DefinitionId,
        input: String,
        #[arg(long, value_parser = rational_arg)]
        target_ratio: Option<Rational>,
        /// Largest common denominator of candidate weights.
        #[arg(long, default_value_t = 4)]
        budget: usize,
        /// Also write a found population to this file.
        #[arg(long)]
        emit_pop: Option<PathBuf>,
    },
    /// Posterior over databases after observing an output.
    Posterior {
        input: String,
        prior: String,
        #[arg(long)]
        output: String,
        /// Intervention `i=value` or `D_i=value`, 1-based.
        #[arg(long)]
        intervene: Option<String>,
    },
    /// Checks a sequential composition against the product of its ratios.
    Compose { input: String },
    /// Bundled scenario files.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScenarioAction {
    List,
    RunAll,
}

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn finish(result: Result<Outcome, CliError>, format: Format) -> Run {
    match result {
        Ok(outcome) => Run {
            exit_code: outcome.exit_code,
            stdout: outcome.render(format),
            stderr: String::new(),
        },
        Err(e) => Run {
            exit_code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

pub fn execute(cli: Cli) -> Run {
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    let result = match cli.command {
        Command::Epsilon { input } => commands::epsilon(&input),
        Command::Check {
            definition,
            input,
            target_ratio,
            pop,
        } => commands::check(definition, &input, target_ratio.as_ref(), pop.as_deref()),
        Command::Falsify {
            definition,
            input,
            target_ratio,
            budget,
            emit_pop,
        } => commands::falsify(
            definition,
            &input,
            target_ratio.as_ref(),
            budget,
            emit_pop.as_deref(),
        ),
        Command::Posterior {
            input,
            prior,
            output,
            intervene,
        } => commands::posterior_cmd(&input, &prior, &output, intervene.as_deref()),
        Command::Compose { input } => commands::compose(&input),
        Command::Scenarios {
            action: ScenarioAction::RunAll,
        } => commands::run_all(),
        Command::Scenarios {
            action: ScenarioAction::List,
        } => {
            return match commands::list_scenarios() {
                Ok(rows) => {
                    let stdout = match format {
                        Format::Json => to_json(&rows),
                        Format::Text => rows
                            .iter()
                            .map(|(n, k, d)| format!("{n}\t{k}\t{d}\n"))
                            .collect(),
                    };
                    Run {
                        exit_code: 0,
                        stdout,
                        stderr: String::new(),
                    }
                }
                Err(e) => finish(Err(e), format),
            }
        }
    };
    finish(result, format)
}

/// Parses `args` (including the program name) and runs the command.
/// Argument errors exit with the parse/validation code.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let text = e.render().to_string();
            let exit_code = if e.use_stderr() { 4 } else { 0 };
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            Run {
                exit_code,
                stdout,
                stderr,
            }
        }
    }
}

//! An adversary's beliefs about the database, before and after seeing an
//! output.
//!
//! Credences are kept apart from population frequencies: a [`Prior`] is the
//! adversary's belief `Cr[D = d | B]`, not a model of how data arise. The
//! arithmetic is the same exact Bayes update either way.

use num_traits::Zero;
use thiserror::Error;

use crate::mechanism::{data_point_name, MechanismKernel};
use crate::ratio::{RatioBound, RatioMax, Rational};
use crate::sem::{Dist, SemError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("output {0} has probability zero under the prior")]
    ZeroEvidence(String),
    #[error("prior mismatch: {0}")]
    PriorMismatch(String),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// Credence over databases `(D_1, ..., D_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prior(Dist);

impl Prior {
    pub fn new(kernel: &MechanismKernel, credence: Dist) -> Result<Self, AdversaryError> {
        let vars: Vec<String> = (0..kernel.n()).map(data_point_name).collect();
        if credence.vars() != vars.as_slice() {
            return Err(AdversaryError::PriorMismatch(format!(
                "expected a credence over {vars:?}"
            )));
        }
        let m = kernel.data_domain().len();
        if credence.iter().any(|(d, _)| d.iter().any(|&v| v >= m)) {
            return Err(AdversaryError::PriorMismatch(
                "value outside the data domain".into(),
            ));
        }
        Ok(Prior(credence))
    }

    pub fn uniform(kernel: &MechanismKernel) -> Self {
        let n = kernel.n();
        Prior(Dist::uniform(
            (0..n).map(data_point_name).collect(),
            &vec![kernel.data_domain().len(); n],
        ))
    }

    pub fn credence(&self) -> &Dist {
        &self.0
    }
}

fn update(
    kernel: &MechanismKernel,
    prior: &Prior,
    output: usize,
    likelihood_db: impl Fn(&[usize]) -> Vec<usize>,
) -> Result<Dist, AdversaryError> {
    let weighted: Vec<(Vec<usize>, Rational)> = prior
        .0
        .iter()
        .map(|(d, w)| (d.clone(), w * kernel.prob(&likelihood_db(d), output)))
        .collect();
    let evidence: Rational = weighted.iter().map(|(_, w)| w).sum();
    if evidence.is_zero() {
        return Err(AdversaryError::ZeroEvidence(
            kernel.output_domain().value(output).to_string(),
        ));
    }
    let normalized = weighted.into_iter().map(|(d, w)| (d, w / &evidence));
    Ok(Dist::new(prior.0.vars().to_vec(), normalized)?)
}

/// `Cr[D = d | O = o, B]`.
pub fn posterior(
    kernel: &MechanismKernel,
    prior: &Prior,
    output: usize,
) -> Result<Dist, AdversaryError> {
    update(kernel, prior, output, <[usize]>::to_vec)
}

/// `Cr[D = d | O = o, do(D_i = v), B]`: every database's likelihood is read
/// at the database with coordinate `index` replaced by `value`.
pub fn posterior_under_intervention(
    kernel: &MechanismKernel,
    prior: &Prior,
    output: usize,
    index: usize,
    value: usize,
) -> Result<Dist, AdversaryError> {
    update(kernel, prior, output, |d| {
        let mut e = d.to_vec();
        e[index] = value;
        e
    })
}

/// Largest factor, in either direction, between the plain and the
/// intervened posterior of any database, over outputs where both exist.
pub fn semantic_gap(
    kernel: &MechanismKernel,
    prior: &Prior,
    index: usize,
    value: usize,
) -> RatioBound {
    let mut max: RatioMax<()> = RatioMax::new();
    for o in 0..kernel.output_domain().len() {
        let (Ok(plain), Ok(moved)) = (
            posterior(kernel, prior, o),
            posterior_under_intervention(kernel, prior, o, index, value),
        ) else {
            continue;
        };
        for (d, _) in prior.0.iter() {
            let (a, b) = (plain.weight(d), moved.weight(d));
            max.observe(&a, &b, || ());
            max.observe(&b, &a, || ());
        }
    }
    max.best
}

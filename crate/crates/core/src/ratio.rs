//! Exact rationals and probability-ratio bounds.
//!
//! Every probability in this crate is a [`Rational`]. Privacy levels are
//! carried as ratio bounds (the multiplicative form `e^ε`), which may be
//! infinite when a comparison divides a positive probability by zero. The
//! natural logarithm is only taken for display.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for `numer/denom` as an exact rational.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error(
        "decimal literal `{0}` is not allowed; write rationals as integer pairs such as \"1/2\""
    )]
    Decimal(String),
    #[error("malformed rational `{0}`; expected an integer pair such as \"1/2\"")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses a strict `p/q` rational. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let t = s.trim();
    if t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(RationalParseError::Decimal(s.to_string()));
    }
    let (p, q) = t
        .split_once('/')
        .ok_or_else(|| RationalParseError::Malformed(s.to_string()))?;
    let is_int = |x: &str| {
        let digits = x.strip_prefix('-').unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_int(p) || !is_int(q) || q.starts_with('-') {
        return Err(RationalParseError::Malformed(s.to_string()));
    }
    let numer: BigInt = p
        .parse()
        .map_err(|_| RationalParseError::Malformed(s.to_string()))?;
    let denom: BigInt = q
        .parse()
        .map_err(|_| RationalParseError::Malformed(s.to_string()))?;
    if denom.is_zero() {
        return Err(RationalParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// A supremum of probability ratios: a nonnegative rational or infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RatioBound {
    Finite(Rational),
    Infinite,
}

impl RatioBound {
    pub fn one() -> Self {
        RatioBound::Finite(Rational::one())
    }

    /// `numer / denom` under the checker conventions: `0/0` has no value
    /// (the comparison is vacuous) and `p/0` is infinite for `p > 0`.
    pub fn of(numer: &Rational, denom: &Rational) -> Option<Self> {
        match (numer.is_zero(), denom.is_zero()) {
            (true, true) => None,
            (false, true) => Some(RatioBound::Infinite),
            _ => Some(RatioBound::Finite(numer / denom)),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RatioBound::Finite(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            RatioBound::Finite(r) => Some(r),
            RatioBound::Infinite => None,
        }
    }

    /// True when the bound does not exceed `target`.
    pub fn within(&self, target: &Rational) -> bool {
        match self {
            RatioBound::Finite(r) => r <= target,
            RatioBound::Infinite => false,
        }
    }

    /// ε = ln(ratio), for display only.
    pub fn epsilon(&self) -> f64 {
        match self {
            RatioBound::Finite(r) => r.to_f64().map_or(f64::NAN, f64::ln),
            RatioBound::Infinite => f64::INFINITY,
        }
    }

    /// ε rendered to four decimal places, or `inf`.
    pub fn epsilon_display(&self) -> String {
        match self {
            RatioBound::Finite(r) if r.is_one() => "0.0000".to_string(),
            RatioBound::Finite(_) => format!("{:.4}", self.epsilon()),
            RatioBound::Infinite => "inf".to_string(),
        }
    }

    pub fn mul(&self, other: &RatioBound) -> RatioBound {
        match (self, other) {
            (RatioBound::Finite(a), RatioBound::Finite(b)) => RatioBound::Finite(a * b),
            _ => RatioBound::Infinite,
        }
    }
}

impl From<Rational> for RatioBound {
    fn from(r: Rational) -> Self {
        RatioBound::Finite(r)
    }
}

impl PartialOrd for RatioBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatioBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RatioBound::Finite(a), RatioBound::Finite(b)) => a.cmp(b),
            (RatioBound::Finite(_), RatioBound::Infinite) => Ordering::Less,
            (RatioBound::Infinite, RatioBound::Finite(_)) => Ordering::Greater,
            (RatioBound::Infinite, RatioBound::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for RatioBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioBound::Finite(r) => f.write_str(&format_rational(r)),
            RatioBound::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for RatioBound {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            return Ok(RatioBound::Infinite);
        }
        let r = parse_rational(s)?;
        if r.is_negative() {
            return Err(RationalParseError::Malformed(s.to_string()));
        }
        Ok(RatioBound::Finite(r))
    }
}

/// Running maximum of ratios with the first maximizer kept as witness.
///
/// Starts at 1 with no witness; a witness is recorded only once some ratio
/// strictly exceeds the current maximum, so ties keep the earliest one.
#[derive(Debug, Clone)]
pub(crate) struct RatioMax<W> {
    pub best: RatioBound,
    pub witness: Option<W>,
}

impl<W> RatioMax<W> {
    pub fn new() -> Self {
        RatioMax {
            best: RatioBound::one(),
            witness: None,
        }
    }

    /// Folds in `numer / denom`; returns false when the pair was vacuous (0/0).
    pub fn observe(
        &mut self,
        numer: &Rational,
        denom: &Rational,
        witness: impl FnOnce() -> W,
    ) -> bool {
        match RatioBound::of(numer, denom) {
            None => false,
            Some(r) => {
                if r > self.best {
                    self.best = r;
                    self.witness = Some(witness());
                }
                true
            }
        }
    }

    pub fn merge(&mut self, other: RatioMax<W>) {
        if other.best > self.best {
            self.best = other.best;
            self.witness = other.witness;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_pairs_only() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert!(matches!(
            parse_rational("0.5"),
            Err(RationalParseError::Decimal(_))
        ));
        assert!(matches!(
            parse_rational("1"),
            Err(RationalParseError::Malformed(_))
        ));
        assert!(matches!(
            parse_rational("1/-2"),
            Err(RationalParseError::Malformed(_))
        ));
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalParseError::ZeroDenominator(_))
        ));
        assert!(parse_rational("0.5")
            .unwrap_err()
            .to_string()
            .contains("1/2"));
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(RatioBound::of(&rat(0, 1), &rat(0, 1)), None);
        assert_eq!(
            RatioBound::of(&rat(1, 2), &rat(0, 1)),
            Some(RatioBound::Infinite)
        );
        assert_eq!(
            RatioBound::of(&rat(0, 1), &rat(1, 2)),
            Some(RatioBound::Finite(rat(0, 1)))
        );
        assert!(RatioBound::Infinite > RatioBound::Finite(rat(1000, 1)));
        assert_eq!(RatioBound::Finite(rat(2, 1)).epsilon_display(), "0.6931");
        assert_eq!(RatioBound::one().epsilon_display(), "0.0000");
        assert_eq!("inf".parse::<RatioBound>().unwrap(), RatioBound::Infinite);
        assert_eq!(RatioBound::Finite(rat(4, 2)).to_string(), "2/1");
    }

    #[test]
    fn ratio_max_keeps_first_maximizer() {
        let mut m = RatioMax::new();
        m.observe(&rat(2, 1), &rat(1, 1), || "a");
        m.observe(&rat(4, 1), &rat(2, 1), || "b");
        m.observe(&rat(1, 1), &rat(1, 1), || "c");
        assert_eq!(m.best, RatioBound::Finite(rat(2, 1)));
        assert_eq!(m.witness, Some("a"));
    }
}

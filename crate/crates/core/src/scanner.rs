//! Empirical scans over the Somos-k family: where integrality and
//! coprimality hold, and the first index where they stop holding.
//!
//! Somos-5 is the only member with a proof behind it here; other orders
//! are explored, not claimed.

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::coprimality::gcd;
use crate::engine::{
    bilinear_parts, generate, new_rational_state, next_rational, EngineError, IntegerBuffer, NonIntegralEvent, RationalBuffer,
    SequenceBuffer, SequenceSpec,
};
use crate::io::json::decimal;

/// Default scan length for orders of 6 and above.
pub const DEFAULT_MAX_TERMS_HIGH_ORDER: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScanError {
    #[error("Somos-k is defined here for k >= 4, got k = {0}")]
    OrderTooSmall(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("integer and rational engines disagree at a_{index}")]
    ModeDisagreement { index: usize },
}

/// gcd(a_index, a_{index - offset}) > 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonCoprimeWitness {
    pub index: usize,
    pub offset: usize,
    #[serde(serialize_with = "decimal::integer")]
    pub gcd: Integer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakdownReport {
    pub spec: SequenceSpec,
    pub terms_checked: usize,
    pub first_nonintegral: Option<NonIntegralEvent>,
    pub first_noncoprime: Option<NonCoprimeWitness>,
    pub depth: Option<usize>,
    pub outside_theorem_scope: bool,
}

/// a_n a_{n-k} = Σ_{i=1}^{⌊k/2⌋} a_{n-i} a_{n-(k-i)}, all-ones start.
pub fn somos_k_spec(k: usize) -> Result<SequenceSpec, ScanError> {
    if k < 4 {
        return Err(ScanError::OrderTooSmall(k));
    }
    let summands = (1..=k / 2).map(|i| (i, k - i)).collect();
    Ok(SequenceSpec::new(k, summands, vec![Integer::from(1); k], Some(format!("somos-{k}")))?)
}

/// Rational terms → their integral prefix as integers.
fn integral_prefix(terms: &RationalBuffer) -> Vec<Integer> {
    terms
        .terms()
        .take_while(|t| *t.denom() == 1)
        .map(|t| t.numer().clone())
        .collect()
}

/// Runs the rational engine for up to `max_terms` terms and records the
/// first index whose value is not an integer. The scan ends with that
/// term: past a breakdown the heights of Somos-k terms grow exponentially.
/// The integer engine is run over the same range and must match the
/// rational terms wherever it succeeds.
pub fn scan_integrality(spec: &SequenceSpec, max_terms: usize) -> Result<BreakdownReport, ScanError> {
    let rational = rational_until_breakdown(spec, max_terms)?;
    let prefix = integral_prefix(&rational);
    let first_nonintegral = if prefix.len() < rational.len() {
        let n = prefix.len();
        let history = SequenceBuffer::from_terms(0, prefix.clone());
        let (numerator, denominator) = bilinear_parts(&history, spec, n)?;
        let modulus = Integer::from(denominator.abs_ref());
        let remainder = <(Integer, Integer)>::from(numerator.div_rem_euc_ref(&modulus)).1;
        Some(NonIntegralEvent {
            index: n,
            numerator,
            denominator,
            remainder,
        })
    } else {
        None
    };

    let run = generate(spec, max_terms)?;
    let agree = run.buffer.len() == prefix.len() && run.buffer.terms().zip(&prefix).all(|(a, b)| a == b);
    if !agree || run.halted.as_ref().map(|e| e.index) != first_nonintegral.as_ref().map(|e| e.index) {
        let index = run
            .buffer
            .terms()
            .zip(&prefix)
            .position(|(a, b)| a != b)
            .unwrap_or(run.buffer.len().min(prefix.len()));
        return Err(ScanError::ModeDisagreement { index });
    }

    Ok(BreakdownReport {
        spec: spec.clone(),
        terms_checked: rational.len(),
        first_nonintegral,
        first_noncoprime: None,
        depth: None,
        outside_theorem_scope: !spec.in_theorem_scope(),
    })
}

fn rational_until_breakdown(spec: &SequenceSpec, max_terms: usize) -> Result<RationalBuffer, ScanError> {
    if max_terms < spec.order() {
        return Err(EngineError::CountBelowOrder { count: max_terms, order: spec.order() }.into());
    }
    let mut buffer = new_rational_state(spec);
    while buffer.end_index() < max_terms {
        if *next_rational(&mut buffer, spec)?.denom() != 1 {
            break;
        }
    }
    Ok(buffer)
}

/// First `(index, offset)` with gcd(a_index, a_{index-offset}) > 1 among
/// the integral prefix of the first `max_terms` terms.
pub fn scan_coprimality(spec: &SequenceSpec, max_terms: usize, depth: usize) -> Result<BreakdownReport, ScanError> {
    let run = generate(spec, max_terms)?;
    let first_noncoprime = first_noncoprime(&run.buffer, depth);
    Ok(BreakdownReport {
        spec: spec.clone(),
        terms_checked: run.buffer.len(),
        first_nonintegral: run.halted,
        first_noncoprime,
        depth: Some(depth),
        outside_theorem_scope: !spec.in_theorem_scope() || depth > 4,
    })
}

pub fn first_noncoprime(buffer: &IntegerBuffer, depth: usize) -> Option<NonCoprimeWitness> {
    let start = buffer.start_index() + depth;
    (start..buffer.end_index()).find_map(|n| {
        let term = buffer.get(n)?;
        (1..=depth).find_map(|offset| {
            let g = gcd(term, buffer.get(n - offset)?);
            (g != 1).then(|| NonCoprimeWitness { index: n, offset, gcd: g })
        })
    })
}

impl NonCoprimeWitness {
    /// Recomputes the gcd from stored terms.
    pub fn reverify(&self, buffer: &IntegerBuffer) -> bool {
        match (buffer.get(self.index), self.index.checked_sub(self.offset).and_then(|i| buffer.get(i))) {
            (Some(a), Some(b)) => self.gcd > 1 && gcd(a, b) == self.gcd,
            _ => false,
        }
    }
}

impl BreakdownReport {
    /// Witnesses re-derived from an independent rational-mode run.
    pub fn reverify(&self) -> bool {
        let needed = self
            .first_nonintegral
            .as_ref()
            .map_or(self.terms_checked, |e| self.terms_checked.max(e.index + 1))
            .max(self.spec.order());
        let terms = match rational_until_breakdown(&self.spec, needed) {
            Ok(t) => t,
            Err(_) => return false,
        };
        let integral = |r: &Rational| *r.denom() == 1;
        let nonintegral_ok = match &self.first_nonintegral {
            None => terms.terms().all(integral),
            Some(event) => {
                event.reverify()
                    && terms.get(event.index).is_some_and(|t| !integral(t))
                    && terms.terms().take(event.index).all(integral)
                    && terms.get(event.index) == Some(&Rational::from((event.numerator.clone(), event.denominator.clone())))
            }
        };
        let coprime_ok = match &self.first_noncoprime {
            None => true,
            Some(w) => {
                let prefix = SequenceBuffer::from_terms(0, integral_prefix(&terms));
                w.reverify(&prefix)
            }
        };
        nonintegral_ok && coprime_ok
    }
}

/// Integrality scans for several specs at once; results keep input order.
pub fn scan_family(specs: &[SequenceSpec], max_terms: usize) -> Vec<Result<BreakdownReport, ScanError>> {
    specs.par_iter().map(|spec| scan_integrality(spec, max_terms)).collect()
}

//! Aggregate verification over index ranges, as used by the CLI.

use std::ops::Range;

use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::certificate::{certify_range, CertificateError, DivisibilityCertificate, CERTIFICATE_START};
use crate::coprimality::{verify_coprime_window, CoprimeWindowReport};
use crate::engine::{
    digit_count, find_recurrence_violation, IntegerBuffer, NonIntegralEvent, SequenceSpec,
};
use crate::io::json::{decimal, JsonReport};
use crate::scanner::{BreakdownReport, NonCoprimeWitness};

/// First thing that went wrong in a range check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    NonIntegral(NonIntegralEvent),
    /// `a_index a_{index-k}` differs from the bilinear sum.
    Recurrence { index: usize },
    NotCoprime(NonCoprimeWitness),
    InvalidCertificate { index: usize, reason: String },
    Mismatch {
        index: usize,
        #[serde(serialize_with = "decimal::integer")]
        expected: Integer,
        #[serde(serialize_with = "decimal::integer")]
        found: Integer,
    },
    MissingTerm { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Statistics {
    /// Decimal digits of the largest term in range.
    pub max_digits: usize,
    pub terms_available: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub sequence: String,
    pub range_start: usize,
    pub range_end: usize,
    pub checked: usize,
    pub pass: bool,
    pub first_failure: Option<Witness>,
    pub statistics: Statistics,
    pub outside_theorem_scope: bool,
    pub note: Option<String>,
}

impl JsonReport for VerificationReport {
    const KIND: &'static str = "verification_report";
}

impl JsonReport for CoprimeWindowReport {
    const KIND: &'static str = "coprime_window_report";
}

impl JsonReport for DivisibilityCertificate {
    const KIND: &'static str = "divisibility_certificate";
}

impl JsonReport for BreakdownReport {
    const KIND: &'static str = "breakdown_report";
}

/// A verification report plus the certificates it summarizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationRun {
    #[serde(flatten)]
    pub report: VerificationReport,
    pub certificates: Vec<DivisibilityCertificate>,
}

impl JsonReport for CertificationRun {
    const KIND: &'static str = "certification_run";
}

fn statistics(buffer: &IntegerBuffer, range: Range<usize>) -> Statistics {
    Statistics {
        max_digits: range.filter_map(|n| buffer.get(n)).map(digit_count).max().unwrap_or(0),
        terms_available: buffer.len(),
    }
}

/// Whether the terms in `buffer` are the ones the theorems talk about.
fn in_scope(buffer: &IntegerBuffer, spec: &SequenceSpec) -> bool {
    spec.in_theorem_scope()
        && buffer.start_index() == 0
        && spec.initials().iter().enumerate().all(|(i, v)| buffer.get(i) == Some(v))
}

/// Re-checks the recurrence over the buffer, then the coprimality window
/// of the given depth for every `max(4, depth) <= n < end`.
pub fn verify_coprimality(
    buffer: &IntegerBuffer,
    spec: &SequenceSpec,
    end: usize,
    depth: usize,
) -> VerificationReport {
    let end = end.min(buffer.end_index());
    let start = depth.max(4).max(buffer.start_index() + depth);
    let range = start..end.max(start);
    let mut first_failure = find_recurrence_violation(buffer, spec).map(|index| Witness::Recurrence { index });

    let windows: Vec<_> = range
        .clone()
        .into_par_iter()
        .map(|n| verify_coprime_window(buffer, n, depth))
        .collect();
    let mut checked = 0;
    for window in windows {
        match window {
            Ok(report) => {
                checked += 1;
                if first_failure.is_none() {
                    if let Some((offset, g)) = report.first_failure() {
                        first_failure = Some(Witness::NotCoprime(NonCoprimeWitness {
                            index: report.index,
                            offset,
                            gcd: g.clone(),
                        }));
                    }
                }
            }
            Err(_) => {
                if first_failure.is_none() {
                    first_failure = Some(Witness::MissingTerm { index: start + checked });
                }
            }
        }
    }
    VerificationReport {
        check: format!("coprimality depth {depth}"),
        sequence: spec.label(),
        range_start: range.start,
        range_end: range.end,
        checked,
        pass: first_failure.is_none(),
        first_failure,
        statistics: statistics(buffer, range),
        outside_theorem_scope: !in_scope(buffer, spec) || depth > 4,
        note: None,
    }
}

/// Builds and checks the divisibility certificate for `10 <= n < end`.
pub fn certify(buffer: &IntegerBuffer, spec: &SequenceSpec, end: usize) -> CertificationRun {
    let end = end.min(buffer.end_index() + 1);
    let range = CERTIFICATE_START..end.max(CERTIFICATE_START);
    let note = range.is_empty().then(|| "range below certificate start".to_string());
    let mut first_failure = None;
    let mut certificates = Vec::with_capacity(range.len());
    for result in certify_range(buffer, range.clone()) {
        match result {
            Ok(cert) => {
                if first_failure.is_none() {
                    if let Some(reason) = cert.failure() {
                        first_failure = Some(Witness::InvalidCertificate { index: cert.index, reason });
                    }
                }
                certificates.push(cert);
            }
            Err(err) => {
                if first_failure.is_none() {
                    let index = match err {
                        CertificateError::IndexOutOfRange { index, .. }
                        | CertificateError::ZeroModulus { index }
                        | CertificateError::BelowStart { index }
                        | CertificateError::InvalidChain { index, .. } => index,
                        CertificateError::Engine(_) => range.start + certificates.len(),
                    };
                    first_failure = Some(Witness::InvalidCertificate { index, reason: err.to_string() });
                }
            }
        }
    }
    let report = VerificationReport {
        check: "divisibility certificates".into(),
        sequence: spec.label(),
        range_start: range.start,
        range_end: range.end,
        checked: certificates.len(),
        pass: first_failure.is_none(),
        first_failure,
        statistics: statistics(buffer, range.start.saturating_sub(CERTIFICATE_START)..range.end),
        outside_theorem_scope: !in_scope(buffer, spec),
        note,
    };
    CertificationRun { report, certificates }
}

/// Compares two term lists over the indices both contain.
pub fn crosscheck(generated: &IntegerBuffer, reference: &IntegerBuffer, label: &str) -> VerificationReport {
    let start = generated.start_index().max(reference.start_index());
    let end = generated.end_index().min(reference.end_index()).max(start);
    let first_failure = (start..end).find_map(|n| {
        let (expected, found) = (generated.get(n)?, reference.get(n)?);
        (expected != found).then(|| Witness::Mismatch {
            index: n,
            expected: expected.clone(),
            found: found.clone(),
        })
    });
    VerificationReport {
        check: "crosscheck".into(),
        sequence: label.to_string(),
        range_start: start,
        range_end: end,
        checked: end - start,
        pass: first_failure.is_none(),
        first_failure,
        statistics: statistics(generated, start..end),
        outside_theorem_scope: false,
        note: (end == start).then(|| "no overlapping indices".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate;

    fn somos5(count: usize) -> IntegerBuffer {
        generate(&SequenceSpec::somos5(), count).unwrap().buffer
    }

    #[test]
    fn coprimality_passes_on_somos5() {
        let report = verify_coprimality(&somos5(200), &SequenceSpec::somos5(), 200, 4);
        assert!(report.pass, "{report:?}");
        assert_eq!((report.range_start, report.range_end, report.checked), (4, 200, 196));
        assert!(!report.outside_theorem_scope);
    }

    #[test]
    fn depth_one_over_ten_terms() {
        let report = verify_coprimality(&somos5(10), &SequenceSpec::somos5(), 10, 1);
        assert!(report.pass);
        assert_eq!(report.checked, 6);
    }

    #[test]
    fn corrupted_term_is_reported() {
        let mut buffer = somos5(50);
        let bumped = Integer::from(buffer.get(20).unwrap() + 1);
        buffer.replace(20, bumped);
        let report = verify_coprimality(&buffer, &SequenceSpec::somos5(), 50, 4);
        assert!(!report.pass);
        assert_eq!(report.first_failure, Some(Witness::Recurrence { index: 20 }));
    }

    #[test]
    fn certify_counts() {
        let spec = SequenceSpec::somos5();
        let run = certify(&somos5(11), &spec, 11);
        assert!(run.report.pass);
        assert_eq!(run.certificates.len(), 1);
        assert_eq!(run.certificates[0].index, 10);

        let run = certify(&somos5(9), &spec, 9);
        assert!(run.report.pass);
        assert!(run.certificates.is_empty());
        assert_eq!(run.report.note.as_deref(), Some("range below certificate start"));
    }

    #[test]
    fn crosscheck_finds_first_mismatch() {
        let good = somos5(30);
        let mut bad = somos5(20);
        assert!(crosscheck(&good, &bad, "x").pass);
        bad.replace(13, Integer::from(6162));
        let report = crosscheck(&good, &bad, "x");
        assert_eq!(
            report.first_failure,
            Some(Witness::Mismatch { index: 13, expected: Integer::from(6161), found: Integer::from(6162) })
        );
    }
}

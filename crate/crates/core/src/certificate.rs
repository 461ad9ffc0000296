//! Divisibility certificates for Somos-5 integrality.
//!
//! For a concrete index `n ≥ 10` the certificate evaluates, on actual term
//! values, every line of the reduction that shows
//!
//! ```text
//! a_{n-1} a_{n-4} + a_{n-2} a_{n-3} ≡ 0  (mod a_{n-5})
//! ```
//!
//! Writing `A(s)` for `a_{n-s}`, the lines are
//!
//! ```text
//! 0  A8 A9 (A1 A4 + A2 A3)
//! 1  A8 A9 A1 A4 + A8 A9 A2 A3
//! 2  A8 A1 (A5 A8 + A6 A7) + A9 A2 (A4 A7 + A5 A6)      shifts s = 4, 3
//! 3  A8 A1 A6 A7 + A9 A2 A4 A7                          drops A5·(A8 A1 A8 + A9 A2 A6)
//! 4  A8 A7 (A2 A5 + A3 A4) + A9 A4 (A3 A6 + A4 A5)      shifts s = 1, 2
//! 5  A8 A7 A3 A4 + A9 A4 A3 A6                          drops A5·(A8 A7 A2 + A9 A4 A4)
//! 6  A3 A4 (A8 A7 + A9 A6)
//! 7  A3 A4 A5 A10                                       shift s = 5
//! ```
//!
//! Rewrite lines must agree exactly with their predecessor; drop lines
//! must differ from it by exactly the recomputed discarded multiple of
//! `A5`. Together with `gcd(A5, A8 A9) = 1` this yields the congruence,
//! which is also checked directly.

use std::ops::Range;

use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::coprimality::gcd;
use crate::engine::{evaluate_at, EngineError, IntegerBuffer, NonIntegralEvent, SequenceSpec, Step};
use crate::io::json::decimal;

/// Smallest index with a certificate; the chain reaches back to `a_{n-10}`.
pub const CERTIFICATE_START: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("buffer lacks a_{missing}, needed for the certificate at n = {index}")]
    IndexOutOfRange { index: usize, missing: usize },
    #[error("certificates start at n = {CERTIFICATE_START}, got n = {index}")]
    BelowStart { index: usize },
    #[error("modulus a_{} is zero at n = {index}", index - 5)]
    ZeroModulus { index: usize },
    #[error("certificate at n = {index} does not verify: {reason}")]
    InvalidChain { index: usize, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `a_{n-s} a_{n-s-5} = a_{n-s-1} a_{n-s-4} + a_{n-s-2} a_{n-s-3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexShiftIdentity {
    pub shift: usize,
    pub label: String,
    #[serde(serialize_with = "decimal::integer")]
    pub lhs: Integer,
    #[serde(serialize_with = "decimal::integer")]
    pub rhs: Integer,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    /// Equal to the previous line as an integer.
    ExactRewrite,
    /// Previous line minus an explicit multiple of the modulus.
    DropMultiple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub step_no: usize,
    pub kind: StepKind,
    #[serde(serialize_with = "decimal::integer")]
    pub value: Integer,
    pub congruent_to_prev: bool,
    /// The terms removed on a drop line, recomputed from their factors.
    #[serde(serialize_with = "decimal::optional")]
    pub discarded: Option<Integer>,
    /// `discarded / a_{n-5}`, recomputed independently.
    #[serde(serialize_with = "decimal::optional")]
    pub discarded_cofactor: Option<Integer>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityCertificate {
    pub index: usize,
    #[serde(serialize_with = "decimal::integer")]
    pub modulus: Integer,
    #[serde(serialize_with = "decimal::integer")]
    pub precondition_gcd: Integer,
    pub shifts: Vec<IndexShiftIdentity>,
    pub chain: Vec<ChainStep>,
    /// Last chain line is a multiple of the modulus.
    pub final_divisible: bool,
    #[serde(serialize_with = "decimal::integer")]
    pub numerator_residue: Integer,
    pub valid: bool,
}

impl DivisibilityCertificate {
    /// Why the certificate is invalid, or `None` if it is valid.
    pub fn failure(&self) -> Option<String> {
        if self.precondition_gcd != 1 {
            return Some(format!("gcd(a_{}, a_{} a_{}) = {}", self.index - 5, self.index - 8, self.index - 9, self.precondition_gcd));
        }
        if let Some(shift) = self.shifts.iter().find(|s| !s.holds) {
            return Some(format!("index shift {} fails: {} != {}", shift.label, shift.lhs, shift.rhs));
        }
        if let Some(step) = self.chain.iter().find(|s| !s.verified) {
            return Some(format!("chain step {} does not follow from step {}", step.step_no, step.step_no.saturating_sub(1)));
        }
        if !self.final_divisible {
            return Some("final chain line is not a multiple of the modulus".into());
        }
        if self.numerator_residue != 0 {
            return Some(format!("numerator residue is {}", self.numerator_residue));
        }
        None
    }

    pub fn into_valid(self) -> Result<Self, CertificateError> {
        match self.failure() {
            None => Ok(self),
            Some(reason) => Err(CertificateError::InvalidChain {
                index: self.index,
                reason,
            }),
        }
    }
}

/// `a_{n-s}` for `s` in `0..=10`, loaded once.
struct Window {
    n: usize,
    terms: Vec<Integer>,
}

impl Window {
    fn load(buffer: &IntegerBuffer, n: usize, deepest: usize) -> Result<Self, CertificateError> {
        if n < deepest {
            return Err(CertificateError::BelowStart { index: n });
        }
        let terms = (0..=deepest)
            .map(|s| match s {
                0 => Ok(Integer::new()),
                _ => buffer
                    .get(n - s)
                    .cloned()
                    .ok_or(CertificateError::IndexOutOfRange { index: n, missing: n - s }),
            })
            .collect::<Result<_, _>>()?;
        Ok(Window { n, terms })
    }

    fn a(&self, s: usize) -> &Integer {
        &self.terms[s]
    }
}

fn product(factors: &[&Integer]) -> Integer {
    factors.iter().fold(Integer::from(1), |acc, f| acc * *f)
}

fn shift_identities(w: &Window) -> Vec<IndexShiftIdentity> {
    (1..=5)
        .rev()
        .map(|s| {
            let lhs = product(&[w.a(s), w.a(s + 5)]);
            let rhs = product(&[w.a(s + 1), w.a(s + 4)]) + product(&[w.a(s + 2), w.a(s + 3)]);
            IndexShiftIdentity {
                shift: s,
                label: format!("a[n-{}]*a[n-{}]", s, s + 5),
                holds: lhs == rhs,
                lhs,
                rhs,
            }
        })
        .collect()
}

/// The five index shifts of the recurrence that the reduction uses, from
/// `a_{n-5} a_{n-10}` down to `a_{n-1} a_{n-6}`.
pub fn check_index_shifts(buffer: &IntegerBuffer, n: usize) -> Result<Vec<IndexShiftIdentity>, CertificateError> {
    let w = Window::load(buffer, n, 10)?;
    Ok(shift_identities(&w))
}

/// `gcd(a_{n-5}, a_{n-8} a_{n-9})`; the multiplier may be cancelled when
/// this is 1.
pub fn cancellation_precondition(buffer: &IntegerBuffer, n: usize) -> Result<Integer, CertificateError> {
    let w = Window::load(buffer, n, 9)?;
    Ok(gcd(w.a(5), &product(&[w.a(8), w.a(9)])))
}

fn is_multiple(value: &Integer, modulus: &Integer) -> bool {
    value.is_divisible(modulus)
}

fn exact_step(step_no: usize, value: Integer, prev: &Integer, modulus: &Integer) -> ChainStep {
    let verified = value == *prev;
    ChainStep {
        step_no,
        kind: StepKind::ExactRewrite,
        congruent_to_prev: is_multiple(&Integer::from(prev - &value), modulus),
        value,
        discarded: None,
        discarded_cofactor: None,
        verified,
    }
}

fn drop_step(
    step_no: usize,
    value: Integer,
    prev: &Integer,
    modulus: &Integer,
    discarded: Integer,
    cofactor: Integer,
) -> ChainStep {
    let difference = Integer::from(prev - &value);
    let verified = difference == discarded && discarded == Integer::from(modulus * &cofactor);
    ChainStep {
        step_no,
        kind: StepKind::DropMultiple,
        congruent_to_prev: is_multiple(&difference, modulus),
        value,
        discarded: Some(discarded),
        discarded_cofactor: Some(cofactor),
        verified,
    }
}

fn reduction_chain(w: &Window) -> Vec<ChainStep> {
    let a = |s| w.a(s);
    let m = a(5);
    let mut chain = Vec::with_capacity(8);

    let numerator = product(&[a(1), a(4)]) + product(&[a(2), a(3)]);
    let v0 = product(&[a(8), a(9), &numerator]);
    chain.push(ChainStep {
        step_no: 0,
        kind: StepKind::ExactRewrite,
        value: v0.clone(),
        congruent_to_prev: true,
        discarded: None,
        discarded_cofactor: None,
        verified: true,
    });

    let v1 = product(&[a(8), a(9), a(1), a(4)]) + product(&[a(8), a(9), a(2), a(3)]);
    chain.push(exact_step(1, v1, &v0, m));

    let shift4 = product(&[a(5), a(8)]) + product(&[a(6), a(7)]);
    let shift3 = product(&[a(4), a(7)]) + product(&[a(5), a(6)]);
    let v2 = product(&[a(8), a(1), &shift4]) + product(&[a(9), a(2), &shift3]);
    chain.push(exact_step(2, v2, &chain[1].value, m));

    let v3 = product(&[a(8), a(1), a(6), a(7)]) + product(&[a(9), a(2), a(4), a(7)]);
    let d3 = product(&[a(8), a(1), a(5), a(8)]) + product(&[a(9), a(2), a(5), a(6)]);
    let c3 = product(&[a(8), a(1), a(8)]) + product(&[a(9), a(2), a(6)]);
    chain.push(drop_step(3, v3, &chain[2].value, m, d3, c3));

    let shift1 = product(&[a(2), a(5)]) + product(&[a(3), a(4)]);
    let shift2 = product(&[a(3), a(6)]) + product(&[a(4), a(5)]);
    let v4 = product(&[a(8), a(7), &shift1]) + product(&[a(9), a(4), &shift2]);
    chain.push(exact_step(4, v4, &chain[3].value, m));

    let v5 = product(&[a(8), a(7), a(3), a(4)]) + product(&[a(9), a(4), a(3), a(6)]);
    let d5 = product(&[a(8), a(7), a(2), a(5)]) + product(&[a(9), a(4), a(4), a(5)]);
    let c5 = product(&[a(8), a(7), a(2)]) + product(&[a(9), a(4), a(4)]);
    chain.push(drop_step(5, v5, &chain[4].value, m, d5, c5));

    let inner = product(&[a(8), a(7)]) + product(&[a(9), a(6)]);
    let v6 = product(&[a(3), a(4), &inner]);
    chain.push(exact_step(6, v6, &chain[5].value, m));

    let v7 = product(&[a(3), a(4), a(5), a(10)]);
    chain.push(exact_step(7, v7, &chain[6].value, m));

    chain
}

/// Re-derives `a_{n-5} | a_{n-1} a_{n-4} + a_{n-2} a_{n-3}` for the
/// concrete terms in `buffer`. The chain assumes the Somos-5 shape.
pub fn build_certificate(buffer: &IntegerBuffer, n: usize) -> Result<DivisibilityCertificate, CertificateError> {
    if n < CERTIFICATE_START {
        return Err(CertificateError::BelowStart { index: n });
    }
    let w = Window::load(buffer, n, 10)?;
    let modulus = w.a(5).clone();
    if modulus.cmp0() == std::cmp::Ordering::Equal {
        return Err(CertificateError::ZeroModulus { index: w.n });
    }
    let precondition_gcd = gcd(&modulus, &product(&[w.a(8), w.a(9)]));
    let shifts = shift_identities(&w);
    let chain = reduction_chain(&w);
    let final_divisible = is_multiple(&chain[7].value, &modulus);
    let numerator = product(&[w.a(1), w.a(4)]) + product(&[w.a(2), w.a(3)]);
    let abs_modulus = Integer::from(modulus.abs_ref());
    let numerator_residue = <(Integer, Integer)>::from(numerator.div_rem_euc_ref(&abs_modulus)).1;

    let valid = precondition_gcd == 1
        && shifts.iter().all(|s| s.holds)
        && chain.iter().all(|s| s.verified)
        && final_divisible
        && numerator_residue == 0;
    Ok(DivisibilityCertificate {
        index: n,
        modulus,
        precondition_gcd,
        shifts,
        chain,
        final_divisible,
        numerator_residue,
        valid,
    })
}

/// Certificates for every `n` in `range`, built in parallel, in index order.
pub fn certify_range(
    buffer: &IntegerBuffer,
    range: Range<usize>,
) -> Vec<Result<DivisibilityCertificate, CertificateError>> {
    range
        .into_par_iter()
        .map(|n| build_certificate(buffer, n))
        .collect()
}

/// Result of checking integrality at one index two ways: through the
/// certificate and through direct division.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegralityVerdict {
    pub index: usize,
    pub holds: bool,
    pub certificate: Option<DivisibilityCertificate>,
    /// `numerator / a_{n-5}` as the certificate predicts it.
    #[serde(serialize_with = "decimal::optional")]
    pub predicted: Option<Integer>,
    /// The integer-mode engine's value at `n`.
    #[serde(serialize_with = "decimal::optional")]
    pub computed: Option<Integer>,
    pub non_integral: Option<NonIntegralEvent>,
}

/// True iff the certificate at `n` is valid and direct division produces
/// the value the certificate predicts. Specs without the Somos-5 shape get
/// no certificate and never verify.
pub fn verify_integrality(
    buffer: &IntegerBuffer,
    spec: &SequenceSpec,
    n: usize,
) -> Result<IntegralityVerdict, CertificateError> {
    if n < CERTIFICATE_START {
        return Err(CertificateError::BelowStart { index: n });
    }
    let direct = evaluate_at(buffer, spec, n)?;
    let (computed, non_integral) = match direct {
        Step::Term(value) => (Some(value), None),
        Step::NonIntegral(event) => (None, Some(event)),
    };
    let certificate = if spec.has_somos5_shape() {
        Some(build_certificate(buffer, n)?)
    } else {
        None
    };
    let predicted = certificate.as_ref().filter(|c| c.numerator_residue == 0).map(|c| {
        let numerator = Integer::from(buffer.get(n - 1).unwrap() * buffer.get(n - 4).unwrap())
            + Integer::from(buffer.get(n - 2).unwrap() * buffer.get(n - 3).unwrap());
        numerator.div_exact(&c.modulus)
    });
    let holds = certificate.as_ref().is_some_and(|c| c.valid) && predicted.is_some() && predicted == computed;
    Ok(IntegralityVerdict {
        index: n,
        holds,
        certificate,
        predicted,
        computed,
        non_integral,
    })
}

/// If gcd(b, z) = 1: z | y·b ⇔ z | y. Returns whether that holds for the
/// triple; vacuously true when the hypothesis fails.
pub fn check_cancellation(y: &Integer, z: &Integer, b: &Integer) -> bool {
    check_cancellation_with(gcd, y, z, b)
}

pub fn check_cancellation_with(g: crate::coprimality::GcdFn, y: &Integer, z: &Integer, b: &Integer) -> bool {
    if z.cmp0() == std::cmp::Ordering::Equal || g(b, z) != 1 {
        return true;
    }
    Integer::from(y * b).is_divisible(z) == y.is_divisible(z)
}

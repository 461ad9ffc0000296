//! Exact evaluation of bilinear recurrences of the form
//!
//! ```text
//! a_n · a_{n-k} = Σ a_{n-i} · a_{n-j}      (i + j = k)
//! ```
//!
//! Integer mode divides exactly and stops at the first index where the
//! division leaves a remainder, returning a [`NonIntegralEvent`] witness.
//! Rational mode keeps going with exact fractions in lowest terms.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rug::{Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::io::json::decimal;

/// Above this many terms [`Retention::default_for`] switches to a window.
pub const FULL_RETENTION_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),
    #[error("zero denominator: a_{divisor_index} = 0 while computing a_{index}")]
    ZeroDenominator { index: usize, divisor_index: usize },
    #[error("buffer lacks a_{missing}, needed for a_{index}")]
    MissingHistory { index: usize, missing: usize },
    #[error("term count {count} is below the recurrence order {order}")]
    CountBelowOrder { count: usize, order: usize },
    #[error("retention window {window} is shorter than 2k = {minimum}")]
    WindowTooShort { window: usize, minimum: usize },
}

/// A bilinear recurrence: order `k`, the summand index pairs `(i, j)` with
/// `i + j = k`, and the `k` initial values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceSpec {
    order: usize,
    summands: Vec<(usize, usize)>,
    #[serde(serialize_with = "decimal::integers")]
    initials: Vec<Integer>,
    name: Option<String>,
}

impl SequenceSpec {
    pub fn new(
        order: usize,
        summands: Vec<(usize, usize)>,
        initials: Vec<Integer>,
        name: Option<String>,
    ) -> Result<Self, EngineError> {
        if order == 0 {
            return Err(EngineError::InvalidSpec("order must be positive".into()));
        }
        if summands.is_empty() {
            return Err(EngineError::InvalidSpec("summand list is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in &summands {
            if i == 0 || i > j || j >= order {
                return Err(EngineError::InvalidSpec(format!(
                    "summand ({i}, {j}) violates 1 <= i <= j <= {}",
                    order - 1
                )));
            }
            if i + j != order {
                return Err(EngineError::InvalidSpec(format!(
                    "summand ({i}, {j}) has i + j = {} != k = {order}",
                    i + j
                )));
            }
            if !seen.insert((i, j)) {
                return Err(EngineError::InvalidSpec(format!(
                    "summand ({i}, {j}) is repeated"
                )));
            }
        }
        if initials.len() != order {
            return Err(EngineError::InvalidSpec(format!(
                "expected {order} initial values, got {}",
                initials.len()
            )));
        }
        Ok(SequenceSpec {
            order,
            summands,
            initials,
            name,
        })
    }

    /// a_n = (a_{n-1} a_{n-4} + a_{n-2} a_{n-3}) / a_{n-5}, a_0 = … = a_4 = 1.
    pub fn somos5() -> Self {
        SequenceSpec::new(
            5,
            vec![(1, 4), (2, 3)],
            vec![Integer::from(1); 5],
            Some("somos-5".into()),
        )
        .expect("somos-5 spec is well formed")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn summands(&self) -> &[(usize, usize)] {
        &self.summands
    }

    pub fn initials(&self) -> &[Integer] {
        &self.initials
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Same recurrence, different starting values.
    pub fn with_initials(self, initials: Vec<Integer>) -> Result<Self, EngineError> {
        SequenceSpec::new(self.order, self.summands, initials, self.name)
    }

    /// True for order 5 with summands {(1,4),(2,3)}, regardless of initials.
    pub fn has_somos5_shape(&self) -> bool {
        let shape: BTreeSet<_> = self.summands.iter().copied().collect();
        self.order == 5 && shape == BTreeSet::from([(1, 4), (2, 3)])
    }

    /// The coprimality and integrality theorems are stated for the Somos-5
    /// recurrence started from five ones; anything else is reported as
    /// outside their scope.
    pub fn in_theorem_scope(&self) -> bool {
        self.has_somos5_shape() && self.initials.iter().all(|a| *a == 1)
    }

    pub fn has_nonpositive_initials(&self) -> bool {
        self.initials.iter().any(|a| a.cmp0() != std::cmp::Ordering::Greater)
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(name) => name.clone(),
            None => format!("order-{} recurrence", self.order),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    Full,
    Window(usize),
}

impl Retention {
    pub fn default_for(order: usize, count: usize) -> Self {
        if count <= FULL_RETENTION_LIMIT {
            Retention::Full
        } else {
            Retention::Window(4 * order)
        }
    }
}

/// Indexed history of computed terms. `terms[m]` is `a_{start_index + m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceBuffer<T = Integer> {
    start_index: usize,
    terms: VecDeque<T>,
    retention: Retention,
}

pub type IntegerBuffer = SequenceBuffer<Integer>;
pub type RationalBuffer = SequenceBuffer<Rational>;

impl<T> SequenceBuffer<T> {
    /// A fully retained buffer holding `terms` from `start_index` on.
    pub fn from_terms(start_index: usize, terms: Vec<T>) -> Self {
        SequenceBuffer {
            start_index,
            terms: terms.into(),
            retention: Retention::Full,
        }
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    /// Index of the next term to be computed.
    pub fn end_index(&self) -> usize {
        self.start_index + self.terms.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn retention(&self) -> Retention {
        self.retention
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        index
            .checked_sub(self.start_index)
            .and_then(|m| self.terms.get(m))
    }

    pub fn last(&self) -> Option<&T> {
        self.terms.back()
    }

    /// Overwrites a stored term, returning the old value.
    pub fn replace(&mut self, index: usize, value: T) -> Option<T> {
        let m = index.checked_sub(self.start_index)?;
        let slot = self.terms.get_mut(m)?;
        Some(std::mem::replace(slot, value))
    }

    pub fn terms(&self) -> impl Iterator<Item = &T> + '_ {
        self.terms.iter()
    }

    pub fn indexed(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        (self.start_index..).zip(self.terms.iter())
    }

    pub fn into_terms(self) -> Vec<T> {
        self.terms.into()
    }

    fn push(&mut self, term: T) {
        self.terms.push_back(term);
        if let Retention::Window(w) = self.retention {
            while self.terms.len() > w {
                self.terms.pop_front();
                self.start_index += 1;
            }
        }
    }
}

/// Witness that `numerator / denominator` is not an integer at `index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonIntegralEvent {
    pub index: usize,
    #[serde(serialize_with = "decimal::integer")]
    pub numerator: Integer,
    #[serde(serialize_with = "decimal::integer")]
    pub denominator: Integer,
    /// `numerator mod |denominator|`, always in `(0, |denominator|)`.
    #[serde(serialize_with = "decimal::integer")]
    pub remainder: Integer,
}

impl NonIntegralEvent {
    /// Recomputes the remainder from the stored numerator and denominator.
    pub fn reverify(&self) -> bool {
        if self.denominator == 0 {
            return false;
        }
        let modulus = Integer::from(self.denominator.abs_ref());
        let remainder = <(Integer, Integer)>::from(self.numerator.div_rem_euc_ref(&modulus)).1;
        remainder == self.remainder && remainder > 0 && remainder < modulus
    }
}

impl fmt::Display for NonIntegralEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a_{} = {} / {} is not an integer (remainder {})",
            self.index, self.numerator, self.denominator, self.remainder
        )
    }
}

/// Outcome of one integer-mode step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Term(Integer),
    NonIntegral(NonIntegralEvent),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Integer,
    Rational,
}

/// Arithmetic the recurrence needs from a term type.
pub trait Term: Clone + PartialEq + fmt::Display {
    fn zero() -> Self;
    fn add_product(&mut self, a: &Self, b: &Self);
    fn is_zero(&self) -> bool;
}

impl Term for Integer {
    fn zero() -> Self {
        Integer::new()
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
}

impl Term for Rational {
    fn zero() -> Self {
        Rational::new()
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
}

fn fetch<T>(buffer: &SequenceBuffer<T>, index: usize, needed: usize) -> Result<&T, EngineError> {
    buffer.get(needed).ok_or(EngineError::MissingHistory {
        index,
        missing: needed,
    })
}

/// The bilinear sum Σ a_{n-i} a_{n-j} and the divisor a_{n-k} for index `n`.
pub fn bilinear_parts<T: Term>(
    buffer: &SequenceBuffer<T>,
    spec: &SequenceSpec,
    n: usize,
) -> Result<(T, T), EngineError> {
    let k = spec.order();
    let back = |offset: usize| {
        n.checked_sub(offset)
            .ok_or(EngineError::MissingHistory { index: n, missing: 0 })
            .and_then(|idx| fetch(buffer, n, idx))
    };
    let mut sum = T::zero();
    for &(i, j) in spec.summands() {
        sum.add_product(back(i)?, back(j)?);
    }
    Ok((sum, back(k)?.clone()))
}

pub fn new_state(spec: &SequenceSpec) -> IntegerBuffer {
    SequenceBuffer::from_terms(0, spec.initials().to_vec())
}

pub fn new_state_with(spec: &SequenceSpec, retention: Retention) -> Result<IntegerBuffer, EngineError> {
    if let Retention::Window(w) = retention {
        if w < 2 * spec.order() {
            return Err(EngineError::WindowTooShort {
                window: w,
                minimum: 2 * spec.order(),
            });
        }
    }
    let mut buffer = new_state(spec);
    buffer.retention = retention;
    Ok(buffer)
}

pub fn new_rational_state(spec: &SequenceSpec) -> RationalBuffer {
    SequenceBuffer::from_terms(0, spec.initials().iter().cloned().map(Rational::from).collect())
}

/// Integer-mode value of `a_n` from the history in `buffer`, without
/// modifying it.
pub fn evaluate_at(buffer: &IntegerBuffer, spec: &SequenceSpec, n: usize) -> Result<Step, EngineError> {
    let (numerator, denominator) = bilinear_parts(buffer, spec, n)?;
    if Term::is_zero(&denominator) {
        return Err(EngineError::ZeroDenominator {
            index: n,
            divisor_index: n - spec.order(),
        });
    }
    if numerator.is_divisible(&denominator) {
        let mut quotient = numerator;
        quotient.div_exact_mut(&denominator);
        Ok(Step::Term(quotient))
    } else {
        let modulus = Integer::from(denominator.abs_ref());
        let remainder = <(Integer, Integer)>::from(numerator.div_rem_euc_ref(&modulus)).1;
        Ok(Step::NonIntegral(NonIntegralEvent {
            index: n,
            numerator,
            denominator,
            remainder,
        }))
    }
}

/// Computes the next term in integer mode. On a non-exact division the
/// buffer is left unchanged and the witness is returned.
pub fn next_term(buffer: &mut IntegerBuffer, spec: &SequenceSpec) -> Result<Step, EngineError> {
    let step = evaluate_at(buffer, spec, buffer.end_index())?;
    if let Step::Term(term) = &step {
        buffer.push(term.clone());
    }
    Ok(step)
}

pub fn next_rational(buffer: &mut RationalBuffer, spec: &SequenceSpec) -> Result<Rational, EngineError> {
    let n = buffer.end_index();
    let (numerator, denominator) = bilinear_parts(buffer, spec, n)?;
    if Term::is_zero(&denominator) {
        return Err(EngineError::ZeroDenominator {
            index: n,
            divisor_index: n - spec.order(),
        });
    }
    let term = numerator / denominator;
    buffer.push(term.clone());
    Ok(term)
}

/// Integer-mode run: the terms computed and, if integrality broke, the
/// witness at the index where generation stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerRun {
    pub buffer: IntegerBuffer,
    pub halted: Option<NonIntegralEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Integer(IntegerRun),
    Rational(RationalBuffer),
}

fn check_count(spec: &SequenceSpec, count: usize) -> Result<(), EngineError> {
    if count < spec.order() {
        return Err(EngineError::CountBelowOrder {
            count,
            order: spec.order(),
        });
    }
    Ok(())
}

/// Terms `a_0 .. a_{count-1}` in integer mode.
pub fn generate(spec: &SequenceSpec, count: usize) -> Result<IntegerRun, EngineError> {
    check_count(spec, count)?;
    let mut buffer = new_state_with(spec, Retention::default_for(spec.order(), count))?;
    while buffer.end_index() < count {
        if let Step::NonIntegral(event) = next_term(&mut buffer, spec)? {
            return Ok(IntegerRun {
                buffer,
                halted: Some(event),
            });
        }
    }
    Ok(IntegerRun {
        buffer,
        halted: None,
    })
}

pub fn generate_rational(spec: &SequenceSpec, count: usize) -> Result<RationalBuffer, EngineError> {
    check_count(spec, count)?;
    let mut buffer = new_rational_state(spec);
    buffer.retention = Retention::default_for(spec.order(), count);
    while buffer.end_index() < count {
        next_rational(&mut buffer, spec)?;
    }
    Ok(buffer)
}

pub fn generate_in(spec: &SequenceSpec, count: usize, mode: Mode) -> Result<Generated, EngineError> {
    match mode {
        Mode::Integer => generate(spec, count).map(Generated::Integer),
        Mode::Rational => generate_rational(spec, count).map(Generated::Rational),
    }
}

/// Number of decimal digits of `|term|`; `digit_count(0) == 1`.
pub fn digit_count(term: &Integer) -> usize {
    let digits = term.to_string_radix(10);
    digits.strip_prefix('-').unwrap_or(&digits).len()
}

/// First index `n` in the buffer at which `a_n a_{n-k} != Σ a_{n-i} a_{n-j}`.
pub fn find_recurrence_violation(buffer: &IntegerBuffer, spec: &SequenceSpec) -> Option<usize> {
    let first = buffer.start_index() + spec.order();
    (first..buffer.end_index()).find(|&n| {
        let (sum, divisor) = bilinear_parts(buffer, spec, n).expect("index lies inside the buffer");
        let term = buffer.get(n).expect("index lies inside the buffer");
        Integer::from(term * &divisor) != sum
    })
}

/// First index breaking `a_n >= a_{n-1} >= 1`.
pub fn find_monotonicity_violation(buffer: &IntegerBuffer) -> Option<usize> {
    let mut previous: Option<&Integer> = None;
    for (n, term) in buffer.indexed() {
        if *term < 1 || previous.is_some_and(|p| term < p) {
            return Some(n);
        }
        previous = Some(term);
    }
    None
}

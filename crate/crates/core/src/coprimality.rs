//! gcd toolkit, the coprimality lemmas as per-instance checks, and the
//! coprimality-window verifier for sequence terms.

use rug::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::engine::IntegerBuffer;
use crate::io::json::decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoprimeError {
    #[error("buffer lacks a_{missing}, needed for the window at n = {index}")]
    IndexOutOfRange { index: usize, missing: usize },
    #[error("window depth must be at least 1")]
    ZeroDepth,
}

/// Greatest common divisor, always nonnegative. `gcd(0, b) = |b|`.
pub fn gcd(a: &Integer, b: &Integer) -> Integer {
    Integer::from(a.gcd_ref(b))
}

/// Signature shared by [`gcd`] and substitutes used to test the harnesses.
pub type GcdFn = fn(&Integer, &Integer) -> Integer;

fn coprime(g: GcdFn, a: &Integer, b: &Integer) -> bool {
    g(a, b) == 1
}

/// gcd(a, x) = gcd(a, y) = 1  ⇔  gcd(a, xy) = 1
pub fn check_lemma_product(a: &Integer, x: &Integer, y: &Integer) -> bool {
    check_lemma_product_with(gcd, a, x, y)
}

pub fn check_lemma_product_with(g: GcdFn, a: &Integer, x: &Integer, y: &Integer) -> bool {
    let separately = coprime(g, a, x) && coprime(g, a, y);
    let jointly = coprime(g, a, &Integer::from(x * y));
    separately == jointly
}

/// a, b each coprime to x and to y  ⇔  gcd(ab, xy) = 1
pub fn check_lemma_pairwise(a: &Integer, b: &Integer, x: &Integer, y: &Integer) -> bool {
    check_lemma_pairwise_with(gcd, a, b, x, y)
}

pub fn check_lemma_pairwise_with(
    g: GcdFn,
    a: &Integer,
    b: &Integer,
    x: &Integer,
    y: &Integer,
) -> bool {
    let pairwise = coprime(g, a, x) && coprime(g, a, y) && coprime(g, b, x) && coprime(g, b, y);
    let products = coprime(g, &Integer::from(a * b), &Integer::from(x * y));
    pairwise == products
}

/// gcd(x, y) = 1 ⇔ gcd(x + y, y) = 1, checked in the stronger form
/// gcd(x + y, y) = gcd(x, y).
pub fn check_lemma_shift(x: &Integer, y: &Integer) -> bool {
    check_lemma_shift_with(gcd, x, y)
}

pub fn check_lemma_shift_with(g: GcdFn, x: &Integer, y: &Integer) -> bool {
    let shifted = g(&Integer::from(x + y), y);
    let plain = g(x, y);
    let biconditional = (shifted == 1) == (plain == 1);
    biconditional && shifted == plain
}

/// gcd(a_n, a_{n-i}) for i = 1..=depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoprimeWindowReport {
    pub index: usize,
    pub depth: usize,
    #[serde(serialize_with = "decimal::integers")]
    pub gcds: Vec<Integer>,
    pub pass: bool,
}

impl CoprimeWindowReport {
    /// First offset `i` with gcd(a_n, a_{n-i}) > 1.
    pub fn first_failure(&self) -> Option<(usize, &Integer)> {
        self.gcds
            .iter()
            .enumerate()
            .find(|(_, g)| **g != 1)
            .map(|(i, g)| (i + 1, g))
    }
}

/// Depths 1 through 4 are covered by the coprimality theorem for standard
/// Somos-5; larger depths are accepted so deeper windows can be observed,
/// but nothing is claimed about them.
pub fn verify_coprime_window(
    buffer: &IntegerBuffer,
    n: usize,
    depth: usize,
) -> Result<CoprimeWindowReport, CoprimeError> {
    if depth == 0 {
        return Err(CoprimeError::ZeroDepth);
    }
    let missing = |m: usize| CoprimeError::IndexOutOfRange { index: n, missing: m };
    let term = buffer.get(n).ok_or_else(|| missing(n))?;
    let gcds = (1..=depth)
        .map(|i| {
            let back = n.checked_sub(i).ok_or_else(|| missing(0))?;
            let prev = buffer.get(back).ok_or_else(|| missing(back))?;
            Ok(gcd(term, prev))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pass = gcds.iter().all(|g| *g == 1);
    Ok(CoprimeWindowReport {
        index: n,
        depth,
        gcds,
        pass,
    })
}

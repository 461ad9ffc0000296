//! Exact arithmetic for Somos-type bilinear recurrences, with numeric
//! verification of Somos-5 coprimality and integrality.
//!
//! - [`engine`]: term generation in integer or rational mode
//! - [`coprimality`]: gcd, coprimality lemmas, coprimality windows
//! - [`certificate`]: per-index divisibility certificates for Somos-5
//! - [`scanner`]: integrality and coprimality scans over Somos-k
//! - [`lemmas`]: seeded randomized lemma harnesses
//! - [`report`]: range-level verification reports
//! - [`io`]: OEIS b-files and JSON reports
//! - [`cli`]: the `somos` command

pub mod certificate;
pub mod cli;
pub mod coprimality;
pub mod engine;
pub mod io;
pub mod lemmas;
pub mod report;
pub mod scanner;

pub use certificate::{build_certificate, DivisibilityCertificate};
pub use coprimality::{gcd, verify_coprime_window, CoprimeWindowReport};
pub use engine::{generate, generate_rational, Mode, NonIntegralEvent, SequenceBuffer, SequenceSpec};
pub use rug::{Integer, Rational};

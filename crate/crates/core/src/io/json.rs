//! Stable JSON rendering of reports and certificates.
//!
//! Every document is an object whose first two keys are `schema_version`
//! and `kind`, followed by the report's own fields in declaration order.
//! Arbitrary-precision integers are always decimal strings.

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

/// A report type that can be emitted as a top-level JSON document.
pub trait JsonReport: Serialize {
    const KIND: &'static str;
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: &'static str,
    kind: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit_report_json<T: JsonReport>(report: &T) -> String {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        kind: T::KIND,
        body: report,
    };
    let mut text = serde_json::to_string_pretty(&envelope).expect("reports serialize infallibly");
    text.push('\n');
    text
}

/// `serialize_with` helpers rendering rug numbers as decimal strings.
pub mod decimal {
    use rug::{Integer, Rational};
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn integer<S: Serializer>(value: &Integer, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn integers<S: Serializer>(values: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn optional<S: Serializer>(value: &Option<Integer>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    /// `"p"` for integers, `"p/q"` otherwise.
    pub fn rationals<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    /// Strict decimal integer: optional leading `-`, then ASCII digits.
    pub fn parse(text: &str) -> Option<Integer> {
        let digits = text.strip_prefix('-').unwrap_or(text);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Integer::from_str_radix(text, 10).ok()
    }
}

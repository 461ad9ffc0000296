//! OEIS b-file term lists and the JSON report format.

pub mod bfile;
pub mod json;

pub use bfile::{emit_bfile, parse_bfile, BFile, BFileError};
pub use json::{emit_report_json, JsonReport, SCHEMA_VERSION};

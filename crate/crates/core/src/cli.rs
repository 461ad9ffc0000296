//! `somos` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the
//! witness is printed), 2 for usage, configuration and I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::coprimality::{gcd, GcdFn};
use crate::engine::{self, Generated, IntegerBuffer, Mode, NonIntegralEvent, SequenceSpec};
use crate::io::json::{decimal, JsonReport};
use crate::io::{emit_bfile, emit_report_json, parse_bfile};
use crate::lemmas::{run_lemma_suite_with, LemmaConfig, DEFAULT_BOUND, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::report::{certify, crosscheck, verify_coprimality, VerificationReport, Witness};
use crate::scanner::{scan_coprimality, scan_integrality, somos_k_spec, BreakdownReport, DEFAULT_MAX_TERMS_HIGH_ORDER};

/// A006721, n = 0..499.
pub const SOMOS5_FIXTURE: &str = include_str!("../fixtures/a006721.txt");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "somos", version, about = "Exact Somos-sequence generation and verification")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the first terms of a Somos-k sequence.
    Generate(GenerateArgs),
    /// Check gcd(a_n, a_{n-i}) = 1 for i = 1..depth over a range.
    Verify(VerifyArgs),
    /// Build divisibility certificates for 10 <= n < count.
    Certify(CertifyArgs),
    /// Run the randomized gcd and cancellation lemma harnesses.
    Lemmas(LemmaArgs),
    /// Look for the first non-integral or non-coprime term of Somos-k.
    Scan(ScanArgs),
    /// Compare generated terms against a b-file.
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Bfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Integer,
    Rational,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    /// Recurrence order.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Comma-separated initial values (default: all ones).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub initials: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    #[arg(long, default_value_t = 12)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Integer)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Verify the terms of this b-file instead of generated ones.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Comma-separated initial values (default: all ones).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub initials: Option<Vec<String>>,
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    /// Certify the terms of this b-file instead of generated ones.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Scan every order from --k up to this one.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Terms per sequence (default: 1000 for k <= 5, 100 above).
    #[arg(long)]
    pub count: Option<usize>,
    /// Also scan coprimality windows of this depth.
    #[arg(long)]
    pub depth: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Reference b-file (default: the bundled A006721 fixture).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Terms to generate (default: as many as the reference holds).
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

/// Usage or environment problem; maps to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(err: E) -> Self {
        UsageError(err.to_string())
    }
}

struct Emitted {
    body: String,
    pass: bool,
    diagnostic: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_gcd(args, out, err, gcd)
}

/// [`run`] with a substitute gcd for the lemma harnesses.
pub fn run_with_gcd<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, g: GcdFn) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(config) => config,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (result, output) = match &config.command {
        Command::Generate(a) => (cmd_generate(a), &a.output),
        Command::Verify(a) => (cmd_verify(a), &a.output),
        Command::Certify(a) => (cmd_certify(a), &a.output),
        Command::Lemmas(a) => (cmd_lemmas(a, g), &a.output),
        Command::Scan(a) => (cmd_scan(a), &a.output),
        Command::Crosscheck(a) => (cmd_crosscheck(a), &a.output),
    };
    let emitted = match result {
        Ok(emitted) => emitted,
        Err(UsageError(message)) => {
            let _ = writeln!(err, "error: {message}");
            return EXIT_USAGE;
        }
    };
    let written = match &output.output {
        Some(path) => fs::write(path, &emitted.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => out.write_all(emitted.body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(message) = written {
        let _ = writeln!(err, "error: {message}");
        return EXIT_USAGE;
    }
    if let Some(diagnostic) = emitted.diagnostic {
        let _ = writeln!(err, "{diagnostic}");
    }
    if emitted.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn build_spec(k: usize, initials: &Option<Vec<String>>) -> Result<SequenceSpec, UsageError> {
    let spec = somos_k_spec(k)?;
    match initials {
        None => Ok(spec),
        Some(values) => {
            let parsed = values
                .iter()
                .map(|v| decimal::parse(v.trim()).ok_or_else(|| UsageError(format!("bad initial value {v:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(spec.with_initials(parsed)?)
        }
    }
}

fn read_bfile(path: &PathBuf) -> Result<IntegerBuffer, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_bfile(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    Ok(file.to_buffer())
}

fn describe_witness(witness: &Witness) -> String {
    match witness {
        Witness::NonIntegral(event) => event.to_string(),
        Witness::Recurrence { index } => format!("recurrence identity fails at a_{index}"),
        Witness::NotCoprime(w) => format!("gcd(a_{}, a_{}) = {}", w.index, w.index - w.offset, w.gcd),
        Witness::InvalidCertificate { index, reason } => format!("certificate at n = {index} invalid: {reason}"),
        Witness::Mismatch { index, expected, found } => {
            format!("a_{index} differs: generated {expected}, reference {found}")
        }
        Witness::MissingTerm { index } => format!("a_{index} is missing"),
    }
}

fn report_text(report: &VerificationReport) -> String {
    let mut text = format!(
        "{}: {} on {} for {} <= n < {} ({} checked, max {} digits)\n",
        report.check,
        if report.pass { "PASS" } else { "FAIL" },
        report.sequence,
        report.range_start,
        report.range_end,
        report.checked,
        report.statistics.max_digits,
    );
    if let Some(note) = &report.note {
        text.push_str(&format!("note: {note}\n"));
    }
    if report.outside_theorem_scope {
        text.push_str("note: outside theorem scope (not standard Somos-5 or depth > 4)\n");
    }
    text
}

fn verification_output(report: VerificationReport, format: Format, json: impl FnOnce(&VerificationReport) -> String) -> Emitted {
    let diagnostic = report.first_failure.as_ref().map(|w| format!("witness: {}", describe_witness(w)));
    let body = match format {
        Format::Json => json(&report),
        _ => report_text(&report),
    };
    Emitted {
        body,
        pass: report.pass,
        diagnostic,
    }
}

#[derive(Debug, Serialize)]
struct SequenceListing {
    spec: SequenceSpec,
    mode: Mode,
    count: usize,
    terms: Vec<String>,
    max_digits: usize,
    halted: Option<NonIntegralEvent>,
    outside_theorem_scope: bool,
}

impl JsonReport for SequenceListing {
    const KIND: &'static str = "sequence";
}

fn cmd_generate(args: &GenerateArgs) -> Result<Emitted, UsageError> {
    let spec = build_spec(args.sequence.k, &args.sequence.initials)?;
    let format = args.output.format;
    let mode = match args.mode {
        ModeArg::Integer => Mode::Integer,
        ModeArg::Rational => Mode::Rational,
    };
    let (terms, halted, bfile) = match engine::generate_in(&spec, args.count, mode)? {
        Generated::Integer(run) => {
            let terms: Vec<String> = run.buffer.terms().map(Integer::to_string).collect();
            let bfile = emit_bfile(&run.buffer);
            (terms, run.halted, Some(bfile))
        }
        Generated::Rational(buffer) => {
            let all_integral = buffer.terms().all(|t| *t.denom() == 1);
            let bfile = all_integral.then(|| {
                let ints = buffer.terms().map(|t| t.numer().clone()).collect();
                emit_bfile(&engine::SequenceBuffer::from_terms(buffer.start_index(), ints))
            });
            (buffer.terms().map(|t| t.to_string()).collect(), None, bfile)
        }
    };
    let max_digits = terms.iter().map(|t| t.trim_start_matches('-').split('/').next().unwrap_or("").len()).max().unwrap_or(0);
    let body = match format {
        Format::Text => format!("{}\n", terms.join(",")),
        Format::Bfile => bfile.ok_or_else(|| UsageError("b-file output needs integral terms".into()))?,
        Format::Json => emit_report_json(&SequenceListing {
            outside_theorem_scope: !spec.in_theorem_scope(),
            spec: spec.clone(),
            mode,
            count: args.count,
            terms,
            max_digits,
            halted: halted.clone(),
        }),
    };
    Ok(Emitted {
        body,
        pass: halted.is_none(),
        diagnostic: halted.map(|event| format!("non-integral term: {event}")),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Emitted, UsageError> {
    if args.depth == 0 {
        return Err(UsageError("--depth must be at least 1".into()));
    }
    let spec = build_spec(args.sequence.k, &args.sequence.initials)?;
    let (buffer, halted) = match &args.input {
        Some(path) => (read_bfile(path)?, None),
        None => {
            let run = engine::generate(&spec, args.count.max(spec.order()))?;
            (run.buffer, run.halted)
        }
    };
    let mut report = verify_coprimality(&buffer, &spec, args.count, args.depth);
    if let Some(event) = halted {
        report.pass = false;
        report.first_failure = Some(Witness::NonIntegral(event));
    }
    Ok(verification_output(report, args.output.format, emit_report_json))
}

fn cmd_certify(args: &CertifyArgs) -> Result<Emitted, UsageError> {
    let spec = build_spec(5, &args.initials)?;
    let buffer = match &args.input {
        Some(path) => read_bfile(path)?,
        None => {
            let run = engine::generate(&spec, args.count.max(spec.order()))?;
            if let Some(event) = run.halted {
                return Ok(Emitted {
                    body: String::new(),
                    pass: false,
                    diagnostic: Some(format!("non-integral term: {event}")),
                });
            }
            run.buffer
        }
    };
    let run = certify(&buffer, &spec, args.count);
    let format = args.output.format;
    let json = emit_report_json(&run);
    let mut emitted = verification_output(run.report, format, |_| json);
    if format == Format::Text {
        emitted.body.push_str(&format!("{} valid certificates\n", run.certificates.iter().filter(|c| c.valid).count()));
    }
    Ok(emitted)
}

fn cmd_lemmas(args: &LemmaArgs, g: GcdFn) -> Result<Emitted, UsageError> {
    let report = run_lemma_suite_with(
        LemmaConfig {
            seed: args.seed,
            samples: args.samples,
            bound: args.bound,
        },
        g,
    );
    let body = match args.output.format {
        Format::Json => emit_report_json(&report),
        _ => {
            let mut text = format!("lemma harnesses, seed {}, {} samples each in [1, {}]\n", args.seed, args.samples, args.bound);
            for o in &report.outcomes {
                text.push_str(&format!("{:<13} {:>6} counterexamples  {}\n", o.lemma, o.counterexamples, o.statement));
            }
            text
        }
    };
    let diagnostic = report.outcomes.iter().find(|o| o.counterexamples > 0).map(|o| {
        let args: Vec<_> = o.first_counterexample.iter().map(Integer::to_string).collect();
        format!("counterexample to {} lemma: ({})", o.lemma, args.join(", "))
    });
    Ok(Emitted {
        body,
        pass: report.pass,
        diagnostic,
    })
}

#[derive(Debug, Serialize)]
struct ScanSummary {
    reports: Vec<BreakdownReport>,
}

impl JsonReport for ScanSummary {
    const KIND: &'static str = "scan_summary";
}

fn cmd_scan(args: &ScanArgs) -> Result<Emitted, UsageError> {
    let k_max = args.k_max.unwrap_or(args.k);
    if k_max < args.k {
        return Err(UsageError("--k-max must not be below --k".into()));
    }
    let specs = (args.k..=k_max).map(somos_k_spec).collect::<Result<Vec<_>, _>>()?;
    let count_for = |spec: &SequenceSpec| {
        args.count.unwrap_or(if spec.order() <= 5 { 1000 } else { DEFAULT_MAX_TERMS_HIGH_ORDER })
    };
    if args.depth == Some(0) {
        return Err(UsageError("--depth must be at least 1".into()));
    }
    let reports = specs
        .par_iter()
        .map(|spec| match args.depth {
            Some(depth) => scan_coprimality(spec, count_for(spec), depth),
            None => scan_integrality(spec, count_for(spec)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let body = match args.output.format {
        Format::Json => emit_report_json(&ScanSummary { reports }),
        _ => reports
            .iter()
            .map(|r| {
                let integral = match &r.first_nonintegral {
                    None => "integral".to_string(),
                    Some(e) => format!("first non-integral a_{} = {}/{}", e.index, e.numerator, e.denominator),
                };
                let coprime = match (r.depth, &r.first_noncoprime) {
                    (None, _) => String::new(),
                    (Some(d), None) => format!(", coprime to {d} predecessors"),
                    (Some(_), Some(w)) => format!(", gcd(a_{}, a_{}) = {}", w.index, w.index - w.offset, w.gcd),
                };
                format!("{}: {} terms, {integral}{coprime}\n", r.spec.label(), r.terms_checked)
            })
            .collect(),
    };
    // A scan reports what it finds; it does not fail on a breakdown.
    Ok(Emitted {
        body,
        pass: true,
        diagnostic: None,
    })
}

fn cmd_crosscheck(args: &CrosscheckArgs) -> Result<Emitted, UsageError> {
    let spec = build_spec(args.sequence.k, &args.sequence.initials)?;
    let reference = match &args.input {
        Some(path) => read_bfile(path)?,
        None => parse_bfile(SOMOS5_FIXTURE)?.to_buffer(),
    };
    let count = args.count.unwrap_or(reference.end_index()).max(spec.order());
    let run = engine::generate(&spec, count)?;
    let mut report = crosscheck(&run.buffer, &reference, &spec.label());
    if let Some(event) = run.halted {
        if event.index < reference.end_index() {
            report.pass = false;
            report.first_failure.get_or_insert(Witness::NonIntegral(event));
        }
    }
    Ok(verification_output(report, args.output.format, emit_report_json))
}

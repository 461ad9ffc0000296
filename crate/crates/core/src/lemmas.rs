//! Seeded randomized harnesses for the gcd lemmas and the cancellation
//! lemma. A counterexample is always an implementation bug, so each
//! harness records the first one it meets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;
use serde::Serialize;

use crate::certificate::check_cancellation_with;
use crate::coprimality::{
    check_lemma_pairwise_with, check_lemma_product_with, check_lemma_shift_with, gcd, GcdFn,
};
use crate::io::json::{decimal, JsonReport};

pub const DEFAULT_SEED: u64 = 5;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_BOUND: u64 = 1_000_000;

/// Retries when drawing `b` coprime to `z` for the cancellation lemma.
const COPRIME_DRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaConfig {
    pub seed: u64,
    pub samples: usize,
    /// Inputs are drawn uniformly from `1..=bound`.
    pub bound: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            bound: DEFAULT_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaOutcome {
    pub lemma: &'static str,
    pub statement: &'static str,
    pub samples: usize,
    pub counterexamples: usize,
    #[serde(serialize_with = "decimal::integers")]
    pub first_counterexample: Vec<Integer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaSuiteReport {
    pub config: LemmaConfig,
    pub outcomes: Vec<LemmaOutcome>,
    pub pass: bool,
}

impl JsonReport for LemmaSuiteReport {
    const KIND: &'static str = "lemma_suite_report";
}

impl LemmaSuiteReport {
    pub fn counterexamples(&self) -> usize {
        self.outcomes.iter().map(|o| o.counterexamples).sum()
    }
}

fn harness<const N: usize>(
    lemma: &'static str,
    statement: &'static str,
    samples: usize,
    mut draw: impl FnMut() -> [Integer; N],
    check: impl Fn(&[Integer; N]) -> bool,
) -> LemmaOutcome {
    let mut counterexamples = 0;
    let mut first_counterexample = Vec::new();
    for _ in 0..samples {
        let args = draw();
        if !check(&args) {
            if counterexamples == 0 {
                first_counterexample = args.to_vec();
            }
            counterexamples += 1;
        }
    }
    LemmaOutcome {
        lemma,
        statement,
        samples,
        counterexamples,
        first_counterexample,
    }
}

pub fn run_lemma_suite(config: LemmaConfig) -> LemmaSuiteReport {
    run_lemma_suite_with(config, gcd)
}

/// Runs all four harnesses from one seeded generator, so a given config
/// always produces the same report.
pub fn run_lemma_suite_with(config: LemmaConfig, g: GcdFn) -> LemmaSuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = config.bound.max(1);
    let int = |rng: &mut ChaCha8Rng| Integer::from(rng.gen_range(1..=bound));

    let product = harness(
        "product",
        "gcd(a,x) = gcd(a,y) = 1 <=> gcd(a,xy) = 1",
        config.samples,
        || [int(&mut rng), int(&mut rng), int(&mut rng)],
        |[a, x, y]| check_lemma_product_with(g, a, x, y),
    );
    let pairwise = harness(
        "pairwise",
        "a, b each coprime to x and y <=> gcd(ab, xy) = 1",
        config.samples,
        || [int(&mut rng), int(&mut rng), int(&mut rng), int(&mut rng)],
        |[a, b, x, y]| check_lemma_pairwise_with(g, a, b, x, y),
    );
    let shift = harness(
        "shift",
        "gcd(x+y, y) = gcd(x, y)",
        config.samples,
        || [int(&mut rng), int(&mut rng)],
        |[x, y]| check_lemma_shift_with(g, x, y),
    );
    let cancellation = harness(
        "cancellation",
        "gcd(b,z) = 1 => (z | yb <=> z | y)",
        config.samples,
        || {
            let z = int(&mut rng);
            let mut b = int(&mut rng);
            for _ in 0..COPRIME_DRAWS {
                if g(&b, &z) == 1 {
                    break;
                }
                b = int(&mut rng);
            }
            // Half the draws make y a multiple of z so both sides of the
            // equivalence are exercised.
            let y = if rng.gen_bool(0.5) {
                Integer::from(&z * &int(&mut rng))
            } else {
                int(&mut rng)
            };
            [y, z, b]
        },
        |[y, z, b]| check_cancellation_with(g, y, z, b),
    );

    let outcomes = vec![product, pairwise, shift, cancellation];
    let pass = outcomes.iter().all(|o| o.counterexamples == 0);
    LemmaSuiteReport { config, outcomes, pass }
}

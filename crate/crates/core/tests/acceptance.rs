//! Acceptance suite: the ten criteria at full size, one line per criterion.
//!
//! Tolerances, sample counts and runtime limits are pinned here rather than
//! taken from library defaults.

use std::time::{Duration, Instant};

use schatten_core::verify::{self, CriterionResult, Sizes, SuiteConfig, Tolerances};
use schatten_core::Execution;

const SEED: u64 = 20240601;

fn pinned_config() -> SuiteConfig {
    SuiteConfig {
        seed: SEED,
        exec: Execution::Parallel,
        tolerances: Tolerances {
            lattice_rel: 1e-12,
            partial_abs: 1e-12,
            slope_abs: 1e-9,
            norm_agreement_rel: 1e-6,
            inequality: 1e-9,
            witness_rel: 1e-8,
            svd_rel: 1e-10,
            algebra: 1e-9,
            functor: 1e-9,
        },
        sizes: Sizes {
            lattice_lp: 200,
            dichotomy: 500,
            invariance: 200,
            inequalities: 1000,
            svd: 500,
            algebra_pairs: 100,
            functor_pairs: 50,
        },
    }
}

struct Line {
    result: CriterionResult,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Line {
    fn ok(&self) -> bool {
        self.result.passed && self.limit.is_none_or(|l| self.elapsed < l)
    }

    fn print(&self) {
        let measured = serde_json::to_string(&self.result.measured).unwrap();
        let limit = match self.limit {
            Some(l) => format!(" (limit {:.0?})", l),
            None => String::new(),
        };
        println!(
            "{} criterion {:>2}: {} [{:.2?}{}] {}{}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.result.id,
            self.result.name,
            self.elapsed,
            limit,
            measured,
            self.result
                .error
                .as_ref()
                .map(|e| format!(" error: {e}"))
                .unwrap_or_default(),
        );
    }
}

fn timed(f: impl FnOnce() -> CriterionResult, limit: Option<Duration>) -> Line {
    let start = Instant::now();
    let result = f();
    Line {
        result,
        elapsed: start.elapsed(),
        limit,
    }
}

#[test]
fn acceptance() {
    let cfg = pinned_config();
    let secs = Duration::from_secs;
    let mut lines = vec![
        timed(|| verify::lattice_lp(&cfg), Some(secs(10))),
        timed(|| verify::gabor_divergence(&cfg), Some(secs(1))),
        timed(|| verify::dichotomy(&cfg), Some(secs(60))),
        timed(|| verify::invariance(&cfg), None),
        timed(|| verify::inequalities(&cfg), None),
        timed(|| verify::svd_correctness(&cfg), None),
        timed(|| verify::algebra_map(&cfg), None),
        timed(|| verify::directed_grid(&cfg), None),
        timed(|| verify::functor_laws(&cfg), None),
    ];
    let first: Vec<CriterionResult> = lines.iter().map(|l| l.result.clone()).collect();
    lines.push(timed(|| verify::determinism(&cfg, &first), None));

    for line in &lines {
        line.print();
    }
    let self_test = verify::corrupted_node_self_test();
    println!(
        "{} self-test: corrupted node fails {:?}",
        if self_test.detected { "PASS" } else { "FAIL" },
        self_test.failed_checks
    );
    let failed: Vec<u8> = lines.iter().filter(|l| !l.ok()).map(|l| l.result.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    assert!(self_test.detected);
}

#[test]
fn full_reports_are_byte_identical() {
    let cfg = pinned_config();
    let a = verify::run_suite(&cfg).to_json();
    let b = verify::run_suite(&cfg).to_json();
    assert_eq!(a, b);
}

#[test]
fn ten_seeds_all_pass() {
    let mut failures = Vec::new();
    for k in 0..10u64 {
        let cfg = SuiteConfig {
            seed: SEED.wrapping_add(1 + k),
            ..pinned_config()
        };
        for c in verify::run_criteria(&cfg) {
            if !c.passed {
                failures.push((cfg.seed, c.id, c.error.clone()));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

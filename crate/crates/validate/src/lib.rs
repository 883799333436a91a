//! Acceptance suite for `jdcc-core`.
//!
//! Every criterion compares a library result with a reference that does not
//! reuse the code under test: explicit recursions, exhaustive beam search,
//! dense power sweeps, Monte Carlo sampling, or frozen anchor values. The
//! suite runs twice on different thread counts and the two check tables must
//! match byte for byte.

pub mod criteria;
pub mod oracles;
pub mod report;

use std::time::Instant;

use jdcc_core::rng::StreamFamily;

pub use report::{csv_body, Check, Comparison, CriterionReport, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] jdcc_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Monte Carlo trials per outage estimate in the full suite.
pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Trials per outage estimate.
    pub trials: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 42, trials: DEFAULT_TRIALS }
    }
}

/// Criterion ids with their titles, in run order.
pub const CRITERIA: [(u8, &str); 10] = [
    (1, "fixed-point agreement"),
    (2, "stability sharpness"),
    (3, "asymptotic limits"),
    (4, "control-threshold round trip"),
    (5, "optimal beamforming"),
    (6, "MRT/ZF crossover"),
    (7, "orthogonal-user coincidence"),
    (8, "outage analytic vs Monte Carlo"),
    (9, "numeric anchors"),
    (10, "determinism across thread counts"),
];

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

fn run_one(id: u8, cfg: &SuiteConfig) -> CriterionReport {
    let seed = StreamFamily::new(cfg.seed).fork(id as u64).seed();
    let start = Instant::now();
    let result = match id {
        1 => criteria::fixed_point(seed),
        2 => criteria::stability_sharpness(seed),
        3 => criteria::asymptotic_limits(),
        4 => criteria::threshold_round_trip(),
        5 => criteria::pareto_optimality(seed),
        6 => criteria::crossover(seed),
        7 => criteria::orthogonal_coincidence(seed),
        8 => criteria::outage_oracles(seed, cfg.trials),
        9 => criteria::anchors(),
        _ => Ok(Vec::new()),
    };
    let checks = result.unwrap_or_else(|e| vec![Check::within(id, format!("error: {e}"), f64::NAN, 0.0, 0.0)]);
    CriterionReport { id, title: title(id), checks, elapsed: start.elapsed() }
}

/// Runs criteria 1–9 on the current rayon pool, calling `progress` after
/// each one.
pub fn run_criteria(cfg: &SuiteConfig, mut progress: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter(|c| c.0 != 10)
        .map(|&(id, _)| {
            let r = run_one(id, cfg);
            progress(&r);
            r
        })
        .collect()
}

/// Outcome of the whole suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub criteria: Vec<CriterionReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionReport::passed)
    }

    pub fn csv_body(&self) -> Result<String> {
        csv_body(&self.criteria)
    }
}

/// Thread counts of the two runs compared by the determinism criterion.
pub const THREAD_COUNTS: [usize; 2] = [4, 1];

/// Runs criteria 1–9 on a 4-thread pool and again on a 1-thread pool, then
/// adds criterion 10 comparing the two check tables. The report holds the
/// first run.
pub fn run_suite(cfg: &SuiteConfig, mut progress: impl FnMut(&CriterionReport) + Send) -> Result<SuiteReport> {
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build();
    let first = pool(THREAD_COUNTS[0])?.install(|| run_criteria(cfg, &mut progress));
    let start = Instant::now();
    let second = pool(THREAD_COUNTS[1])?.install(|| run_criteria(cfg, |_| {}));
    let (a, b) = (csv_body(&first)?, csv_body(&second)?);
    let differing = a.lines().zip(b.lines()).filter(|(x, y)| x != y).count() + a.lines().count().abs_diff(b.lines().count());
    let det = CriterionReport {
        id: 10,
        title: title(10),
        checks: vec![
            Check::within(10, "check-table rows differing between 4-thread and 1-thread runs", differing as f64, 0.0, 0.0),
            Check::within(10, "check-table byte length difference", a.len().abs_diff(b.len()) as f64, 0.0, 0.0),
        ],
        elapsed: start.elapsed(),
    };
    progress(&det);
    let mut criteria = first;
    criteria.push(det);
    Ok(SuiteReport { config: *cfg, criteria })
}

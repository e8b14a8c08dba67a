//! Seeded verification suites.
//!
//! Each suite draws independent instances per trial (sub-seeded from the run
//! seed), evaluates one ratio per trial against a fixed constant and a set of
//! secondary checks, and condenses the outcome into a [`VerificationReport`].
//! Trials run in parallel; results are collected in trial order, so reports
//! are identical for identical configurations apart from `wall_time`.

mod grids;
mod maximal;
mod sequences;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domsolve::{DominantSolution, SolverConfig};
use crate::error::{Error, Result};
use crate::opcore::{Exponent, Operator};
use crate::random::{rng_from_seed, sub_seed, InstanceRng};

pub use grids::{
    interpolation_bound, suite_cauchy_schwarz, suite_interpolation, suite_stein, suite_stein_perm, suite_theorem,
    MAX_PERM_LEVELS,
};
pub use maximal::{maximal_dominant, theorem_bound, MaximalResult, MaximalSummary};
pub use sequences::{suite_duality, suite_lemma21};

/// Largest tolerated fraction of skipped trials.
pub const MAX_SKIP_FRACTION: f64 = 0.05;

/// Largest accepted `gap / (1 + primal)` of a converged dominant solve.
pub const MAX_RELATIVE_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Lemma21,
    Duality,
    Stein,
    SteinPerm,
    CauchySchwarz,
    Interpolation,
    Theorem,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma21,
        Suite::Duality,
        Suite::Stein,
        Suite::SteinPerm,
        Suite::CauchySchwarz,
        Suite::Interpolation,
        Suite::Theorem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma21 => "lemma21",
            Suite::Duality => "duality",
            Suite::Stein => "stein",
            Suite::SteinPerm => "stein_perm",
            Suite::CauchySchwarz => "cauchy_schwarz",
            Suite::Interpolation => "interpolation",
            Suite::Theorem => "theorem",
        }
    }

    /// Stable tag mixed into the seed of every trial.
    fn tag(self) -> u64 {
        match self {
            Suite::Lemma21 => 1,
            Suite::Duality => 2,
            // the permutation variant and the interpolation suite reuse the
            // Stein instances
            Suite::Stein | Suite::SteinPerm | Suite::Interpolation => 3,
            Suite::CauchySchwarz => 4,
            Suite::Theorem => 5,
        }
    }

    fn default_dim(self) -> usize {
        match self {
            Suite::Lemma21 | Suite::Duality => 3,
            _ => 2,
        }
    }

    fn default_p_list(self) -> Vec<Exponent> {
        let f = Exponent::Finite;
        match self {
            Suite::Lemma21 => vec![f(1.0), f(1.5), f(2.0), f(3.0), Exponent::Infinity],
            Suite::Duality => vec![f(1.5), f(2.0), f(3.0)],
            Suite::Stein | Suite::SteinPerm => vec![f(2.0)],
            Suite::CauchySchwarz => vec![f(1.0), f(1.5), f(2.0), f(3.0)],
            Suite::Interpolation => vec![f(1.0), f(1.25), f(1.5), f(2.0)],
            Suite::Theorem => vec![f(2.0), f(4.0)],
        }
    }

    /// Exponents the suite's inequality is stated for.
    fn admits(self, p: Exponent) -> bool {
        match (self, p) {
            (Suite::Lemma21, _) => true,
            (Suite::Duality, Exponent::Finite(_)) => true,
            (Suite::Stein | Suite::SteinPerm, Exponent::Finite(v)) => v == 2.0,
            (Suite::CauchySchwarz, _) => true,
            (Suite::Interpolation, Exponent::Finite(v)) => v <= 2.0,
            (Suite::Theorem, Exponent::Finite(v)) => v >= 2.0,
            _ => false,
        }
    }

    fn admitted_range(self) -> &'static str {
        match self {
            Suite::Lemma21 | Suite::CauchySchwarz => "[1, inf]",
            Suite::Duality => "[1, inf)",
            Suite::Stein | Suite::SteinPerm => "{2}",
            Suite::Interpolation => "[1, 2]",
            Suite::Theorem => "[2, inf)",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidArgument(format!("unknown suite '{s}' (expected one of {}, all)", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    /// Matrix dimension; an upper bound for the sequence suites, which draw
    /// `d` uniformly from `1..=dim`. Suite default when absent.
    pub dim: Option<usize>,
    /// Largest sequence length for the sequence suites.
    pub seq_len: usize,
    pub grid_size: usize,
    /// Highest dyadic level `n_max`.
    pub levels: u32,
    /// Suite default when absent.
    pub p_list: Option<Vec<Exponent>>,
    /// Relative slack on every bound.
    pub tolerance: f64,
    /// Random probes per trial in the duality suite.
    pub probes: usize,
    /// Random factorizations per trial in the `lemma21` suite.
    pub perturbations: usize,
    pub solver: SolverConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: "all".into(),
            seed: 0,
            trials: 100,
            dim: None,
            seq_len: 4,
            grid_size: 64,
            levels: 3,
            p_list: None,
            tolerance: 1e-7,
            probes: 500,
            perturbations: 50,
            solver: SolverConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        if self.dim == Some(0) {
            return bad("dim must be >= 1");
        }
        if self.seq_len == 0 {
            return bad("seq_len must be >= 1");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be >= 0");
        }
        if let Some(ps) = &self.p_list {
            if ps.is_empty() {
                return bad("p_list must not be empty");
            }
        }
        self.solver.validate()
    }

    /// Configuration with the suite's defaults filled in and the exponent
    /// list restricted to the suite's range.
    fn resolved(&self, suite: Suite) -> Result<SuiteConfig> {
        self.validate()?;
        let mut cfg = self.clone();
        cfg.suite = suite.name().into();
        cfg.dim = Some(self.dim.unwrap_or_else(|| suite.default_dim()));
        let ps: Vec<Exponent> = match &self.p_list {
            Some(ps) => ps.iter().copied().filter(|&p| suite.admits(p)).collect(),
            None => suite.default_p_list(),
        };
        if ps.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "suite {suite} needs an exponent in {}",
                suite.admitted_range()
            )));
        }
        cfg.p_list = Some(ps);
        Ok(cfg)
    }

    fn dim_value(&self) -> usize {
        self.dim.unwrap_or(2)
    }

    fn ps(&self) -> &[Exponent] {
        self.p_list.as_deref().unwrap_or(&[])
    }
}

/// Aggregate statistics over the dominant solves of a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solves: usize,
    pub converged: usize,
    /// Largest `gap / (1 + primal)` among converged solves.
    pub max_relative_gap: f64,
    /// Solves with `dual > primal + 1e-6`.
    pub weak_duality_violations: usize,
    pub max_iterations: usize,
}

impl SolverStats {
    pub fn record(&mut self, sol: &DominantSolution) {
        self.solves += 1;
        if sol.converged {
            self.converged += 1;
            self.max_relative_gap = self.max_relative_gap.max(sol.relative_gap());
        }
        if sol.dual_value > sol.primal_value + 1e-6 {
            self.weak_duality_violations += 1;
        }
        self.max_iterations = self.max_iterations.max(sol.iterations);
    }

    pub fn merge(&mut self, other: &SolverStats) {
        self.solves += other.solves;
        self.converged += other.converged;
        self.max_relative_gap = self.max_relative_gap.max(other.max_relative_gap);
        self.weak_duality_violations += other.weak_duality_violations;
        self.max_iterations = self.max_iterations.max(other.max_iterations);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `None` for suite-level violations such as the skip rate.
    pub trial: Option<usize>,
    /// `"bound"` for the main ratio, otherwise the name of the secondary check.
    pub check: String,
    pub ratio: Option<f64>,
    pub digest: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub p: Option<Exponent>,
    pub config: SuiteConfig,
    /// Ratios of the evaluated (non-skipped) trials in trial order.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub bound: f64,
    pub violations: Vec<Violation>,
    pub skipped: Vec<usize>,
    pub pass: bool,
    pub wall_time: f64,
    pub solver_stats: SolverStats,
}

/// Secondary pass/fail measurement inside a trial.
#[derive(Clone, Debug)]
pub(crate) struct Check {
    pub name: &'static str,
    pub value: f64,
    pub ok: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &'static str, value: f64, limit: f64) -> Check {
        Check { name, value, ok: value <= limit }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &'static str, value: f64, limit: f64) -> Check {
        Check { name, value, ok: value >= limit }
    }
}

/// Outcome of one trial at one exponent.
#[derive(Clone, Debug, Default)]
pub(crate) struct TrialOutcome {
    /// `None` when the trial is skipped.
    pub ratio: Option<f64>,
    pub checks: Vec<Check>,
    pub digest: String,
    pub stats: SolverStats,
}

impl TrialOutcome {
    pub fn skipped(digest: String, stats: SolverStats) -> Self {
        TrialOutcome { ratio: None, checks: Vec::new(), digest, stats }
    }
}

/// Runs `trial` for every trial index in parallel; each call returns one
/// outcome per exponent of the resolved configuration.
pub(crate) fn run_trials(
    config: &SuiteConfig,
    suite: Suite,
    trial: impl Fn(&mut InstanceRng) -> Result<Vec<TrialOutcome>> + Sync,
) -> Result<Vec<Vec<TrialOutcome>>> {
    let base = sub_seed(config.seed, suite.tag());
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(sub_seed(base, t as u64));
            trial(&mut rng)
        })
        .collect()
}

/// One report per exponent from per-trial outcomes.
pub(crate) fn assemble(
    suite: Suite,
    config: &SuiteConfig,
    bounds: &[f64],
    outcomes: Vec<Vec<TrialOutcome>>,
    started: Instant,
) -> Vec<VerificationReport> {
    let wall_time = started.elapsed().as_secs_f64();
    config
        .ps()
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let bound = bounds[k];
            let limit = bound * (1.0 + config.tolerance);
            let mut ratios = Vec::new();
            let mut violations = Vec::new();
            let mut skipped = Vec::new();
            let mut stats = SolverStats::default();
            for (trial, per_p) in outcomes.iter().enumerate() {
                let out = &per_p[k];
                stats.merge(&out.stats);
                let Some(ratio) = out.ratio else {
                    skipped.push(trial);
                    continue;
                };
                ratios.push(ratio);
                if !(ratio <= limit) {
                    violations.push(Violation {
                        trial: Some(trial),
                        check: "bound".into(),
                        ratio: Some(ratio),
                        digest: Some(out.digest.clone()),
                    });
                }
                for c in out.checks.iter().filter(|c| !c.ok) {
                    violations.push(Violation {
                        trial: Some(trial),
                        check: c.name.into(),
                        ratio: c.value.is_finite().then_some(c.value),
                        digest: Some(out.digest.clone()),
                    });
                }
            }
            let skip_fraction = skipped.len() as f64 / config.trials as f64;
            if skip_fraction > MAX_SKIP_FRACTION {
                violations.push(Violation {
                    trial: None,
                    check: "skip_rate".into(),
                    ratio: Some(skip_fraction),
                    digest: None,
                });
            }
            if stats.max_relative_gap > MAX_RELATIVE_GAP {
                violations.push(Violation {
                    trial: None,
                    check: "duality_gap".into(),
                    ratio: Some(stats.max_relative_gap),
                    digest: None,
                });
            }
            if stats.weak_duality_violations > 0 {
                violations.push(Violation {
                    trial: None,
                    check: "weak_duality".into(),
                    ratio: Some(stats.weak_duality_violations as f64),
                    digest: None,
                });
            }
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            VerificationReport {
                suite: suite.name().into(),
                p: Some(p),
                config: config.clone(),
                ratios,
                max_ratio,
                bound,
                pass: violations.is_empty(),
                violations,
                skipped,
                wall_time,
                solver_stats: stats,
            }
        })
        .collect()
}

/// Short hex digest of the numerical content of an instance.
pub(crate) fn digest_of<'a, O: Operator + 'a>(items: impl IntoIterator<Item = &'a O>) -> String {
    let mut h = Sha256::new();
    for item in items {
        h.update((item.dim() as u64).to_le_bytes());
        for z in item.matrix().iter() {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    match suite {
        Suite::Lemma21 => suite_lemma21(config),
        Suite::Duality => suite_duality(config),
        Suite::Stein => suite_stein(config),
        Suite::SteinPerm => suite_stein_perm(config),
        Suite::CauchySchwarz => suite_cauchy_schwarz(config),
        Suite::Interpolation => suite_interpolation(config),
        Suite::Theorem => suite_theorem(config),
    }
}

/// Every suite with the shared configuration, in a fixed order.
pub fn run_all(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for suite in Suite::ALL {
        reports.extend(run_suite(suite, config)?);
    }
    Ok(reports)
}

/// Runs `config.suite`, which may be `"all"`.
pub fn run_named(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    if config.suite == "all" {
        run_all(config)
    } else {
        run_suite(config.suite.parse()?, config)
    }
}

/// One CSV row per trial: `suite,p,trial,ratio,bound,status`.
pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("suite,p,trial,ratio,bound,status\n");
    for r in reports {
        let p = r.p.map(|p| p.to_string()).unwrap_or_default();
        let mut ratios = r.ratios.iter();
        for trial in 0..r.config.trials {
            let failed = r.violations.iter().any(|v| v.trial == Some(trial));
            let (ratio, status) = if r.skipped.contains(&trial) {
                (String::new(), "skipped")
            } else {
                let ratio = ratios.next().map(|v| v.to_string()).unwrap_or_default();
                (ratio, if failed { "violation" } else { "ok" })
            };
            out.push_str(&format!("{},{p},{trial},{ratio},{},{status}\n", r.suite, r.bound));
        }
    }
    out
}

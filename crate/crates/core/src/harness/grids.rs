//! Suites on grid functions: the Stein-type inequality for the dyadic
//! averages, its interpolated form for `1 <= p <= 2`, the block Cauchy-Schwarz
//! step and the end-to-end maximal theorem.

use std::time::Instant;

use rand::Rng;

use super::maximal::{maximal_dominant, theorem_bound};
use super::{assemble, digest_of, run_trials, Check, Suite, SuiteConfig, TrialOutcome, VerificationReport};
use crate::avgops::{avg_apply, dyadic_level_for_radius, grid_lp_norm, window_average, DyadicLevel, GridFunction};
use crate::error::{Error, Result};
use crate::opcore::{psd_check, CMatrix, Exponent, GeneralOperator, HermitianOperator, Operator};
use crate::random::{gaussian_operator, wishart, InstanceRng};

/// Largest `n_max` for the permutation variant (`(n_max + 1)!` assignments).
pub const MAX_PERM_LEVELS: u32 = 4;

/// Random sparse grid function: each point is drawn by `point` with a random
/// density, one forced nonzero point and a common log-uniform scale.
fn sparse_grid(
    rng: &mut InstanceRng,
    d: usize,
    size: usize,
    point: impl Fn(&mut InstanceRng) -> GeneralOperator,
) -> Result<GridFunction> {
    let density: f64 = rng.random_range(0.05..1.0);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let forced = rng.random_range(0..size);
    let values = (0..size)
        .map(|j| {
            if j == forced || rng.random_bool(density) {
                point(rng).scale(scale)
            } else {
                GeneralOperator::zeros(d)
            }
        })
        .collect();
    GridFunction::new(values)
}

fn positive_grid(rng: &mut InstanceRng, d: usize, size: usize) -> Result<GridFunction> {
    sparse_grid(rng, d, size, |rng| {
        let rank = rng.random_range(1..=d);
        GeneralOperator::from(&wishart(rng, d, rank))
    })
}

fn general_grid(rng: &mut InstanceRng, d: usize, size: usize) -> Result<GridFunction> {
    sparse_grid(rng, d, size, |rng| gaussian_operator(rng, d))
}

fn grid_digest<'a>(grids: impl IntoIterator<Item = &'a GridFunction>) -> String {
    digest_of(grids.into_iter().flat_map(|g| g.values()))
}

fn grid_sum(grids: impl IntoIterator<Item = GridFunction>) -> Result<GridFunction> {
    let mut it = grids.into_iter();
    let first = it.next().ok_or_else(|| Error::InvalidArgument("no grid functions to sum".into()))?;
    it.try_fold(first, |acc, g| acc.add(&g))
}

fn levels(config: &SuiteConfig) -> Result<Vec<DyadicLevel>> {
    (0..=config.levels)
        .map(|n| {
            let level = DyadicLevel::new(n)?;
            level.check_fits(config.grid_size)?;
            Ok(level)
        })
        .collect()
}

/// Pointwise positive `g_0, ..., g_{n_max}`; shared by the Stein,
/// permutation and interpolation suites.
fn stein_instance(rng: &mut InstanceRng, config: &SuiteConfig) -> Result<Vec<GridFunction>> {
    (0..=config.levels).map(|_| positive_grid(rng, config.dim_value(), config.grid_size)).collect()
}

/// `||sum_n T_n g_n||_p / ||sum_n g_n||_p`.
fn stein_ratio(gs: &[GridFunction], averaged: &[GridFunction], p: Exponent) -> Result<f64> {
    let num = grid_lp_norm(&grid_sum(averaged.iter().cloned())?, p);
    let den = grid_lp_norm(&grid_sum(gs.iter().cloned())?, p);
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

fn identity_assignment(gs: &[GridFunction], lv: &[DyadicLevel]) -> Result<Vec<GridFunction>> {
    gs.iter().zip(lv).map(|(g, &l)| avg_apply(g, l)).collect()
}

/// Stein-type bound: `||sum T_n g_n||_2 <= 4 ||sum g_n||_2` for positive `g_n`.
pub fn suite_stein(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::Stein)?;
    let lv = levels(&cfg)?;
    let outcomes = run_trials(&cfg, Suite::Stein, |rng| {
        let gs = stein_instance(rng, &cfg)?;
        let digest = grid_digest(&gs);
        let averaged = identity_assignment(&gs, &lv)?;
        cfg.ps()
            .iter()
            .map(|&p| {
                let ratio = stein_ratio(&gs, &averaged, p)?;
                Ok(TrialOutcome { ratio: Some(ratio), digest: digest.clone(), ..Default::default() })
            })
            .collect()
    })?;
    let bounds = vec![4.0; cfg.ps().len()];
    Ok(assemble(Suite::Stein, &cfg, &bounds, outcomes, started))
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// The Stein-type bound with the supremum over bijections: every assignment of levels
/// to the `g_n`.
pub fn suite_stein_perm(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::SteinPerm)?;
    if cfg.levels > MAX_PERM_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "stein_perm enumerates (levels + 1)! assignments and needs levels <= {MAX_PERM_LEVELS}"
        )));
    }
    let lv = levels(&cfg)?;
    let perms = permutations(lv.len());
    let outcomes = run_trials(&cfg, Suite::SteinPerm, |rng| {
        let gs = stein_instance(rng, &cfg)?;
        let digest = grid_digest(&gs);
        // table[i][m] = T_m g_i
        let table = gs
            .iter()
            .map(|g| lv.iter().map(|&l| avg_apply(g, l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        cfg.ps()
            .iter()
            .map(|&p| {
                let mut ratio = 0.0_f64;
                for perm in &perms {
                    let averaged: Vec<GridFunction> =
                        perm.iter().enumerate().map(|(i, &m)| table[i][m].clone()).collect();
                    ratio = ratio.max(stein_ratio(&gs, &averaged, p)?);
                }
                Ok(TrialOutcome { ratio: Some(ratio), digest: digest.clone(), ..Default::default() })
            })
            .collect()
    })?;
    let bounds = vec![4.0; cfg.ps().len()];
    Ok(assemble(Suite::SteinPerm, &cfg, &bounds, outcomes, started))
}

/// `4^{2 - 2/p}`.
pub fn interpolation_bound(p: f64) -> f64 {
    4f64.powf(2.0 - 2.0 / p)
}

/// Interpolated Stein bound on the same instances for `1 <= p <= 2`; at `p = 1` the ratio
/// is 1 by trace preservation.
pub fn suite_interpolation(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::Interpolation)?;
    let lv = levels(&cfg)?;
    let outcomes = run_trials(&cfg, Suite::Interpolation, |rng| {
        let gs = stein_instance(rng, &cfg)?;
        let digest = grid_digest(&gs);
        let averaged = identity_assignment(&gs, &lv)?;
        cfg.ps()
            .iter()
            .map(|&p| {
                let ratio = stein_ratio(&gs, &averaged, p)?;
                let mut checks = Vec::new();
                if p.value() == 1.0 {
                    checks.push(Check::at_most("trace_preservation", (ratio - 1.0).abs(), 1e-9));
                }
                Ok(TrialOutcome { ratio: Some(ratio), checks, digest: digest.clone(), ..Default::default() })
            })
            .collect()
    })?;
    let bounds: Vec<f64> = cfg.ps().iter().map(|p| interpolation_bound(p.value())).collect();
    Ok(assemble(Suite::Interpolation, &cfg, &bounds, outcomes, started))
}

/// `x^{-1/2}` on the range of a PSD `x`, zero on its kernel.
fn pinv_sqrt(x: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = x.eigen()?;
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(*v));
    let cut = 1e-10 * top;
    Ok(eig.apply(|l| if top > 0.0 && l > cut { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Pointwise `alpha = sum T_n(a_n^* a_n)`, `beta = sum T_n(b_n^* b_n)` and
/// `gamma = sum T_n(a_n^* b_n)`.
pub(crate) struct CauchySchwarzData {
    pub alpha: GridFunction,
    pub beta: GridFunction,
    pub gamma: GridFunction,
}

pub(crate) fn cauchy_schwarz_data(a: &[GridFunction], b: &[GridFunction], lv: &[DyadicLevel]) -> Result<CauchySchwarzData> {
    let product = |x: &GridFunction, y: &GridFunction| -> Result<GridFunction> {
        let values = x.values().iter().zip(y.values()).map(|(u, v)| u.adjoint().mul(v)).collect::<Result<_>>()?;
        GridFunction::new(values)
    };
    let mut parts = (Vec::new(), Vec::new(), Vec::new());
    for ((an, bn), &l) in a.iter().zip(b).zip(lv) {
        parts.0.push(avg_apply(&product(an, an)?, l)?);
        parts.1.push(avg_apply(&product(bn, bn)?, l)?);
        parts.2.push(avg_apply(&product(an, bn)?, l)?);
    }
    Ok(CauchySchwarzData { alpha: grid_sum(parts.0)?, beta: grid_sum(parts.1)?, gamma: grid_sum(parts.2)? })
}

/// Largest `||y(j)||_inf` for `y = alpha^{-1/2} gamma beta^{-1/2}` and the
/// smallest eigenvalue of the blocks `[[alpha, gamma], [gamma^*, beta]]`.
pub(crate) fn contraction_and_block(data: &CauchySchwarzData) -> Result<(f64, f64)> {
    let d = data.alpha.dim();
    let mut worst_y = 0.0_f64;
    let mut worst_block = f64::INFINITY;
    for j in 0..data.alpha.grid_size() {
        let alpha = HermitianOperator::new(data.alpha.value(j).matrix().clone())?;
        let beta = HermitianOperator::new(data.beta.value(j).matrix().clone())?;
        let gamma = data.gamma.value(j);
        let y = pinv_sqrt(&alpha)?.to_general().mul(gamma)?.mul(&pinv_sqrt(&beta)?)?;
        worst_y = worst_y.max(y.operator_norm());

        let mut block = CMatrix::zeros(2 * d, 2 * d);
        block.view_mut((0, 0), (d, d)).copy_from(alpha.matrix());
        block.view_mut((0, d), (d, d)).copy_from(gamma.matrix());
        block.view_mut((d, 0), (d, d)).copy_from(&gamma.matrix().adjoint());
        block.view_mut((d, d), (d, d)).copy_from(beta.matrix());
        worst_block = worst_block.min(psd_check(&HermitianOperator::new(block)?, 0.0)?.min_eig);
    }
    Ok((worst_y, worst_block))
}

/// Block Cauchy-Schwarz inequality in its square-root form:
/// `||gamma||_p <= ||alpha||_p^{1/2} ||beta||_p^{1/2}`, with the contraction
/// `y` and the block positivity behind it.
pub fn suite_cauchy_schwarz(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::CauchySchwarz)?;
    let lv = levels(&cfg)?;
    let outcomes = run_trials(&cfg, Suite::CauchySchwarz, |rng| {
        let (d, size) = (cfg.dim_value(), cfg.grid_size);
        let a = (0..lv.len()).map(|_| general_grid(rng, d, size)).collect::<Result<Vec<_>>>()?;
        let b = (0..lv.len()).map(|_| general_grid(rng, d, size)).collect::<Result<Vec<_>>>()?;
        let digest = grid_digest(a.iter().chain(&b));
        let data = cauchy_schwarz_data(&a, &b, &lv)?;
        let (worst_y, worst_block) = contraction_and_block(&data)?;
        cfg.ps()
            .iter()
            .map(|&p| {
                let num = grid_lp_norm(&data.gamma, p);
                let den = (grid_lp_norm(&data.alpha, p) * grid_lp_norm(&data.beta, p)).sqrt();
                let ratio = if den > 0.0 { num / den } else { 0.0 };
                let checks = vec![
                    Check::at_most("contraction", worst_y, 1.0 + 1e-7),
                    Check::at_least("block_psd", worst_block, -1e-8),
                    Check::at_least("norm_slack", den - num, -1e-7),
                ];
                Ok(TrialOutcome { ratio: Some(ratio), checks, digest: digest.clone(), ..Default::default() })
            })
            .collect()
    })?;
    let bounds = vec![1.0; cfg.ps().len()];
    Ok(assemble(Suite::CauchySchwarz, &cfg, &bounds, outcomes, started))
}

fn min_gap(upper: &GridFunction, lower: &GridFunction) -> Result<f64> {
    upper
        .hermitian_values()?
        .iter()
        .zip(lower.hermitian_values()?)
        .try_fold(f64::INFINITY, |m, (u, l)| Ok(m.min(u.sub(&l)?.min_eigenvalue()?)))
}

fn theorem_at(f: &GridFunction, p: Exponent, config: &SuiteConfig, digest: &str) -> Result<TrialOutcome> {
    let res = maximal_dominant(f, p, config.levels, &config.solver)?;
    if !res.summary.all_converged {
        return Ok(TrialOutcome::skipped(digest.into(), res.stats));
    }
    let mut checks = vec![Check::at_least("feasibility", res.summary.feasibility_min_eig, -1e-6)];

    // radii 1 <= r < 2^{n_max}, each against its level n with 2^{n-1} <= r < 2^n
    let scale = 1.0 + res.abs.values().iter().map(|v| v.frobenius_norm()).fold(0.0, f64::max);
    let mut exact = f64::INFINITY;
    let mut through_f = f64::INFINITY;
    for r in 1..(1usize << config.levels) {
        let level = dyadic_level_for_radius(r)?;
        let window = window_average(&res.abs, r)?;
        let twice = res.averages[level.n() as usize].scale(2.0);
        exact = exact.min(min_gap(&twice, &window)?);
        through_f = through_f.min(min_gap(&res.dominant.scale(2.0), &window)?);
    }
    checks.push(Check::at_least("window_domination", exact, -1e-12 * scale));
    checks.push(Check::at_least("window_domination_f", through_f, -2e-6));

    if f.dim() == 1 {
        let max: Vec<f64> = (0..f.grid_size())
            .map(|j| res.averages.iter().map(|a| a.value(j).matrix()[(0, 0)].re).fold(0.0, f64::max))
            .collect();
        let oracle = grid_lp_norm(&GridFunction::from_scalars(&max)?, p);
        let err = (res.summary.dominant_norm - oracle).abs();
        checks.push(Check::at_most("scalar_oracle", err, 1e-6 * oracle));
    }
    Ok(TrialOutcome { ratio: Some(res.summary.ratio), checks, digest: digest.into(), stats: res.stats })
}

/// The maximal inequality end to end: feasibility of `F`, window domination and
/// `||F||_p <= 4^{1 + 2/p} ||f||_p`.
pub fn suite_theorem(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::Theorem)?;
    levels(&cfg)?;
    let outcomes = run_trials(&cfg, Suite::Theorem, |rng| {
        let f = general_grid(rng, cfg.dim_value(), cfg.grid_size)?;
        let digest = grid_digest([&f]);
        cfg.ps().iter().map(|&p| theorem_at(&f, p, &cfg, &digest)).collect()
    })?;
    let bounds: Vec<f64> = cfg.ps().iter().map(|p| theorem_bound(p.value())).collect();
    Ok(assemble(Suite::Theorem, &cfg, &bounds, outcomes, started))
}

//! Suites on finite operator sequences: the factorization sandwich of the
//! positive `l_inf` norm and the attained duality with `l_1`.

use std::time::Instant;

use rand::Rng;

use super::{assemble, digest_of, run_trials, Check, SolverStats, Suite, SuiteConfig, TrialOutcome, VerificationReport};
use crate::domsolve::solve_dominant;
use crate::error::Result;
use crate::opcore::{schatten_norm, Exponent, GeneralOperator, HermitianOperator, Operator};
use crate::random::{near_identity, random_mixed_positive_sequence, wishart, InstanceRng};
use crate::vvnorms::{
    dominant_from_factorization, dual_witness_linf, factorization_value, factorize_from_dominant,
    l1_factorization_value, l1_pos_norm, l1_square_root_split, pairing, Factorization, L1Factorization,
    OperatorSequence,
};

fn draw_sequence(rng: &mut InstanceRng, config: &SuiteConfig) -> OperatorSequence {
    let d = rng.random_range(1..=config.dim_value());
    let n = rng.random_range(1..=config.seq_len);
    random_mixed_positive_sequence(rng, d, n)
}

fn inverse(g: &GeneralOperator) -> Result<GeneralOperator> {
    let inv = g.matrix().clone().try_inverse().ok_or_else(|| {
        crate::error::Error::InvalidArgument("perturbation is singular".into())
    })?;
    GeneralOperator::new(inv)
}

/// `x_n = (a g)(g^{-1} z_n h^{-1})(h b)`: the same sequence, other factors.
fn perturbed(fac: &Factorization, rng: &mut InstanceRng) -> Result<Factorization> {
    let d = fac.left.dim();
    let g = near_identity(rng, d, 0.5);
    let h = near_identity(rng, d, 0.5);
    let (gi, hi) = (inverse(&g)?, inverse(&h)?);
    Ok(Factorization {
        left: fac.left.mul(&g)?,
        middles: fac.middles.iter().map(|z| gi.mul(z)?.mul(&hi)).collect::<Result<_>>()?,
        right: h.mul(&fac.right)?,
    })
}

/// Rescales to contractive middles with `||a||_{2p} = ||b||_{2p}`, so that
/// `||2 (a a^* + b^* b)||_p <= 4 * factorization_value`.
fn balanced(fac: &Factorization, p: Exponent) -> Option<Factorization> {
    let s = fac.middle_norm();
    let (alpha, beta) = (schatten_norm(&fac.left, p.doubled()), schatten_norm(&fac.right, p.doubled()));
    if !(s > 0.0 && alpha > 0.0 && beta > 0.0) {
        return None;
    }
    let ca = (s * beta / alpha).sqrt();
    let cb = (s * alpha / beta).sqrt();
    Some(Factorization {
        left: fac.left.scale(ca),
        middles: fac.middles.iter().map(|z| z.scale(1.0 / s)).collect(),
        right: fac.right.scale(cb),
    })
}

fn lemma21_at(seq: &OperatorSequence, p: Exponent, config: &SuiteConfig, rng: &mut InstanceRng, digest: &str) -> Result<TrialOutcome> {
    let mut stats = SolverStats::default();
    let sol = solve_dominant(seq, p, &config.solver)?;
    stats.record(&sol);
    if !sol.converged {
        return Ok(TrialOutcome::skipped(digest.into(), stats));
    }
    let v_plus = sol.primal_value;
    let scale = 1.0 + seq.items().iter().map(|x| x.frobenius_norm()).fold(0.0, f64::max);
    let mut checks = Vec::new();

    let fac0 = factorize_from_dominant(seq, &sol.dominant)?;
    checks.push(Check::at_most("reconstruction", fac0.reconstruction_error(seq), 1e-8 * scale));
    let v0 = factorization_value(&fac0, p);
    // equality up to the solver's certified accuracy
    checks.push(Check::at_most("dominant_factorization", (v0 - v_plus).abs(), 1e-6 * v_plus));

    let mut best = (v0, fac0.clone());
    for _ in 0..config.perturbations {
        let fac = perturbed(&fac0, rng)?;
        let v = factorization_value(&fac, p);
        if v < best.0 {
            best = (v, fac);
        }
    }
    let ratio = if best.0 > 0.0 { v_plus / best.0 } else { 1.0 };
    checks.push(Check::at_least("ratio_lower", ratio, 1.0 - 1e-6));

    if let Some(bal) = balanced(&best.1, p) {
        let dom = dominant_from_factorization(&bal)?;
        let dom_norm = schatten_norm(&dom, p);
        let tol = 1e-9 * (1.0 + dom.frobenius_norm());
        let worst = seq
            .items()
            .iter()
            .map(|x| dom.sub(x).and_then(|d| d.min_eigenvalue()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least("factorization_dominance", worst, -tol));
        // the solver optimum is below every feasible dominant
        checks.push(Check::at_least("dominant_optimality", dom_norm * (1.0 + 1e-6) - v_plus, 0.0));
        checks.push(Check::at_most("dominant_bound", dom_norm, 4.0 * best.0 * (1.0 + 1e-9)));
    }

    let l1 = l1_pos_norm(seq, p)?;
    let split = l1_factorization_value(&l1_square_root_split(seq)?, p)?;
    checks.push(Check::at_most("l1_equality", (split - l1).abs(), 1e-9 * l1));
    let roots = l1_square_root_split(seq)?;
    let mut worst_l1 = f64::INFINITY;
    for _ in 0..10 {
        let d = seq.dim();
        let mut lefts = Vec::new();
        let mut rights = Vec::new();
        for (a, b) in roots.lefts.iter().zip(&roots.rights) {
            let g = near_identity(rng, d, 0.5).scale(rng.random_range(0.5..2.0));
            lefts.push(a.mul(&g)?);
            rights.push(inverse(&g)?.mul(b)?);
        }
        worst_l1 = worst_l1.min(l1_factorization_value(&L1Factorization { lefts, rights }, p)?);
    }
    checks.push(Check::at_least("l1_random_factorization", worst_l1 - l1, -1e-8 * (1.0 + l1)));

    Ok(TrialOutcome { ratio: Some(ratio), checks, digest: digest.into(), stats })
}

/// Factorization sandwich: the positive `l_inf` norm against the best factorization found
/// (the dominant-induced one and random re-factorizations); bound 4.
pub fn suite_lemma21(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::Lemma21)?;
    let outcomes = run_trials(&cfg, Suite::Lemma21, |rng| {
        let seq = draw_sequence(rng, &cfg);
        let digest = digest_of(seq.items());
        cfg.ps().iter().map(|&p| lemma21_at(&seq, p, &cfg, rng, &digest)).collect()
    })?;
    let bounds = vec![4.0; cfg.ps().len()];
    Ok(assemble(Suite::Lemma21, &cfg, &bounds, outcomes, started))
}

fn duality_at(y: &OperatorSequence, p: Exponent, config: &SuiteConfig, rng: &mut InstanceRng, digest: &str) -> Result<TrialOutcome> {
    let q = p.conjugate();
    let (d, n) = (y.dim(), y.len());
    let l1 = l1_pos_norm(y, p)?;
    let mut stats = SolverStats::default();

    // witness with unit l_inf norm at the conjugate exponent; for a constant
    // sequence that norm is the Schatten norm of the item
    let witness = match p {
        Exponent::Finite(v) if v == 1.0 => OperatorSequence::constant(HermitianOperator::identity(d), n, true)?,
        _ => dual_witness_linf(y, p)?,
    };
    let witness_norm = schatten_norm(&witness.items()[0], q);
    let witness_ratio = pairing(&witness, y)? / witness_norm / l1;
    let mut checks = vec![Check::at_most("witness_attainment", (witness_ratio - 1.0).abs(), 1e-7)];

    let mut ratio = witness_ratio;
    let mut worst_gap = 0.0_f64;
    for _ in 0..config.probes {
        let items = (0..n)
            .map(|_| {
                let rank = rng.random_range(1..=d);
                wishart(rng, d, rank).scale(10f64.powf(rng.random_range(-1.0..1.0)))
            })
            .collect();
        let x = OperatorSequence::positive(items)?;
        let sol = solve_dominant(&x, q, &config.solver)?;
        stats.record(&sol);
        worst_gap = worst_gap.max(sol.relative_gap());
        // any feasible dominant bounds the norm from above, so dividing by
        // the primal value keeps the probe inside the unit ball
        if sol.primal_value > 0.0 {
            ratio = ratio.max(pairing(&x, y)? / sol.primal_value / l1);
        }
    }
    checks.push(Check::at_most("probe_weak_duality", stats.weak_duality_violations as f64, 0.0));
    Ok(TrialOutcome { ratio: Some(ratio), checks, digest: digest.into(), stats })
}

/// Duality: the normalised witness attains `||sum y_n||_p`, and random
/// normalised probes never exceed it; bound 1.
pub fn suite_duality(config: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let cfg = config.resolved(Suite::Duality)?;
    let outcomes = run_trials(&cfg, Suite::Duality, |rng| {
        let y = draw_sequence(rng, &cfg);
        let digest = digest_of(y.items());
        cfg.ps().iter().map(|&p| duality_at(&y, p, &cfg, rng, &digest)).collect()
    })?;
    let bounds = vec![1.0; cfg.ps().len()];
    Ok(assemble(Suite::Duality, &cfg, &bounds, outcomes, started))
}

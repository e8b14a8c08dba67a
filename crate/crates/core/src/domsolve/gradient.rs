//! Projected gradient on `F(a) = tr(a^p)` with the feasible-set projection
//! computed by an inner Dykstra loop.

use super::dykstra::{dykstra_project, infeasibility};
use super::{RawSolution, SolverConfig, StepRule};
use crate::error::Result;
use crate::opcore::{HermitianOperator, Operator};
use crate::vvnorms::OperatorSequence;

const INNER_CYCLES: usize = 2_000;

fn objective(a: &HermitianOperator, p: f64) -> Result<f64> {
    Ok(a.eigenvalues()?.into_iter().map(|l| l.max(0.0).powf(p)).sum())
}

/// `p a^{p-1}`, with eigenvalues floored at `floor` first.
fn gradient(a: &HermitianOperator, p: f64, floor: f64) -> Result<HermitianOperator> {
    if p == 1.0 {
        return Ok(HermitianOperator::identity(a.dim()));
    }
    Ok(a.eigen()?.apply(|l| p * l.max(floor).powf(p - 1.0)))
}

fn inner(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    crate::opcore::real_trace_pair(a, b).unwrap_or(f64::NAN)
}

pub(crate) fn solve(seq: &OperatorSequence, p: f64, config: &SolverConfig) -> Result<RawSolution> {
    let floor = if p < 2.0 { config.epsilon_reg } else { 0.0 };
    let inner_tol = (config.tol * 1e-3).max(1e-14);
    let mut a = seq.sum();
    let mut fa = objective(&a, p)?;
    // 1 / (Lipschitz bound of the gradient on the start's spectral range)
    let top = a.max_eigenvalue()?.max(1.0);
    let mut step = if p >= 2.0 { 1.0 / (p * (p - 1.0) * top.powf(p - 2.0)) } else { 0.5 };
    let mut corrections = vec![HermitianOperator::zeros(seq.dim()); seq.len()];
    let mut iterations = 0;
    let mut stopped = false;

    while iterations < config.max_iter {
        iterations += 1;
        let g = gradient(&a, p, floor)?;
        let (next, next_corr, f_next) = loop {
            let trial = a.sub(&g.scale(step))?;
            let proj = dykstra_project(&trial, seq, inner_tol, INNER_CYCLES)?;
            let f_next = objective(&proj.point, p)?;
            if config.step_rule == StepRule::Fixed {
                break (proj.point, proj.corrections, f_next);
            }
            let delta = proj.point.sub(&a)?;
            let model = fa + inner(&g, &delta) + delta.frobenius_norm().powi(2) / (2.0 * step);
            if f_next <= model + 1e-15 * fa.abs().max(1.0) || step < 1e-14 {
                break (proj.point, proj.corrections, f_next);
            }
            step *= 0.5;
        };
        let moved = next.sub(&a)?.frobenius_norm();
        a = next;
        fa = f_next;
        corrections = next_corr;
        if moved <= config.tol * 1e-2 * (1.0 + a.frobenius_norm()) && infeasibility(&a, seq)? <= config.tol {
            stopped = true;
            break;
        }
        if config.step_rule == StepRule::Backtracking {
            step *= 1.5;
        }
    }
    // w - a_+ = sum p_n with p_n <= 0, so -p_n are the multipliers up to scale
    let multipliers = corrections.into_iter().map(|c| c.scale(-1.0)).collect();
    Ok(RawSolution { dominant: a, multipliers, iterations, stopped })
}

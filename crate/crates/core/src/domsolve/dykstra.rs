//! Dykstra's cyclic corrected projections onto `{a : a >= x_n for all n}`.

use super::{project_cone, RawSolution, SolverConfig};
use crate::error::Result;
use crate::opcore::HermitianOperator;
use crate::vvnorms::OperatorSequence;

/// Result of projecting a point onto the feasible intersection.
#[derive(Clone, Debug)]
pub struct DykstraProjection {
    pub point: HermitianOperator,
    /// Correction terms `p_n`, each negative semidefinite; `start - point = sum p_n`.
    pub corrections: Vec<HermitianOperator>,
    pub cycles: usize,
    pub converged: bool,
}

/// Largest violation `max_n max(0, -lambda_min(a - x_n))`.
pub(crate) fn infeasibility(a: &HermitianOperator, seq: &OperatorSequence) -> Result<f64> {
    super::feasibility_shift(a, seq)
}

/// Projects `start` onto the intersection of the shifted cones, visiting the
/// constraints in index order. Stops when one cycle moves both the iterate and
/// the corrections by less than `tol` (Frobenius) and the iterate is feasible
/// to `tol`; a stationary iterate alone is not a fixed point.
pub fn dykstra_project(
    start: &HermitianOperator,
    seq: &OperatorSequence,
    tol: f64,
    max_cycles: usize,
) -> Result<DykstraProjection> {
    let d = seq.dim();
    let mut x = start.clone();
    let mut corrections = vec![HermitianOperator::zeros(d); seq.len()];
    let mut cycles = 0;
    let mut converged = false;
    while cycles < max_cycles {
        cycles += 1;
        let before = x.clone();
        let mut moved_corr: f64 = 0.0;
        for (c, con) in corrections.iter_mut().zip(seq.items()) {
            let y = x.add(c)?;
            x = project_cone(&y, con)?;
            let next = y.sub(&x)?;
            moved_corr = moved_corr.max(next.sub(c)?.frobenius_norm());
            *c = next;
        }
        let moved = x.sub(&before)?.frobenius_norm().max(moved_corr);
        if moved < tol && infeasibility(&x, seq)? <= tol {
            converged = true;
            break;
        }
    }
    Ok(DykstraProjection { point: x, corrections, cycles, converged })
}

/// Minimum Frobenius-norm dominant: the projection of `0` onto the feasible
/// set. The Dykstra corrections are (minus) the KKT multipliers.
pub(crate) fn solve_p2(seq: &OperatorSequence, config: &SolverConfig) -> Result<RawSolution> {
    let d = seq.dim();
    let zero = HermitianOperator::zeros(d);
    let start_value = seq.sum().frobenius_norm();
    let inner_tol = config.tol * 1e-2;
    let mut total = 0usize;
    let mut proj = dykstra_project(&zero, seq, inner_tol, config.max_iter)?;
    total += proj.cycles;
    // the initial dominant sum x_n is feasible; keep it if Dykstra did worse
    let dominant = if super::repair_feasibility(&proj.point, seq)?.frobenius_norm() <= start_value {
        proj.point.clone()
    } else {
        seq.sum()
    };
    let stopped = proj.converged;
    let multipliers = proj.corrections.drain(..).map(|c| c.scale(-1.0)).collect();
    Ok(RawSolution { dominant, multipliers, iterations: total, stopped })
}
